"""Scripted stand-in for a UCI engine.

Usage: python mock_engine.py script.json

Script keys (all optional):
  scores          {position_key: "cp 34" | "mate -2" | "raw:<info line>" | "terminal"}
  default         reply used for unknown positions, default "cp 0"
  reject_options  option names answered with "No such option"
  banner          extra lines printed before uciok
  silent          never answer "uci" (handshake timeout)
  log             file that receives one line per search: the position key
  depth           depth reported in info lines, default 20
"""

import json
import sys


def main() -> None:
    script = json.load(open(sys.argv[1])) if len(sys.argv) > 1 else {}
    scores = script.get("scores", {})
    depth = script.get("depth", 20)
    key = None
    pending = []

    def out(line):
        sys.stdout.write(line + "\n")
        sys.stdout.flush()

    for raw in sys.stdin:
        cmd = raw.strip()
        if cmd == "uci":
            if script.get("silent"):
                continue
            for line in script.get("banner", ["id name MockFish", "id author nobody"]):
                out(line)
            out("uciok")
        elif cmd.startswith("setoption"):
            name = cmd.split(" name ", 1)[1].split(" value ")[0]
            if name in script.get("reject_options", []):
                pending.append(f"No such option: {name}")
        elif cmd == "isready":
            for line in pending:
                out(line)
            pending.clear()
            out("readyok")
        elif cmd.startswith("position fen "):
            key = " ".join(cmd[len("position fen "):].split()[:4])
        elif cmd.startswith("go"):
            if script.get("log"):
                with open(script["log"], "a") as fh:
                    fh.write(key + "\n")
            reply = scores.get(key, script.get("default", "cp 0"))
            if reply == "terminal":
                out("info depth 0 score mate 0")
                out("bestmove (none)")
            elif reply.startswith("raw:"):
                out(reply[4:])
                out("bestmove e2e4")
            else:
                out(f"info depth {depth - 1} seldepth {depth} score cp 1 nodes 10 pv e2e4")
                out(f"info depth {depth} seldepth {depth} score {reply} nodes 100 pv e2e4")
                out("bestmove e2e4 ponder e7e5")
        elif cmd == "quit":
            return


if __name__ == "__main__":
    main()
