"""UCI engine sessions, a session pool and game annotation.

Every session owns one child process and carries at most one request at a
time. The pool hands idle sessions to worker threads and caches verdicts by
position (move counters excluded), so transpositions cost one search.
"""

from __future__ import annotations

import logging
import os
import queue
import re
import shlex
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .board import Board, Move
from .pgn import GameRecord, chain_evals
from .wdl import CentipawnEval

log = logging.getLogger(__name__)

ENGINE_ENV = "GAMEINTEL_ENGINE"


class EngineError(RuntimeError):
    pass


class SpawnError(EngineError):
    pass


class HandshakeError(EngineError):
    def __init__(self, message: str, banner: Sequence[str] = ()):
        detail = "; ".join(banner[-5:])
        super().__init__(f"{message}" + (f" (engine said: {detail})" if detail else ""))
        self.banner = list(banner)


class ProtocolError(EngineError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(f"{message}: {raw!r}" if raw else message)
        self.raw = raw


class EngineTimeout(EngineError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    command: tuple[str, ...]
    depth: int = 20
    options: tuple[tuple[str, str], ...] = ()
    time_limit: Optional[float] = None  # seconds per position
    pool_size: int = 1
    handshake_timeout: float = 10.0

    def __post_init__(self) -> None:
        if isinstance(self.command, str):
            object.__setattr__(self, "command", tuple(shlex.split(self.command)))
        if not self.command:
            raise ValueError("engine command is empty")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if self.pool_size < 1:
            raise ValueError("pool size must be at least 1")

    @classmethod
    def from_env(cls, **kw) -> "EngineConfig":
        cmd = os.environ.get(ENGINE_ENV)
        if not cmd:
            raise SpawnError(f"no engine given and {ENGINE_ENV} is not set")
        return cls(command=cmd, **kw)


@dataclass(frozen=True)
class EngineVerdict:
    position: str
    score: Optional[CentipawnEval]  # white perspective; None when terminal
    best_move: Optional[str]
    depth: int
    terminal: bool = False
    timed_out: bool = False


_SCORE_RE = re.compile(r"\bscore\s+(cp|mate)\s+(-?\d+)(?:\s+(lowerbound|upperbound))?")
_DEPTH_RE = re.compile(r"\bdepth\s+(\d+)")


class UciEngine:
    """One engine process speaking UCI over its standard streams."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.banner: list[str] = []
        self._lines: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                list(config.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SpawnError(f"cannot start engine {config.command[0]!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        try:
            self._handshake()
        except Exception:
            self.close()
            raise

    def _pump(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\r\n"))
        self._lines.put(None)

    def _send(self, text: str) -> None:
        try:
            self._proc.stdin.write(text + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EngineError(f"engine closed its input while sending {text!r}") from exc

    def _read(self, deadline: float) -> str:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise EngineTimeout("engine did not answer in time")
        try:
            line = self._lines.get(timeout=remaining)
        except queue.Empty:
            raise EngineTimeout("engine did not answer in time") from None
        if line is None:
            raise EngineError("engine exited")
        return line

    def _wait_for(self, token: str, timeout: float, keep: Optional[list] = None) -> None:
        deadline = time.monotonic() + timeout
        while True:
            line = self._read(deadline)
            if keep is not None:
                keep.append(line)
            if line.strip() == token:
                return

    def _handshake(self) -> None:
        t = self.config.handshake_timeout
        self._send("uci")
        try:
            self._wait_for("uciok", t, self.banner)
            for name, value in self.config.options:
                self._send(f"setoption name {name} value {value}")
            self._send("isready")
            replies: list[str] = []
            self._wait_for("readyok", t, replies)
        except (EngineTimeout, EngineError) as exc:
            raise HandshakeError(f"handshake failed: {exc}", self.banner) from exc
        for line in replies:
            if "no such option" in line.lower() or "unknown option" in line.lower():
                log.warning("engine rejected option: %s", line)

    def evaluate(self, board: Board) -> EngineVerdict:
        """Search ``board`` to the configured depth; the score is stored from White's side."""
        with self._lock:
            return self._evaluate(board)

    def _evaluate(self, board: Board) -> EngineVerdict:
        cfg = self.config
        key = board.position_key()
        self._send(f"position fen {board.fen()}")
        self._send(f"go depth {cfg.depth}")
        # a generous ceiling for the reply even without a time limit
        wait = cfg.time_limit if cfg.time_limit is not None else 3600.0
        deadline = time.monotonic() + wait + cfg.handshake_timeout
        stop_at = time.monotonic() + cfg.time_limit if cfg.time_limit is not None else None
        stopped = False
        bad_line: Optional[str] = None
        score: Optional[tuple[str, int]] = None
        depth = 0
        while True:
            if stop_at is not None and not stopped and time.monotonic() >= stop_at:
                self._send("stop")
                stopped = True
            read_until = min(deadline, stop_at) if stop_at is not None and not stopped else deadline
            try:
                line = self._read(read_until)
            except EngineTimeout:
                if stop_at is not None and not stopped:
                    continue
                raise
            if line.startswith("info"):
                if " string " in line or line.startswith("info string"):
                    continue
                m = _SCORE_RE.search(line)
                if " score " in line and m is None:
                    # keep reading so the reply is drained before reporting
                    bad_line = bad_line or line
                elif m and m.group(3) is None:
                    score = (m.group(1), int(m.group(2)))
                    d = _DEPTH_RE.search(line)
                    if d:
                        depth = int(d.group(1))
            elif line.startswith("bestmove"):
                parts = line.split()
                if len(parts) < 2:
                    raise ProtocolError("bestmove without a move", line)
                if bad_line is not None:
                    raise ProtocolError("unparsable score", bad_line)
                move = parts[1]
                terminal = move in ("(none)", "0000") or score == ("mate", 0)
                if terminal:
                    return EngineVerdict(key, None, None, depth, terminal=True, timed_out=stopped)
                if score is None:
                    raise ProtocolError("bestmove before any score", line)
                kind, value = score
                ev = CentipawnEval(kind, value, "side_to_move").to_white(board.white_to_move)
                return EngineVerdict(key, ev, move, depth, timed_out=stopped or depth < cfg.depth)

    def close(self) -> None:
        proc = getattr(self, "_proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            self._send("quit")
            proc.wait(timeout=2)
        except (EngineError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def __enter__(self) -> "UciEngine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def engine_session_start(config: EngineConfig) -> UciEngine:
    return UciEngine(config)


def evaluate_position(session: UciEngine, board: Board) -> EngineVerdict:
    return session.evaluate(board)


@dataclass
class AnnotationReport:
    filled: int = 0
    failures: list = field(default_factory=list)  # (ply, message)


class EnginePool:
    """A fixed set of sessions shared by worker threads, with a position cache."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self._idle: queue.Queue = queue.Queue()
        self._sessions: list[UciEngine] = []
        self._cache: dict[str, EngineVerdict] = {}
        self._pending: dict[str, threading.Event] = {}
        self._cache_lock = threading.Lock()
        self.calls = 0
        try:
            for _ in range(config.pool_size):
                s = UciEngine(config)
                self._sessions.append(s)
                self._idle.put(s)
        except Exception:
            self.close()
            raise
        self._executor = ThreadPoolExecutor(max_workers=config.pool_size)

    def evaluate(self, board: Board) -> EngineVerdict:
        key = board.position_key()
        while True:
            with self._cache_lock:
                if key in self._cache:
                    return self._cache[key]
                waiter = self._pending.get(key)
                if waiter is None:
                    self._pending[key] = threading.Event()
                    break
            waiter.wait()
        try:
            session = self._idle.get()
            try:
                verdict = session.evaluate(board)
            finally:
                self._idle.put(session)
            with self._cache_lock:
                self.calls += 1
                self._cache[key] = verdict
            return verdict
        finally:
            with self._cache_lock:
                self._pending.pop(key).set()

    def evaluate_many(self, boards: Sequence[Board]) -> list:
        """Verdicts (or the exception raised) in input order."""
        futures = [self._executor.submit(self.evaluate, b) for b in boards]
        out = []
        for f in futures:
            try:
                out.append(f.result())
            except EngineError as exc:
                out.append(exc)
        return out

    def annotate_game(self, record: GameRecord) -> tuple[GameRecord, AnnotationReport]:
        return annotate_game(record, self)

    def close(self) -> None:
        ex = getattr(self, "_executor", None)
        if ex is not None:
            ex.shutdown(wait=True)
        for s in self._sessions:
            s.close()

    def __enter__(self) -> "EnginePool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def annotate_game(record: GameRecord, pool: EnginePool) -> tuple[GameRecord, AnnotationReport]:
    """Fill only the missing ``eval_after`` slots; existing evaluations are kept."""
    report = AnnotationReport()
    todo: list[tuple[int, Board]] = []
    board = Board(record.start_fen)
    for k, ply in enumerate(record.plies, start=1):
        board.push(Move.from_uci(ply.uci))
        if ply.eval_after is None and board.terminal_status() is None:
            todo.append((k, board.copy()))
    if not todo:
        return record, report
    verdicts = pool.evaluate_many([b for _, b in todo])
    plies = list(record.plies)
    for (k, _), v in zip(todo, verdicts):
        if isinstance(v, Exception):
            report.failures.append((k, str(v)))
        elif v.score is None:
            report.failures.append((k, "engine reported a terminal position"))
        else:
            plies[k - 1] = replace(plies[k - 1], eval_after=v.score)
            report.filled += 1
    return replace(record, plies=chain_evals(plies)), report
