"""Streaming PGN reader and writer for mainline games with eval/clock comments.

Only the mainline is kept: variations, NAGs and free-text comments are
dropped. ``[%eval ...]`` and ``[%clk ...]`` tags inside a comment are
attached to the ply the comment follows. Evaluations are stored from
White's point of view, as in Lichess exports.

Games that fail to parse are skipped and reported as
:class:`ParseDiagnostic` entries; only an unreadable stream (bad encoding,
unterminated comment at end of input) raises :class:`PgnStreamError`.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Iterator, Optional

from .board import STARTING_FEN, Board, IllegalMoveError, InvalidFenError, Move
from .wdl import CentipawnEval

RESULTS = ("1-0", "0-1", "1/2-1/2", "*")
ROSTER = ("Event", "Site", "Date", "Round", "White", "Black", "Result")

_TAG_RE = re.compile(r'^\s*\[\s*([A-Za-z0-9_]+)\s+"((?:[^"\\]|\\.)*)"\s*\]\s*$')
_EVAL_RE = re.compile(r"\[%eval\s+(#)?([+-]?\d+(?:\.\d+)?)(?:,\d+)?\s*\]")
_CLK_RE = re.compile(r"\[%clk\s+(\d+):(\d{1,2}):(\d{1,2}(?:\.\d+)?)\s*\]")
_TOKEN_RE = re.compile(
    r"""
    (?P<comment>\{[^}]*\})
  | (?P<line_comment>;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<nag>\$\d+)
  | (?P<result>1-0|0-1|1/2-1/2|½-½|\*)
  | (?P<number>\d+\.+)
  | (?P<san>[^\s(){};$]+)
    """,
    re.VERBOSE,
)


class PgnStreamError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class GameParseError(ValueError):
    pass


@dataclass(frozen=True)
class ParseDiagnostic:
    game_number: int
    offset: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"game {self.game_number} @ byte {self.offset}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Ply:
    san: str
    uci: str
    eval_after: Optional[CentipawnEval] = None
    eval_before: Optional[CentipawnEval] = None
    clock: Optional[float] = None


@dataclass(frozen=True)
class GameRecord:
    """One parsed game.

    ``termination`` is ``"checkmate"`` or ``"stalemate"`` when the final
    position is terminal on the board, else ``None``.
    """

    headers: dict = field(default_factory=dict)
    plies: tuple[Ply, ...] = ()
    result: str = "*"
    start_fen: str = STARTING_FEN
    termination: Optional[str] = None

    def __post_init__(self) -> None:
        if self.result not in RESULTS:
            raise ValueError(f"unknown result {self.result!r}")
        object.__setattr__(self, "plies", tuple(self.plies))

    @property
    def finished(self) -> bool:
        return self.result != "*"

    @property
    def white_first(self) -> bool:
        return self.start_fen.split()[1] == "w"

    def reward(self, white: bool) -> Optional[float]:
        if self.result == "1-0":
            return 1.0 if white else 0.0
        if self.result == "0-1":
            return 0.0 if white else 1.0
        if self.result == "1/2-1/2":
            return 0.5
        return None

    def boards(self) -> Iterator[tuple[Board, Ply]]:
        """Yield the position before each ply together with the ply."""
        board = Board(self.start_fen)
        for ply in self.plies:
            yield board.copy(), ply
            board.push(Move.from_uci(ply.uci))

    def final_board(self) -> Board:
        board = Board(self.start_fen)
        for ply in self.plies:
            board.push(Move.from_uci(ply.uci))
        return board


def chain_evals(plies, root: Optional[CentipawnEval] = None) -> tuple[Ply, ...]:
    """Set each ply's ``eval_before`` to the previous ply's ``eval_after``."""
    out = []
    before = root
    for ply in plies:
        out.append(replace(ply, eval_before=before))
        before = ply.eval_after
    return tuple(out)


def parse_eval(text: str) -> CentipawnEval:
    """Parse ``0.35``, ``-1.2`` or ``#-3`` as a White-perspective evaluation."""
    text = text.strip()
    if text.startswith("#"):
        return CentipawnEval.mate(int(text[1:]))
    return CentipawnEval.cp(round(float(text) * 100))


def format_eval(ev: CentipawnEval) -> str:
    return str(ev)


def format_clock(seconds: float) -> str:
    whole = int(seconds)
    frac = seconds - whole
    h, rem = divmod(whole, 3600)
    m, s = divmod(rem, 60)
    text = f"{h}:{m:02d}:{s:02d}"
    if frac > 1e-9:
        text += f"{frac:.3f}".rstrip("0")[1:]
    return text


def _comment_tags(body: str) -> tuple[Optional[CentipawnEval], Optional[float]]:
    ev = clk = None
    m = _EVAL_RE.search(body)
    if m:
        ev = CentipawnEval.mate(int(m.group(2))) if m.group(1) else CentipawnEval.cp(
            round(float(m.group(2)) * 100)
        )
    m = _CLK_RE.search(body)
    if m:
        clk = int(m.group(1)) * 3600 + int(m.group(2)) * 60 + float(m.group(3))
    return ev, clk


@dataclass
class _RawGame:
    number: int
    offset: int
    headers: dict = field(default_factory=dict)
    movetext: list = field(default_factory=list)


def _split_games(stream: BinaryIO) -> Iterator[_RawGame]:
    offset = 0
    number = 0
    current: Optional[_RawGame] = None
    in_comment = False
    comment_start = 0
    first = True
    for raw in stream:
        line_offset = offset
        offset += len(raw)
        try:
            line = raw.decode("utf-8-sig" if first else "utf-8")
        except UnicodeDecodeError as exc:
            raise PgnStreamError(f"invalid UTF-8: {exc.reason}", line_offset + exc.start) from exc
        first = False
        if not in_comment:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            tag = _TAG_RE.match(line)
            if tag:
                if current is None or current.movetext:
                    if current is not None:
                        yield current
                    number += 1
                    current = _RawGame(number, line_offset)
                current.headers[tag.group(1)] = tag.group(2).replace('\\"', '"').replace("\\\\", "\\")
                continue
        if current is None:
            number += 1
            current = _RawGame(number, line_offset)
        current.movetext.append(line)
        i = 0
        while i < len(line):
            ch = line[i]
            if in_comment:
                if ch == "}":
                    in_comment = False
            elif ch == "{":
                in_comment = True
                comment_start = line_offset + len(line[:i].encode("utf-8"))
            elif ch == ";":
                break
            i += 1
    if in_comment:
        raise PgnStreamError("unterminated comment", comment_start)
    if current is not None:
        yield current


def _normalise_result(token: str) -> str:
    return "1/2-1/2" if token == "½-½" else token


def _build_record(raw: _RawGame, diagnostics: list) -> GameRecord:
    headers = dict(raw.headers)
    start_fen = headers.get("FEN", STARTING_FEN)
    try:
        board = Board(start_fen)
    except InvalidFenError as exc:
        raise GameParseError(f"bad FEN header: {exc}") from exc

    plies: list[Ply] = []
    token_result = None
    depth = 0
    text = "".join(raw.movetext)
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        tok = m.group(kind)
        if kind == "open":
            depth += 1
            continue
        if kind == "close":
            depth -= 1
            if depth < 0:
                raise GameParseError("unbalanced ')'")
            continue
        if depth > 0 or kind in ("line_comment", "nag", "number"):
            continue
        if kind == "comment":
            if plies:
                ev, clk = _comment_tags(tok[1:-1])
                if ev is not None:
                    plies[-1] = replace(plies[-1], eval_after=ev)
                if clk is not None:
                    plies[-1] = replace(plies[-1], clock=clk)
            continue
        if kind == "result":
            token_result = _normalise_result(tok)
            continue
        if token_result is not None:
            raise GameParseError(f"move {tok!r} after result token")
        san = tok.rstrip("!?")
        try:
            move = board.parse_san(san)
        except IllegalMoveError as exc:
            raise GameParseError(f"ply {len(plies) + 1}: {exc}") from exc
        plies.append(Ply(san=san, uci=move.uci()))
        board.push(move)
    if depth != 0:
        raise GameParseError("unbalanced '('")

    header_result = headers.get("Result")
    if header_result is not None:
        header_result = _normalise_result(header_result)
    if header_result in RESULTS:
        result = header_result
        if token_result is not None and token_result != result:
            diagnostics.append(ParseDiagnostic(
                raw.number, raw.offset,
                f"Result header {result} disagrees with movetext {token_result}", "warning"))
    elif token_result is not None:
        result = token_result
    else:
        result = "*"
    headers["Result"] = result

    status = board.terminal_status()
    if status == "checkmate":
        expected = "0-1" if board.white_to_move else "1-0"
        if result != expected:
            diagnostics.append(ParseDiagnostic(
                raw.number, raw.offset, f"board shows checkmate ({expected}) but result is {result}",
                "warning"))
    elif status == "stalemate" and result != "1/2-1/2":
        diagnostics.append(ParseDiagnostic(
            raw.number, raw.offset, f"board shows stalemate but result is {result}", "warning"))

    return GameRecord(
        headers=headers,
        plies=chain_evals(plies),
        result=result,
        start_fen=start_fen,
        termination=status,
    )


def parse_pgn(stream: BinaryIO, diagnostics: Optional[list] = None) -> Iterator[GameRecord]:
    """Yield the games in a binary PGN stream.

    Malformed games are skipped; a :class:`ParseDiagnostic` is appended to
    ``diagnostics`` (when given) for each one, and for non-fatal warnings.
    """
    if diagnostics is None:
        diagnostics = []
    for raw in _split_games(stream):
        try:
            yield _build_record(raw, diagnostics)
        except GameParseError as exc:
            diagnostics.append(ParseDiagnostic(raw.number, raw.offset, str(exc)))


def parse_pgn_text(text: str, diagnostics: Optional[list] = None) -> list[GameRecord]:
    return list(parse_pgn(io.BytesIO(text.encode("utf-8")), diagnostics))


def read_pgn(path, diagnostics: Optional[list] = None) -> list[GameRecord]:
    with open(path, "rb") as fh:
        return list(parse_pgn(fh, diagnostics))


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def write_pgn(record: GameRecord, width: int = 79) -> str:
    """Serialise a record; parsing the output gives back an equal record."""
    headers = dict(record.headers)
    headers["Result"] = record.result
    if record.start_fen != STARTING_FEN and "FEN" not in headers:
        headers["SetUp"] = "1"
        headers["FEN"] = record.start_fen
    lines = []
    for key in ROSTER:
        if key in headers:
            lines.append(f'[{key} "{_escape(headers[key])}"]')
    for key, value in headers.items():
        if key not in ROSTER:
            lines.append(f'[{key} "{_escape(value)}"]')
    lines.append("")

    tokens = []
    fen_fields = record.start_fen.split()
    white = fen_fields[1] == "w"
    move_no = int(fen_fields[5]) if len(fen_fields) > 5 else 1
    need_number = True
    for ply in record.plies:
        if white:
            tokens.append(f"{move_no}.")
        elif need_number:
            tokens.append(f"{move_no}...")
        tokens.append(ply.san)
        need_number = False
        tags = []
        if ply.eval_after is not None:
            tags.append(f"[%eval {format_eval(ply.eval_after)}]")
        if ply.clock is not None:
            tags.append(f"[%clk {format_clock(ply.clock)}]")
        if tags:
            tokens.append("{ " + " ".join(tags) + " }")
            need_number = True
        if not white:
            move_no += 1
        white = not white
    tokens.append(record.result)

    row = ""
    for tok in tokens:
        if row and len(row) + 1 + len(tok) > width:
            lines.append(row)
            row = tok
        else:
            row = f"{row} {tok}" if row else tok
    lines.append(row)
    return "\n".join(lines) + "\n"
