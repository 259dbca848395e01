"""Chess position, legal move generation and SAN handling.

Squares are numbered 0..63 from a1 to h8. Pieces are FEN letters, upper case
for White. Moves are made in place with :meth:`Board.push` and undone with
:meth:`Board.pop`; :func:`apply_san` is the copying convenience wrapper.
"""

from __future__ import annotations

import re
from typing import Iterator, NamedTuple, Optional

STARTING_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"

FILES = "abcdefgh"


class IllegalMoveError(ValueError):
    pass


class AmbiguousMoveError(IllegalMoveError):
    pass


class InvalidFenError(ValueError):
    pass


def square(name: str) -> int:
    return FILES.index(name[0]) + 8 * (int(name[1]) - 1)


def square_name(sq: int) -> str:
    return FILES[sq % 8] + str(sq // 8 + 1)


class Move(NamedTuple):
    from_sq: int
    to_sq: int
    promotion: Optional[str] = None  # lower-case piece letter

    def uci(self) -> str:
        return square_name(self.from_sq) + square_name(self.to_sq) + (self.promotion or "")

    @classmethod
    def from_uci(cls, text: str) -> "Move":
        if len(text) not in (4, 5):
            raise ValueError(f"bad coordinate move {text!r}")
        promo = text[4].lower() if len(text) == 5 else None
        return cls(square(text[:2]), square(text[2:4]), promo)


def _targets(sq: int, deltas) -> tuple[int, ...]:
    f, r = sq % 8, sq // 8
    out = []
    for df, dr in deltas:
        nf, nr = f + df, r + dr
        if 0 <= nf < 8 and 0 <= nr < 8:
            out.append(nr * 8 + nf)
    return tuple(out)


def _ray(sq: int, df: int, dr: int) -> tuple[int, ...]:
    f, r = sq % 8, sq // 8
    out = []
    f, r = f + df, r + dr
    while 0 <= f < 8 and 0 <= r < 8:
        out.append(r * 8 + f)
        f, r = f + df, r + dr
    return tuple(out)


_KNIGHT_D = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
_KING_D = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_ROOK_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_BISHOP_DIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

KNIGHT_TARGETS = [_targets(s, _KNIGHT_D) for s in range(64)]
KING_TARGETS = [_targets(s, _KING_D) for s in range(64)]
ROOK_RAYS = [[_ray(s, *d) for d in _ROOK_DIRS] for s in range(64)]
BISHOP_RAYS = [[_ray(s, *d) for d in _BISHOP_DIRS] for s in range(64)]

# castling right lost when a piece leaves or lands on these squares
_CASTLE_SQUARES = {0: "Q", 7: "K", 4: "KQ", 56: "q", 63: "k", 60: "kq"}


def _is_white(piece: str) -> bool:
    return piece.isupper()


class Board:
    __slots__ = ("squares", "white_to_move", "castling", "ep_square", "halfmove", "fullmove", "_stack")

    def __init__(self, fen: str = STARTING_FEN):
        self._stack: list = []
        self.set_fen(fen)

    # ------------------------------------------------------------------ FEN
    def set_fen(self, fen: str) -> None:
        parts = fen.split()
        if len(parts) == 4:
            parts += ["0", "1"]
        if len(parts) != 6:
            raise InvalidFenError(f"expected 6 fields: {fen!r}")
        placement, turn, castling, ep, half, full = parts
        rows = placement.split("/")
        if len(rows) != 8:
            raise InvalidFenError(f"expected 8 ranks: {fen!r}")
        squares: list[Optional[str]] = [None] * 64
        for i, row in enumerate(rows):
            rank = 7 - i
            f = 0
            for ch in row:
                if ch.isdigit():
                    f += int(ch)
                elif ch in "PNBRQKpnbrqk":
                    if f > 7:
                        raise InvalidFenError(f"rank too long: {row!r}")
                    squares[rank * 8 + f] = ch
                    f += 1
                else:
                    raise InvalidFenError(f"bad piece {ch!r}")
            if f != 8:
                raise InvalidFenError(f"rank {row!r} does not cover 8 files")
        if squares.count("K") != 1 or squares.count("k") != 1:
            raise InvalidFenError("each side needs exactly one king")
        if turn not in ("w", "b"):
            raise InvalidFenError(f"bad side to move {turn!r}")
        if castling != "-" and (not set(castling) <= set("KQkq") or len(set(castling)) != len(castling)):
            raise InvalidFenError(f"bad castling field {castling!r}")
        try:
            ep_sq = None if ep == "-" else square(ep)
            half_n, full_n = int(half), int(full)
        except (ValueError, IndexError) as exc:
            raise InvalidFenError(str(exc)) from exc
        self.squares = squares
        self.white_to_move = turn == "w"
        self.castling = "".join(c for c in "KQkq" if c in castling)
        self.ep_square = ep_sq
        self.halfmove = half_n
        self.fullmove = full_n
        self._stack = []

    def fen(self, counters: bool = True) -> str:
        rows = []
        for rank in range(7, -1, -1):
            row, empty = "", 0
            for f in range(8):
                p = self.squares[rank * 8 + f]
                if p is None:
                    empty += 1
                else:
                    if empty:
                        row += str(empty)
                        empty = 0
                    row += p
            if empty:
                row += str(empty)
            rows.append(row)
        fields = [
            "/".join(rows),
            "w" if self.white_to_move else "b",
            self.castling or "-",
            "-" if self.ep_square is None else square_name(self.ep_square),
        ]
        if counters:
            fields += [str(self.halfmove), str(self.fullmove)]
        return " ".join(fields)

    def position_key(self) -> str:
        """FEN without move counters; equal for transpositions."""
        return self.fen(counters=False)

    def copy(self) -> "Board":
        b = Board.__new__(Board)
        b.squares = list(self.squares)
        b.white_to_move = self.white_to_move
        b.castling = self.castling
        b.ep_square = self.ep_square
        b.halfmove = self.halfmove
        b.fullmove = self.fullmove
        b._stack = []
        return b

    def __eq__(self, other) -> bool:
        return isinstance(other, Board) and self.fen() == other.fen()

    def __repr__(self) -> str:
        return f"Board({self.fen()!r})"

    # ------------------------------------------------------------ attacks
    def king_square(self, white: bool) -> int:
        return self.squares.index("K" if white else "k")

    def is_attacked(self, sq: int, by_white: bool) -> bool:
        s = self.squares
        if by_white:
            pawn, knight, bishop, rook, queen, king = "PNBRQK"
        else:
            pawn, knight, bishop, rook, queen, king = "pnbrqk"
        f = sq % 8
        # pawns attack diagonally forward, so look one rank back toward their side
        src_rank_step = -8 if by_white else 8
        for df in (-1, 1):
            if 0 <= f + df < 8:
                t = sq + src_rank_step + df
                if 0 <= t < 64 and s[t] == pawn:
                    return True
        for t in KNIGHT_TARGETS[sq]:
            if s[t] == knight:
                return True
        for t in KING_TARGETS[sq]:
            if s[t] == king:
                return True
        for ray in ROOK_RAYS[sq]:
            for t in ray:
                p = s[t]
                if p is not None:
                    if p == rook or p == queen:
                        return True
                    break
        for ray in BISHOP_RAYS[sq]:
            for t in ray:
                p = s[t]
                if p is not None:
                    if p == bishop or p == queen:
                        return True
                    break
        return False

    def is_check(self) -> bool:
        return self.is_attacked(self.king_square(self.white_to_move), not self.white_to_move)

    # ------------------------------------------------------- move generation
    def pseudo_legal_moves(self) -> Iterator[Move]:
        s = self.squares
        white = self.white_to_move
        for sq in range(64):
            p = s[sq]
            if p is None or _is_white(p) != white:
                continue
            kind = p.upper()
            if kind == "P":
                yield from self._pawn_moves(sq, white)
            elif kind == "N":
                for t in KNIGHT_TARGETS[sq]:
                    q = s[t]
                    if q is None or _is_white(q) != white:
                        yield Move(sq, t)
            elif kind == "K":
                for t in KING_TARGETS[sq]:
                    q = s[t]
                    if q is None or _is_white(q) != white:
                        yield Move(sq, t)
            else:
                rays = []
                if kind in "RQ":
                    rays += ROOK_RAYS[sq]
                if kind in "BQ":
                    rays += BISHOP_RAYS[sq]
                for ray in rays:
                    for t in ray:
                        q = s[t]
                        if q is None:
                            yield Move(sq, t)
                        else:
                            if _is_white(q) != white:
                                yield Move(sq, t)
                            break
        yield from self._castling_moves(white)

    def _pawn_moves(self, sq: int, white: bool) -> Iterator[Move]:
        s = self.squares
        step = 8 if white else -8
        start_rank = 1 if white else 6
        last_rank = 7 if white else 0
        f, r = sq % 8, sq // 8
        targets = []
        one = sq + step
        if 0 <= one < 64 and s[one] is None:
            targets.append(one)
            two = one + step
            if r == start_rank and s[two] is None:
                yield Move(sq, two)
        for df in (-1, 1):
            if 0 <= f + df < 8:
                t = one + df
                q = s[t]
                if (q is not None and _is_white(q) != white) or t == self.ep_square:
                    targets.append(t)
        for t in targets:
            if t // 8 == last_rank:
                for promo in "qrbn":
                    yield Move(sq, t, promo)
            else:
                yield Move(sq, t)

    def _castling_moves(self, white: bool) -> Iterator[Move]:
        s = self.squares
        if white:
            king_sq, rook_k, rook_q, rights, rook = 4, 7, 0, "KQ", "R"
            king = "K"
        else:
            king_sq, rook_k, rook_q, rights, rook = 60, 63, 56, "kq", "r"
            king = "k"
        if s[king_sq] != king:
            return
        enemy = not white
        if rights[0] in self.castling and s[rook_k] == rook:
            if s[king_sq + 1] is None and s[king_sq + 2] is None:
                if not any(self.is_attacked(king_sq + i, enemy) for i in (0, 1, 2)):
                    yield Move(king_sq, king_sq + 2)
        if rights[1] in self.castling and s[rook_q] == rook:
            if s[king_sq - 1] is None and s[king_sq - 2] is None and s[king_sq - 3] is None:
                if not any(self.is_attacked(king_sq - i, enemy) for i in (0, 1, 2)):
                    yield Move(king_sq, king_sq - 2)

    def legal_moves(self) -> list[Move]:
        white = self.white_to_move
        out = []
        for m in self.pseudo_legal_moves():
            self.push(m)
            if not self.is_attacked(self.king_square(white), not white):
                out.append(m)
            self.pop()
        return out

    def is_legal(self, move: Move) -> bool:
        return move in self.legal_moves()

    def is_checkmate(self) -> bool:
        return self.is_check() and not self.legal_moves()

    def is_stalemate(self) -> bool:
        return not self.is_check() and not self.legal_moves()

    def terminal_status(self) -> Optional[str]:
        if self.legal_moves():
            return None
        return "checkmate" if self.is_check() else "stalemate"

    # ------------------------------------------------------------ make/unmake
    def push(self, move: Move) -> None:
        s = self.squares
        frm, to, promo = move
        piece = s[frm]
        if piece is None:
            raise IllegalMoveError(f"no piece on {square_name(frm)}")
        captured = s[to]
        ep_captured_sq = None
        self._stack.append(
            (move, piece, captured, self.castling, self.ep_square, self.halfmove, self.fullmove)
        )
        kind = piece.upper()
        if kind == "P" and to == self.ep_square and captured is None and frm % 8 != to % 8:
            ep_captured_sq = to - 8 if self.white_to_move else to + 8
            s[ep_captured_sq] = None
        s[frm] = None
        if promo:
            s[to] = promo.upper() if self.white_to_move else promo.lower()
        else:
            s[to] = piece
        if kind == "K" and abs(to - frm) == 2:
            if to > frm:
                s[frm + 1], s[frm + 3] = s[frm + 3], None
            else:
                s[frm - 1], s[frm - 4] = s[frm - 4], None
        if self.castling:
            lost = _CASTLE_SQUARES.get(frm, "") + _CASTLE_SQUARES.get(to, "")
            if lost:
                self.castling = "".join(c for c in self.castling if c not in lost)
        self.ep_square = (frm + to) // 2 if kind == "P" and abs(to - frm) == 16 else None
        if kind == "P" or captured is not None or ep_captured_sq is not None:
            self.halfmove = 0
        else:
            self.halfmove += 1
        if not self.white_to_move:
            self.fullmove += 1
        self.white_to_move = not self.white_to_move

    def pop(self) -> Move:
        move, piece, captured, castling, ep, half, full = self._stack.pop()
        s = self.squares
        frm, to, _ = move
        self.white_to_move = not self.white_to_move
        s[frm] = piece
        s[to] = captured
        if piece.upper() == "P" and to == ep and captured is None and frm % 8 != to % 8:
            s[to - 8 if self.white_to_move else to + 8] = "p" if self.white_to_move else "P"
        if piece.upper() == "K" and abs(to - frm) == 2:
            if to > frm:
                s[frm + 3], s[frm + 1] = s[frm + 1], None
            else:
                s[frm - 4], s[frm - 1] = s[frm - 1], None
        self.castling, self.ep_square, self.halfmove, self.fullmove = castling, ep, half, full
        return move

    # -------------------------------------------------------------------- SAN
    def san(self, move: Move) -> str:
        """Standard algebraic notation for a legal ``move``, with check suffix."""
        s = self.squares
        piece = s[move.from_sq]
        if piece is None:
            raise IllegalMoveError(f"no piece on {square_name(move.from_sq)}")
        kind = piece.upper()
        if kind == "K" and abs(move.to_sq - move.from_sq) == 2:
            text = "O-O" if move.to_sq > move.from_sq else "O-O-O"
        else:
            capture = s[move.to_sq] is not None or (kind == "P" and move.to_sq == self.ep_square
                                                   and move.from_sq % 8 != move.to_sq % 8)
            if kind == "P":
                text = (FILES[move.from_sq % 8] + "x" if capture else "") + square_name(move.to_sq)
                if move.promotion:
                    text += "=" + move.promotion.upper()
            else:
                rivals = [
                    m.from_sq for m in self.legal_moves()
                    if m.to_sq == move.to_sq and m.from_sq != move.from_sq
                    and s[m.from_sq] == piece
                ]
                dis = ""
                if rivals:
                    if all(r % 8 != move.from_sq % 8 for r in rivals):
                        dis = FILES[move.from_sq % 8]
                    elif all(r // 8 != move.from_sq // 8 for r in rivals):
                        dis = str(move.from_sq // 8 + 1)
                    else:
                        dis = square_name(move.from_sq)
                text = kind + dis + ("x" if capture else "") + square_name(move.to_sq)
        self.push(move)
        try:
            if self.is_check():
                text += "#" if not self.legal_moves() else "+"
        finally:
            self.pop()
        return text

    def parse_san(self, san: str) -> Move:
        """Resolve SAN text to the unique legal move it denotes."""
        text = san.strip().rstrip("+#!?")
        legal = self.legal_moves()
        if text in ("O-O", "0-0", "O-O-O", "0-0-0"):
            king_sq = 4 if self.white_to_move else 60
            to = king_sq + (2 if text in ("O-O", "0-0") else -2)
            for m in legal:
                if m.from_sq == king_sq and m.to_sq == to and self.squares[king_sq].upper() == "K":
                    return m
            raise IllegalMoveError(f"castling {san!r} is not legal here")
        match = _SAN_RE.match(text)
        if not match:
            raise IllegalMoveError(f"unparsable SAN {san!r}")
        kind, from_file, from_rank, _capture, target, promo = match.groups()
        kind = kind or "P"
        to = square(target)
        promo = promo.lower() if promo else None
        if kind == "P" and from_file is None:
            from_file = target[0]
        candidates = []
        for m in legal:
            p = self.squares[m.from_sq]
            if p.upper() != kind or m.to_sq != to or m.promotion != promo:
                continue
            if from_file and FILES[m.from_sq % 8] != from_file:
                continue
            if from_rank and str(m.from_sq // 8 + 1) != from_rank:
                continue
            candidates.append(m)
        if not candidates:
            raise IllegalMoveError(f"illegal SAN {san!r} in {self.fen()}")
        if len(candidates) > 1:
            raise AmbiguousMoveError(f"ambiguous SAN {san!r} in {self.fen()}")
        return candidates[0]

    def push_san(self, san: str) -> Move:
        move = self.parse_san(san)
        self.push(move)
        return move


_SAN_RE = re.compile(r"^([NBRQK])?([a-h])?([1-8])?(x)?([a-h][1-8])(?:=?([NBRQnbrq]))?$")


def apply_san(board: Board, san: str) -> tuple[Board, Move]:
    """Play ``san`` on a copy of ``board``; returns the new board and the coordinate move."""
    nxt = board.copy()
    move = nxt.push_san(san)
    return nxt, move


def perft(board: Board, depth: int) -> int:
    """Number of leaf nodes of the legal move tree ``depth`` plies deep."""
    if depth == 0:
        return 1
    moves = board.legal_moves()
    if depth == 1:
        return len(moves)
    total = 0
    for m in moves:
        board.push(m)
        total += perft(board, depth - 1)
        board.pop()
    return total
