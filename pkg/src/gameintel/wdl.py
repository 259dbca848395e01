"""Centipawn evaluations to expected scores and win/draw/loss triples.

Two models are provided behind one interface:

* :class:`EngineEvalModel` maps a centipawn score through the logistic
  ``1 / (1 + exp(-k * c))`` with ``k = 0.00368208``.
* :class:`HumanEvalModel` shifts that curve by the Elo expected scores of the
  two players, so that an equal position is worth ``ES_W`` to White rather
  than one half.

Both return an :class:`~gameintel.core.OutcomeDistribution` in
win/draw/loss order for the player to move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import CHESS, OutcomeDistribution, RewardScheme

LOGISTIC_K = 0.00368208
MATE_CAP = 1500
CP_CAP = 1400
DRAW_MAX = 0.6
DRAW_TAU = 300.0


class EloDomainError(ValueError):
    pass


class UnboundedPerformanceError(ValueError):
    """Perfect or zero tournament score: the performance rating is infinite."""

    def __init__(self, sentinel: float):
        label = "+inf" if sentinel > 0 else "-inf"
        super().__init__(f"performance rating is unbounded ({label})")
        self.sentinel = sentinel


@dataclass(frozen=True)
class CentipawnEval:
    """An engine score.

    ``kind`` is ``"cp"`` or ``"mate"``; for mates ``value`` is the signed
    distance in moves. ``perspective`` is ``"white"`` or ``"side_to_move"``.
    """

    kind: str
    value: int
    perspective: str = "white"

    def __post_init__(self) -> None:
        if self.kind not in ("cp", "mate"):
            raise ValueError(f"unknown eval kind {self.kind!r}")
        if self.perspective not in ("white", "side_to_move"):
            raise ValueError(f"unknown perspective {self.perspective!r}")
        if self.kind == "mate" and self.value == 0:
            raise ValueError("mate distance cannot be zero")

    @classmethod
    def cp(cls, value: int, perspective: str = "white") -> "CentipawnEval":
        return cls("cp", int(value), perspective)

    @classmethod
    def mate(cls, value: int, perspective: str = "white") -> "CentipawnEval":
        return cls("mate", int(value), perspective)

    def negated(self) -> "CentipawnEval":
        return CentipawnEval(self.kind, -self.value, self.perspective)

    def to_white(self, white_to_move: bool) -> "CentipawnEval":
        if self.perspective == "white":
            return self
        e = self if white_to_move else self.negated()
        return CentipawnEval(e.kind, e.value, "white")

    def to_side_to_move(self, white_to_move: bool) -> "CentipawnEval":
        if self.perspective == "side_to_move":
            return self
        e = self if white_to_move else self.negated()
        return CentipawnEval(e.kind, e.value, "side_to_move")

    def centipawns(self, mate_cap: int = MATE_CAP, cp_cap: int = CP_CAP) -> float:
        """Score in centipawns; mates mapped by :func:`mate_to_cp`, cp clipped to ``cp_cap``."""
        if self.kind == "mate":
            return mate_to_cp(self.value, mate_cap)
        return float(max(-cp_cap, min(cp_cap, self.value)))

    def __str__(self) -> str:
        if self.kind == "mate":
            return f"#{self.value}"
        return f"{self.value / 100:.2f}"


@dataclass(frozen=True)
class WdlTriple:
    win: float
    draw: float
    loss: float

    def __post_init__(self) -> None:
        if min(self.win, self.draw, self.loss) < 0.0:
            raise ValueError(f"negative probability in {self}")
        if abs(self.win + self.draw + self.loss - 1.0) > 1e-9:
            raise ValueError(f"triple does not sum to one: {self}")

    def expected_points(self, scheme: RewardScheme = CHESS) -> float:
        return self.win * scheme.values[0] + self.draw * scheme.values[1] + self.loss * scheme.values[2]

    def as_distribution(self) -> OutcomeDistribution:
        return OutcomeDistribution((self.win, self.draw, self.loss))


def elo_expected_score(e_i: float, e_j: float) -> float:
    """Expected score of a player rated ``e_i`` against one rated ``e_j``."""
    for e in (e_i, e_j):
        if not (math.isfinite(e) and e > 0):
            raise EloDomainError(f"rating must be finite and positive, got {e!r}")
    return 1.0 / (1.0 + 10.0 ** ((e_j - e_i) / 400.0))


def logistic_term(c: float, k: float = LOGISTIC_K) -> float:
    """``2 / (1 + exp(-k c)) - 1``, an odd map of centipawns onto (-1, 1)."""
    # tanh form is exactly odd in floating point
    return math.tanh(0.5 * k * c)


def engine_expected_score(c: float | CentipawnEval, k: float = LOGISTIC_K, mate_cap: int = MATE_CAP) -> float:
    """Expected score for the side the evaluation favours when positive.

    ``c`` is either plain centipawns or a :class:`CentipawnEval`, whose mate
    scores are mapped through :func:`mate_to_cp` first.
    """
    if isinstance(c, CentipawnEval):
        c = c.centipawns(mate_cap)
    x = k * c
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)  # stable branch: exp(-x) would overflow for large |x|
    return e / (1.0 + e)


def human_expected_score(c: float, es_w: float, es_b: float, k: float = LOGISTIC_K) -> float:
    """White's expected score at a White-perspective evaluation of ``c`` centipawns.

    ``es_w`` and ``es_b`` are the Elo expected scores of White and Black. Black's
    expected score is one minus the returned value.
    """
    for name, es in (("es_w", es_w), ("es_b", es_b)):
        if not 0.0 < es < 1.0:
            raise EloDomainError(f"{name} must lie in (0, 1), got {es!r}")
    if c >= 0:
        return es_w + (1.0 - es_w) * logistic_term(c, k)
    return 1.0 - es_b - (1.0 - es_b) * logistic_term(-c, k)


def mate_to_cp(mate_distance: int, mate_cap: int = MATE_CAP) -> float:
    """Map a signed mate distance onto centipawns; closer mates score higher."""
    if mate_distance == 0:
        raise ValueError("mate distance cannot be zero")
    sign = 1 if mate_distance > 0 else -1
    return float(sign * (mate_cap - min(abs(mate_distance), mate_cap - CP_CAP - 1)))


@dataclass(frozen=True)
class DrawModel:
    d_max: float = DRAW_MAX
    tau: float = DRAW_TAU

    def draw_probability(self, c: float) -> float:
        return self.d_max * math.exp(-abs(c) / self.tau)


def wdl_decompose(expected_score: float, c: float, draw_model: DrawModel = DrawModel()) -> WdlTriple:
    """Split an expected score into win/draw/loss using an exponential draw curve.

    The draw share is ``d_max * exp(-|c| / tau)``. When that would push win or
    loss below zero, the draw share is cut back to the largest value that
    keeps ``win + draw / 2 == expected_score`` on the simplex.
    """
    s = min(1.0, max(0.0, expected_score))
    draw = draw_model.draw_probability(c)
    draw = min(draw, 2.0 * s, 2.0 * (1.0 - s))
    win = s - 0.5 * draw
    loss = 1.0 - win - draw
    win, loss = max(win, 0.0), max(loss, 0.0)
    total = win + draw + loss
    return WdlTriple(win / total, draw / total, loss / total)


class EvalModel:
    """Maps a White-perspective :class:`CentipawnEval` to the mover's outcome distribution."""

    name = "abstract"

    def expected_score(self, ev: CentipawnEval, mover_white: bool) -> float:
        raise NotImplementedError

    def centipawns(self, ev: CentipawnEval) -> float:
        raise NotImplementedError

    def for_record(self, headers: dict) -> "EvalModel":
        """Bind per-game context (ratings); engine models ignore it."""
        return self

    def triple(self, ev: CentipawnEval, mover_white: bool) -> WdlTriple:
        c = self.centipawns(ev)
        return wdl_decompose(self.expected_score(ev, mover_white), c if mover_white else -c, self.draw)

    def distribution(self, ev: CentipawnEval, mover_white: bool) -> OutcomeDistribution:
        return self.triple(ev, mover_white).as_distribution()

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class EngineEvalModel(EvalModel):
    k: float = LOGISTIC_K
    mate_cap: int = MATE_CAP
    cp_cap: int = CP_CAP
    draw: DrawModel = field(default_factory=DrawModel)

    name = "engine"

    def centipawns(self, ev: CentipawnEval) -> float:
        if ev.perspective != "white":
            raise ValueError("models take White-perspective evaluations")
        return ev.centipawns(self.mate_cap, self.cp_cap)

    def expected_score(self, ev: CentipawnEval, mover_white: bool) -> float:
        c = self.centipawns(ev)
        return engine_expected_score(c if mover_white else -c, self.k)

    def describe(self) -> dict:
        return {
            "model": self.name,
            "k": self.k,
            "mate_cap": self.mate_cap,
            "cp_cap": self.cp_cap,
            "draw_d_max": self.draw.d_max,
            "draw_tau": self.draw.tau,
        }


@dataclass(frozen=True)
class HumanEvalModel(EvalModel):
    """Elo-adjusted model; ``es_w``/``es_b`` are bound per game via :meth:`for_record`."""

    es_w: Optional[float] = None
    es_b: Optional[float] = None
    k: float = LOGISTIC_K
    mate_cap: int = MATE_CAP
    cp_cap: int = CP_CAP
    draw: DrawModel = field(default_factory=DrawModel)

    name = "human"

    @classmethod
    def from_elos(cls, white_elo: float, black_elo: float, **kw) -> "HumanEvalModel":
        es_w = elo_expected_score(white_elo, black_elo)
        return cls(es_w=es_w, es_b=1.0 - es_w, **kw)

    def for_record(self, headers: dict) -> "HumanEvalModel":
        if self.es_w is not None and self.es_b is not None:
            return self  # fixed pair supplied by the caller
        try:
            we, be = float(headers["WhiteElo"]), float(headers["BlackElo"])
        except (KeyError, ValueError) as exc:
            raise EloDomainError("human model needs numeric WhiteElo and BlackElo headers") from exc
        return HumanEvalModel.from_elos(
            we, be, k=self.k, mate_cap=self.mate_cap, cp_cap=self.cp_cap, draw=self.draw
        )

    def centipawns(self, ev: CentipawnEval) -> float:
        if ev.perspective != "white":
            raise ValueError("models take White-perspective evaluations")
        return ev.centipawns(self.mate_cap, self.cp_cap)

    def expected_score(self, ev: CentipawnEval, mover_white: bool) -> float:
        if self.es_w is None or self.es_b is None:
            raise EloDomainError("human model is not bound to a game's ratings")
        white = human_expected_score(self.centipawns(ev), self.es_w, self.es_b, self.k)
        return white if mover_white else 1.0 - white

    def describe(self) -> dict:
        return {
            "model": self.name,
            "k": self.k,
            "mate_cap": self.mate_cap,
            "cp_cap": self.cp_cap,
            "draw_d_max": self.draw.d_max,
            "draw_tau": self.draw.tau,
        }


def make_model(kind: str = "engine", **params) -> EvalModel:
    draw = DrawModel(params.pop("d_max", DRAW_MAX), params.pop("tau", DRAW_TAU))
    if kind == "engine":
        return EngineEvalModel(draw=draw, **params)
    if kind == "human":
        return HumanEvalModel(draw=draw, **params)
    raise ValueError(f"unknown WDL model {kind!r}")


def tournament_performance_rating(
    actual_scores: Sequence[float], opponent_ratings: Sequence[float], tol: float = 1e-6
) -> float:
    """Rating whose Elo expected scores against the opponents sum to the achieved score.

    Solved by bisection. A perfect or zero score raises
    :class:`UnboundedPerformanceError` carrying a ``+inf``/``-inf`` sentinel.
    """
    if len(actual_scores) != len(opponent_ratings):
        raise ValueError("scores and opponent ratings differ in length")
    if not actual_scores:
        raise ValueError("no games")
    n = len(actual_scores)
    total = math.fsum(actual_scores)
    if total >= n:
        raise UnboundedPerformanceError(math.inf)
    if total <= 0:
        raise UnboundedPerformanceError(-math.inf)

    def excess(rating: float) -> float:
        return math.fsum(elo_expected_score(rating, o) for o in opponent_ratings) - total

    lo, hi = min(opponent_ratings) - 1000.0, max(opponent_ratings) + 1000.0
    lo = max(lo, 1e-6)
    while excess(hi) < 0:
        hi += 1000.0
    while excess(lo) > 0 and lo > 1e-6:
        lo = max(lo - 1000.0, 1e-6)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
