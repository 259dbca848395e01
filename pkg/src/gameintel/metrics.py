"""Game-intelligence metric family computed from machine evaluations.

All functions are pure. A :class:`MovePair` holds the machine's verdict on the
best action at a node and on the action actually played there; everything
else (EPL, GPL, GI, accuracy, ...) is arithmetic over those pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import OutcomeDistribution, RewardScheme, expected_value

GI_TOL = 1e-12
ACCURACY_EPS = 1e-9


class UndefinedMetricError(ValueError):
    """The metric has no value for the given input (e.g. AGPL of an empty play)."""


class DegenerateRangeError(ValueError):
    pass


class PopulationError(ValueError):
    pass


class AccuracyGuardError(ZeroDivisionError):
    """Best-move evaluation too close to zero to divide by."""

    def __init__(self, ply_index: int, best_ev: float):
        super().__init__(f"best-move evaluation {best_ev!r} at ply {ply_index} is not positive")
        self.ply_index = ply_index
        self.best_ev = best_ev


@dataclass(frozen=True)
class MovePair:
    best_eval: OutcomeDistribution
    played_eval: OutcomeDistribution
    ply_index: int

    def __post_init__(self) -> None:
        if self.ply_index < 1:
            raise ValueError("ply_index starts at 1")
        if len(self.best_eval) != len(self.played_eval):
            raise ValueError("best and played evaluations are not aligned")


def epl(pair: MovePair, scheme: RewardScheme) -> float:
    """Expected point loss of one move. Negative values are kept as they are."""
    return expected_value(pair.best_eval, scheme) - expected_value(pair.played_eval, scheme)


def gpl(pairs: Iterable[MovePair], scheme: RewardScheme) -> float:
    """Game point loss: the sum of a player's expected point losses."""
    return math.fsum(epl(p, scheme) for p in pairs)


def game_intelligence(reward: float, gpl_value: float) -> float:
    return reward - gpl_value


def expected_game_intelligence(last_action_ev: float, gpl_value: float) -> float:
    """EGI: the prior's evaluation of the last (human-optimal) action minus GPL.

    The caller supplies ``last_action_ev``; this module never guesses a prior.
    """
    return last_action_ev - gpl_value


def aggregate_gi(gi_values: Iterable[float]) -> float:
    return math.fsum(gi_values)


def average_gpl(gpl_value: float, move_count: int) -> float:
    if move_count < 1:
        raise UndefinedMetricError("average GPL is undefined for a play without moves")
    return gpl_value / move_count


def relative_gi(gi: float, gi_min: float, gi_max: float) -> float:
    """Rescale ``gi`` onto [0, 1] between the attainable extremes.

    A value outside [0, 1] means ``gi`` came from a different machine than the
    extremes; it is clamped and a ``RuntimeWarning`` is issued.
    """
    if not gi_max > gi_min:
        raise DegenerateRangeError(f"gi_max ({gi_max}) must exceed gi_min ({gi_min})")
    value = (gi - gi_min) / (gi_max - gi_min)
    if value < 0.0 or value > 1.0:
        warnings.warn(
            f"relative GI {value:.6g} outside [0, 1]; clamped", RuntimeWarning, stacklevel=2
        )
        value = min(1.0, max(0.0, value))
    return value


def rgi_percentile(values: Sequence[float], index: int) -> float:
    """Percentage of the population strictly below ``values[index]``.

    Ties count against the player, so an all-equal population scores 0 everywhere.
    """
    m = len(values)
    if m < 2:
        raise PopulationError("RGI percentile needs a population of at least two")
    if not 0 <= index < m:
        raise IndexError(index)
    at_least = sum(1 for v in values if v >= values[index])
    return 100.0 * (m - at_least) / m


def accuracy(
    pairs: Sequence[MovePair], scheme: RewardScheme, eps: float = ACCURACY_EPS
) -> float:
    """Mean ratio of played-move to best-move expected points."""
    if not pairs:
        raise UndefinedMetricError("accuracy is undefined for a play without moves")
    ratios = []
    for p in pairs:
        best = expected_value(p.best_eval, scheme)
        if best <= eps:
            raise AccuracyGuardError(p.ply_index, best)
        ratios.append(expected_value(p.played_eval, scheme) / best)
    return math.fsum(ratios) / len(ratios)


def generalized_gi(alpha: float, beta: float, reward: float, gpl_value: float) -> float:
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValueError("alpha and beta must lie in [0, 1]")
    return alpha * reward - beta * gpl_value


@dataclass(frozen=True)
class PlayerGameMetrics:
    """One player's scores for one game.

    ``reward`` and ``gi`` are ``None`` for unfinished games, where only EGI is
    defined. Construction enforces ``gi == reward - gpl``.
    """

    player_id: str
    color: str
    reward: Optional[float]
    gpl: float
    gi: Optional[float]
    egi: Optional[float]
    accuracy: Optional[float]
    move_count: int

    def __post_init__(self) -> None:
        if self.color not in ("white", "black"):
            raise ValueError(f"color must be 'white' or 'black', got {self.color!r}")
        if self.move_count < 0:
            raise ValueError("move_count must be non-negative")
        if (self.reward is None) != (self.gi is None):
            raise ValueError("gi is defined exactly when the game has a reward")
        if self.gi is not None and abs(self.gi - (self.reward - self.gpl)) > GI_TOL:
            raise AssertionError(
                f"GI identity violated: gi={self.gi!r}, reward-gpl={self.reward - self.gpl!r}"
            )

    @classmethod
    def from_pairs(
        cls,
        player_id: str,
        color: str,
        pairs: Sequence[MovePair],
        scheme: RewardScheme,
        reward: Optional[float],
        last_action_ev: Optional[float] = None,
        with_accuracy: bool = True,
    ) -> "PlayerGameMetrics":
        g = gpl(pairs, scheme)
        acc = accuracy(pairs, scheme) if with_accuracy and pairs else None
        return cls(
            player_id=player_id,
            color=color,
            reward=reward,
            gpl=g,
            gi=None if reward is None else game_intelligence(reward, g),
            egi=None if last_action_ev is None else expected_game_intelligence(last_action_ev, g),
            accuracy=acc,
            move_count=len(pairs),
        )

    @property
    def agpl(self) -> float:
        return average_gpl(self.gpl, self.move_count)
