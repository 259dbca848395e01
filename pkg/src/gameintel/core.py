"""Shared primitives: reward schemes, outcome distributions and plays."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

SUM_TOL = 1e-9
NEG_TOL = 1e-12


class AlignmentError(ValueError):
    """A distribution does not line up with the reward scheme it is scored against."""


class DistributionError(ValueError):
    """Probabilities that do not form a valid distribution."""


@dataclass(frozen=True)
class RewardScheme:
    """Ordered outcome labels and the points each one is worth."""

    outcomes: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("reward scheme needs at least one outcome")
        if len(self.outcomes) != len(self.values):
            raise ValueError("outcomes and values differ in length")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("reward values must be finite")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def win_draw_loss(cls, win: float = 1.0, draw: float = 0.5, loss: float = 0.0) -> "RewardScheme":
        return cls(("win", "draw", "loss"), (win, draw, loss))

    @property
    def win_value(self) -> float:
        return self.values[self.outcomes.index("win")]

    @property
    def draw_value(self) -> float:
        return self.values[self.outcomes.index("draw")]

    def index_of(self, value: float) -> int:
        """Index of the outcome worth exactly ``value``."""
        for j, v in enumerate(self.values):
            if v == value:
                return j
        raise KeyError(f"no outcome worth {value} in {self.values}")


CHESS = RewardScheme.win_draw_loss()


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability vector index-aligned with a :class:`RewardScheme`.

    Build through :func:`validate_distribution` unless the input is known good.
    """

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    def __len__(self) -> int:
        return len(self.probs)

    @classmethod
    def point_mass(cls, index: int, size: int) -> "OutcomeDistribution":
        probs = [0.0] * size
        probs[index] = 1.0
        return cls(tuple(probs))

    def mix(self, other: "OutcomeDistribution", alpha: float) -> "OutcomeDistribution":
        """``alpha * self + (1 - alpha) * other``."""
        if len(other) != len(self):
            raise AlignmentError("cannot mix distributions of different length")
        return OutcomeDistribution(
            tuple(alpha * p + (1.0 - alpha) * q for p, q in zip(self.probs, other.probs))
        )


def validate_distribution(probs: Sequence[float]) -> OutcomeDistribution:
    """Check ``probs`` and return a clamped, renormalised copy.

    Entries down to ``-1e-12`` are treated as rounding noise and set to zero;
    the total may be off from one by at most ``1e-9``.
    """
    if len(probs) == 0:
        raise DistributionError("empty distribution")
    clean = []
    for j, p in enumerate(probs):
        p = float(p)
        if not math.isfinite(p):
            raise DistributionError(f"probability at index {j} is not finite: {p}")
        if p < -NEG_TOL:
            raise DistributionError(f"negative probability at index {j}: {p}")
        clean.append(max(p, 0.0))
    total = math.fsum(clean)
    if abs(total - 1.0) > SUM_TOL:
        worst = max(range(len(clean)), key=lambda j: clean[j])
        raise DistributionError(
            f"probabilities sum to {total!r}, not 1 (largest entry at index {worst})"
        )
    return OutcomeDistribution(tuple(p / total for p in clean))


def expected_value(dist: OutcomeDistribution, scheme: RewardScheme) -> float:
    """Expected points of ``dist`` under ``scheme``: sum of value times probability."""
    if len(dist) != len(scheme):
        raise AlignmentError(
            f"distribution has {len(dist)} entries, scheme has {len(scheme)} outcomes"
        )
    return math.fsum(v * p for v, p in zip(scheme.values, dist.probs))


@dataclass(frozen=True)
class PlaySeq:
    """A sequence of ``(node_id, action_id)`` pairs.

    ``full`` marks a play that ends in a terminal node. Node ids increase
    strictly along the sequence because children are numbered after parents.
    """

    actions: tuple[tuple[int, int], ...]
    full: bool = False

    def __post_init__(self) -> None:
        acts = tuple((int(n), int(a)) for n, a in self.actions)
        object.__setattr__(self, "actions", acts)
        for (n0, _), (n1, _) in zip(acts, acts[1:]):
            if n1 <= n0:
                raise ValueError(f"node ids must increase along a play: {n0} then {n1}")

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.actions)
