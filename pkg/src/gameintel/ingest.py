"""From parsed games to per-player metrics.

Evaluation anchoring: the comment after ply ``k`` is the engine's verdict on
the position after that move, so it serves as the played-move evaluation of
ply ``k`` and as the best-move evaluation of ply ``k + 1``. The first ply's
best-move evaluation is a configurable root evaluation (0 cp by default).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .core import CHESS, OutcomeDistribution, RewardScheme, expected_value
from .metrics import ACCURACY_EPS, MovePair, PlayerGameMetrics, accuracy, gpl
from .pgn import GameRecord
from .wdl import CentipawnEval, EvalModel

log = logging.getLogger(__name__)

DEFAULT_EXCLUDED = ("rapid", "blitz", "online", "blindfold", "simul", "exhibition")


class MissingEvalError(ValueError):
    def __init__(self, plies: Sequence[int]):
        super().__init__(f"missing evaluations at plies {list(plies)}")
        self.plies = list(plies)


class UnfinishedGameError(ValueError):
    pass


@dataclass(frozen=True)
class FilterSpec:
    min_elo: int = 2500
    classical_only: bool = True
    excluded_keywords: tuple[str, ...] = DEFAULT_EXCLUDED
    players: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.min_elo < 0:
            raise ValueError("min_elo must be non-negative")

    def rejection(self, headers: dict) -> Optional[str]:
        """Reason the game is excluded, or ``None`` when it is kept."""
        if self.min_elo > 0:
            for side in ("WhiteElo", "BlackElo"):
                raw = headers.get(side, "").strip()
                try:
                    elo = int(raw)
                except ValueError:
                    return f"missing {side}"
                if elo < self.min_elo:
                    return f"{side} {elo} below {self.min_elo}"
        if self.classical_only:
            where = " ".join((headers.get("Event", ""), headers.get("Site", ""))).lower()
            for kw in self.excluded_keywords:
                if kw.lower() in where:
                    return f"non-classical ({kw})"
        if self.players:
            names = {headers.get("White", ""), headers.get("Black", "")}
            if not names & set(self.players):
                return "no listed player"
        return None


@dataclass
class ExclusionReport:
    kept: int = 0
    excluded: list = field(default_factory=list)  # (index, reason)

    def reasons(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, reason in self.excluded:
            key = reason.split(" (")[0] if reason.startswith("non-classical") else reason
            counts[key] = counts.get(key, 0) + 1
        return counts


def filter_games(records: Iterable[GameRecord], spec: FilterSpec) -> tuple[list[GameRecord], ExclusionReport]:
    kept, report = [], ExclusionReport()
    for i, rec in enumerate(records):
        reason = spec.rejection(rec.headers)
        if reason is None:
            kept.append(rec)
        else:
            report.excluded.append((i, reason))
    report.kept = len(kept)
    return kept, report


@dataclass(frozen=True)
class AnalysisOptions:
    root_eval: CentipawnEval = CentipawnEval.cp(0)
    gap_policy: str = "error"  # or "skip"
    skip_opening: int = 0  # full moves
    accuracy_skip_lost: bool = False
    unfinished: str = "egi"  # or "skip"

    def __post_init__(self) -> None:
        if self.gap_policy not in ("error", "skip"):
            raise ValueError(f"gap_policy must be 'error' or 'skip', not {self.gap_policy!r}")
        if self.unfinished not in ("egi", "skip"):
            raise ValueError(f"unfinished must be 'egi' or 'skip', not {self.unfinished!r}")
        if self.skip_opening < 0:
            raise ValueError("skip_opening must be non-negative")


class MovePairs(NamedTuple):
    white: list
    black: list
    skipped: list  # ply numbers dropped for missing evals


def _terminal_distribution(termination: str, scheme: RewardScheme) -> OutcomeDistribution:
    # the mover delivered mate, or stalemated the opponent
    label = "win" if termination == "checkmate" else "draw"
    return OutcomeDistribution.point_mass(scheme.outcomes.index(label), len(scheme))


def build_move_pairs(
    record: GameRecord,
    model: EvalModel,
    scheme: RewardScheme = CHESS,
    options: AnalysisOptions = AnalysisOptions(),
) -> MovePairs:
    """Partition the game's plies into per-colour :class:`MovePair` lists.

    ``model`` must already be bound to the record (see ``EvalModel.for_record``).
    """
    if scheme.outcomes != ("win", "draw", "loss"):
        raise ValueError("chess analysis needs a win/draw/loss reward scheme")
    white_pairs, black_pairs, gaps = [], [], []
    mover_white = record.white_first
    n = len(record.plies)
    for k, ply in enumerate(record.plies, start=1):
        skip = k <= 2 * options.skip_opening
        before = ply.eval_before if ply.eval_before is not None else (options.root_eval if k == 1 else None)
        after = ply.eval_after
        played = None
        if after is None and k == n and record.termination is not None:
            played = _terminal_distribution(record.termination, scheme)
        if not skip:
            if before is None or (after is None and played is None):
                gaps.append(k)
            else:
                best = model.distribution(before, mover_white)
                if played is None:
                    played = model.distribution(after, mover_white)
                pair = MovePair(best, played, k)
                (white_pairs if mover_white else black_pairs).append(pair)
        mover_white = not mover_white
    if gaps and options.gap_policy == "error":
        raise MissingEvalError(gaps)
    return MovePairs(white_pairs, black_pairs, gaps)


@dataclass(frozen=True)
class GameAnalysis:
    index: int
    headers: dict
    white: PlayerGameMetrics
    black: PlayerGameMetrics
    skipped_gap_plies: tuple[int, ...] = ()
    skipped_lost_plies: tuple[int, ...] = ()

    def players(self) -> tuple[PlayerGameMetrics, PlayerGameMetrics]:
        return self.white, self.black


KEPT_HEADERS = ("Event", "Site", "Date", "Round", "White", "Black", "WhiteElo", "BlackElo", "Result")


def _player_metrics(name, color, pairs, scheme, reward, options, lost):
    last_ev = expected_value(pairs[-1].played_eval, scheme) if pairs else None
    acc_pairs = pairs
    if options.accuracy_skip_lost:
        acc_pairs = []
        for p in pairs:
            if expected_value(p.best_eval, scheme) <= ACCURACY_EPS:
                lost.append(p.ply_index)
            else:
                acc_pairs.append(p)
    g = gpl(pairs, scheme)
    return PlayerGameMetrics(
        player_id=name,
        color=color,
        reward=reward,
        gpl=g,
        gi=None if reward is None else reward - g,
        egi=None if last_ev is None else last_ev - g,
        accuracy=accuracy(acc_pairs, scheme) if acc_pairs else None,
        move_count=len(pairs),
    )


def analyze_game(
    record: GameRecord,
    model: EvalModel,
    scheme: RewardScheme = CHESS,
    options: AnalysisOptions = AnalysisOptions(),
    index: int = 0,
) -> GameAnalysis:
    """GPL, GI, EGI and accuracy for both players of one game.

    EGI uses the evaluation model as the player's prior: the last action's
    value is the model's verdict on the position after the player's final move.
    For unfinished games ``gi`` is ``None`` (or the game is rejected when
    ``options.unfinished == "skip"``).
    """
    if not record.finished and options.unfinished == "skip":
        raise UnfinishedGameError("game has no result")
    bound = model.for_record(record.headers)
    pairs = build_move_pairs(record, bound, scheme, options)
    lost: list[int] = []
    rewards = {}
    for white in (True, False):
        r = record.reward(white)
        if r is None:
            rewards[white] = None
        else:
            label = {1.0: "win", 0.5: "draw", 0.0: "loss"}[r]
            rewards[white] = scheme.values[scheme.outcomes.index(label)]
    h = record.headers
    w = _player_metrics(h.get("White", "?"), "white", pairs.white, scheme, rewards[True], options, lost)
    b = _player_metrics(h.get("Black", "?"), "black", pairs.black, scheme, rewards[False], options, lost)
    return GameAnalysis(
        index=index,
        headers={k: h[k] for k in KEPT_HEADERS if k in h},
        white=w,
        black=b,
        skipped_gap_plies=tuple(pairs.skipped),
        skipped_lost_plies=tuple(sorted(lost)),
    )
