"""Game intelligence metrics for chess records and synthetic games."""

from .core import CHESS, OutcomeDistribution, PlaySeq, RewardScheme, expected_value, validate_distribution
from .metrics import (
    MovePair,
    PlayerGameMetrics,
    accuracy,
    aggregate_gi,
    average_gpl,
    epl,
    expected_game_intelligence,
    game_intelligence,
    generalized_gi,
    gpl,
    relative_gi,
    rgi_percentile,
)

__version__ = "0.1.0"

__all__ = [
    "CHESS", "OutcomeDistribution", "PlaySeq", "RewardScheme", "expected_value", "validate_distribution",
    "MovePair", "PlayerGameMetrics", "accuracy", "aggregate_gi", "average_gpl", "epl",
    "expected_game_intelligence", "game_intelligence", "generalized_gi", "gpl", "relative_gi",
    "rgi_percentile",
]
