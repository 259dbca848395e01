import math
import random

import pytest
from hypothesis import given, strategies as st

from gameintel.core import CHESS, OutcomeDistribution
from gameintel.metrics import (
    AccuracyGuardError,
    DegenerateRangeError,
    MovePair,
    PlayerGameMetrics,
    PopulationError,
    UndefinedMetricError,
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


def dist_with_ev(ev: float) -> OutcomeDistribution:
    # win probability ev, loss 1 - ev: EV equals ev under [1, 0.5, 0]
    return OutcomeDistribution((ev, 0.0, 1.0 - ev))


def pair(best: float, played: float, ply: int = 1) -> MovePair:
    return MovePair(dist_with_ev(best), dist_with_ev(played), ply)


def test_epl_examples():
    assert epl(pair(0.5, 0.5), CHESS) == 0
    assert epl(pair(0.60, 0.55), CHESS) == pytest.approx(0.05, abs=1e-12)
    assert epl(pair(0.50, 0.53), CHESS) == pytest.approx(-0.03, abs=1e-12)


def test_gpl_examples():
    assert gpl([], CHESS) == 0
    assert gpl([pair(0.6, 0.55, 1), pair(0.4, 0.4, 3)], CHESS) == pytest.approx(0.05, abs=1e-12)


@pytest.mark.parametrize("r,g,expected", [(1, 0, 1), (0.5, 0.41, 0.09), (0, 0.86, -0.86)])
def test_game_intelligence(r, g, expected):
    assert game_intelligence(r, g) == pytest.approx(expected, abs=1e-12)


def test_expected_game_intelligence():
    assert expected_game_intelligence(0.7, 0.2) == pytest.approx(0.5, abs=1e-12)
    assert expected_game_intelligence(0.5, 0) == 0.5
    assert expected_game_intelligence(1.0, 0.3) == game_intelligence(1.0, 0.3)


def test_aggregate_and_average():
    assert aggregate_gi([]) == 0
    assert aggregate_gi([0.17, -0.07]) == pytest.approx(0.10, abs=1e-12)
    assert aggregate_gi([1, 1, 1]) == 3
    assert average_gpl(0.5, 10) == pytest.approx(0.05)
    assert average_gpl(0, 5) == 0
    with pytest.raises(UndefinedMetricError):
        average_gpl(0.3, 0)


def test_relative_gi():
    assert relative_gi(2, 0, 2) == 1
    assert relative_gi(0, 0, 2) == 0
    assert relative_gi(0.5, 0, 2) == 0.25
    with pytest.raises(DegenerateRangeError):
        relative_gi(1, 1, 1)


def test_relative_gi_out_of_range_warns_and_clamps():
    with pytest.warns(RuntimeWarning):
        assert relative_gi(3, 0, 2) == 1.0


def test_rgi_percentile():
    assert rgi_percentile([1, 2, 3], 2) == pytest.approx(200 / 3)
    assert rgi_percentile([4, 4, 4], 1) == 0
    assert rgi_percentile([5, 1], 0) == 50
    with pytest.raises(PopulationError):
        rgi_percentile([1], 0)


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30), st.data())
def test_rgi_percentile_bounds(values, data):
    i = data.draw(st.integers(0, len(values) - 1))
    p = rgi_percentile(values, i)
    m = len(values)
    assert 0 <= p <= 100 * (m - 1) / m + 1e-9


def test_accuracy():
    assert accuracy([pair(0.6, 0.6), pair(0.3, 0.3)], CHESS) == pytest.approx(1.0)
    assert accuracy([pair(0.5, 0.5), pair(0.5, 0.4)], CHESS) == pytest.approx(0.9)
    with pytest.raises(AccuracyGuardError) as info:
        accuracy([pair(0.5, 0.5, 1), pair(0.0, 0.0, 3)], CHESS)
    assert info.value.ply_index == 3


def test_generalized_gi():
    assert generalized_gi(1, 1, 0.7, 0.2) == game_intelligence(0.7, 0.2)
    assert generalized_gi(1, 0, 0.5, 9) == 0.5
    assert generalized_gi(0.5, 0.5, 1, 0.4) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        generalized_gi(1.5, 1, 0, 0)


def test_player_metrics_identity_is_enforced():
    with pytest.raises(AssertionError):
        PlayerGameMetrics("p", "white", 1.0, 0.2, 0.7, None, None, 3)
    m = PlayerGameMetrics("p", "white", 1.0, 0.2, 0.8, None, None, 4)
    assert m.agpl == pytest.approx(0.05)


def test_player_metrics_unfinished_has_no_gi():
    PlayerGameMetrics("p", "black", None, 0.2, None, 0.3, None, 4)
    with pytest.raises(ValueError):
        PlayerGameMetrics("p", "black", None, 0.2, 0.1, 0.3, None, 4)


evs = st.floats(0.001, 1.0)


@given(st.lists(st.tuples(evs, evs), min_size=1, max_size=20), st.randoms())
def test_gpl_order_invariant(vals, rnd):
    pairs = [pair(b, p, i + 1) for i, (b, p) in enumerate(vals)]
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    assert abs(gpl(pairs, CHESS) - gpl(shuffled, CHESS)) <= 1e-12


@given(st.lists(st.tuples(evs, evs).map(lambda t: (max(t), min(t))), min_size=1, max_size=20),
       st.sampled_from([0.0, 0.5, 1.0]))
def test_zero_loss_bound(vals, r):
    pairs = [pair(b, p) for b, p in vals]
    assert game_intelligence(r, gpl(pairs, CHESS)) <= r + 1e-15
    same = [pair(b, b) for b, _ in vals]
    assert game_intelligence(r, gpl(same, CHESS)) == r


def test_from_pairs_counts_moves():
    rng = random.Random(1)
    pairs = [pair(rng.random(), rng.random(), 2 * i + 1) for i in range(7)]
    m = PlayerGameMetrics.from_pairs("p", "white", pairs, CHESS, reward=0.5)
    assert m.move_count == 7
    assert abs(m.gi - (0.5 - m.gpl)) <= 1e-12
    assert math.isclose(m.gpl, gpl(pairs, CHESS))
