import random

import pytest

from gameintel.core import CHESS, OutcomeDistribution
from gameintel.game_lab import (
    GI,
    GPL_ONLY,
    REWARD_ONLY,
    ApplicabilityError,
    CoverageError,
    GameTree,
    MachineProfile,
    Mechanism,
    Node,
    SizeGuardError,
    TreeError,
    brute_force_max_play,
    check_consistency,
    check_gi_identity,
    counterexample_game,
    deviation_violations,
    gaming_proofness_margins,
    is_dynamically_consistent,
    lab_extremes,
    machine_optimal_action,
    maximal_plays,
    maximally_intelligent_play,
    parse_mechanism,
    play_gpl,
    prefix_egi,
    random_game,
    random_machine,
    run_lab,
)

WIN, DRAW, LOSS = (OutcomeDistribution.point_mass(k, 3) for k in range(3))
MIRROR = {WIN: LOSS, DRAW: DRAW, LOSS: WIN}


def toy():
    """Root (player 0): a ends 1-0, b passes to player 1 who picks c (0-1) or d (draw)."""
    nodes = (
        Node(owner=0, children=(1, 2)),
        Node(rewards=(1.0, 0.0)),
        Node(owner=1, children=(3, 4)),
        Node(rewards=(0.0, 1.0)),
        Node(rewards=(0.5, 0.5)),
    )
    game = GameTree(nodes, 2)
    # truthful values; player 1 picks c at node 2, so node 2 is a loss for player 0
    v0 = {0: WIN, 1: WIN, 2: LOSS, 3: LOSS, 4: DRAW}
    v1 = {x: MIRROR[d] for x, d in v0.items()}
    acts = lambda v: {(x, a): v[c] for x, n in enumerate(nodes) for a, c in enumerate(n.children)}
    return game, MachineProfile((acts(v0), acts(v1)), (v0, v1))


def one_step(rewards, dists, players=1):
    nodes = (Node(owner=0, children=tuple(range(1, len(rewards) + 1))),
             *(Node(rewards=(r,) * players) for r in rewards))
    game = GameTree(nodes, players)
    acts = {(0, a): d for a, d in enumerate(dists)}
    return game, MachineProfile((acts,) * players)


def test_optimal_action_rules():
    game, m = one_step([1.0], [WIN])
    assert machine_optimal_action(game, 0, m) == 0
    six = OutcomeDistribution((0.6, 0.0, 0.4))
    four = OutcomeDistribution((0.4, 0.0, 0.6))
    game, m = one_step([0.0, 1.0], [four, six])
    assert machine_optimal_action(game, 0, m) == 1
    game, m = one_step([0.0, 1.0], [DRAW, DRAW])
    assert machine_optimal_action(game, 0, m) == 0
    with pytest.raises(CoverageError):
        machine_optimal_action(game, 0, MachineProfile(({(0, 0): DRAW},)))
    with pytest.raises(TreeError):
        machine_optimal_action(game, 1, m)


def test_tree_validation():
    with pytest.raises(TreeError):
        GameTree((Node(owner=0, children=()),), 1)
    with pytest.raises(TreeError):
        GameTree((Node(owner=0, children=(1,)), Node(rewards=(1.0, 0.0))), 1)
    with pytest.raises(TreeError):
        GameTree((Node(owner=0, children=(1, 1)), Node(rewards=(1.0,))), 1)
    with pytest.raises(ValueError):
        GameTree((Node(owner=0, children=(1,)), Node(rewards=(0.7,))), 1)


def test_dominant_action():
    game, m = one_step([1.0, 0.0], [WIN, LOSS])
    assert maximally_intelligent_play(game, m, GI) == ((0, 0),)


def test_toy_tree():
    game, m = toy()
    play = maximally_intelligent_play(game, m, GI)
    assert play == brute_force_max_play(game, m, GI) == ((0, 0),)
    assert len(game.plays()) == 3
    assert deviation_violations(game, m, GI, play) == []
    assert play in maximal_plays(game, m, GI)
    assert lab_extremes(game, m, GI) == [(-1.0, 1.0), (0.0, 1.0)]
    for i, (lo, hi) in enumerate(lab_extremes(game, m, GI)):
        assert lo <= GI.score(game, play, m, i) <= hi


def test_single_play_and_ties():
    game, m = one_step([0.5], [DRAW])
    assert brute_force_max_play(game, m) == ((0, 0),)
    assert lab_extremes(game, m) == [(0.5, 0.5)]
    game, m = one_step([0.5, 0.5], [DRAW, DRAW])
    assert set(maximal_plays(game, m)) == {((0, 0),), ((0, 1),)}
    assert brute_force_max_play(game, m) in maximal_plays(game, m)


def test_size_guard():
    game, m = toy()
    with pytest.raises(SizeGuardError):
        game.plays(limit=2)
    with pytest.raises(SizeGuardError):
        brute_force_max_play(game, m, limit=2)


@pytest.mark.parametrize("mech", [GI, GPL_ONLY, REWARD_ONLY, Mechanism("linear", 2.0, 0.5, -1.0)])
def test_random_trees_match_oracle(mech):
    for seed in range(100):
        rng = random.Random(seed)
        game, _ = random_game(seed, rng.randint(1, 4), rng.randint(1, 3), players=rng.randint(1, 3))
        m = random_machine(game, seed + 7)
        play = maximally_intelligent_play(game, m, mech)
        assert play == brute_force_max_play(game, m, mech)
        assert deviation_violations(game, m, mech, play) == []


def test_deviation_holds_prefix():
    game, m = toy()
    # a deliberately poor play: the deviation at the root must keep an empty prefix
    bad = deviation_violations(game, m, GI, ((0, 1), (2, 1)))
    assert [(d.player, d.node, d.action) for d in bad] == [(0, 0, 0), (1, 2, 0)]


def test_dynamic_consistency():
    game, m = toy()
    assert is_dynamically_consistent(game, m) == (True, None)
    const = OutcomeDistribution((0.2, 0.5, 0.3))
    acts = {(x, a): const for x, n in enumerate(game.nodes) for a in range(len(n.children))}
    flat = MachineProfile((acts, acts), ({x: const for x in range(5)},) * 2)
    assert is_dynamically_consistent(game, flat)[0]
    nodes0 = dict(m.nodes[0])
    nodes0[4] = WIN
    perturbed = MachineProfile(m.actions, (nodes0, m.nodes[1]))
    assert is_dynamically_consistent(game, perturbed) == (False, (0, 2, 1))
    for seed in range(30):
        g, mm = random_game(seed, 3, 3, players=2)
        assert is_dynamically_consistent(g, mm)[0]


def test_identity_toy_and_random():
    game, m = toy()
    for play in game.plays():
        chk = check_gi_identity(game, m, play)
        assert chk.consistent and chk.residual < 1e-12
    seen = set()
    for seed in range(100):
        leaves = "truthful" if seed % 2 else "dirichlet"
        g, mm = random_game(seed, 4, 3, players=2, continuation="optimal", constant_sum=True, leaves=leaves)
        for play in g.plays():
            chk = check_gi_identity(g, mm, play)
            seen.add(chk.equation)
            assert chk.residual < 1e-12, (seed, play, chk)
    assert seen == {"equal-length", "unequal-length"}


def test_identity_preconditions():
    g, _ = random_game(1, 3, 2, players=2)
    if not g.is_constant_sum():
        with pytest.raises(ApplicabilityError):
            check_gi_identity(g, random_machine(g, 1), g.plays()[0])
    game, m = toy()
    inconsistent = random_machine(game, 3)
    chk = check_gi_identity(game, inconsistent, game.plays()[1])
    assert not chk.consistent and chk.residual >= 0


def test_consistency():
    for seed in range(100):
        rng = random.Random(seed)
        g, _ = random_game(seed, 3, 3, players=rng.randint(1, 2))
        mm = random_machine(g, seed + 1)
        mech = Mechanism("linear", rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(-2, 2))
        assert check_consistency(GI, g, mm) == []
        assert check_consistency(mech, g, mm) == []
    g, mm = counterexample_game("gpl-only")
    assert check_consistency(GPL_ONLY, g, mm)
    assert check_consistency(GI, g, mm) == []
    g, mm = counterexample_game("reward-only")
    assert check_consistency(REWARD_ONLY, g, mm)
    assert check_consistency(GI, g, mm) == []


def test_gaming_proofness_symmetric_case():
    for seed in range(30):
        g, _ = random_game(seed, 3, 3, players=2)
        prior = random_machine(g, seed)
        for x, n in enumerate(g.nodes):
            if n.terminal:
                continue
            gp = gaming_proofness_margins(g, x, prior, prior)
            assert gp.holds
            al = gp.human_optimal
            for b, margin in gp.margins.items():
                diff = prior.ev(n.owner, x, al, CHESS) - prior.ev(n.owner, x, b, CHESS)
                assert margin == pytest.approx(2 * diff, abs=1e-12)


def test_gaming_proofness_counterexample():
    game, prior = one_step([0.5, 0.5], [OutcomeDistribution((0.5, 0.2, 0.3)), DRAW])
    _, believed = one_step([0.5, 0.5], [LOSS, WIN])
    gp = gaming_proofness_margins(game, 0, prior, believed)
    assert gp.human_optimal == 0
    assert not gp.holds


def test_gaming_proofness_implies_egi_order():
    checked = 0
    for seed in range(200):
        g, _ = random_game(seed, 3, 3, players=2)
        prior = random_machine(g, seed)
        believed = random_machine(g, seed + 1000)
        for x, n in enumerate(g.nodes):
            if n.terminal or len(n.children) < 2:
                continue
            gp = gaming_proofness_margins(g, x, prior, believed)
            if not gp.holds:
                continue
            prefix = next(p for p in g.plays() if any(y == x for y, _ in p))
            prefix = prefix[: [y for y, _ in prefix].index(x)]
            base = prefix_egi(g, prefix + ((x, gp.human_optimal),), prior, believed, gp.player)
            for b in gp.margins:
                alt = prefix_egi(g, prefix + ((x, b),), prior, believed, gp.player)
                assert base >= alt - 1e-9
            checked += 1
    assert checked > 50


def test_random_game_basics():
    a = random_game(42, 3, 3)
    assert a == random_game(42, 3, 3)
    g, m = random_game(5, 1, 3)
    assert all(g.nodes[c].terminal for c in g.nodes[0].children)
    assert is_dynamically_consistent(g, m)[0]
    with pytest.raises(ValueError):
        random_game(1, 0, 2)


def test_gpl_partial_play():
    game, m = toy()
    assert play_gpl(game, ((0, 1),), m, 0) == 1.0
    assert play_gpl(game, ((0, 1),), m, 1) == 0.0


def test_parse_mechanism():
    assert parse_mechanism("gi") is GI
    assert parse_mechanism("linear:2,0.5,1") == Mechanism("linear", 2.0, 0.5, 1.0)
    assert parse_mechanism("linear:2,0.5,1").label() == "linear:2,0.5,1"
    for bad in ("linear:1,2", "linear:a,b,c", "fancy"):
        with pytest.raises(ValueError):
            parse_mechanism(bad)


def test_run_lab_small():
    results = run_lab(3, 25)
    assert [r.name for r in results] == [
        "maximal_intelligence", "gi_identity", "consistency", "gaming_proofness",
        "dynamic_consistency", "extremes_bracket",
    ]
    assert all(r.passed for r in results), [r.summary_line() for r in results]
    bad = run_lab(3, 10, mech=GPL_ONLY)
    assert next(r for r in bad if r.name == "consistency").passed  # counterexample found as expected
