"""Small perfect-information game trees with per-player machines.

Used to check the theoretical properties of the GI mechanism by brute force:
existence of a maximally intelligent play, the GI identity for dynamically
consistent constant-sum games, consistency of linear mechanisms and the
gaming-proofness inequality for EGI.

Nodes are numbered in preorder, so node ids strictly increase along any path
and a full play is just the tuple of ``(node, action)`` pairs from the root.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional

from .core import CHESS, OutcomeDistribution, PlaySeq, RewardScheme, expected_value

TIE_TOL = 1e-12
CMP_TOL = 1e-9
MAX_PLAYS = 100_000
MAX_CONSISTENCY_PLAYS = 10_000

FullPlay = tuple  # tuple[tuple[int, int], ...]


class TreeError(ValueError):
    pass


class CoverageError(KeyError):
    pass


class SizeGuardError(RuntimeError):
    pass


class ApplicabilityError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    owner: Optional[int] = None  # None marks a terminal node
    children: tuple[int, ...] = ()
    rewards: Optional[tuple[float, ...]] = None

    @property
    def terminal(self) -> bool:
        return self.owner is None


@dataclass(frozen=True)
class GameTree:
    nodes: tuple[Node, ...]
    n_players: int
    scheme: RewardScheme = CHESS

    def __post_init__(self) -> None:
        if self.n_players < 1:
            raise TreeError("need at least one player")
        if not self.nodes:
            raise TreeError("empty tree")
        parents = [0] * len(self.nodes)
        for x, node in enumerate(self.nodes):
            if node.terminal:
                if node.children:
                    raise TreeError(f"terminal node {x} has children")
                if node.rewards is None or len(node.rewards) != self.n_players:
                    raise TreeError(f"terminal node {x} needs one reward per player")
                for r in node.rewards:
                    if r not in self.scheme.values:
                        raise TreeError(f"terminal node {x} reward {r} is not in {self.scheme.values}")
            else:
                if not 0 <= node.owner < self.n_players:
                    raise TreeError(f"node {x} has owner {node.owner} outside 0..{self.n_players - 1}")
                if not node.children:
                    raise TreeError(f"non-terminal node {x} has no actions")
                for c in node.children:
                    if not x < c < len(self.nodes):
                        raise TreeError(f"node {x} -> {c} breaks preorder numbering")
                    parents[c] += 1
        if parents[0] != 0 or any(p != 1 for p in parents[1:]):
            raise TreeError("every non-root node needs exactly one parent")

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.nodes)

    def child(self, x: int, a: int) -> int:
        return self.nodes[x].children[a]

    def terminal_of(self, play: FullPlay) -> int:
        x = self.root
        for node, a in play:
            if node != x:
                raise TreeError(f"play visits node {node}, expected {x}")
            x = self.child(x, a)
        return x

    def path(self, play: FullPlay) -> list[int]:
        xs = [self.root]
        for node, a in play:
            xs.append(self.child(node, a))
        return xs

    def plays(self, limit: int = MAX_PLAYS) -> list[FullPlay]:
        """Every full play, depth first with actions in ascending order."""
        out: list[FullPlay] = []

        def walk(x, prefix):
            node = self.nodes[x]
            if node.terminal:
                out.append(tuple(prefix))
                if len(out) > limit:
                    raise SizeGuardError(f"more than {limit} full plays")
                return
            for a, c in enumerate(node.children):
                prefix.append((x, a))
                walk(c, prefix)
                prefix.pop()

        walk(self.root, [])
        return out

    def is_constant_sum(self) -> bool:
        sums = {round(math.fsum(n.rewards), 12) for n in self.nodes if n.terminal}
        return len(sums) == 1


def player_play(game: GameTree, play: FullPlay, player: int) -> PlaySeq:
    own = tuple((x, a) for x, a in play if game.nodes[x].owner == player)
    return PlaySeq(own, full=bool(play) and game.nodes[game.terminal_of(play)].terminal)


@dataclass(frozen=True)
class MachineProfile:
    """Per-player evaluations of actions (primary) and nodes (optional)."""

    actions: tuple[dict, ...]  # player -> {(node, action): OutcomeDistribution}
    nodes: tuple[dict, ...] = ()  # player -> {node: OutcomeDistribution}

    def action_dist(self, player: int, x: int, a: int) -> OutcomeDistribution:
        try:
            return self.actions[player][(x, a)]
        except (KeyError, IndexError):
            raise CoverageError(f"machine of player {player} has no entry for action {a} at node {x}") from None

    def node_dist(self, player: int, x: int) -> OutcomeDistribution:
        try:
            return self.nodes[player][x]
        except (KeyError, IndexError):
            raise CoverageError(f"machine of player {player} has no entry for node {x}") from None

    def ev(self, player: int, x: int, a: int, scheme: RewardScheme) -> float:
        return expected_value(self.action_dist(player, x, a), scheme)

    def node_ev(self, player: int, x: int, scheme: RewardScheme) -> float:
        return expected_value(self.node_dist(player, x), scheme)


def machine_optimal_action(game: GameTree, x: int, machine: MachineProfile, player: Optional[int] = None) -> int:
    """Highest-EV action at ``x``; ties go to the lowest action id."""
    node = game.nodes[x]
    if node.terminal:
        raise TreeError(f"node {x} is terminal")
    i = node.owner if player is None else player
    best, best_ev = 0, -math.inf
    for a in range(len(node.children)):
        ev = machine.ev(i, x, a, game.scheme)
        if ev > best_ev + TIE_TOL:
            best, best_ev = a, ev
    return best


def reward(game: GameTree, play: FullPlay, player: int) -> float:
    return game.nodes[game.terminal_of(play)].rewards[player]


def play_gpl(game: GameTree, play: FullPlay, machine: MachineProfile, player: int) -> float:
    """Sum of the player's expected point losses along ``play`` (full or partial)."""
    losses = []
    for x, a in play:
        if game.nodes[x].owner != player:
            continue
        best = machine_optimal_action(game, x, machine)
        losses.append(machine.ev(player, x, best, game.scheme) - machine.ev(player, x, a, game.scheme))
    return math.fsum(losses)


def play_gi(game: GameTree, play: FullPlay, machine: MachineProfile, player: int) -> float:
    return reward(game, play, player) - play_gpl(game, play, machine, player)


# --- mechanisms -----------------------------------------------------------

@dataclass(frozen=True)
class Mechanism:
    """``alpha * R - beta * GPL + delta``; covers every registry entry."""

    name: str
    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 0.0

    def from_parts(self, r: float, g: float) -> float:
        return self.alpha * r - self.beta * g + self.delta

    def score(self, game: GameTree, play: FullPlay, machine: MachineProfile, player: int) -> float:
        return self.from_parts(reward(game, play, player), play_gpl(game, play, machine, player))

    @property
    def linear_positive(self) -> bool:
        return self.alpha > 0 and self.beta > 0

    def label(self) -> str:
        if self.name == "linear":
            return f"linear:{self.alpha:g},{self.beta:g},{self.delta:g}"
        return self.name


GI = Mechanism("gi")
GPL_ONLY = Mechanism("gpl-only", alpha=0.0, beta=1.0)
REWARD_ONLY = Mechanism("reward-only", alpha=1.0, beta=0.0)


def parse_mechanism(text: str) -> Mechanism:
    """``gi``, ``gpl-only``, ``reward-only`` or ``linear:alpha,beta,delta``."""
    text = text.strip()
    fixed = {m.name: m for m in (GI, GPL_ONLY, REWARD_ONLY)}
    if text in fixed:
        return fixed[text]
    if text.startswith("linear:"):
        parts = text[len("linear:"):].split(",")
        if len(parts) != 3:
            raise ValueError("linear mechanism needs alpha,beta,delta")
        try:
            alpha, beta, delta = (float(p) for p in parts)
        except ValueError:
            raise ValueError(f"bad linear parameters in {text!r}") from None
        return Mechanism("linear", alpha, beta, delta)
    raise ValueError(f"unknown mechanism {text!r}")


# --- maximal intelligence -------------------------------------------------

def _prefixes(game: GameTree) -> list[FullPlay]:
    pre: list = [None] * len(game)
    pre[game.root] = ()
    for x, node in enumerate(game.nodes):
        for a, c in enumerate(node.children):
            pre[c] = pre[x] + ((x, a),)
    return pre


def backward_induction(game: GameTree, machine: MachineProfile, mech: Mechanism) -> list[FullPlay]:
    """Continuation from every node, chosen by the owner's mechanism score."""
    pre = _prefixes(game)
    cont: list = [()] * len(game)
    for x in range(len(game) - 1, -1, -1):  # children before parents
        node = game.nodes[x]
        if node.terminal:
            continue
        best, best_score = None, -math.inf
        for a, c in enumerate(node.children):
            cand = ((x, a),) + cont[c]
            s = mech.score(game, pre[x] + cand, machine, node.owner)
            if s > best_score + TIE_TOL:
                best, best_score = cand, s
        cont[x] = best
    return cont


def maximally_intelligent_play(game: GameTree, machine: MachineProfile, mech: Mechanism = GI) -> FullPlay:
    return backward_induction(game, machine, mech)[game.root]


@dataclass(frozen=True)
class Deviation:
    player: int
    node: int
    action: int
    score: float
    deviation_score: float


def deviation_violations(
    game: GameTree,
    machine: MachineProfile,
    mech: Mechanism,
    play: FullPlay,
    continuation: Optional[Callable[[int], FullPlay]] = None,
) -> list[Deviation]:
    """Single-action deviations that score strictly higher than ``play``.

    Alternative plays are looked up in the exhaustive list of full plays: the
    prefix before the deviation node is held fixed and, after the deviation,
    play follows ``continuation(child)`` (the backward-induction policy by
    default).
    """
    if continuation is None:
        cont = backward_induction(game, machine, mech)
        continuation = cont.__getitem__
    every = set(game.plays())
    bad = []
    for k, (x, a) in enumerate(play):
        i = game.nodes[x].owner
        base = mech.score(game, play, machine, i)
        for b in range(len(game.nodes[x].children)):
            if b == a:
                continue
            alt = play[:k] + ((x, b),) + continuation(game.child(x, b))
            if alt not in every:
                raise TreeError(f"continuation from node {game.child(x, b)} is not a full play")
            s = mech.score(game, alt, machine, i)
            if s > base + CMP_TOL:
                bad.append(Deviation(i, x, b, base, s))
    return bad


def _enumerated_choice(game: GameTree, machine: MachineProfile, mech: Mechanism, limit: int):
    """Lowest-id subgame-maximal continuation per node, from the play list alone."""
    every = game.plays(limit)
    scores = {(p, i): mech.score(game, p, machine, i) for p in every for i in range(game.n_players)}
    memo: dict = {}

    def through(prefix):
        return [p for p in every if p[:len(prefix)] == prefix]

    def choose(prefix: FullPlay) -> FullPlay:
        if prefix in memo:
            return memo[prefix]
        plays = through(prefix)
        if len(plays) == 1 and len(plays[0]) == len(prefix):
            memo[prefix] = plays[0]
            return plays[0]
        x = plays[0][len(prefix)][0]
        i = game.nodes[x].owner
        actions = sorted({p[len(prefix)][1] for p in plays})
        best, best_score = None, -math.inf
        for a in actions:
            full = choose(prefix + ((x, a),))
            if scores[(full, i)] > best_score + TIE_TOL:
                best, best_score = full, scores[(full, i)]
        memo[prefix] = best
        return best

    return every, scores, choose


def brute_force_max_play(game: GameTree, machine: MachineProfile, mech: Mechanism = GI,
                         limit: int = MAX_PLAYS) -> FullPlay:
    """Independent oracle: the lowest-id maximal play found by enumeration."""
    _, _, choose = _enumerated_choice(game, machine, mech, limit)
    return choose(())


def maximal_plays(game: GameTree, machine: MachineProfile, mech: Mechanism = GI,
                  limit: int = MAX_PLAYS) -> list[FullPlay]:
    """All full plays no single deviation can improve on for the deviator.

    Deviations continue with the enumerated subgame-maximal choice.
    """
    every, scores, choose = _enumerated_choice(game, machine, mech, limit)
    out = []
    for p in every:
        ok = True
        for k, (x, a) in enumerate(p):
            i = game.nodes[x].owner
            for b in range(len(game.nodes[x].children)):
                if b != a and scores[(choose(p[:k] + ((x, b),)), i)] > scores[(p, i)] + CMP_TOL:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(p)
    return out


# --- dynamic consistency and the GI identity ------------------------------

def is_dynamically_consistent(game: GameTree, machine: MachineProfile, tol: float = 1e-12):
    """``(True, None)`` or ``(False, (player, node, action))`` for the first mismatch."""
    for i in range(game.n_players):
        for x, node in enumerate(game.nodes):
            for a, c in enumerate(node.children):
                p = machine.action_dist(i, x, a).probs
                q = machine.node_dist(i, c).probs
                if len(p) != len(q) or any(abs(u - v) > tol for u, v in zip(p, q)):
                    return False, (i, x, a)
    return True, None


def has_optimal_node_values(game: GameTree, machine: MachineProfile, tol: float = 1e-12) -> bool:
    """Each player's node value equals the owner's best action under that player's machine."""
    for x, node in enumerate(game.nodes):
        if node.terminal:
            continue
        best = machine_optimal_action(game, x, machine)
        for i in range(game.n_players):
            if abs(machine.node_ev(i, x, game.scheme) - machine.ev(i, x, best, game.scheme)) > tol:
                return False
    return True


@dataclass(frozen=True)
class IdentityCheck:
    equation: str  # "equal-length" or "unequal-length"
    residual: float
    printed_residual: float  # unequal-length form with the opposite terminal sign
    lengths: tuple[int, int]
    consistent: bool
    optimal_values: bool


def check_gi_identity(game: GameTree, machine: MachineProfile, play: FullPlay) -> IdentityCheck:
    """Compare GI_1 with the right-hand side of the two-player identity.

    Equal move counts:   GI_1 = GI_2 + R_1 - R_2 - V_1(x_0) + V_1(z)
    Unequal move counts: GI_1 = GI_2 + 2 R_1 - V_1(x_0) - V_2(z)
    where V_i is player i's expected value of a node and z the terminal node.
    The two forms agree under the constant-sum assumption; the residual is
    only guaranteed small when the machine is dynamically consistent and node
    values follow the owner's best action.
    """
    if game.n_players != 2:
        raise ApplicabilityError("identity is defined for two-player games")
    if not game.is_constant_sum():
        raise ApplicabilityError("terminal rewards are not constant-sum")
    s = game.scheme
    z = game.terminal_of(play)
    gi1, gi2 = play_gi(game, play, machine, 0), play_gi(game, play, machine, 1)
    r1, r2 = reward(game, play, 0), reward(game, play, 1)
    v1_root = machine.node_ev(0, game.root, s)
    l1 = sum(1 for x, _ in play if game.nodes[x].owner == 0)
    l2 = len(play) - l1
    if l1 == l2:
        rhs = gi2 + r1 - r2 - v1_root + machine.node_ev(0, z, s)
        printed = rhs
        eq = "equal-length"
    else:
        v2_z = machine.node_ev(1, z, s)
        rhs = gi2 + 2 * r1 - v1_root - v2_z
        printed = gi2 + 2 * r1 - v1_root + v2_z
        eq = "unequal-length"
    consistent, _ = is_dynamically_consistent(game, machine)
    return IdentityCheck(
        equation=eq,
        residual=abs(gi1 - rhs),
        printed_residual=abs(gi1 - printed),
        lengths=(l1, l2),
        consistent=consistent,
        optimal_values=has_optimal_node_values(game, machine),
    )


# --- consistency ----------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyViolation:
    player: int
    condition: int
    play_a: FullPlay
    play_b: FullPlay


def _ge(u: float, v: float) -> bool:
    return u >= v - CMP_TOL


def _eq(u: float, v: float) -> bool:
    return abs(u - v) <= CMP_TOL


def check_consistency(mech: Mechanism, game: GameTree, machine: MachineProfile,
                      limit: int = MAX_CONSISTENCY_PLAYS) -> list[ConsistencyViolation]:
    """Ordered pairs of full plays that break one of the three conditions.

    (1) R_a > R_b and GPL_a < GPL_b imply mu_a > mu_b.
    (2) With equal GPL, R_a >= R_b iff mu_a >= mu_b.
    (3) With equal R, GPL_a <= GPL_b iff mu_a >= mu_b.
    Pairs where reward and GPL point in opposite directions are not covered.
    """
    every = game.plays(limit)
    out = []
    for i in range(game.n_players):
        vals = [(reward(game, p, i), play_gpl(game, p, machine, i)) for p in every]
        mus = [mech.from_parts(r, g) for r, g in vals]
        for ia, pa in enumerate(every):
            ra, ga = vals[ia]
            for ib, pb in enumerate(every):
                if ia == ib:
                    continue
                rb, gb = vals[ib]
                ma, mb = mus[ia], mus[ib]
                if ra > rb + CMP_TOL and ga < gb - CMP_TOL and not ma > mb + CMP_TOL:
                    out.append(ConsistencyViolation(i, 1, pa, pb))
                if _eq(ga, gb) and _ge(ra, rb) != _ge(ma, mb):
                    out.append(ConsistencyViolation(i, 2, pa, pb))
                if _eq(ra, rb) and _ge(gb, ga) != _ge(ma, mb):
                    out.append(ConsistencyViolation(i, 3, pa, pb))
    return out


# --- gaming-proofness -----------------------------------------------------

@dataclass(frozen=True)
class GamingProofness:
    node: int
    player: int
    human_optimal: int
    margins: dict  # alternative action -> margin

    @property
    def holds(self) -> bool:
        return all(m >= -TIE_TOL for m in self.margins.values())


def gaming_proofness_margins(game: GameTree, x: int, human_prior: MachineProfile,
                             believed: MachineProfile) -> GamingProofness:
    """Margins of the EGI gaming-proofness inequality at node ``x``.

    margin(a') = [EV(a^l, M^h) - EV(a', M^h)] - [EV(a', M^) - EV(a^l, M^)],
    where a^l is the owner's human-optimal action.
    """
    i = game.nodes[x].owner
    if i is None:
        raise TreeError(f"node {x} is terminal")
    s = game.scheme
    al = machine_optimal_action(game, x, human_prior)
    margins = {}
    for b in range(len(game.nodes[x].children)):
        if b == al:
            continue
        lhs = human_prior.ev(i, x, al, s) - human_prior.ev(i, x, b, s)
        rhs = believed.ev(i, x, b, s) - believed.ev(i, x, al, s)
        margins[b] = lhs - rhs
    return GamingProofness(x, i, al, margins)


def prefix_egi(game: GameTree, prefix: FullPlay, human_prior: MachineProfile,
               believed: MachineProfile, player: int) -> float:
    """EGI of the player's moves in ``prefix``: prior EV of the last move minus GPL under ``believed``."""
    own = [(x, a) for x, a in prefix if game.nodes[x].owner == player]
    if not own:
        raise ValueError("player has not moved in this prefix")
    x, a = own[-1]
    return human_prior.ev(player, x, a, game.scheme) - play_gpl(game, prefix, believed, player)


def lab_extremes(game: GameTree, machine: MachineProfile, mech: Mechanism = GI,
                 limit: int = MAX_PLAYS) -> list[tuple[float, float]]:
    """(min, max) mechanism score over all full plays, per player."""
    every = game.plays(limit)
    out = []
    for i in range(game.n_players):
        scores = [mech.score(game, p, machine, i) for p in every]
        out.append((min(scores), max(scores)))
    return out


# --- random instances -----------------------------------------------------

def _flip(index: int, size: int) -> int:
    return size - 1 - index


def random_game(
    seed: int,
    depth_max: int = 4,
    branch_max: int = 3,
    players: int = 2,
    continuation: str = "uniform",
    constant_sum: bool = False,
    stop_prob: float = 0.25,
    scheme: RewardScheme = CHESS,
    leaves: str = "truthful",
) -> tuple[GameTree, MachineProfile]:
    """A random tree plus a dynamically consistent truthful machine.

    Terminal nodes get point masses on each player's reward. Interior node
    distributions are the average over children (``continuation="uniform"``)
    or the distribution of the child the owner prefers
    (``continuation="optimal"``); every action copies its child's node
    distribution. With ``constant_sum`` (two players, a scheme whose values
    are symmetric) player 2's reward mirrors player 1's. ``leaves="dirichlet"``
    replaces the terminal point masses with random distributions (mirrored
    for player 2 under ``constant_sum``), keeping dynamic consistency.
    """
    if depth_max < 1 or branch_max < 1:
        raise ValueError("depth_max and branch_max must be at least 1")
    if continuation not in ("uniform", "optimal"):
        raise ValueError(f"continuation must be 'uniform' or 'optimal', not {continuation!r}")
    if leaves not in ("truthful", "dirichlet"):
        raise ValueError(f"leaves must be 'truthful' or 'dirichlet', not {leaves!r}")
    if constant_sum and players != 2:
        raise ValueError("constant_sum needs exactly two players")
    rng = random.Random(seed)
    m = len(scheme)
    specs: list = []

    def build(depth: int) -> int:
        x = len(specs)
        specs.append(None)
        if depth == depth_max or (depth > 0 and rng.random() < stop_prob):
            if constant_sum:
                k = rng.randrange(m)
                specs[x] = ("t", (k, _flip(k, m)))
            else:
                specs[x] = ("t", tuple(rng.randrange(m) for _ in range(players)))
            return x
        owner = rng.randrange(players)
        kids = tuple(build(depth + 1) for _ in range(rng.randint(1, branch_max)))
        specs[x] = ("n", owner, kids)
        return x

    build(0)
    nodes = []
    for s in specs:
        if s[0] == "t":
            nodes.append(Node(rewards=tuple(scheme.values[k] for k in s[1])))
        else:
            nodes.append(Node(owner=s[1], children=s[2]))
    game = GameTree(tuple(nodes), players, scheme)

    node_d: list[dict] = [dict() for _ in range(players)]
    for x in range(len(nodes) - 1, -1, -1):
        s = specs[x]
        if s[0] == "t":
            if leaves == "truthful":
                for i in range(players):
                    node_d[i][x] = OutcomeDistribution.point_mass(s[1][i], m)
            elif constant_sum:
                d = _dirichlet(rng, m, 1.0)
                node_d[0][x], node_d[1][x] = d, OutcomeDistribution(tuple(reversed(d.probs)))
            else:
                for i in range(players):
                    node_d[i][x] = _dirichlet(rng, m, 1.0)
            continue
        kids = s[2]
        if continuation == "uniform":
            for i in range(players):
                probs = [math.fsum(node_d[i][c].probs[j] for c in kids) / len(kids) for j in range(m)]
                node_d[i][x] = OutcomeDistribution(tuple(probs))
        else:
            owner = s[1]
            best, best_ev = kids[0], -math.inf
            for c in kids:
                ev = expected_value(node_d[owner][c], scheme)
                if ev > best_ev + TIE_TOL:
                    best, best_ev = c, ev
            for i in range(players):
                node_d[i][x] = node_d[i][best]
    action_d = [
        {(x, a): node_d[i][c] for x, n in enumerate(nodes) for a, c in enumerate(n.children)}
        for i in range(players)
    ]
    return game, MachineProfile(tuple(action_d), tuple(node_d))


def _dirichlet(rng: random.Random, m: int, alpha: float) -> OutcomeDistribution:
    draws = [rng.gammavariate(alpha, 1.0) for _ in range(m)]
    total = math.fsum(draws)
    return OutcomeDistribution(tuple(d / total for d in draws))


def random_machine(game: GameTree, seed: int, alpha: float = 1.0) -> MachineProfile:
    """Independent Dirichlet evaluations for every action and node, per player."""
    rng = random.Random(seed)
    m = len(game.scheme)
    actions, nodes = [], []
    for _ in range(game.n_players):
        actions.append({(x, a): _dirichlet(rng, m, alpha)
                        for x, n in enumerate(game.nodes) for a in range(len(n.children))})
        nodes.append({x: _dirichlet(rng, m, alpha) for x in range(len(game))})
    return MachineProfile(tuple(actions), tuple(nodes))


# --- property suite -------------------------------------------------------

@dataclass
class PropertyResult:
    name: str
    passed: bool
    instances: int = 0
    violations: int = 0
    detail: str = ""

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"property={self.name} status={status} instances={self.instances} violations={self.violations}"
        return line + (f" detail={self.detail}" if self.detail else "")


def _seeds(seed: int, n: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.randrange(2 ** 31) for _ in range(n)]


def _shape(rng: random.Random, depth: int, branch: int) -> tuple[int, int]:
    return rng.randint(1, depth), rng.randint(1, branch)


def check_maximal_intelligence(seed: int, games: int, depth: int = 4, branch: int = 3,
                               mech: Mechanism = GI) -> PropertyResult:
    res = PropertyResult("maximal_intelligence", True)
    for s in _seeds(seed, games):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        game, _ = random_game(s, d, b, players=rng.randint(1, 2))
        machine = random_machine(game, s + 1)
        play = maximally_intelligent_play(game, machine, mech)
        bad = deviation_violations(game, machine, mech, play)
        oracle = brute_force_max_play(game, machine, mech)
        res.instances += 1
        if bad or oracle != play or play not in maximal_plays(game, machine, mech):
            res.violations += 1
    res.passed = res.violations == 0
    return res


def check_identity(seed: int, games: int, depth: int = 4, branch: int = 3, tol: float = 1e-12) -> PropertyResult:
    res = PropertyResult("gi_identity", True)
    counts = {"equal-length": 0, "unequal-length": 0}
    worst = 0.0
    for s in _seeds(seed, games):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        leaves = "truthful" if rng.random() < 0.5 else "dirichlet"
        game, machine = random_game(s, d, b, players=2, continuation="optimal",
                                    constant_sum=True, leaves=leaves)
        for play in game.plays():
            chk = check_gi_identity(game, machine, play)
            counts[chk.equation] += 1
            worst = max(worst, chk.residual)
            res.instances += 1
            if chk.residual >= tol:
                res.violations += 1
    res.passed = res.violations == 0
    res.detail = f"equal={counts['equal-length']},unequal={counts['unequal-length']},max_residual={worst:.3g}"
    return res


def counterexample_game(kind: str) -> tuple[GameTree, MachineProfile]:
    """One-player, two-action games on which outcome-only or loss-only scoring breaks.

    ``gpl-only``: both actions rated equally but rewards differ.
    ``reward-only``: equal rewards but the machine rates one action a loss.
    """
    s = CHESS
    win, draw, loss = (OutcomeDistribution.point_mass(k, 3) for k in range(3))
    if kind == "gpl-only":
        rewards, dists = (1.0, 0.0), (draw, draw)
    elif kind == "reward-only":
        rewards, dists = (1.0, 1.0), (win, loss)
    else:
        raise ValueError(f"no counterexample for {kind!r}")
    nodes = (Node(owner=0, children=(1, 2)), Node(rewards=(rewards[0],)), Node(rewards=(rewards[1],)))
    game = GameTree(nodes, 1, s)
    machine = MachineProfile(({(0, 0): dists[0], (0, 1): dists[1]},), ({0: dists[0], 1: dists[0], 2: dists[1]},))
    return game, machine


def check_mechanism_consistency(seed: int, games: int, mech: Mechanism, depth: int = 4,
                                branch: int = 3) -> PropertyResult:
    """Linear mechanisms with positive weights must never violate; others must on a constructed case."""
    res = PropertyResult("consistency", True)
    for s in _seeds(seed, games):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        game, _ = random_game(s, d, b, players=rng.randint(1, 2))
        machine = random_machine(game, s + 1)
        res.instances += 1
        if check_consistency(mech, game, machine):
            res.violations += 1
    if mech.linear_positive:
        res.passed = res.violations == 0
    else:
        kind = "gpl-only" if mech.alpha == 0 else "reward-only"
        game, machine = counterexample_game(kind)
        found = len(check_consistency(mech, game, machine))
        res.passed = found > 0
        res.detail = f"expected_inconsistent,counterexample_violations={found}"
    return res


def check_gaming_proofness(seed: int, scenarios: int, depth: int = 4, branch: int = 3) -> PropertyResult:
    res = PropertyResult("gaming_proofness", True)
    implied = 0
    for s in _seeds(seed, scenarios):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        game, _ = random_game(s, d, max(b, 2), players=rng.randint(1, 2))
        prior = random_machine(game, s + 1)
        believed = prior if rng.random() < 0.2 else random_machine(game, s + 2)
        interior = [x for x, n in enumerate(game.nodes) if not n.terminal]
        x = rng.choice(interior)
        gp = gaming_proofness_margins(game, x, prior, believed)
        res.instances += 1
        if not gp.holds:
            continue
        implied += 1
        prefix = _prefixes(game)[x]
        base = prefix_egi(game, prefix + ((x, gp.human_optimal),), prior, believed, gp.player)
        for b_alt in gp.margins:
            alt = prefix_egi(game, prefix + ((x, b_alt),), prior, believed, gp.player)
            if alt > base + CMP_TOL:
                res.violations += 1
    res.passed = res.violations == 0
    res.detail = f"margins_nonnegative={implied}"
    return res


def check_dynamic_consistency(seed: int, games: int, depth: int = 4, branch: int = 3) -> PropertyResult:
    res = PropertyResult("dynamic_consistency", True)
    for s in _seeds(seed, games):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        cont = rng.choice(("uniform", "optimal"))
        game, machine = random_game(s, d, b, players=rng.randint(1, 2), continuation=cont)
        res.instances += 1
        if not is_dynamically_consistent(game, machine)[0]:
            res.violations += 1
    res.passed = res.violations == 0
    return res


def check_extremes(seed: int, games: int, mech: Mechanism = GI, depth: int = 4, branch: int = 3) -> PropertyResult:
    res = PropertyResult("extremes_bracket", True)
    for s in _seeds(seed, games):
        rng = random.Random(s)
        d, b = _shape(rng, depth, branch)
        game, _ = random_game(s, d, b, players=rng.randint(1, 2))
        machine = random_machine(game, s + 1)
        play = maximally_intelligent_play(game, machine, mech)
        for i, (lo, hi) in enumerate(lab_extremes(game, machine, mech)):
            res.instances += 1
            sc = mech.score(game, play, machine, i)
            if not lo - CMP_TOL <= sc <= hi + CMP_TOL:
                res.violations += 1
    res.passed = res.violations == 0
    return res


def run_lab(seed: int, games: int, depth: int = 4, branch: int = 3, mech: Mechanism = GI) -> list[PropertyResult]:
    """The full property suite, each property on its own derived seed stream."""
    sub = _seeds(seed, 6)
    return [
        check_maximal_intelligence(sub[0], games, depth, branch, mech),
        check_identity(sub[1], games, depth, branch),
        check_mechanism_consistency(sub[2], games, mech, depth, branch),
        check_gaming_proofness(sub[3], games * 5, depth, branch),
        check_dynamic_consistency(sub[4], games, depth, branch),
        check_extremes(sub[5], games, mech, depth, branch),
    ]
