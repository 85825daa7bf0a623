"""Seeded random instance generators for tests and the acceptance suite."""

from __future__ import annotations

import random
from fractions import Fraction

from .arena import Arena, EnergySpec, closed_strongly_connected_sets, make_arena
from .guarantees import GraphGame
from .orders import PreferenceProfile, StrictWeakOrder, forbidden_pattern, linear_order, order_from_groups
from .winlose import Muller, Parity, WinLoseGame
from .extensive import Decision, Leaf, TreeGame


def random_arena(rng: random.Random, n_vertices: int, players) -> Arena:
    players = list(players)
    vertices = [f"v{i}" for i in range(n_vertices)]
    edges = set()
    for v in vertices:
        k = rng.randint(1, min(2, n_vertices) if rng.random() < 0.6 else n_vertices)
        for w in rng.sample(vertices, k):
            edges.add((v, w))
    owner = {v: rng.choice(players) for v in vertices}
    # each player should own at least a chance to act when possible
    start = rng.choice(vertices)
    return make_arena(players, vertices, edges, owner, start)


def random_swo(rng: random.Random, outcomes) -> StrictWeakOrder:
    outcomes = list(outcomes)
    rng.shuffle(outcomes)
    groups = []
    current = [outcomes[0]]
    for o in outcomes[1:]:
        if rng.random() < 0.3:
            current.append(o)
        else:
            groups.append(current)
            current = [o]
    groups.append(current)
    return order_from_groups(groups)


def random_linear(rng: random.Random, outcomes) -> StrictWeakOrder:
    outcomes = list(outcomes)
    rng.shuffle(outcomes)
    return linear_order(outcomes)


def random_profile(rng: random.Random, players, outcomes, linear=False) -> PreferenceProfile:
    orders = {
        p: (random_linear(rng, outcomes) if linear else random_swo(rng, outcomes))
        for p in players
    }
    return PreferenceProfile(tuple(outcomes), orders)


def pattern_free_profile(rng: random.Random, players, outcomes) -> PreferenceProfile:
    while True:
        profile = random_profile(rng, players, outcomes, linear=True)
        if forbidden_pattern(profile) is None:
            return profile


def inverse_pair_profile(rng: random.Random, outcomes, players=("A", "B")) -> PreferenceProfile:
    a, b = players
    oa = random_swo(rng, outcomes)
    return PreferenceProfile(tuple(outcomes), {a: oa, b: oa.inverse()})


def random_outcome_map(rng: random.Random, arena: Arena, outcomes) -> dict:
    return {
        s: rng.choice(list(outcomes))
        for s in sorted(closed_strongly_connected_sets(arena), key=lambda s: sorted(map(str, s)))
    }


def random_graph_game(
    rng: random.Random,
    n_vertices: int,
    players,
    outcomes,
    linear=False,
    profile: PreferenceProfile | None = None,
) -> GraphGame:
    arena = random_arena(rng, n_vertices, players)
    if profile is None:
        profile = random_profile(rng, players, outcomes, linear=linear)
    return GraphGame(arena, random_outcome_map(rng, arena, outcomes), profile)


def random_parity_game(rng: random.Random, n_vertices: int, max_priority: int) -> WinLoseGame:
    arena = random_arena(rng, n_vertices, ["P0", "P1"])
    priority = {v: rng.randint(0, max_priority) for v in arena.vertices}
    return WinLoseGame(arena, Parity(priority), protagonist="P0")


def random_muller_game(rng: random.Random, n_vertices: int) -> WinLoseGame:
    arena = random_arena(rng, n_vertices, ["P0", "P1"])
    subsets = sorted(closed_strongly_connected_sets(arena), key=lambda s: sorted(map(str, s)))
    family = frozenset(s for s in subsets if rng.random() < 0.5)
    return WinLoseGame(arena, Muller(family), protagonist="P0")


def random_payoff_tree(rng: random.Random, depth: int, players, max_branch: int = 3) -> TreeGame:
    players = list(players)

    def leaf():
        return Leaf(payoffs={
            p: Fraction(rng.randint(0, 8), 8) for p in players
        })

    def node(d):
        if d == 0 or rng.random() < 0.15:
            return leaf()
        k = rng.randint(2, max_branch)
        return Decision(rng.choice(players), tuple(node(d - 1) for _ in range(k)))

    root = node(depth)
    if isinstance(root, Leaf):
        root = Decision(rng.choice(players), (leaf(), leaf()))
    return TreeGame(root, tuple(players))


def random_energy_spec(rng: random.Random, arena: Arena, span: int = 2) -> EnergySpec:
    weights = {
        p: {v: rng.randint(-span, span) for v in arena.vertices} for p in arena.players
    }
    caps = {}
    for p in arena.players:
        lo = -rng.randint(0, span + 1)
        hi = rng.randint(0, span + 1)
        caps[p] = (lo, hi)
    priorities = {v: rng.randint(0, 3) for v in arena.vertices}
    return EnergySpec(weights, caps, priorities)
