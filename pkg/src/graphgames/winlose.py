"""Two-player win/lose games on arenas and their solvers.

Provides the reachability attractor, a recursive parity solver (min-parity:
the protagonist wins iff the least priority seen infinitely often is even),
a Muller solver through a latest-appearance-record reduction to parity, and
an exhaustive machine-enumeration oracle that never asserts determinacy
beyond the memory bound it was given.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable, Iterable, Mapping

from .arena import (
    Arena,
    StrategyMachine,
    bits_for,
    fallback_machine,
    memoryless_machine,
    minimize_machine,
    skey,
)
from .errors import CapExceededError, InvalidInputError, TooLargeError

DEFAULT_MULLER_BOUND = 100_000
DEFAULT_BRUTE_CAP = 1_000_000


@dataclass(frozen=True)
class Reachability:
    targets: frozenset


@dataclass(frozen=True)
class Safety:
    safe: frozenset


@dataclass(frozen=True)
class Parity:
    priority: Mapping  # vertex -> non-negative int


@dataclass(frozen=True)
class Muller:
    family: frozenset  # of frozensets of vertices


@dataclass(frozen=True, eq=False)
class WinLoseGame:
    """Arena split into a protagonist side and the complementary side."""

    arena: Arena
    objective: object
    protagonist: object = None

    def sides(self) -> tuple:
        players = self.arena.players
        if len(players) != 2:
            raise InvalidInputError(f"win/lose game needs exactly 2 players, got {len(players)}")
        p0 = self.protagonist if self.protagonist is not None else players[0]
        if p0 not in players:
            raise InvalidInputError(f"protagonist {p0!r} is not a player")
        p1 = players[0] if players[1] == p0 else players[1]
        return (p0, p1)

    def side_of(self, v) -> int:
        p0, _ = self.sides()
        return 0 if self.arena.owner[v] == p0 else 1


@dataclass(frozen=True)
class SolveResult:
    """Winning regions with finite-memory witnesses; the regions partition V."""

    win0: frozenset
    win1: frozenset
    strategy0: StrategyMachine
    strategy1: StrategyMachine
    memory_bits_used: int


@dataclass(frozen=True)
class BruteForceResult:
    """Regions certified by machine enumeration at a fixed memory bound.

    Vertices where neither side has a machine beating every opposing
    machine within the bound are listed in ``not_determined`` instead of
    being forced into a region.
    """

    win0: frozenset
    win1: frozenset
    not_determined: frozenset


def _restricted_attractor(vs: frozenset, succ: Callable, side_of: Callable, side: int, target: Iterable):
    """Least fixpoint attractor within the vertex set ``vs``.

    Returns ``(attractor, strategy, level)``; the strategy maps each newly
    attracted vertex of ``side`` to a successor one level closer to the
    target.
    """
    preds: dict = {v: [] for v in vs}
    remaining = {}
    for v in vs:
        cnt = 0
        for w in succ(v):
            if w in vs:
                preds[w].append(v)
                cnt += 1
        remaining[v] = cnt
    attr = set(t for t in target if t in vs)
    level = {v: 0 for v in attr}
    strategy: dict = {}
    queue = deque(sorted(attr, key=skey))
    while queue:
        w = queue.popleft()
        for v in sorted(preds[w], key=skey):
            if v in attr:
                continue
            if side_of(v) == side:
                attr.add(v)
                level[v] = level[w] + 1
                strategy[v] = w
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    attr.add(v)
                    level[v] = level[w] + 1
                    queue.append(v)
    return attr, strategy, level


def attractor(arena: Arena, side, target: Iterable):
    """Vertices from which ``side`` can force a visit to ``target``.

    Returns the attractor set together with a memoryless machine whose
    moves strictly decrease the attractor level.
    """
    target = set(target)
    for t in target:
        if t not in set(arena.vertices):
            raise InvalidInputError(f"target vertex {t!r} not in arena")
    vs = frozenset(arena.vertices)

    def side_of(v):
        return 0 if arena.owner[v] == side else 1

    attr, strategy, _ = _restricted_attractor(vs, arena.successors, side_of, 0, target)
    return frozenset(attr), memoryless_machine(side, strategy)


def _zielonka(vs: frozenset, succ: Callable, side_of: Callable, prio: Mapping):
    if not vs:
        return set(), set(), {}, {}
    p = min(prio[v] for v in vs)
    i = p % 2
    P = {v for v in vs if prio[v] == p}

    def sub_succ(v):
        return tuple(w for w in succ(v) if w in vs)

    A, astrat, _ = _restricted_attractor(vs, sub_succ, side_of, i, P)
    W0, W1, s0, s1 = _zielonka(frozenset(vs - A), succ, side_of, prio)
    w_opp = W1 if i == 0 else W0
    if not w_opp:
        si = dict(s0 if i == 0 else s1)
        si.update(astrat)
        for v in sorted(P, key=skey):
            if side_of(v) == i and v not in si:
                si[v] = next(w for w in sub_succ(v))
        if i == 0:
            return set(vs), set(), si, {}
        return set(), set(vs), {}, si
    B, bstrat, _ = _restricted_attractor(vs, sub_succ, side_of, 1 - i, w_opp)
    W0b, W1b, s0b, s1b = _zielonka(frozenset(vs - B), succ, side_of, prio)
    s_opp = dict(s1 if i == 0 else s0)
    s_opp.update(bstrat)
    s_opp.update(s1b if i == 0 else s0b)
    s_i = dict(s0b if i == 0 else s1b)
    if i == 0:
        return set(W0b), set(W1b) | set(B), s_i, s_opp
    return set(W0b) | set(B), set(W1b), s_opp, s_i


def _zielonka_regions(vertices: Iterable, succ: Callable, side_of: Callable, prio: Mapping):
    vs = frozenset(vertices)
    limit = max(sys.getrecursionlimit(), 4 * len(vs) + 1000)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(limit)
    try:
        return _zielonka(vs, succ, side_of, prio)
    finally:
        sys.setrecursionlimit(old)


def _fill_choices(arena: Arena, player, partial: Mapping) -> StrategyMachine:
    choices = {}
    for v in arena.owned_by(player):
        choices[v] = partial.get(v, arena.successors(v)[0])
    return memoryless_machine(player, choices)


def solve_parity(game: WinLoseGame) -> SolveResult:
    """Solve a parity game by the classical recursive region decomposition.

    Both winning strategies are memoryless; the regions always partition
    the vertex set.
    """
    if not isinstance(game.objective, Parity):
        raise InvalidInputError("solve_parity requires a Parity objective")
    arena = game.arena
    prio = game.objective.priority
    for v in arena.vertices:
        if v not in prio:
            raise InvalidInputError(f"vertex {v!r} has no priority")
    p0, p1 = game.sides()
    W0, W1, s0, s1 = _zielonka_regions(arena.vertices, arena.successors, game.side_of, prio)
    return SolveResult(
        win0=frozenset(W0),
        win1=frozenset(W1),
        strategy0=_fill_choices(arena, p0, s0),
        strategy1=_fill_choices(arena, p1, s1),
        memory_bits_used=0,
    )


def solve_reachability(game: WinLoseGame) -> SolveResult:
    arena = game.arena
    p0, p1 = game.sides()
    targets = set(game.objective.targets)
    attr, strat, _ = _restricted_attractor(
        frozenset(arena.vertices), arena.successors, game.side_of, 0, targets
    )
    avoid = {}
    for v in arena.owned_by(p1):
        if v not in attr:
            avoid[v] = next(w for w in arena.successors(v) if w not in attr)
    return SolveResult(
        win0=frozenset(attr),
        win1=frozenset(set(arena.vertices) - attr),
        strategy0=_fill_choices(arena, p0, strat),
        strategy1=_fill_choices(arena, p1, avoid),
        memory_bits_used=0,
    )


def solve_safety(game: WinLoseGame) -> SolveResult:
    arena = game.arena
    p0, p1 = game.sides()
    bad = set(arena.vertices) - set(game.objective.safe)
    danger, dstrat, _ = _restricted_attractor(
        frozenset(arena.vertices), arena.successors, game.side_of, 1, bad
    )
    stay = {}
    for v in arena.owned_by(p0):
        if v not in danger:
            stay[v] = next(w for w in arena.successors(v) if w not in danger)
    return SolveResult(
        win0=frozenset(set(arena.vertices) - danger),
        win1=frozenset(danger),
        strategy0=_fill_choices(arena, p0, stay),
        strategy1=_fill_choices(arena, p1, dstrat),
        memory_bits_used=0,
    )


class LarContext:
    """Latest-appearance records over an arena's vertex set.

    A record is a permutation of the vertices; visiting ``v`` moves it to
    the front.  The fresh record (sorted vertices, nothing visited) doubles
    as the all-zero machine state so machines can start at any vertex.
    """

    def __init__(self, arena: Arena):
        self.vertices = arena.sorted_vertices()
        self.n = len(self.vertices)
        self.r_init = tuple(self.vertices)

    def process(self, r: tuple, v) -> tuple:
        if r and r[0] == v:
            return r
        return (v,) + tuple(x for x in r if x != v)

    def reachable_records(self, arena: Arena) -> tuple:
        seeds = sorted({self.process(self.r_init, v) for v in self.vertices})
        seen = set(seeds)
        queue = list(seeds)
        i = 0
        while i < len(queue):
            r = queue[i]
            i += 1
            for w in arena.successors(r[0]):
                nr = self.process(r, w)
                if nr not in seen:
                    seen.add(nr)
                    queue.append(nr)
        return tuple(sorted(seen))


def _lar_machine(arena, ctx, records, node_strategy, player, owned) -> StrategyMachine:
    """Pull a positional product strategy back to a record-memory machine."""
    all_records = [ctx.r_init] + [r for r in records if r != ctx.r_init]
    rid = {r: i for i, r in enumerate(all_records)}
    update = {}
    choice = {}
    for r in all_records:
        q = rid[r]
        for w in ctx.vertices:
            nr = ctx.process(r, w)
            if nr in rid and rid[nr] != q:
                update[(w, q)] = rid[nr]
        for v in owned:
            pr = ctx.process(r, v)
            target = node_strategy.get(("m", pr))
            if target is not None:
                choice[(v, q)] = target[2]
            else:
                choice[(v, q)] = arena.successors(v)[0]
    machine = StrategyMachine(player, bits_for(len(all_records)), update, choice, 0)
    return minimize_machine(machine, ctx.vertices, owned)


def solve_muller(game: WinLoseGame, max_product_states: int = DEFAULT_MULLER_BOUND) -> SolveResult:
    """Solve a Muller game via records and a parity product.

    The product tracks the appearance record; each move is routed through a
    transition node carrying the priority derived from the hit position, so
    the parity solver sees a plain vertex-priority game.  Strategies come
    back as record-memory machines, minimised and canonically numbered.
    """
    if not isinstance(game.objective, Muller):
        raise InvalidInputError("solve_muller requires a Muller objective")
    arena = game.arena
    family = frozenset(frozenset(s) for s in game.objective.family)
    p0, p1 = game.sides()
    ctx = LarContext(arena)
    n = ctx.n
    records = ctx.reachable_records(arena)
    total = sum(1 + len(arena.successors(r[0])) for r in records)
    if total > max_product_states:
        raise TooLargeError(f"record product needs {total} states, bound is {max_product_states}")
    succ: dict = {}
    prio: dict = {}
    side: dict = {}
    for r in records:
        m = ("m", r)
        prio[m] = 2 * n
        side[m] = 0 if arena.owner[r[0]] == p0 else 1
        outs = []
        for w in arena.successors(r[0]):
            d = ("d", r, w)
            h = r.index(w) + 1
            bit = 0 if frozenset(r[:h]) in family else 1
            prio[d] = 2 * (n - h) + bit
            side[d] = 1
            succ[d] = (("m", ctx.process(r, w)),)
            outs.append(d)
        succ[m] = tuple(outs)
    nodes = tuple(succ)
    W0, W1, s0, s1 = _zielonka_regions(nodes, lambda x: succ[x], lambda x: side[x], prio)
    strat0 = {k: v for k, v in s0.items() if k[0] == "m"}
    strat1 = {k: v for k, v in s1.items() if k[0] == "m"}
    win0 = frozenset(
        v for v in arena.vertices if ("m", ctx.process(ctx.r_init, v)) in W0
    )
    win1 = frozenset(set(arena.vertices) - win0)
    m0 = _lar_machine(arena, ctx, records, strat0, p0, arena.owned_by(p0))
    m1 = _lar_machine(arena, ctx, records, strat1, p1, arena.owned_by(p1))
    return SolveResult(
        win0=win0,
        win1=win1,
        strategy0=m0,
        strategy1=m1,
        memory_bits_used=max(m0.memory_bits, m1.memory_bits),
    )


def solve(game: WinLoseGame, max_product_states: int = DEFAULT_MULLER_BOUND) -> SolveResult:
    """Dispatch on the objective kind."""
    obj = game.objective
    if isinstance(obj, Parity):
        return solve_parity(game)
    if isinstance(obj, Muller):
        return solve_muller(game, max_product_states)
    if isinstance(obj, Reachability):
        return solve_reachability(game)
    if isinstance(obj, Safety):
        return solve_safety(game)
    raise InvalidInputError(f"unknown objective {obj!r}")


def machine_count(arena: Arena, owned: tuple, bits: int) -> int:
    states = 2 ** bits
    count = 1
    if bits > 0:
        count *= states ** (len(arena.vertices) * states)
    for v in owned:
        count *= len(arena.successors(v)) ** states
    return count


def enumerate_machines(arena: Arena, player, bits: int):
    """Yield every machine of the player with at most ``bits`` memory bits."""
    owned = arena.owned_by(player)
    states = tuple(range(2 ** bits))
    vs = arena.sorted_vertices()
    update_keys = [(v, q) for v in vs for q in states] if bits > 0 else []
    choice_keys = [(v, q) for v in owned for q in states]
    choice_opts = [arena.successors(v) for (v, _) in choice_keys]
    update_opts = [states for _ in update_keys]
    for upd in iproduct(*update_opts) if update_keys else [()]:
        update = {k: t for k, t in zip(update_keys, upd) if t != k[1]}
        for ch in iproduct(*choice_opts) if choice_keys else [()]:
            choice = {k: w for k, w in zip(choice_keys, ch)}
            yield StrategyMachine(player, bits, update, choice, 0)


def _play_outcome(arena: Arena, m0: StrategyMachine, m1: StrategyMachine, start, side_of):
    """Visited set and cycle set of the deterministic two-machine play."""
    v = start
    q0, q1 = m0.init, m1.init
    seen = {}
    trail = []
    while (v, q0, q1) not in seen:
        seen[(v, q0, q1)] = len(trail)
        trail.append(v)
        m = m0 if side_of(v) == 0 else m1
        q = q0 if side_of(v) == 0 else q1
        w = m.move(v, q)
        q0 = m0.next_state(w, q0)
        q1 = m1.next_state(w, q1)
        v = w
    loop = seen[(v, q0, q1)]
    return frozenset(trail), frozenset(trail[loop:])


def _wins0(objective, visited: frozenset, cycle: frozenset) -> bool:
    if isinstance(objective, Reachability):
        return bool(objective.targets & visited)
    if isinstance(objective, Safety):
        return visited <= objective.safe
    if isinstance(objective, Parity):
        return min(objective.priority[v] for v in cycle) % 2 == 0
    if isinstance(objective, Muller):
        return cycle in objective.family
    raise InvalidInputError(f"unknown objective {objective!r}")


def brute_force_solve(game: WinLoseGame, bits: int, cap: int = DEFAULT_BRUTE_CAP) -> BruteForceResult:
    """Certify regions by enumerating all machines up to ``bits`` memory.

    A side wins a vertex iff one of its machines beats every opposing
    machine in the deterministic play started there.  The verdict is only
    meaningful against opponents within the same bound, so vertices without
    a uniform winner are reported as not determined rather than split.
    """
    arena = game.arena
    p0, p1 = game.sides()
    owned0, owned1 = arena.owned_by(p0), arena.owned_by(p1)
    c0 = machine_count(arena, owned0, bits)
    c1 = machine_count(arena, owned1, bits)
    if c0 * c1 > cap:
        raise CapExceededError(f"{c0} x {c1} machine pairs exceed cap {cap}")
    side_of = game.side_of
    machines0 = list(enumerate_machines(arena, p0, bits)) if owned0 else [fallback_machine(arena, p0)]
    machines1 = list(enumerate_machines(arena, p1, bits)) if owned1 else [fallback_machine(arena, p1)]
    family = game.objective
    cache: dict = {}

    def wins(i0: int, i1: int, v) -> bool:
        key = (i0, i1, v)
        if key not in cache:
            visited, cycle = _play_outcome(arena, machines0[i0], machines1[i1], v, side_of)
            cache[key] = _wins0(family, visited, cycle)
        return cache[key]

    win0, win1, undet = set(), set(), set()
    for v in arena.sorted_vertices():
        if any(all(wins(i0, i1, v) for i1 in range(len(machines1))) for i0 in range(len(machines0))):
            win0.add(v)
        elif any(all(not wins(i0, i1, v) for i0 in range(len(machines0))) for i1 in range(len(machines1))):
            win1.add(v)
        else:
            undet.add(v)
    return BruteForceResult(frozenset(win0), frozenset(win1), frozenset(undet))
