"""Arenas, lassos, finite-memory strategy machines and the energy product.

An arena is a finite directed graph with no dead ends; each vertex belongs
to exactly one player and a token is moved along edges forever.  Plays of
finite-memory profiles are ultimately periodic, so they are represented as
lassos (stem + repeated cycle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping

from .errors import InvalidArenaError, InvalidInputError, TooLargeError

Vertex = Hashable
Player = Hashable

DEFAULT_FEASIBLE_BOUND = 20
DEFAULT_PRODUCT_BOUND = 100_000


def skey(x: Any) -> str:
    """Stable sort key for mixed-type identifiers."""
    return f"{type(x).__name__}:{x}"


@dataclass(frozen=True, eq=False)
class Arena:
    """Finite directed game graph with per-vertex ownership and a start vertex."""

    players: tuple
    vertices: tuple
    edges: frozenset
    owner: Mapping
    start: Vertex
    _succ: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        succ: dict = {v: [] for v in self.vertices}
        for (u, w) in sorted(self.edges, key=lambda e: (skey(e[0]), skey(e[1]))):
            succ[u].append(w)
        object.__setattr__(self, "_succ", {v: tuple(ws) for v, ws in succ.items()})

    def successors(self, v: Vertex) -> tuple:
        return self._succ[v]

    def owned_by(self, player: Player) -> tuple:
        return tuple(v for v in sorted(self.vertices, key=skey) if self.owner[v] == player)

    def sorted_vertices(self) -> tuple:
        return tuple(sorted(self.vertices, key=skey))

    def sorted_players(self) -> tuple:
        return tuple(sorted(self.players, key=skey))


def check_arena_parts(players, vertices, edges, owner, start) -> list:
    """Collect every structural violation of the arena invariants."""
    errors = []
    seen = set()
    for v in vertices:
        if v in seen:
            errors.append(("DuplicateVertex", f"vertex {v!r} declared twice"))
        seen.add(v)
    pseen = set()
    for p in players:
        if p in pseen:
            errors.append(("DuplicatePlayer", f"player {p!r} declared twice"))
        pseen.add(p)
    vset = set(vertices)
    for (u, w) in edges:
        if u not in vset or w not in vset:
            errors.append(("DanglingEdge", f"edge ({u!r}, {w!r}) references undeclared vertex"))
    for v in vertices:
        if v not in owner:
            errors.append(("UnknownOwner", f"vertex {v!r} has no owner"))
        elif owner[v] not in pseen:
            errors.append(("UnknownOwner", f"vertex {v!r} owned by undeclared player {owner[v]!r}"))
    if start not in vset:
        errors.append(("MissingStart", f"start vertex {start!r} is not declared"))
    out = {v: 0 for v in vertices}
    for (u, w) in edges:
        if u in out and w in vset:
            out[u] += 1
    for v in sorted(vertices, key=skey):
        if out.get(v, 0) == 0:
            errors.append(("DeadEndVertex", f"vertex {v!r} has no outgoing edge"))
    return errors


def make_arena(players, vertices, edges, owner, start) -> Arena:
    """Build an arena, raising ``InvalidArenaError`` with all violations."""
    players = tuple(players)
    vertices = tuple(vertices)
    edges = frozenset((u, w) for (u, w) in edges)
    errors = check_arena_parts(players, vertices, edges, owner, start)
    if errors:
        raise InvalidArenaError(errors)
    return Arena(players, vertices, edges, dict(owner), start)


def validate_arena(doc: Mapping) -> Arena:
    """Parse and validate the arena JSON document form.

    Expected shape::

        {"players": [...], "vertices": [{"id": ..., "owner": ...}, ...],
         "edges": [[src, dst], ...], "start": ...}
    """
    if not isinstance(doc, Mapping):
        raise InvalidInputError("arena document must be an object")
    try:
        players = list(doc["players"])
        vertex_docs = list(doc["vertices"])
        edge_docs = list(doc["edges"])
        start = doc["start"]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"arena document missing field: {exc}") from exc
    vertices = []
    owner = {}
    for vd in vertex_docs:
        if not isinstance(vd, Mapping) or "id" not in vd or "owner" not in vd:
            raise InvalidInputError(f"vertex entry {vd!r} must have 'id' and 'owner'")
        vertices.append(vd["id"])
        owner[vd["id"]] = vd["owner"]
    edges = []
    for ed in edge_docs:
        if not isinstance(ed, (list, tuple)) or len(ed) != 2:
            raise InvalidInputError(f"edge entry {ed!r} must be a [src, dst] pair")
        edges.append((ed[0], ed[1]))
    return make_arena(players, vertices, edges, owner, start)


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic play: the infinite play is ``stem . cycle^omega``."""

    stem: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise InvalidInputError("lasso cycle must be non-empty")

    def sequence(self) -> tuple:
        return self.stem + self.cycle

    def validate(self, arena: Arena) -> None:
        seq = self.sequence()
        if seq[0] != arena.start:
            raise InvalidInputError(f"lasso must begin at the start vertex, got {seq[0]!r}")
        for u, w in zip(seq, seq[1:]):
            if (u, w) not in arena.edges:
                raise InvalidInputError(f"lasso uses missing edge ({u!r}, {w!r})")
        if (self.cycle[-1], self.cycle[0]) not in arena.edges:
            raise InvalidInputError("lasso cycle does not close")


def inf_set(lasso: Lasso) -> frozenset:
    """Vertices visited infinitely often by the lasso's play."""
    return frozenset(lasso.cycle)


def primitive_cycle(cycle: tuple) -> tuple:
    """Reduce a cycle to its primitive period."""
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            return cycle[:d]
    return cycle


@dataclass(frozen=True, eq=False)
class StrategyMachine:
    """Moore-style finite-memory strategy for one player.

    Memory states are integers below ``2**memory_bits``; the initial state
    is 0.  The memory updates on every arrival at a vertex; the move chosen
    at an owned vertex is a function of the vertex and the updated memory.
    Missing update entries leave the memory unchanged.
    """

    player: Player
    memory_bits: int
    update: Mapping
    choice: Mapping
    init: int = 0

    def next_state(self, v: Vertex, q: int) -> int:
        return self.update.get((v, q), q)

    def move(self, v: Vertex, q: int) -> Vertex:
        try:
            return self.choice[(v, q)]
        except KeyError:
            raise InvalidInputError(
                f"machine for {self.player!r} has no choice at vertex {v!r}, state {q}"
            ) from None

    def has_choice(self, v: Vertex, q: int) -> bool:
        return (v, q) in self.choice

    def state_count(self) -> int:
        used = {self.init}
        used.update(q for (_, q) in self.update)
        used.update(self.update.values())
        used.update(q for (_, q) in self.choice)
        return len(used)


def memoryless_machine(player: Player, choices: Mapping) -> StrategyMachine:
    """Machine with no memory, picking a fixed successor per owned vertex."""
    return StrategyMachine(player, 0, {}, {(v, 0): w for v, w in choices.items()})


def fallback_machine(arena: Arena, player: Player) -> StrategyMachine:
    """Memoryless machine picking the first successor everywhere."""
    return memoryless_machine(player, {v: arena.successors(v)[0] for v in arena.owned_by(player)})


def bits_for(n_states: int) -> int:
    return 0 if n_states <= 1 else math.ceil(math.log2(n_states))


def minimize_machine(machine: StrategyMachine, vertices: Iterable, owned: Iterable) -> StrategyMachine:
    """Behavioural minimisation with canonical state numbering.

    States reachable from the initial state are merged when they prescribe
    the same moves at every owned vertex and their successors under every
    arrival are merged as well.  The result is renumbered by breadth-first
    discovery so equal behaviours serialise identically.
    """
    vs = tuple(sorted(vertices, key=skey))
    ow = tuple(sorted(owned, key=skey))
    reachable = [machine.init]
    seen = {machine.init}
    i = 0
    while i < len(reachable):
        q = reachable[i]
        i += 1
        for v in vs:
            nq = machine.next_state(v, q)
            if nq not in seen:
                seen.add(nq)
                reachable.append(nq)
    sig = {q: tuple(machine.choice.get((v, q)) for v in ow) for q in reachable}
    blocks = {}
    for q in reachable:
        blocks.setdefault(sig[q], []).append(q)
    part = {q: idx for idx, (_, qs) in enumerate(sorted(blocks.items(), key=lambda kv: str(kv[0]))) for q in qs}
    while True:
        refined = {}
        for q in reachable:
            key = (part[q], tuple(part[machine.next_state(v, q)] for v in vs))
            refined.setdefault(key, []).append(q)
        if len(refined) == len(set(part.values())):
            break
        part = {q: idx for idx, (_, qs) in enumerate(sorted(refined.items(), key=lambda kv: str(kv[0]))) for q in qs}
    # canonical numbering by BFS from the initial block
    order = {}
    queue = [part[machine.init]]
    order[part[machine.init]] = 0
    rep = {}
    for q in reachable:
        rep.setdefault(part[q], q)
    while queue:
        b = queue.pop(0)
        q = rep[b]
        for v in vs:
            nb = part[machine.next_state(v, q)]
            if nb not in order:
                order[nb] = len(order)
                queue.append(nb)
    update = {}
    choice = {}
    for b, q in sorted(rep.items(), key=lambda kv: order[kv[0]]):
        for v in vs:
            nb = order[part[machine.next_state(v, q)]]
            if nb != order[b]:
                update[(v, order[b])] = nb
        for v in ow:
            w = machine.choice.get((v, q))
            if w is not None:
                choice[(v, order[b])] = w
    return StrategyMachine(machine.player, bits_for(len(order)), update, choice, 0)


@dataclass(frozen=True)
class StrategyProfile:
    """One strategy machine per player."""

    machines: Mapping

    def players(self) -> tuple:
        return tuple(sorted(self.machines, key=skey))

    def validate(self, arena: Arena) -> None:
        if set(self.machines) != set(arena.players):
            raise InvalidInputError(
                f"profile players {sorted(map(str, self.machines))} do not match "
                f"arena players {sorted(map(str, arena.players))}"
            )
        for p, m in self.machines.items():
            if m.player != p:
                raise InvalidInputError(f"machine under key {p!r} claims player {m.player!r}")


def walk_configurations(
    arena: Arena,
    profile: StrategyProfile,
    start: Vertex | None = None,
    init_mems: Mapping | None = None,
):
    """Run the joint deterministic walk until a (vertex, memories) pair repeats.

    Returns ``(configs, loop_index)`` where ``configs`` is the list of
    visited pairs and ``configs[loop_index]`` is the first repeated pair.
    ``init_mems`` lets the walk resume from mid-flight memory contents.
    """
    order = profile.players()
    machines = [profile.machines[p] for p in order]
    v = arena.start if start is None else start
    if init_mems is None:
        mem = [m.init for m in machines]
    else:
        mem = [init_mems[p] for p in order]
    configs = []
    index = {}
    while True:
        cfg = (v, tuple(mem))
        if cfg in index:
            return configs, index[cfg]
        index[cfg] = len(configs)
        configs.append(cfg)
        own = arena.owner[v]
        w = machines[order.index(own)].move(v, mem[order.index(own)])
        if (v, w) not in arena.edges:
            raise InvalidInputError(f"machine for {own!r} chose non-edge ({v!r}, {w!r})")
        mem = [m.next_state(w, q) for m, q in zip(machines, mem)]
        v = w


def induced_lasso(arena: Arena, profile: StrategyProfile, start: Vertex | None = None) -> Lasso:
    """Deterministic play of a profile, folded into a lasso.

    The cycle closes at the first repeated (vertex, joint memory) pair and
    is reduced to its primitive period after projecting to vertices.
    """
    configs, loop = walk_configurations(arena, profile, start)
    stem = tuple(v for v, _ in configs[:loop])
    cycle = primitive_cycle(tuple(v for v, _ in configs[loop:]))
    return Lasso(stem, cycle)


def closed_strongly_connected_sets(arena: Arena, max_vertices: int = DEFAULT_FEASIBLE_BOUND) -> frozenset:
    """All non-empty vertex sets a play can eventually stay in while covering.

    A set qualifies when its induced subgraph is strongly connected and
    every member has a successor inside the set; reachability is not
    required, so this is the union of the feasible families over all
    source vertices.
    """
    vs = arena.sorted_vertices()
    n = len(vs)
    if n > max_vertices:
        raise TooLargeError(f"{n} vertices exceeds the bound {max_vertices}")
    idx = {v: i for i, v in enumerate(vs)}
    adj = [0] * n
    for (u, w) in arena.edges:
        adj[idx[u]] |= 1 << idx[w]
    result = []
    for mask in range(1, 1 << n):
        if _closed_and_strongly_connected(mask, adj, n):
            result.append(frozenset(vs[i] for i in range(n) if mask >> i & 1))
    return frozenset(result)


def feasible_inf_sets(arena: Arena, source: Vertex, max_vertices: int = DEFAULT_FEASIBLE_BOUND) -> frozenset:
    """All sets of vertices some play from ``source`` visits infinitely often.

    A non-empty set qualifies exactly when it is reachable from ``source``,
    its induced subgraph is strongly connected, and every member keeps a
    successor inside the set.
    """
    vs = arena.sorted_vertices()
    n = len(vs)
    if n > max_vertices:
        raise TooLargeError(f"{n} vertices exceeds the bound {max_vertices}")
    idx = {v: i for i, v in enumerate(vs)}
    adj = [0] * n
    for (u, w) in arena.edges:
        adj[idx[u]] |= 1 << idx[w]
    # forward reachability from the source
    reach = 1 << idx[source]
    frontier = reach
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= adj[b.bit_length() - 1]
            f ^= b
        frontier = nxt & ~reach
        reach |= nxt
    result = []
    for mask in range(1, 1 << n):
        if not (mask & reach):
            continue
        if not _closed_and_strongly_connected(mask, adj, n):
            continue
        result.append(frozenset(vs[i] for i in range(n) if mask >> i & 1))
    return frozenset(result)


def _closed_and_strongly_connected(mask: int, adj: list, n: int) -> bool:
    members = []
    m = mask
    while m:
        b = m & -m
        members.append(b.bit_length() - 1)
        m ^= b
    for i in members:
        if not (adj[i] & mask):
            return False
    # forward reach inside the set from the lowest member must cover the set
    start = 1 << members[0]
    fwd = start
    frontier = start
    while frontier:
        nxt = 0
        f = frontier
        while f:
            b = f & -f
            nxt |= adj[b.bit_length() - 1] & mask
            f ^= b
        frontier = nxt & ~fwd
        fwd |= nxt
    if fwd != mask:
        return False
    # backward reach: members that can reach the lowest member
    back = start
    changed = True
    while changed:
        changed = False
        for i in members:
            bit = 1 << i
            if not (back & bit) and (adj[i] & back):
                back |= bit
                changed = True
    return back == mask


@dataclass(frozen=True)
class EnergySpec:
    """Per-player vertex weights with budget caps, plus vertex priorities."""

    weights: Mapping  # player -> {vertex: int}
    caps: Mapping     # player -> (lo, hi) with lo <= 0 <= hi
    priorities: Mapping  # vertex -> int

    def validate(self, arena: Arena) -> None:
        for p in arena.players:
            lo, hi = self.caps[p]
            if not (lo <= 0 <= hi):
                raise InvalidInputError(f"caps for {p!r} must satisfy lo <= 0 <= hi, got ({lo}, {hi})")
        for v in arena.vertices:
            if v not in self.priorities:
                raise InvalidInputError(f"vertex {v!r} has no priority")


def clamp_budget(value: int, lo: int, hi: int) -> int:
    """One step of the capped budget recurrence."""
    return max(min(value, hi), lo)


@dataclass(frozen=True)
class EnergyProduct:
    """Budget-tracking product of an arena with an energy specification.

    Product vertices are ``(vertex, budgets, minima)`` triples where budgets
    and minima are per-player tuples in sorted player order.  Minima never
    increase along edges, so any outcome read off the priorities and the
    minima is a function of the set of product vertices seen infinitely
    often.
    """

    arena: Arena
    base_vertex: Mapping
    budgets: Mapping
    min_so_far: Mapping
    priority: Mapping


def energy_product(arena: Arena, spec: EnergySpec, max_states: int = DEFAULT_PRODUCT_BOUND) -> EnergyProduct:
    """Unfold budgets into the arena, clamping into each player's caps.

    Visiting a vertex charges its weight:  ``b' = clamp(b + weight, lo, hi)``
    starting from budget 0 before the start vertex is charged.
    """
    spec.validate(arena)
    players = arena.sorted_players()
    caps = {p: spec.caps[p] for p in players}
    weights = {p: spec.weights.get(p, {}) for p in players}

    def charge(budgets: tuple, v: Vertex) -> tuple:
        return tuple(
            clamp_budget(b + weights[p].get(v, 0), *caps[p]) for p, b in zip(players, budgets)
        )

    zero = tuple(0 for _ in players)
    b0 = charge(zero, arena.start)
    m0 = tuple(min(0, b) for b in b0)
    start = (arena.start, b0, m0)
    vertices = [start]
    seen = {start}
    edges = set()
    i = 0
    while i < len(vertices):
        pv = vertices[i]
        i += 1
        v, budgets, minima = pv
        for w in arena.successors(v):
            nb = charge(budgets, w)
            nm = tuple(min(m, b) for m, b in zip(minima, nb))
            pw = (w, nb, nm)
            edges.add((pv, pw))
            if pw not in seen:
                if len(seen) >= max_states:
                    raise TooLargeError(f"energy product exceeds {max_states} states")
                seen.add(pw)
                vertices.append(pw)
    owner = {pv: arena.owner[pv[0]] for pv in vertices}
    prod = Arena(tuple(arena.players), tuple(vertices), frozenset(edges), owner, start)
    return EnergyProduct(
        arena=prod,
        base_vertex={pv: pv[0] for pv in vertices},
        budgets={pv: pv[1] for pv in vertices},
        min_so_far={pv: pv[2] for pv in vertices},
        priority={pv: spec.priorities[pv[0]] for pv in vertices},
    )
