"""Best guarantees via one-vs-all threshold games on finite arenas.

A graph game couples an arena with a prefix-independent outcome map (a
function of the set of vertices visited infinitely often) and one strict
weak order per player.  A player's best guarantee at a vertex is the best
outcome class she can force against the coalition of everyone else; it is
computed by solving one threshold game per preference class, and each
threshold solve also yields the coalition machine that holds her to that
class (used later as a punishment).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .arena import (
    Arena,
    StrategyMachine,
    bits_for,
    closed_strongly_connected_sets,
    fallback_machine,
    feasible_inf_sets,
    minimize_machine,
    skey,
)
from .errors import InvalidInputError
from .orders import PreferenceProfile, StrictWeakOrder
from .winlose import Muller, SolveResult, WinLoseGame, solve_muller

COALITION = "coalition-vs"


@dataclass(frozen=True, eq=False)
class GraphGame:
    """Arena + outcome map on recurrence sets + preference profile."""

    arena: Arena
    outcome_map: Mapping  # frozenset of vertices -> outcome
    prefs: PreferenceProfile

    def __post_init__(self):
        if set(self.prefs.orders) != set(self.arena.players):
            raise InvalidInputError("preference profile players differ from arena players")
        for s, o in self.outcome_map.items():
            if o not in set(self.prefs.outcomes):
                raise InvalidInputError(f"outcome {o!r} for {sorted(map(str, s))} not declared")

    def validate_total(self, max_vertices: int = 20) -> None:
        """Check the outcome map covers every possible recurrence set."""
        for s in closed_strongly_connected_sets(self.arena, max_vertices):
            if s not in self.outcome_map:
                raise InvalidInputError(
                    f"outcome map undefined on recurrence set {sorted(map(str, s))}"
                )

    def realizable_outcomes(self) -> frozenset:
        """Outcomes some play from the start vertex realizes."""
        return frozenset(
            self.outcome_map[s] for s in feasible_inf_sets(self.arena, self.arena.start)
        )

    def outcome_of(self, recurrence: frozenset):
        try:
            return self.outcome_map[frozenset(recurrence)]
        except KeyError:
            raise InvalidInputError(
                f"outcome map undefined on {sorted(map(str, recurrence))}"
            ) from None


def coalition_tag(player):
    return (COALITION, player)


def threshold_game(game: GraphGame, player, outcome) -> WinLoseGame:
    """One-vs-all game: ``player`` tries to force an outcome above ``outcome``.

    The protagonist owns her vertices; everyone else merges into a single
    coalition side.  The winning family collects the recurrence sets whose
    outcome she strictly prefers to the threshold.
    """
    order = game.prefs.order_of(player)
    if outcome not in set(order.outcomes):
        raise InvalidInputError(f"unknown threshold outcome {outcome!r}")
    arena = game.arena
    other = coalition_tag(player)
    owner = {v: (player if arena.owner[v] == player else other) for v in arena.vertices}
    two_sided = Arena(
        players=(player, other),
        vertices=tuple(arena.vertices),
        edges=arena.edges,
        owner=owner,
        start=arena.start,
    )
    family = frozenset(
        s for s, o in game.outcome_map.items() if order.lt(outcome, o)
    )
    return WinLoseGame(two_sided, Muller(family), protagonist=player)


@dataclass(frozen=True, eq=False)
class GuaranteeRow:
    """Per-vertex guarantee classes of one player, with witnessing machines.

    ``class_rank`` holds the preference rank of the best class the player
    can force from each vertex.  ``machines[c]`` forces class >= c from
    every vertex of class >= c; ``punish[c]`` is the coalition machine that
    holds the player to class <= c from every vertex of class <= c.
    """

    player: object
    order: StrictWeakOrder
    class_rank: Mapping   # vertex -> rank
    machines: Mapping     # rank -> StrategyMachine (player side)
    punish: Mapping       # rank -> StrategyMachine (coalition side)
    solver_bits: int

    def representative(self, v):
        return self.order.representative(self.class_rank[v])


@dataclass(frozen=True, eq=False)
class GuaranteeTable:
    """Guarantee rows for every player plus the memory accounting terms."""

    rows: Mapping
    piece_count: int      # number of history pieces; one per vertex here
    piece_bits: int       # memory needed to track the piece; zero here
    solver_bits: int      # uniform bound over all threshold solves

    def ne_memory_bound(self) -> int:
        n_players = len(self.rows)
        log_n = bits_for(self.piece_count)
        return n_players * (self.solver_bits + log_n + self.piece_bits) + 1

    def to_json(self) -> dict:
        return {
            str(p): {str(v): str(row.representative(v)) for v in sorted(row.class_rank, key=skey)}
            for p, row in sorted(self.rows.items(), key=lambda kv: skey(kv[0]))
        }


def best_guarantee(game: GraphGame, player, max_product_states: int = 100_000) -> GuaranteeRow:
    """Guarantee classes of one player at every vertex.

    Thresholds descend through the player's classes: the guarantee at a
    vertex is the best class such that she wins the threshold game for the
    class immediately below it (the bottom class needs no witness).
    """
    order = game.prefs.order_of(player)
    k = order.num_classes()
    arena = game.arena
    solves: dict[int, SolveResult] = {}
    for j in range(k):
        tg = threshold_game(game, player, order.representative(j))
        solves[j] = solve_muller(tg, max_product_states)
    class_rank = {}
    for v in arena.vertices:
        rank = 0
        for j in range(k):
            if v in solves[j].win0:
                rank = max(rank, j + 1)
        class_rank[v] = rank
    used = sorted(set(class_rank.values()))
    machines = {}
    punish = {}
    for c in used:
        machines[c] = solves[c - 1].strategy0 if c >= 1 else fallback_machine(
            _player_side_arena(arena, player), player
        )
        punish[c] = solves[min(c, k - 1)].strategy1
    solver_bits = max((r.memory_bits_used for r in solves.values()), default=0)
    return GuaranteeRow(player, order, class_rank, machines, punish, solver_bits)


def _player_side_arena(arena: Arena, player) -> Arena:
    other = coalition_tag(player)
    owner = {v: (player if arena.owner[v] == player else other) for v in arena.vertices}
    return Arena((player, other), tuple(arena.vertices), arena.edges, owner, arena.start)


def guarantee_table(game: GraphGame, max_product_states: int = 100_000) -> GuaranteeTable:
    rows = {p: best_guarantee(game, p, max_product_states) for p in game.arena.players}
    solver_bits = max((r.solver_bits for r in rows.values()), default=0)
    return GuaranteeTable(
        rows=rows,
        piece_count=len(game.arena.vertices),
        piece_bits=0,
        solver_bits=solver_bits,
    )


def optimal_strategy(game: GraphGame, player, row: GuaranteeRow | None = None) -> StrategyMachine:
    """A single machine realizing the player's guarantee from every vertex.

    The machine simulates, for the class of the current vertex, the
    threshold machine certifying that class, and restarts the simulation
    whenever the class changes.  Because the per-class machines win from
    any vertex of their region regardless of memory content, the composite
    stays optimal at every configuration reachable along any walk, not
    only on its own play.
    """
    if row is None:
        row = best_guarantee(game, player)
    arena = game.arena
    vertices = arena.sorted_vertices()
    owned = arena.owned_by(player)
    used = sorted(set(row.class_rank.values()))
    machines = {c: row.machines[c] for c in used}
    states_of = {c: sorted(_machine_states(machines[c])) for c in used}
    sid = {"fresh": 0}
    for c in used:
        for q in states_of[c]:
            sid[(c, q)] = len(sid)
    update = {}
    choice = {}
    cls = row.class_rank
    for w in vertices:
        target = (cls[w], machines[cls[w]].init)
        if sid[target] != 0:
            update[(w, 0)] = sid[target]
    for v in owned:
        m = machines[cls[v]]
        choice[(v, 0)] = m.choice.get((v, m.init), arena.successors(v)[0])
    for c in used:
        m = machines[c]
        for q in states_of[c]:
            s = sid[(c, q)]
            for w in vertices:
                if cls[w] == c:
                    nxt = (c, m.next_state(w, q))
                else:
                    nxt = (cls[w], machines[cls[w]].init)
                if sid[nxt] != s:
                    update[(w, s)] = sid[nxt]
            for v in owned:
                choice[(v, s)] = m.choice.get((v, q), arena.successors(v)[0])
    machine = StrategyMachine(player, bits_for(len(sid)), update, choice, 0)
    return minimize_machine(machine, vertices, owned)


def _machine_states(machine: StrategyMachine) -> set:
    states = {machine.init}
    states.update(q for (_, q) in machine.update)
    states.update(machine.update.values())
    states.update(q for (_, q) in machine.choice)
    return states


def local_consistency_violations(game: GraphGame, table: GuaranteeTable) -> list:
    """Vertices where the guarantee is not the best/worst over successors.

    At a vertex the player owns, her guarantee class must equal the best
    class among the successors' guarantees; elsewhere the worst.  Returns
    the list of ``(player, vertex)`` mismatches (empty when consistent).
    """
    arena = game.arena
    bad = []
    for p, row in sorted(table.rows.items(), key=lambda kv: skey(kv[0])):
        for v in arena.sorted_vertices():
            succ_ranks = [row.class_rank[w] for w in arena.successors(v)]
            expect = max(succ_ranks) if arena.owner[v] == p else min(succ_ranks)
            if row.class_rank[v] != expect:
                bad.append((p, v))
    return bad
