"""Strict weak orders over finite outcome sets and derived machinery.

Preferences are stored as rank functions (higher rank = more preferred),
which makes the incomparability classes explicit and guarantees the order
axioms by construction.  Raw relations enter only through ``check_swo``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .arena import skey
from .errors import (
    InvalidInputError,
    LinearityRequired,
    OrderViolation,
    OutOfRangeError,
    PatternPresentError,
)


@dataclass(frozen=True, eq=False)
class StrictWeakOrder:
    """Ranked preference over a finite outcome set; higher rank wins."""

    outcomes: tuple
    ranks: Mapping

    def lt(self, x, y) -> bool:
        """True when ``x`` is strictly worse than ``y``."""
        return self.ranks[x] < self.ranks[y]

    def rank_of(self, o) -> int:
        return self.ranks[o]

    def classes(self) -> tuple:
        """Incomparability classes from worst to best."""
        by_rank: dict = {}
        for o, r in self.ranks.items():
            by_rank.setdefault(r, set()).add(o)
        return tuple(frozenset(by_rank[r]) for r in sorted(by_rank))

    def class_of(self, o) -> frozenset:
        r = self.ranks[o]
        return frozenset(x for x in self.outcomes if self.ranks[x] == r)

    def representative(self, rank: int):
        """Canonical (lowest-key) member of the class at ``rank``."""
        members = [o for o in self.outcomes if self.ranks[o] == rank]
        if not members:
            raise InvalidInputError(f"no outcome has rank {rank}")
        return min(members, key=skey)

    def num_classes(self) -> int:
        return len(set(self.ranks.values()))

    def is_linear(self) -> bool:
        return self.num_classes() == len(self.outcomes)

    def inverse(self) -> "StrictWeakOrder":
        top = self.num_classes() - 1
        return StrictWeakOrder(self.outcomes, {o: top - r for o, r in self.ranks.items()})


def order_from_groups(groups: Iterable[Iterable]) -> StrictWeakOrder:
    """Build an order from rank groups listed worst to best."""
    ranks = {}
    outcomes = []
    for r, group in enumerate(groups):
        members = list(group)
        if not members:
            raise InvalidInputError("empty rank group")
        for o in members:
            if o in ranks:
                raise InvalidInputError(f"outcome {o!r} appears in two groups")
            ranks[o] = r
            outcomes.append(o)
    if not outcomes:
        raise InvalidInputError("order needs at least one outcome")
    return StrictWeakOrder(tuple(outcomes), ranks)


def linear_order(chain: Iterable) -> StrictWeakOrder:
    """Linear order from a worst-to-best chain."""
    return order_from_groups([[o] for o in chain])


def check_swo(outcomes: Iterable, pairs: Iterable) -> StrictWeakOrder:
    """Accept a raw relation iff it is a strict weak order.

    ``pairs`` holds the related couples ``(x, y)`` meaning ``x < y``.
    Raises ``OrderViolation`` with a witness triple on the first failed
    axiom (irreflexivity, then transitivity, then negative transitivity);
    otherwise returns the rank representation.
    """
    os = tuple(outcomes)
    if len(set(os)) != len(os):
        raise InvalidInputError("duplicate outcome in relation domain")
    rel = frozenset(pairs)
    for (x, y) in rel:
        if x not in os or y not in os:
            raise InvalidInputError(f"relation mentions unknown outcome in ({x!r}, {y!r})")
    for x in os:
        if (x, x) in rel:
            raise OrderViolation("irreflexivity", (x, x, x))
    for (x, y) in sorted(rel, key=lambda p: (skey(p[0]), skey(p[1]))):
        for z in sorted(os, key=skey):
            if (y, z) in rel and (x, z) not in rel:
                raise OrderViolation("transitivity", (x, y, z))
    for x in sorted(os, key=skey):
        for y in sorted(os, key=skey):
            for z in sorted(os, key=skey):
                if (x, y) not in rel and (y, z) not in rel and (x, z) in rel:
                    raise OrderViolation("negative_transitivity", (x, y, z))
    below = {x: sum(1 for y in os if (y, x) in rel) for x in os}
    dense = {b: i for i, b in enumerate(sorted(set(below.values())))}
    return StrictWeakOrder(os, {x: dense[below[x]] for x in os})


@dataclass(frozen=True, eq=False)
class PreferenceProfile:
    """One strict weak order per player over a shared outcome set."""

    outcomes: tuple
    orders: Mapping

    def __post_init__(self):
        for p, order in self.orders.items():
            if set(order.outcomes) != set(self.outcomes):
                raise InvalidInputError(f"order for {p!r} covers a different outcome set")

    def players(self) -> tuple:
        return tuple(sorted(self.orders, key=skey))

    def order_of(self, player) -> StrictWeakOrder:
        return self.orders[player]


def terminal_interval(o, order: StrictWeakOrder) -> frozenset:
    """Outcomes strictly preferred to ``o``."""
    if o not in order.ranks:
        raise InvalidInputError(f"unknown outcome {o!r}")
    return frozenset(x for x in order.outcomes if order.lt(o, x))


def forbidden_pattern(profile) -> tuple | None:
    """Search for players a, b and outcomes with z < y < x for a, x < z < y for b.

    Returns the witness ``(a, b, x, y, z)`` or ``None``.  The presence of
    this pattern is exactly what blocks Pareto-optimal equilibria for
    linear preferences.
    """
    orders = profile.orders if hasattr(profile, "orders") else profile
    players = sorted(orders, key=skey)
    outcomes = None
    for p in players:
        os = tuple(sorted(set(orders[p].outcomes), key=skey))
        outcomes = os if outcomes is None else outcomes
    if outcomes is None:
        raise InvalidInputError("profile has no players")
    for a in players:
        oa = orders[a]
        for b in players:
            if a == b:
                continue
            ob = orders[b]
            for x in outcomes:
                for y in outcomes:
                    for z in outcomes:
                        if oa.lt(z, y) and oa.lt(y, x) and ob.lt(x, z) and ob.lt(z, y):
                            return (a, b, x, y, z)
    return None


@dataclass(frozen=True)
class SlicePartition:
    """Ordered consensus slices with per-player orientation flags.

    Every player strictly prefers anything in a later slice to anything in
    an earlier one; within a slice each player's restriction equals the
    reference player's restriction or its inverse.
    """

    slices: tuple          # of frozensets, worst to best
    flags: tuple           # of {player: "aligned" | "reversed"}
    reference: object


def slice_partition(profile: PreferenceProfile) -> SlicePartition:
    """Partition the outcomes into ordered consensus slices.

    Requires linear orders without the forbidden pattern.  Outcomes that
    some pair of players ranks oppositely are forced into one slice; slices
    are merged further until the between-slice order is unanimous, yielding
    the finest compatible partition.
    """
    witness = forbidden_pattern(profile)
    if witness is not None:
        raise PatternPresentError(witness)
    players = profile.players()
    for p in players:
        if not profile.order_of(p).is_linear():
            raise LinearityRequired(f"player {p!r} has tied outcomes")
    outcomes = sorted(profile.outcomes, key=skey)
    parent = {o: o for o in outcomes}

    def find(o):
        while parent[o] != o:
            parent[o] = parent[parent[o]]
            o = parent[o]
        return o

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=skey)] = min(ra, rb, key=skey)

    def unanimous_below(x, y) -> bool:
        return all(profile.order_of(p).lt(x, y) for p in players)

    for i, x in enumerate(outcomes):
        for y in outcomes[i + 1:]:
            if not unanimous_below(x, y) and not unanimous_below(y, x):
                union(x, y)
    # merge components until all cross pairs agree on one direction
    changed = True
    while changed:
        changed = False
        comps: dict = {}
        for o in outcomes:
            comps.setdefault(find(o), []).append(o)
        roots = sorted(comps, key=skey)
        for i, ra in enumerate(roots):
            for rb in roots[i + 1:]:
                a_below = all(unanimous_below(x, y) for x in comps[ra] for y in comps[rb])
                b_below = all(unanimous_below(y, x) for x in comps[ra] for y in comps[rb])
                if not a_below and not b_below:
                    union(ra, rb)
                    changed = True
    comps = {}
    for o in outcomes:
        comps.setdefault(find(o), []).append(o)
    reference = players[0]
    ref = profile.order_of(reference)
    ordered = sorted(comps.values(), key=lambda c: min(ref.rank_of(o) for o in c))
    slices = tuple(frozenset(c) for c in ordered)
    # invariant 1: later slices unanimously preferred
    for i, lo in enumerate(slices):
        for hi in slices[i + 1:]:
            for x in lo:
                for y in hi:
                    if not unanimous_below(x, y):
                        raise InvalidInputError(
                            f"no consensus between slices at ({x!r}, {y!r})"
                        )
    flags = []
    for sl in slices:
        members = sorted(sl, key=ref.rank_of)
        entry = {}
        for p in players:
            order = profile.order_of(p)
            aligned = all(order.lt(a, b) for a, b in zip(members, members[1:]))
            reversed_ = all(order.lt(b, a) for a, b in zip(members, members[1:]))
            if aligned:
                entry[p] = "aligned"
            elif reversed_:
                entry[p] = "reversed"
            else:
                raise InvalidInputError(
                    f"player {p!r} is neither aligned nor reversed on slice {sorted(map(str, sl))}"
                )
        flags.append(entry)
    return SlicePartition(slices, tuple(flags), reference)


def _orders_of(prefs) -> Mapping:
    return prefs.orders if hasattr(prefs, "orders") else prefs


def _dominates(orders: Mapping, q, o) -> bool:
    """Someone strictly prefers ``q`` and nobody strictly prefers ``o``."""
    if q == o:
        return False
    someone = any(orders[p].lt(o, q) for p in orders)
    nobody_hurt = all(not orders[p].lt(q, o) for p in orders)
    return someone and nobody_hurt


def pareto_front(prefs, realizable: Iterable) -> frozenset:
    """Realizable outcomes no other realizable outcome dominates.

    Domination: some player strictly prefers the alternative and no player
    strictly prefers the original.
    """
    orders = _orders_of(prefs)
    todo = set(realizable)
    if not todo:
        raise InvalidInputError("realizable set must be non-empty")
    return frozenset(o for o in todo if not any(_dominates(orders, q, o) for q in todo))


def weak_pareto_front(prefs, realizable: Iterable) -> frozenset:
    """Weak variant: the alternative must leave every player no worse off.

    With preferences whose incomparability is transitive, "no worse off"
    is the companion total preorder of the strict order, so this coincides
    with ``pareto_front``; it is exposed separately because callers reason
    about the two notions independently.
    """
    orders = _orders_of(prefs)
    todo = set(realizable)
    if not todo:
        raise InvalidInputError("realizable set must be non-empty")
    front = set()
    for o in todo:
        weakly_dominated = any(
            q != o
            and any(orders[p].lt(o, q) for p in orders)
            and all(not orders[p].lt(q, o) for p in orders)
            for q in todo
        )
        if not weakly_dominated:
            front.add(o)
    return frozenset(front)


def grid_discretize(payoffs: Mapping, k: int) -> dict:
    """Map payoffs in [0, 1] to grid cell indices in {1, ..., k+1}.

    Cell ``i`` covers ``[(i-1)/k, i/k)``; the payoff 1 lands in cell
    ``k + 1``.  Payoffs are exact rationals, so cell boundaries are exact.
    """
    if k < 1:
        raise InvalidInputError(f"grid resolution must be >= 1, got {k}")
    out = {}
    for p, raw in payoffs.items():
        value = Fraction(raw)
        if value < 0 or value > 1:
            raise OutOfRangeError(f"payoff {value} for {p!r} outside [0, 1]")
        out[p] = int(value * k) + 1
    return out
