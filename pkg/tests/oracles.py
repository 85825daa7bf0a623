"""Independent brute-force oracles used across the test modules.

These deliberately avoid the package's solver code paths: recurrence sets
come from explicit closed-walk searches, values from plain recursion, and
strategy quality from products built right here.
"""

from __future__ import annotations

from itertools import product as iproduct

from graphgames.arena import Arena, StrategyMachine


def bfs_reachable(arena: Arena, source) -> set:
    seen = {source}
    todo = [source]
    while todo:
        v = todo.pop()
        for w in arena.successors(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def closed_walk_covers(arena: Arena, subset: frozenset, start) -> bool:
    """Is there a walk ``start -> ... -> start`` of length >= 1 inside
    ``subset`` that visits every member of ``subset``?"""
    full = frozenset(subset)
    todo = [(w, frozenset({w})) for w in arena.successors(start) if w in full]
    seen = set(todo)
    while todo:
        v, visited = todo.pop()
        if v == start and visited | {start} == full:
            return True
        for w in arena.successors(v):
            if w not in full:
                continue
            state = (w, visited | {w})
            if state not in seen:
                seen.add(state)
                todo.append(state)
    return False


def feasible_sets_by_walk_search(arena: Arena, source) -> frozenset:
    """Recurrence sets found by explicitly searching for a covering closed walk."""
    vs = arena.sorted_vertices()
    reach = bfs_reachable(arena, source)
    found = []
    for mask in range(1, 1 << len(vs)):
        subset = frozenset(vs[i] for i in range(len(vs)) if mask >> i & 1)
        for s0 in sorted(subset, key=str):
            if s0 in reach and closed_walk_covers(arena, subset, s0):
                found.append(subset)
                break
    return frozenset(found)


def machine_product_arena(arena: Arena, machine: StrategyMachine, start) -> tuple:
    """One-player product: the machine's owner is forced, everyone else free.

    Returns ``(product_arena, projection)`` where the projection maps
    product vertices back to arena vertices.
    """
    s0 = (start, machine.init)
    vertices = [s0]
    seen = {s0}
    edges = set()
    i = 0
    while i < len(vertices):
        v, q = vertices[i]
        i += 1
        if arena.owner[v] == machine.player:
            targets = (machine.move(v, q),)
        else:
            targets = arena.successors(v)
        for w in targets:
            st = (w, machine.next_state(w, q))
            edges.add(((v, q), st))
            if st not in seen:
                seen.add(st)
                vertices.append(st)
    owner = {pv: "any" for pv in vertices}
    product = Arena(("any",), tuple(vertices), frozenset(edges), owner, s0)
    return product, {pv: pv[0] for pv in vertices}


def _kosaraju_sccs(nodes, succ):
    order = []
    seen = set()
    for root in nodes:
        if root in seen:
            continue
        stack = [(root, iter(succ(root)))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            pushed = False
            for w in it:
                if w not in seen:
                    seen.add(w)
                    stack.append((w, iter(succ(w))))
                    pushed = True
                    break
            if not pushed:
                stack.pop()
                order.append(node)
    preds = {n: [] for n in nodes}
    for n in nodes:
        for w in succ(n):
            preds[w].append(n)
    assigned = set()
    sccs = []
    for node in reversed(order):
        if node in assigned:
            continue
        comp = [node]
        assigned.add(node)
        stack = [node]
        while stack:
            n = stack.pop()
            for w in preds[n]:
                if w not in assigned:
                    assigned.add(w)
                    comp.append(w)
                    stack.append(w)
        sccs.append(comp)
    return sccs


def outcomes_against_machine(arena: Arena, machine: StrategyMachine, start) -> frozenset:
    """All recurrence sets (of arena vertices) opponents can force vs the machine.

    A projection T is achievable when the product restricted to states over
    T has a loopable strongly connected component covering exactly T; small
    products are double-checked against full recurrence-set enumeration.
    """
    product, proj = machine_product_arena(arena, machine, start)
    vs = arena.sorted_vertices()
    succ_map = {pv: [] for pv in product.vertices}
    for (u, w) in product.edges:
        succ_map[u].append(w)
    found = set()
    for mask in range(1, 1 << len(vs)):
        T = frozenset(vs[i] for i in range(len(vs)) if mask >> i & 1)
        sub = [pv for pv in product.vertices if proj[pv] in T]
        if {proj[pv] for pv in sub} != T:
            continue

        def sub_succ(pv):
            return [w for w in succ_map[pv] if proj[w] in T]

        for comp in _kosaraju_sccs(sub, sub_succ):
            if {proj[pv] for pv in comp} != T:
                continue
            if len(comp) == 1 and comp[0] not in sub_succ(comp[0]):
                continue
            found.add(T)
            break
    if len(product.vertices) <= 14:
        from graphgames.arena import feasible_inf_sets

        sets = feasible_inf_sets(product, product.start, max_vertices=len(product.vertices))
        assert found == {frozenset(proj[pv] for pv in s) for s in sets}
    return frozenset(found)


def tree_value(node, prefs):
    """Independent backward induction for outcome or payoff trees."""
    from graphgames.extensive import Decision, Leaf

    if isinstance(node, Leaf):
        return node.outcome if node.outcome is not None else dict(node.payoffs)
    best = None
    for child in node.children:
        value = tree_value(child, prefs)
        if best is None:
            best = value
        elif isinstance(value, dict):
            if value[node.owner] > best[node.owner]:
                best = value
        elif prefs[node.owner].lt(best, value):
            best = value
    return best


def all_machines(arena: Arena, player, bits: int):
    """Every machine of the player up to the memory bound (test-local copy)."""
    owned = arena.owned_by(player)
    states = tuple(range(2 ** bits))
    vs = arena.sorted_vertices()
    update_keys = [(v, q) for v in vs for q in states] if bits > 0 else []
    choice_keys = [(v, q) for v in owned for q in states]
    for upd in iproduct(*[states for _ in update_keys]) if update_keys else [()]:
        update = {k: t for k, t in zip(update_keys, upd)}
        for ch in iproduct(*[arena.successors(v) for (v, _) in choice_keys]) if choice_keys else [()]:
            choice = {k: w for k, w in zip(choice_keys, ch)}
            yield StrategyMachine(player, bits, update, choice, 0)
