"""JSON document formats and DOT export.

All identifiers are strings on the wire.  Emission is canonical: sorted
keys, two-space indent, machine states numbered by construction; identical
inputs therefore serialize byte-identically.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Mapping

from .arena import (
    Arena,
    EnergySpec,
    Lasso,
    StrategyMachine,
    StrategyProfile,
    closed_strongly_connected_sets,
    energy_product,
    skey,
    validate_arena,
)
from .errors import TooLargeError
from .equilibria import DeviationWitness, SynthesisReport
from .errors import InvalidInputError
from .extensive import Decision, Leaf, TreeGame
from .guarantees import GraphGame, GuaranteeTable
from .orders import PreferenceProfile, order_from_groups
from .winlose import Muller, Parity, Reachability, Safety, SolveResult, WinLoseGame


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def arena_to_json(arena: Arena) -> dict:
    return {
        "players": [str(p) for p in arena.players],
        "vertices": [
            {"id": str(v), "owner": str(arena.owner[v])} for v in arena.sorted_vertices()
        ],
        "edges": sorted([[str(u), str(w)] for (u, w) in arena.edges]),
        "start": str(arena.start),
    }


def arena_from_json(doc: Mapping) -> Arena:
    return validate_arena(doc)


def energy_from_json(doc: Mapping, arena: Arena) -> EnergySpec:
    try:
        weights = {p: dict(vw) for p, vw in doc["weights"].items()}
        caps = {p: (int(lo), int(hi)) for p, (lo, hi) in doc["caps"].items()}
        priorities = {v: int(i) for v, i in doc["priorities"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad energy block: {exc}") from exc
    spec = EnergySpec(weights, caps, priorities)
    spec.validate(arena)
    return spec


def objective_from_json(doc: Mapping):
    if not isinstance(doc, Mapping) or len(doc) != 1:
        raise InvalidInputError("objective must be one of parity/muller/reach/safe")
    kind, body = next(iter(doc.items()))
    if kind == "parity":
        return Parity({v: int(i) for v, i in body.items()})
    if kind == "muller":
        return Muller(frozenset(frozenset(s) for s in body))
    if kind == "reach":
        return Reachability(frozenset(body))
    if kind == "safe":
        return Safety(frozenset(body))
    raise InvalidInputError(f"unknown objective kind {kind!r}")


def objective_to_json(obj) -> dict:
    if isinstance(obj, Parity):
        return {"parity": {str(v): i for v, i in obj.priority.items()}}
    if isinstance(obj, Muller):
        return {"muller": sorted(sorted(str(v) for v in s) for s in obj.family)}
    if isinstance(obj, Reachability):
        return {"reach": sorted(map(str, obj.targets))}
    if isinstance(obj, Safety):
        return {"safe": sorted(map(str, obj.safe))}
    raise InvalidInputError(f"unknown objective {obj!r}")


def _rename_product(product):
    """Give product vertices printable string names, preserving structure."""
    def name(pv):
        b = ",".join(map(str, pv[1]))
        m = ",".join(map(str, pv[2]))
        return f"{pv[0]}|b={b}|m={m}"

    mapping = {pv: name(pv) for pv in product.arena.vertices}
    if len(set(mapping.values())) != len(mapping):
        raise InvalidInputError("product vertex names collide")
    arena = Arena(
        tuple(product.arena.players),
        tuple(mapping[pv] for pv in product.arena.vertices),
        frozenset((mapping[u], mapping[w]) for (u, w) in product.arena.edges),
        {mapping[pv]: product.arena.owner[pv] for pv in product.arena.vertices},
        mapping[product.arena.start],
    )
    base = {mapping[pv]: product.base_vertex[pv] for pv in product.arena.vertices}
    return arena, base


def _lift_objective(objective, base: Mapping, arena: Arena, max_subsets: int = 1 << 16):
    vs = arena.sorted_vertices()
    if isinstance(objective, Parity):
        return Parity({v: objective.priority[base[v]] for v in vs})
    if isinstance(objective, Reachability):
        return Reachability(frozenset(v for v in vs if base[v] in objective.targets))
    if isinstance(objective, Safety):
        return Safety(frozenset(v for v in vs if base[v] in objective.safe))
    if isinstance(objective, Muller):
        if 1 << len(vs) > max_subsets:
            raise TooLargeError("energy product too large to lift a Muller family")
        lifted = []
        for mask in range(1, 1 << len(vs)):
            subset = frozenset(vs[i] for i in range(len(vs)) if mask >> i & 1)
            if frozenset(base[v] for v in subset) in objective.family:
                lifted.append(subset)
        return Muller(frozenset(lifted))
    raise InvalidInputError(f"unknown objective {objective!r}")


def winlose_from_json(doc: Mapping) -> WinLoseGame:
    arena = arena_from_json(doc.get("arena", {}))
    if len(arena.players) != 2:
        raise InvalidInputError("win/lose game needs exactly 2 players")
    objective = objective_from_json(doc.get("objective", {}))
    protagonist = doc.get("protagonist", arena.players[0])
    if protagonist not in arena.players:
        raise InvalidInputError(f"protagonist {protagonist!r} is not a player")
    if "energy" in doc.get("arena", {}):
        spec = energy_from_json(doc["arena"]["energy"], arena)
        arena, base = _rename_product(energy_product(arena, spec))
        objective = _lift_objective(objective, base, arena)
    return WinLoseGame(arena, objective, protagonist)


def preferences_from_json(doc: Mapping) -> PreferenceProfile:
    if not isinstance(doc, Mapping) or not doc:
        raise InvalidInputError("preferences must map players to rank groups")
    orders = {}
    outcomes = None
    for p, groups in doc.items():
        order = order_from_groups(groups)
        if outcomes is None:
            outcomes = tuple(sorted(order.outcomes, key=skey))
        orders[p] = order
    return PreferenceProfile(outcomes, orders)


def preferences_to_json(prefs: PreferenceProfile) -> dict:
    out = {}
    for p in prefs.players():
        order = prefs.order_of(p)
        out[str(p)] = [sorted(map(str, cls)) for cls in order.classes()]
    return out


def graph_game_from_json(doc: Mapping, max_vertices: int = 20) -> GraphGame:
    arena = arena_from_json(doc.get("arena", {}))
    prefs = preferences_from_json(doc.get("preferences", {}))
    raw_map = doc.get("outcomes", {}).get("map")
    if raw_map is None:
        raise InvalidInputError("missing outcomes.map")
    outcome_map = {}
    for entry in raw_map:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise InvalidInputError(f"outcome map entry {entry!r} must be [[vertices], outcome]")
        outcome_map[frozenset(entry[0])] = entry[1]
    if "energy" in doc.get("arena", {}):
        # unfold budgets first; outcomes then apply through the projection
        # back to the original vertices, which recurrence sets respect
        spec = energy_from_json(doc["arena"]["energy"], arena)
        arena, base = _rename_product(energy_product(arena, spec))
        lifted = {}
        for s in closed_strongly_connected_sets(arena, max_vertices):
            projected = frozenset(base[v] for v in s)
            if projected not in outcome_map:
                raise InvalidInputError(
                    f"outcome map undefined on projected recurrence set {sorted(map(str, projected))}"
                )
            lifted[s] = outcome_map[projected]
        outcome_map = lifted
    game = GraphGame(arena, outcome_map, prefs)
    game.validate_total(max_vertices)
    return game


def graph_game_to_json(game: GraphGame) -> dict:
    return {
        "arena": arena_to_json(game.arena),
        "preferences": preferences_to_json(game.prefs),
        "outcomes": {
            "map": sorted(
                [[sorted(map(str, s)), str(o)] for s, o in game.outcome_map.items()]
            )
        },
    }


def machine_to_json(machine: StrategyMachine) -> dict:
    return {
        "player": str(machine.player),
        "memory_bits": machine.memory_bits,
        "init": machine.init,
        "update": sorted(
            [[str(v), q, nq] for (v, q), nq in machine.update.items()],
            key=lambda e: (e[0], e[1]),
        ),
        "choice": sorted(
            [[str(v), q, str(w)] for (v, q), w in machine.choice.items()],
            key=lambda e: (e[0], e[1]),
        ),
    }


def machine_from_json(doc: Mapping, player=None) -> StrategyMachine:
    try:
        bits = int(doc["memory_bits"])
        update = {(v, int(q)): int(nq) for v, q, nq in doc.get("update", [])}
        choice = {(v, int(q)): w for v, q, w in doc.get("choice", [])}
        init = int(doc.get("init", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad machine document: {exc}") from exc
    return StrategyMachine(player if player is not None else doc.get("player"), bits, update, choice, init)


def profile_from_json(doc: Mapping) -> StrategyProfile:
    machines = doc.get("machines")
    if not isinstance(machines, Mapping):
        raise InvalidInputError("profile document needs a 'machines' object")
    return StrategyProfile({p: machine_from_json(m, p) for p, m in machines.items()})


def profile_to_json(profile: StrategyProfile) -> dict:
    return {
        "machines": {str(p): machine_to_json(profile.machines[p]) for p in profile.players()}
    }


def lasso_to_json(lasso: Lasso) -> dict:
    return {"stem": [str(v) for v in lasso.stem], "cycle": [str(v) for v in lasso.cycle]}


def solve_result_to_json(result: SolveResult) -> dict:
    return {
        "win0": sorted(map(str, result.win0)),
        "win1": sorted(map(str, result.win1)),
        "strategy0": machine_to_json(result.strategy0),
        "strategy1": machine_to_json(result.strategy1),
        "memory_bits_used": result.memory_bits_used,
    }


def report_to_json(report: SynthesisReport) -> dict:
    return {
        "machines": {
            str(p): machine_to_json(report.profile.machines[p])
            for p in report.profile.players()
        },
        "main_lasso": lasso_to_json(report.main_lasso),
        "outcome": str(report.induced_outcome),
        "memory_bits": {str(p): b for p, b in report.memory_bits.items()},
        "punishments": sorted(
            [[str(p), str(v), str(o)] for (p, v), o in report.punishments.items()]
        ),
        "memory_accounting": {
            "solver_bits": report.solver_bits,
            "piece_count": report.piece_count,
            "piece_bits": report.piece_bits,
            "bound": report.memory_bound,
        },
    }


def witness_to_json(witness: DeviationWitness) -> dict:
    return {
        "player": str(witness.player),
        "vertex": str(witness.vertex),
        "improved_outcome": str(witness.improved_outcome),
        "machine": machine_to_json(witness.machine),
    }


def table_to_json(table: GuaranteeTable) -> dict:
    return table.to_json()


def tree_from_json(doc: Mapping) -> TreeGame:
    players = set()

    def parse(node):
        if "outcome" in node:
            return Leaf(outcome=node["outcome"])
        if "payoffs" in node:
            payoffs = {p: Fraction(s) for p, s in node["payoffs"].items()}
            players.update(payoffs)
            return Leaf(payoffs=payoffs)
        if "owner" in node and "children" in node:
            players.add(node["owner"])
            return Decision(node["owner"], tuple(parse(c) for c in node["children"]))
        raise InvalidInputError(f"bad tree node {node!r}")

    root = parse(doc.get("tree", doc))
    prefs = None
    if "preferences" in doc:
        profile = preferences_from_json(doc["preferences"])
        players.update(profile.players())
        prefs = dict(profile.orders)
    return TreeGame(root, tuple(sorted(players, key=skey)), prefs=prefs)


def tree_to_json(game: TreeGame) -> dict:
    def unparse(node):
        if isinstance(node, Leaf):
            if node.outcome is not None:
                return {"outcome": str(node.outcome)}
            return {"payoffs": {str(p): str(x) for p, x in node.payoffs.items()}}
        return {"owner": str(node.owner), "children": [unparse(c) for c in node.children]}

    return {"tree": unparse(game.root)}


def arena_to_dot(arena: Arena, name: str = "arena") -> str:
    lines = [f"digraph {name} {{"]
    for v in arena.sorted_vertices():
        shape = "doublecircle" if v == arena.start else "circle"
        lines.append(f'  "{v}" [label="{v}|{arena.owner[v]}", shape={shape}];')
    for (u, w) in sorted(arena.edges, key=lambda e: (skey(e[0]), skey(e[1]))):
        lines.append(f'  "{u}" -> "{w}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def machine_to_dot(machine: StrategyMachine, name: str = "machine") -> str:
    states = {machine.init}
    states.update(q for (_, q) in machine.update)
    states.update(machine.update.values())
    states.update(q for (_, q) in machine.choice)
    lines = [f"digraph {name} {{"]
    for q in sorted(states):
        marks = []
        for (v, qq), w in sorted(machine.choice.items(), key=lambda kv: (skey(kv[0][0]), kv[0][1])):
            if qq == q:
                marks.append(f"{v}->{w}")
        label = f"q{q}" + (("\\n" + "\\n".join(marks)) if marks else "")
        shape = "doublecircle" if q == machine.init else "circle"
        lines.append(f'  "q{q}" [label="{label}", shape={shape}];')
    for (v, q), nq in sorted(machine.update.items(), key=lambda kv: (kv[0][1], skey(kv[0][0]))):
        lines.append(f'  "q{q}" -> "q{nq}" [label="{v}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
