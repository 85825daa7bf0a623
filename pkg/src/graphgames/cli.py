"""Command-line interface.

Exit codes: 0 success, 1 a verification found a profitable deviation,
2 invalid input, 3 the Pareto-blocking preference pattern is present.
Outputs are canonical JSON so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance, jsonio
from .equilibria import (
    muller_pareto_ne,
    synthesize_antagonistic_spe,
    synthesize_ne,
    verify_ne,
    verify_spe,
)
from .errors import (
    GraphGamesError,
    InvalidArenaError,
    NotAntagonisticError,
    PatternPresentError,
)
from .extensive import (
    backward_induction,
    build_escape_truncation,
    build_nonash_truncation,
    build_six_outcome_example,
    build_three_leaf_example,
    build_usc_escape_truncation,
    enumerate_ne_outcomes,
    epsilon_grid_game,
    realizable_outcomes,
)
from .guarantees import guarantee_table
from .orders import weak_pareto_front
from .winlose import solve as solve_winlose


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArenaError([("BadDocument", str(exc))]) from exc


def _write(payload: dict, args) -> None:
    text = jsonio.dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_dot(name: str, text: str, args) -> None:
    if not getattr(args, "emit_dot", False):
        return
    base = Path(args.out).with_suffix("") if args.out else Path(name)
    Path(f"{base}.{name}.dot").write_text(text)


def _error_payload(exc: GraphGamesError) -> dict:
    if isinstance(exc, InvalidArenaError):
        return {"errors": [{"code": c, "detail": d} for c, d in exc.errors]}
    return {"errors": [{"code": type(exc).__name__, "detail": str(exc)}]}


def cmd_solve(args) -> int:
    game = jsonio.winlose_from_json(_read_json(args.game))
    result = solve_winlose(game, max_product_states=args.max_product_states)
    _write(jsonio.solve_result_to_json(result), args)
    _write_dot("arena", jsonio.arena_to_dot(game.arena), args)
    _write_dot("strategy0", jsonio.machine_to_dot(result.strategy0), args)
    _write_dot("strategy1", jsonio.machine_to_dot(result.strategy1), args)
    return 0


def cmd_guarantee(args) -> int:
    game = jsonio.graph_game_from_json(_read_json(args.game), args.max_vertices)
    table = guarantee_table(game, args.max_product_states)
    _write(jsonio.table_to_json(table), args)
    _write_dot("arena", jsonio.arena_to_dot(game.arena), args)
    return 0


def _emit_report(report, args) -> None:
    _write(jsonio.report_to_json(report), args)
    for p in report.profile.players():
        _write_dot(f"machine_{p}", jsonio.machine_to_dot(report.profile.machines[p]), args)


def cmd_ne(args) -> int:
    game = jsonio.graph_game_from_json(_read_json(args.game), args.max_vertices)
    _emit_report(synthesize_ne(game), args)
    return 0


def cmd_spe(args) -> int:
    game = jsonio.graph_game_from_json(_read_json(args.game), args.max_vertices)
    profile = synthesize_antagonistic_spe(game)
    _write(jsonio.profile_to_json(profile), args)
    for p in profile.players():
        _write_dot(f"machine_{p}", jsonio.machine_to_dot(profile.machines[p]), args)
    return 0


def cmd_pareto_ne(args) -> int:
    game = jsonio.graph_game_from_json(_read_json(args.game), args.max_vertices)
    _emit_report(muller_pareto_ne(game), args)
    return 0


def cmd_verify(args) -> int:
    game = jsonio.graph_game_from_json(_read_json(args.game), args.max_vertices)
    profile = jsonio.profile_from_json(_read_json(args.profile))
    if args.subgames:
        found = verify_spe(game, profile)
        if found is not None:
            vertex, witness = found
            payload = jsonio.witness_to_json(witness)
            payload["at_vertex"] = str(vertex)
            _write(payload, args)
            return 1
    else:
        witness = verify_ne(game, profile)
        if witness is not None:
            _write(jsonio.witness_to_json(witness), args)
            return 1
    _write({"deviation": None}, args)
    return 0


def cmd_discretize(args) -> int:
    tree = jsonio.tree_from_json(_read_json(args.game))
    index_game, result, cert = epsilon_grid_game(tree, args.k)
    _write(
        {
            "index_game": jsonio.tree_to_json(index_game),
            "profile": {".".join(map(str, path)): i for path, i in sorted(cert.choices.items())},
            "k": cert.k,
            "holds": cert.holds,
            "max_gain": {str(p): str(g) for p, g in cert.max_gain.items()},
            "statement": cert.statement(),
        },
        args,
    )
    return 0


def cmd_gallery(args) -> int:
    depth = args.depth
    if depth < 3:
        raise InvalidArenaError([("BadDepth", f"gallery depth must be >= 3, got {depth}")])
    stopping = {}
    for d in range(2, depth + 1):
        value = backward_induction(build_nonash_truncation(d)).root_value()["P"]
        stopping[str(d)] = str(value)
    escape = {}
    for d in range(3, depth + 1):
        result = backward_induction(build_escape_truncation(d))
        deepest_b = (0,) * (d - 1 if (d - 1) % 2 == 1 else d - 2)
        escape[str(d)] = {
            "root": str(result.root_value()),
            "deepest_b_exits": result.choices[deepest_b] == 1,
        }
    three = build_three_leaf_example()
    six = build_six_outcome_example()
    six_ne = sorted(map(str, enumerate_ne_outcomes(six)))
    six_weak = weak_pareto_front(six.prefs, realizable_outcomes(six))
    usc = {}
    for d in range(2, min(depth, 8) + 1):
        value = backward_induction(build_usc_escape_truncation(d)).root_value()
        usc[str(d)] = {str(p): str(x) for p, x in value.items()}
    _write(
        {
            "stopping_values": stopping,
            "escape": escape,
            "three_leaf_ne_outcomes": sorted(map(str, enumerate_ne_outcomes(three))),
            "six_outcome": {
                "ne_outcomes": six_ne,
                "weakly_pareto_optimal": {o: (o in six_weak) for o in six_ne},
            },
            "usc_escape_values": usc,
        },
        args,
    )
    return 0


def cmd_acceptance(args) -> int:
    results = acceptance.run_all(seed=args.seed)
    if args.out:
        payload = {
            f"criterion_{r.number}": {"name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        }
        Path(args.out).write_text(jsonio.dumps(payload))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphgames",
        description="Solve, synthesize and verify multi-player games on finite graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, game=True):
        if game:
            p.add_argument("game", help="input JSON document")
        p.add_argument("--out", help="write the result JSON here instead of stdout")
        p.add_argument("--emit-dot", action="store_true", help="also write DOT graphs")
        p.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
        p.add_argument("--max-vertices", type=int, default=20)
        p.add_argument("--max-product-states", type=int, default=100_000)

    p = sub.add_parser("solve", help="solve a two-player win/lose game")
    common(p)
    p.set_defaults(fn=cmd_solve)
    p = sub.add_parser("guarantee", help="best guarantee of every player at every vertex")
    common(p)
    p.set_defaults(fn=cmd_guarantee)
    p = sub.add_parser("ne", help="synthesize a Nash equilibrium")
    common(p)
    p.set_defaults(fn=cmd_ne)
    p = sub.add_parser("spe", help="synthesize an antagonistic subgame-perfect profile")
    common(p)
    p.set_defaults(fn=cmd_spe)
    p = sub.add_parser("pareto-ne", help="synthesize a Pareto-optimal Nash equilibrium")
    common(p)
    p.set_defaults(fn=cmd_pareto_ne)
    p = sub.add_parser("verify", help="check a profile for profitable deviations")
    common(p)
    p.add_argument("profile", help="profile JSON document")
    p.add_argument("--subgames", action="store_true", help="check every reachable configuration")
    p.set_defaults(fn=cmd_verify)
    p = sub.add_parser("discretize", help="grid-discretize a payoff tree")
    common(p)
    p.add_argument("--k", type=int, default=2, help="grid resolution")
    p.set_defaults(fn=cmd_discretize)
    p = sub.add_parser("gallery", help="counterexample gallery report")
    common(p, game=False)
    p.add_argument("--depth", type=int, default=10)
    p.set_defaults(fn=cmd_gallery)
    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    common(p, game=False)
    p.set_defaults(fn=cmd_acceptance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PatternPresentError as exc:
        payload = _error_payload(exc)
        payload["witness"] = [str(x) for x in exc.witness]
        sys.stdout.write(jsonio.dumps(payload))
        return 3
    except GraphGamesError as exc:
        sys.stdout.write(jsonio.dumps(_error_payload(exc)))
        return 2


if __name__ == "__main__":
    sys.exit(main())
