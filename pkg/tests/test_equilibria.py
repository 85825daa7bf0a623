import random

import pytest

from graphgames.arena import (
    StrategyProfile,
    induced_lasso,
    inf_set,
    make_arena,
    memoryless_machine,
)
from graphgames.equilibria import (
    induced_outcome_from,
    muller_pareto_ne,
    punishment_strategy,
    synthesize_antagonistic_spe,
    synthesize_ne,
    verify_ne,
    verify_spe,
)
from graphgames.errors import NotAntagonisticError, PatternPresentError
from graphgames.gen import inverse_pair_profile, pattern_free_profile, random_graph_game
from graphgames.guarantees import GraphGame, guarantee_table
from graphgames.orders import PreferenceProfile, linear_order, pareto_front


def single_vertex_game():
    arena = make_arena(["A"], ["v"], [("v", "v")], {"v": "A"}, "v")
    prefs = PreferenceProfile(("o1",), {"A": linear_order(["o1"])})
    return GraphGame(arena, {frozenset({"v"}): "o1"}, prefs)


def single_player_game():
    arena = make_arena(
        ["A"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "A"}, "u"
    )
    prefs = PreferenceProfile(("o1", "o2"), {"A": linear_order(["o1", "o2"])})
    return GraphGame(arena, {frozenset({"u"}): "o1", frozenset({"w"}): "o2"}, prefs)


def parity_outcome_game():
    arena = make_arena(
        ["a", "b"],
        ["v0", "v1"],
        [("v0", "v0"), ("v0", "v1"), ("v1", "v0"), ("v1", "v1")],
        {"v0": "a", "v1": "b"},
        "v0",
    )
    omap = {
        frozenset({"v0"}): "win0",
        frozenset({"v1"}): "win1",
        frozenset({"v0", "v1"}): "win0",
    }
    prefs = PreferenceProfile(
        ("win0", "win1"),
        {"a": linear_order(["win1", "win0"]), "b": linear_order(["win0", "win1"])},
    )
    return GraphGame(arena, omap, prefs)


def non_credible_threat_game():
    # B's machine threatens the cycle that hurts both players; the threat
    # deters A on the main play but is not subgame perfect at t
    arena = make_arena(
        ["A", "B"],
        ["s", "t", "g", "p"],
        [("s", "g"), ("s", "t"), ("t", "g"), ("t", "p"), ("g", "g"), ("p", "p")],
        {"s": "A", "t": "B", "g": "A", "p": "B"},
        "s",
    )
    omap = {frozenset({"g"}): "mid", frozenset({"p"}): "bad"}
    prefs = PreferenceProfile(
        ("bad", "mid"),
        {"A": linear_order(["bad", "mid"]), "B": linear_order(["bad", "mid"])},
    )
    game = GraphGame(arena, omap, prefs)
    profile = StrategyProfile(
        {
            "A": memoryless_machine("A", {"s": "g", "g": "g"}),
            "B": memoryless_machine("B", {"t": "p", "p": "p"}),
        }
    )
    return game, profile


# --- synthesis ---------------------------------------------------------------


def test_synthesize_single_vertex():
    report = synthesize_ne(single_vertex_game())
    assert report.induced_outcome == "o1"
    assert report.main_lasso.cycle == ("v",)


def test_synthesize_single_player_gets_best():
    game = single_player_game()
    report = synthesize_ne(game)
    assert report.induced_outcome == "o2"
    assert verify_ne(game, report.profile) is None


@pytest.mark.parametrize("seed", range(40))
def test_synthesized_profiles_verify_and_fit_in_memory(seed):
    rng = random.Random(seed)
    players = [f"P{i}" for i in range(rng.randint(1, 3))]
    outcomes = [f"o{i}" for i in range(rng.randint(1, 4))]
    game = random_graph_game(rng, rng.randint(1, 4), players, outcomes)
    report = synthesize_ne(game)
    assert verify_ne(game, report.profile) is None
    assert all(bits <= report.memory_bound for bits in report.memory_bits.values())
    # threat-point soundness: nobody on the main play is punished above the
    # outcome they already receive
    for (b, v), held_to in report.punishments.items():
        order = game.prefs.order_of(b)
        assert order.rank_of(held_to) <= order.rank_of(report.induced_outcome)


def test_main_lasso_is_the_profile_play():
    game = single_player_game()
    report = synthesize_ne(game)
    replay = induced_lasso(game.arena, report.profile)
    assert replay == report.main_lasso


# --- punishments ----------------------------------------------------------------


def test_punishment_trivial_vertex():
    machine, held_to = punishment_strategy(single_vertex_game(), "A", "v")
    assert held_to == "o1"
    assert machine.memory_bits == 0


def test_punishment_holds_deviator_down():
    # the coalition owns everything; with both outcomes reachable under its
    # control it pins B at her guarantee o1
    arena = make_arena(
        ["A", "B"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "A"}, "u"
    )
    prefs = PreferenceProfile(
        ("o1", "o2"), {"A": linear_order(["o2", "o1"]), "B": linear_order(["o1", "o2"])}
    )
    game = GraphGame(arena, {frozenset({"u"}): "o1", frozenset({"w"}): "o2"}, prefs)
    table = guarantee_table(game)
    machine, held_to = punishment_strategy(game, "B", "u", table)
    assert held_to == "o1"
    profile = StrategyProfile(
        {"A": machine_as_player(machine, "A"), "B": memoryless_machine("B", {})}
    )
    assert induced_outcome_from(game, profile, "u") == "o1"


def machine_as_player(machine, player):
    from graphgames.arena import StrategyMachine

    return StrategyMachine(player, machine.memory_bits, machine.update, machine.choice, machine.init)


@pytest.mark.parametrize("seed", range(15))
def test_punishment_memory_within_solver_bound(seed):
    rng = random.Random(seed)
    players = ["A", "B"]
    outcomes = [f"o{i}" for i in range(rng.randint(1, 3))]
    game = random_graph_game(rng, rng.randint(1, 4), players, outcomes)
    table = guarantee_table(game)
    for b in players:
        for v in game.arena.vertices:
            machine, _ = punishment_strategy(game, b, v, table)
            assert machine.memory_bits <= table.rows[b].solver_bits


# --- verification ------------------------------------------------------------------


def test_verify_single_vertex_profile():
    game = single_vertex_game()
    profile = StrategyProfile({"A": memoryless_machine("A", {"v": "v"})})
    assert verify_ne(game, profile) is None
    assert verify_spe(game, profile) is None


def test_verify_finds_improvement_and_witness_replays():
    game = single_player_game()
    lazy = StrategyProfile({"A": memoryless_machine("A", {"u": "u", "w": "w"})})
    witness = verify_ne(game, lazy)
    assert witness is not None
    assert witness.player == "A"
    assert witness.vertex == "u"
    assert witness.improved_outcome == "o2"
    better = StrategyProfile({"A": witness.machine})
    lasso = induced_lasso(game.arena, better)
    assert game.outcome_map[inf_set(lasso)] == "o2"


@pytest.mark.parametrize("seed", range(40))
def test_verify_agrees_with_machine_enumeration(seed):
    # if any one-bit machine improves a player, verification must notice,
    # and every witness it produces must replay to the claimed improvement
    from graphgames.arena import StrategyMachine

    from oracles import all_machines

    rng = random.Random(seed)
    players = ["A", "B"][: rng.randint(1, 2)]
    outcomes = [f"o{i}" for i in range(rng.randint(1, 3))]
    game = random_graph_game(rng, rng.randint(1, 3), players, outcomes)
    machines = {}
    for p in players:
        bits = rng.randint(0, 1)
        update, choice = {}, {}
        for v in game.arena.vertices:
            for q in range(2 ** bits):
                update[(v, q)] = rng.randrange(2 ** bits)
        for v in game.arena.owned_by(p):
            for q in range(2 ** bits):
                choice[(v, q)] = rng.choice(game.arena.successors(v))
        machines[p] = StrategyMachine(p, bits, update, choice)
    profile = StrategyProfile(machines)
    induced = game.outcome_map[inf_set(induced_lasso(game.arena, profile))]
    witness = verify_ne(game, profile)
    for a in players:
        order = game.prefs.order_of(a)
        brute_improves = any(
            order.lt(
                induced,
                game.outcome_map[
                    inf_set(induced_lasso(game.arena, StrategyProfile({**machines, a: m})))
                ],
            )
            for m in all_machines(game.arena, a, 1)
        )
        if brute_improves:
            assert witness is not None
    if witness is not None:
        alt = StrategyProfile({**machines, witness.player: witness.machine})
        realized = game.outcome_map[inf_set(induced_lasso(game.arena, alt))]
        order = game.prefs.order_of(witness.player)
        assert order.lt(induced, realized)


def test_verify_spe_flags_non_credible_threat():
    game, profile = non_credible_threat_game()
    assert verify_ne(game, profile) is None
    found = verify_spe(game, profile)
    assert found is not None
    vertex, witness = found
    assert vertex == "t"
    assert witness.player == "B"
    assert witness.improved_outcome == "mid"


# --- antagonistic subgame perfection ---------------------------------------------------


def test_spe_requires_two_inverse_players():
    with pytest.raises(NotAntagonisticError):
        synthesize_antagonistic_spe(single_vertex_game())
    game = single_player_game()
    arena = make_arena(
        ["A", "B"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "B"}, "u"
    )
    prefs = PreferenceProfile(
        ("o1", "o2"), {"A": linear_order(["o1", "o2"]), "B": linear_order(["o1", "o2"])}
    )
    aligned = GraphGame(arena, {frozenset({"u"}): "o1", frozenset({"w"}): "o2"}, prefs)
    with pytest.raises(NotAntagonisticError):
        synthesize_antagonistic_spe(aligned)


def test_spe_parity_outcome_game():
    game = parity_outcome_game()
    profile = synthesize_antagonistic_spe(game)
    assert induced_outcome_from(game, profile, "v0") == "win0"
    assert induced_outcome_from(game, profile, "v1") == "win1"
    assert verify_spe(game, profile) is None


@pytest.mark.parametrize("seed", range(20))
def test_spe_guarantees_meet_and_verify(seed):
    rng = random.Random(seed)
    outcomes = [f"o{i}" for i in range(rng.randint(1, 4))]
    prof = inverse_pair_profile(rng, outcomes, players=("A", "B"))
    game = random_graph_game(rng, rng.randint(1, 4), ["A", "B"], outcomes, profile=prof)
    table = guarantee_table(game)
    for v in game.arena.vertices:
        ca = table.rows["A"].order.class_of(table.rows["A"].representative(v))
        cb = table.rows["B"].order.class_of(table.rows["B"].representative(v))
        assert ca == cb
    profile = synthesize_antagonistic_spe(game, table)
    assert verify_spe(game, profile) is None
    for v in game.arena.vertices:
        induced = induced_outcome_from(game, profile, v)
        expected = table.rows["A"].order.class_of(table.rows["A"].representative(v))
        assert induced in expected


@pytest.mark.parametrize("seed", range(10))
def test_spe_at_larger_scale(seed):
    rng = random.Random(seed + 30_000)
    outcomes = [f"o{i}" for i in range(rng.randint(2, 5))]
    prof = inverse_pair_profile(rng, outcomes, players=("A", "B"))
    game = random_graph_game(rng, rng.randint(4, 6), ["A", "B"], outcomes, profile=prof)
    table = guarantee_table(game)
    profile = synthesize_antagonistic_spe(game, table)
    assert verify_spe(game, profile) is None
    for v in game.arena.vertices:
        induced = induced_outcome_from(game, profile, v)
        assert induced in table.rows["A"].order.class_of(table.rows["A"].representative(v))


# --- Pareto-optimal equilibria ------------------------------------------------------------


def test_pareto_ne_shared_preferences_reach_top():
    arena = make_arena(
        ["A", "B"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "B"}, "u"
    )
    prefs = PreferenceProfile(
        ("o1", "o2"), {"A": linear_order(["o1", "o2"]), "B": linear_order(["o1", "o2"])}
    )
    game = GraphGame(arena, {frozenset({"u"}): "o1", frozenset({"w"}): "o2"}, prefs)
    report = muller_pareto_ne(game)
    assert report.induced_outcome == "o2"


def test_pareto_ne_single_feasible_set():
    arena = make_arena(
        ["A", "B"], ["u", "w"], [("u", "w"), ("w", "u")], {"u": "A", "w": "B"}, "u"
    )
    prefs = PreferenceProfile(
        ("o1", "o2"), {"A": linear_order(["o1", "o2"]), "B": linear_order(["o2", "o1"])}
    )
    game = GraphGame(arena, {frozenset({"u", "w"}): "o1"}, prefs)
    report = muller_pareto_ne(game)
    assert report.induced_outcome == "o1"


def test_pareto_ne_rejects_pattern():
    game = single_player_game()
    prefs = PreferenceProfile(
        ("x", "y", "z"),
        {"A": linear_order(["z", "y", "x"]), "B": linear_order(["x", "z", "y"])},
    )
    arena = make_arena(
        ["A", "B"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "B"}, "u"
    )
    patterned = GraphGame(arena, {frozenset({"u"}): "x", frozenset({"w"}): "y"}, prefs)
    with pytest.raises(PatternPresentError) as exc:
        muller_pareto_ne(patterned)
    assert exc.value.witness == ("A", "B", "x", "y", "z")


@pytest.mark.parametrize("seed", range(25))
def test_pareto_ne_output_is_front_and_stable(seed):
    rng = random.Random(seed)
    players = [f"P{i}" for i in range(rng.randint(2, 3))]
    outcomes = [f"o{i}" for i in range(rng.randint(3, 4))]
    prof = pattern_free_profile(rng, players, outcomes)
    game = random_graph_game(rng, rng.randint(1, 4), players, outcomes, profile=prof)
    report = muller_pareto_ne(game)
    assert report.induced_outcome in pareto_front(game.prefs, game.realizable_outcomes())
    assert verify_ne(game, report.profile) is None
