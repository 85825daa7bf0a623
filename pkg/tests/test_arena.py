import random

import pytest
from hypothesis import given, settings, strategies as st

from graphgames.arena import (
    EnergySpec,
    Lasso,
    StrategyMachine,
    StrategyProfile,
    clamp_budget,
    energy_product,
    feasible_inf_sets,
    induced_lasso,
    inf_set,
    make_arena,
    memoryless_machine,
    minimize_machine,
    primitive_cycle,
    validate_arena,
    walk_configurations,
)
from graphgames.errors import InvalidArenaError, TooLargeError
from graphgames.gen import random_arena

from oracles import feasible_sets_by_walk_search


def two_vertex_arena():
    return make_arena(
        ["A"], ["u", "w"], [("u", "u"), ("u", "w"), ("w", "w")], {"u": "A", "w": "A"}, "u"
    )


# --- validation ---------------------------------------------------------


def test_minimal_legal_arena():
    doc = {
        "players": ["A"],
        "vertices": [{"id": "v", "owner": "A"}],
        "edges": [["v", "v"]],
        "start": "v",
    }
    arena = validate_arena(doc)
    assert arena.successors("v") == ("v",)


def test_dead_end_vertex_rejected():
    with pytest.raises(InvalidArenaError) as exc:
        make_arena(["A"], ["v", "w"], [("v", "v"), ("v", "w")], {"v": "A", "w": "A"}, "v")
    assert any(code == "DeadEndVertex" for code, _ in exc.value.errors)


def test_dangling_edge_rejected():
    with pytest.raises(InvalidArenaError) as exc:
        make_arena(["A"], ["u"], [("u", "u"), ("u", "x")], {"u": "A"}, "u")
    assert any(code == "DanglingEdge" for code, _ in exc.value.errors)


def test_all_violations_reported_together():
    doc = {
        "players": ["A"],
        "vertices": [{"id": "u", "owner": "B"}, {"id": "w", "owner": "A"}],
        "edges": [["u", "x"], ["u", "u"]],
        "start": "nope",
    }
    with pytest.raises(InvalidArenaError) as exc:
        validate_arena(doc)
    codes = {code for code, _ in exc.value.errors}
    assert {"UnknownOwner", "DanglingEdge", "MissingStart", "DeadEndVertex"} <= codes


# --- lassos and inf-sets --------------------------------------------------


def test_inf_set_is_cycle_support():
    assert inf_set(Lasso(("u",), ("w",))) == {"w"}
    assert inf_set(Lasso((), ("u", "w"))) == {"u", "w"}


def test_inf_set_matches_long_simulation():
    lasso = Lasso(("u", "w", "u"), ("u", "w"))
    seq = list(lasso.stem)
    while len(seq) < len(lasso.stem) + 3 * len(lasso.cycle):
        seq.extend(lasso.cycle)
    tail = seq[len(lasso.stem) + len(lasso.cycle):]
    assert inf_set(lasso) == frozenset(tail)


def test_primitive_cycle_reduction():
    assert primitive_cycle(("v", "v")) == ("v",)
    assert primitive_cycle(("u", "w", "u", "w")) == ("u", "w")
    assert primitive_cycle(("u", "w", "w")) == ("u", "w", "w")


# --- feasible recurrence sets ---------------------------------------------


def test_feasible_single_self_loop():
    arena = make_arena(["A"], ["v"], [("v", "v")], {"v": "A"}, "v")
    assert feasible_inf_sets(arena, "v") == {frozenset({"v"})}


def test_feasible_two_vertices():
    arena = two_vertex_arena()
    assert feasible_inf_sets(arena, "u") == {frozenset({"u"}), frozenset({"w"})}
    assert feasible_inf_sets(arena, "w") == {frozenset({"w"})}


def test_feasible_two_cycle():
    arena = make_arena(["A"], ["u", "w"], [("u", "w"), ("w", "u")], {"u": "A", "w": "A"}, "u")
    assert feasible_inf_sets(arena, "u") == {frozenset({"u", "w"})}


def test_feasible_bound_guard():
    arena = two_vertex_arena()
    with pytest.raises(TooLargeError):
        feasible_inf_sets(arena, "u", max_vertices=1)


@pytest.mark.parametrize("seed", range(30))
def test_feasible_agrees_with_walk_search(seed):
    rng = random.Random(seed)
    arena = random_arena(rng, rng.randint(1, 6), ["A", "B"])
    source = rng.choice(list(arena.vertices))
    assert feasible_inf_sets(arena, source) == feasible_sets_by_walk_search(arena, source)


# --- induced lassos --------------------------------------------------------


def test_lasso_single_self_loop():
    arena = make_arena(["A"], ["v"], [("v", "v")], {"v": "A"}, "v")
    lasso = induced_lasso(arena, StrategyProfile({"A": memoryless_machine("A", {"v": "v"})}))
    assert lasso.stem == () and lasso.cycle == ("v",)


def test_lasso_memoryless_step():
    arena = make_arena(["A"], ["u", "w"], [("u", "w"), ("w", "w")], {"u": "A", "w": "A"}, "u")
    lasso = induced_lasso(arena, StrategyProfile({"A": memoryless_machine("A", {"u": "w", "w": "w"})}))
    assert lasso.stem == ("u",) and lasso.cycle == ("w",)


def test_lasso_memory_cycle_normalized():
    # one bit flipping on every visit of the single vertex; the projected
    # cycle (v, v) collapses to its primitive period (v,)
    arena = make_arena(["A"], ["v"], [("v", "v")], {"v": "A"}, "v")
    machine = StrategyMachine(
        "A", 1, {("v", 0): 1, ("v", 1): 0}, {("v", 0): "v", ("v", 1): "v"}
    )
    configs, loop = walk_configurations(arena, StrategyProfile({"A": machine}))
    assert [v for v, _ in configs[loop:]] == ["v", "v"]
    lasso = induced_lasso(arena, StrategyProfile({"A": machine}))
    assert lasso.cycle == ("v",)


@pytest.mark.parametrize("seed", range(20))
def test_walk_termination_bound_and_feasibility(seed):
    rng = random.Random(seed)
    arena = random_arena(rng, rng.randint(1, 5), ["A", "B"])
    machines = {}
    for p in arena.players:
        bits = rng.randint(0, 1)
        update = {}
        choice = {}
        for v in arena.vertices:
            for q in range(2 ** bits):
                update[(v, q)] = rng.randrange(2 ** bits)
        for v in arena.owned_by(p):
            for q in range(2 ** bits):
                choice[(v, q)] = rng.choice(arena.successors(v))
        machines[p] = StrategyMachine(p, bits, update, choice)
    profile = StrategyProfile(machines)
    configs, loop = walk_configurations(arena, profile)
    states = 1
    for m in machines.values():
        states *= 2 ** m.memory_bits
    assert len(configs) <= len(arena.vertices) * states + 1
    lasso = induced_lasso(arena, profile)
    assert inf_set(lasso) in feasible_inf_sets(arena, arena.start)


# --- machine minimization ---------------------------------------------------


@pytest.mark.parametrize("seed", range(15))
def test_minimization_preserves_behavior(seed):
    rng = random.Random(seed)
    arena = random_arena(rng, rng.randint(1, 4), ["A"])
    bits = rng.randint(0, 2)
    update = {}
    choice = {}
    for v in arena.vertices:
        for q in range(2 ** bits):
            update[(v, q)] = rng.randrange(2 ** bits)
            choice[(v, q)] = rng.choice(arena.successors(v))
    machine = StrategyMachine("A", bits, update, choice)
    small = minimize_machine(machine, arena.vertices, arena.vertices)
    assert small.memory_bits <= machine.memory_bits
    for trial in range(20):
        seq = [rng.choice(list(arena.vertices)) for _ in range(10)]
        q1, q2 = machine.init, small.init
        for v in seq:
            assert machine.choice.get((v, q1)) == small.choice.get((v, q2))
            q1 = machine.next_state(v, q1)
            q2 = small.next_state(v, q2)


# --- energy product ---------------------------------------------------------


def test_clamp_recurrence_examples():
    assert clamp_budget(3 + 5, -2, 4) == 4
    assert clamp_budget(0 - 7, -2, 4) == -2
    assert clamp_budget(0, -2, 4) == 0


def test_energy_zero_weights_constant_budget():
    arena = two_vertex_arena()
    spec = EnergySpec({"A": {}}, {"A": (-1, 1)}, {"u": 0, "w": 1})
    product = energy_product(arena, spec)
    assert all(product.budgets[pv] == (0,) for pv in product.arena.vertices)
    assert all(product.min_so_far[pv] == (0,) for pv in product.arena.vertices)


def test_energy_clamping_and_minimum():
    arena = make_arena(["A"], ["u", "w"], [("u", "w"), ("w", "w")], {"u": "A", "w": "A"}, "u")
    spec = EnergySpec({"A": {"u": 0, "w": -7}}, {"A": (-2, 4)}, {"u": 0, "w": 0})
    product = energy_product(arena, spec)
    (w_state,) = [pv for pv in product.arena.vertices if product.base_vertex[pv] == "w"]
    assert product.budgets[w_state] == (-2,)
    assert product.min_so_far[w_state] == (-2,)


@pytest.mark.parametrize("seed", range(10))
def test_energy_minima_monotone_along_edges(seed):
    rng = random.Random(seed)
    from graphgames.gen import random_energy_spec

    arena = random_arena(rng, rng.randint(1, 4), ["A", "B"])
    spec = random_energy_spec(rng, arena)
    product = energy_product(arena, spec)
    order = arena.sorted_players()
    for (u, w) in product.arena.edges:
        for i, p in enumerate(order):
            lo, hi = spec.caps[p]
            assert lo <= product.budgets[w][i] <= hi
            assert product.min_so_far[w][i] <= product.min_so_far[u][i]


def test_energy_product_bound_guard():
    arena = two_vertex_arena()
    spec = EnergySpec({"A": {"u": 1, "w": -1}}, {"A": (-5, 5)}, {"u": 0, "w": 0})
    with pytest.raises(TooLargeError):
        energy_product(arena, spec, max_states=2)


# --- property-based checks ---------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(-8, 0), st.integers(0, 8), st.integers(-20, 20))
def test_clamp_stays_in_caps(base, lo, hi, cost):
    value = clamp_budget(base % (hi - lo + 1) + lo + cost, lo, hi)
    assert lo <= value <= hi
