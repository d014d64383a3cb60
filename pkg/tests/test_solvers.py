from fractions import Fraction as F
from itertools import product

import pytest

from conftest import fig1, fig2, random_unit_instance, t_alloc
from matchfair import check_envy_free, check_hz_equilibrium, check_pareto_optimal, make_instance
from matchfair.core import dot, envy_report
from matchfair.solvers import (
    GridConfig,
    NbConfig,
    NonIntegerDemand,
    NotFound,
    SignError,
    TooLarge,
    TooManyItems,
    WrongArity,
    disutility_product,
    expand_types,
    find_hz_equilibrium_grid,
    solve_min_disutility_product,
    solve_nash_bargaining_goods,
    solve_pareto_constrained_nb,
    solve_two_type_ef_po,
    solve_welfare_max_ef,
)
from matchfair.solvers import _grid
from matchfair.solvers.market import price_cells
from oracles import envy_free_direct

IDENTITY = ((1, 0), (0, 1))
UNIFORM = ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))


# -- grid helpers -----------------------------------------------------------


def test_grid_points_are_allocations():
    inst = make_instance([[1, 1, 0], [0, 0, 1]], demands=[2, 1])
    pts = list(_grid.grid_points(inst, F(1, 2)))
    assert pts
    for k in pts:
        assert [sum(r) for r in k] == [4, 2]
        assert all(sum(k[i][j] for i in range(2)) == 2 for j in range(3))
    assert len(set(pts)) == len(pts)


def test_grid_step_must_divide_demands():
    inst = make_instance([[1, 1, 0], [0, 0, 1]], demands=[2, 1])
    with pytest.raises(_grid.OffGrid):
        list(_grid.grid_points(inst, F(2, 3)))


def test_lex_key_prefers_identity():
    assert _grid.lex_key(((1, 0), (0, 1))) < _grid.lex_key(((0, 1), (1, 0)))


# -- welfare-max EF -----------------------------------------------------------


def test_welfare_ef_fig2_is_half():
    x = solve_welfare_max_ef(fig2())
    assert x == t_alloc(F(1, 2))


def test_welfare_ef_fig2_matches_t_grid():
    inst = fig2()
    ef_ts = [F(k, 40) for k in range(41) if envy_free_direct(inst.utilities, t_alloc(F(k, 40)))]
    assert ef_ts == [F(1, 2)]


def test_welfare_ef_opposed_is_identity():
    assert solve_welfare_max_ef(make_instance([[1, 0], [0, 1]])) == IDENTITY


def test_welfare_ef_identical_is_uniform():
    assert solve_welfare_max_ef(make_instance([[1, 0], [1, 0]])) == UNIFORM


def test_welfare_ef_is_envy_free_on_random(rng):
    for _ in range(15):
        inst = random_unit_instance(rng, rng.choice([2, 3]))
        x = solve_welfare_max_ef(inst)
        assert envy_free_direct(inst.utilities, x)


def test_welfare_ef_beats_ef_grid_points(rng):
    for _ in range(10):
        inst = random_unit_instance(rng, 2)
        best = sum(dot(inst.utilities[i], r) for i, r in enumerate(solve_welfare_max_ef(inst)))
        for k in range(21):
            x = ((1 - F(k, 20), F(k, 20)), (F(k, 20), 1 - F(k, 20)))
            if envy_free_direct(inst.utilities, x):
                assert sum(dot(inst.utilities[i], r) for i, r in enumerate(x)) <= best


# -- two types ---------------------------------------------------------------


def two_type_example():
    return make_instance([[1, 1, 0], [0, 0, 1]], demands=[2, 1])


def test_two_type_example():
    x = solve_two_type_ef_po(two_type_example())
    assert x == ((1, 1, 0), (0, 0, 1))


def test_two_type_example_against_brute_force():
    inst = two_type_example()
    x = solve_two_type_ef_po(inst)
    welfare = sum(dot(inst.utilities[i], x[i]) for i in range(2))
    steps = 6
    for ks in product(range(steps + 1), repeat=3):
        if sum(ks) != 2 * steps:
            continue
        y1 = tuple(F(k, steps) for k in ks)
        y = (y1, tuple(1 - v for v in y1))
        if envy_free_direct(inst.utilities, y, inst.demands):
            assert sum(dot(inst.utilities[i], y[i]) for i in range(2)) <= welfare
        gains = [dot(inst.utilities[i], y[i]) - dot(inst.utilities[i], x[i]) for i in range(2)]
        assert not (min(gains) >= 0 and max(gains) > 0)


def test_two_type_fig2_and_opposed():
    assert solve_two_type_ef_po(fig2()) == t_alloc(F(1, 2))
    assert solve_two_type_ef_po(make_instance([[1, 0], [0, 1]])) == IDENTITY


def test_two_type_needs_two_agents():
    with pytest.raises(WrongArity):
        solve_two_type_ef_po(make_instance([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_two_type_random(rng):
    for _ in range(10):
        d1 = rng.randint(1, 3)
        d2 = rng.randint(1, 3)
        m = d1 + d2
        inst = make_instance([[rng.randint(-5, 5) for _ in range(m)] for _ in range(2)], demands=[d1, d2])
        x = solve_two_type_ef_po(inst)
        assert check_envy_free(inst, x).holds
        assert check_pareto_optimal(inst, x).holds


def test_expand_types_example():
    inst = two_type_example()
    exp = expand_types(inst)
    assert exp.instance.n_agents == 3
    assert exp.instance.unit_demand
    assert exp.instance.agent_names() == ("a0#0", "a0#1", "a1#0")
    y = exp.expand(solve_two_type_ef_po(inst))
    assert y[0] == y[1] == (F(1, 2), F(1, 2), 0)
    assert y[2] == (0, 0, 1)
    assert envy_report(exp.instance, y).envy_free


def test_expand_single_type_and_identity():
    one = make_instance([[1, 2, 3]], demands=[3])
    exp = expand_types(one)
    assert exp.expand(((1, 1, 1),)) == ((F(1, 3),) * 3,) * 3
    opp = make_instance([[1, 0], [0, 1]])
    assert expand_types(opp).expand(IDENTITY) == IDENTITY


def test_expand_rejects_fractional_demand():
    with pytest.raises(NonIntegerDemand):
        expand_types(make_instance([[1, 0], [0, 1]], demands=[F(1, 2), F(3, 2)]))


# -- Nash bargaining (goods) ------------------------------------------------


def test_nb_opposed():
    res = solve_nash_bargaining_goods(make_instance([[1, 0], [0, 1]]))
    assert abs(float(res.nash_welfare) - 1) < 1e-6
    assert res.pareto_slack <= 2 * 1e-9


def test_nb_identical():
    res = solve_nash_bargaining_goods(make_instance([[1, 0], [1, 0]]))
    assert abs(float(res.nash_welfare) - 0.25) < 1e-6
    assert abs(float(res.allocation[0][0]) - 0.5) < 1e-6


def test_nb_single():
    res = solve_nash_bargaining_goods(make_instance([[7]]))
    assert res.allocation == ((1,),)
    assert res.nash_welfare == 7


def test_nb_output_is_a_valid_allocation(rng):
    from matchfair.core import validate_allocation

    for _ in range(5):
        n = rng.choice([2, 3])
        inst = make_instance([[rng.randint(0, 6) for _ in range(n)] for _ in range(n)])
        res = solve_nash_bargaining_goods(inst, NbConfig(tolerance=1e-8))
        assert validate_allocation(inst, res.allocation).holds
        assert float(res.pareto_slack) <= 1e-5


def test_nb_flags_zero_utility_agent():
    res = solve_nash_bargaining_goods(make_instance([[0, 0], [1, 2]]))
    assert res.zero_utility_agents == (0,)
    assert res.nash_welfare == 2


def test_nb_rejects_chores():
    with pytest.raises(SignError):
        solve_nash_bargaining_goods(fig2())


# -- chores products ----------------------------------------------------------


@pytest.mark.parametrize("c", [2, 10, 100])
def test_min_product_fig1(c):
    res = solve_min_disutility_product(fig1(c), F(1, 100))
    assert res.allocation == t_alloc(1)
    assert res.product == 0
    assert res.envy.multiplicative_ratio == c
    assert res.envy.worst_pair == (0, 1)


def test_min_product_constant_objective_gives_identity():
    res = solve_min_disutility_product(make_instance([[-1, -1], [-1, -1]]))
    assert res.allocation == IDENTITY
    assert res.product == 1


def test_min_product_single():
    res = solve_min_disutility_product(make_instance([[-5]]))
    assert res.allocation == ((1,),)
    assert res.product == 5


def test_min_product_agrees_with_vertices(rng):
    # the minimum of the product sits at a vertex, i.e. a permutation
    from itertools import permutations

    for _ in range(10):
        inst = make_instance([[-rng.randint(0, 5) for _ in range(3)] for _ in range(3)])
        res = solve_min_disutility_product(inst)
        best = min(
            disutility_product(inst, tuple(tuple(int(perm[i] == j) for j in range(3)) for i in range(3)))
            for perm in permutations(range(3))
        )
        assert res.product == best == disutility_product(inst, res.allocation)


def test_pcnb_fig2():
    res = solve_pareto_constrained_nb(fig2(), F(1, 100))
    assert res.allocation == t_alloc(0)
    assert res.product == 1
    assert res.envy.additive_gap == 1
    assert res.envy.multiplicative_ratio is None


def test_pcnb_fig1_maximiser():
    # every allocation of this instance is Pareto-optimal, so the answer is the
    # unconstrained maximiser of (1 + (C-1)t)(1-t) rounded to the grid
    c = 10
    res = solve_pareto_constrained_nb(fig1(c), F(1, 100))
    ts = [F(k, 100) for k in range(101)]
    best = max(ts, key=lambda t: ((1 + (c - 1) * t) * (1 - t), -t))
    assert best == F(11, 25)
    assert res.allocation == t_alloc(best)
    assert res.product == F(1736, 625)
    for t in ts[::10]:
        assert check_pareto_optimal(fig1(c), t_alloc(t)).holds


def test_pcnb_single():
    res = solve_pareto_constrained_nb(make_instance([[-3]]))
    assert res.allocation == ((1,),)


def test_pcnb_result_is_po_and_maximal(rng):
    for _ in range(5):
        inst = make_instance([[-rng.randint(1, 5) for _ in range(2)] for _ in range(2)])
        res = solve_pareto_constrained_nb(inst, F(1, 20))
        assert check_pareto_optimal(inst, res.allocation).holds
        for k in range(21):
            x = t_alloc(F(k, 20))
            if check_pareto_optimal(inst, x).holds:
                assert disutility_product(inst, x) <= res.product


def test_product_solvers_reject_goods_and_size():
    with pytest.raises(SignError):
        solve_min_disutility_product(make_instance([[1, 0], [0, 1]]))
    big = make_instance([[-1] * 4 for _ in range(4)])
    with pytest.raises(TooLarge):
        solve_min_disutility_product(big)
    with pytest.raises(TooLarge):
        solve_pareto_constrained_nb(big)


# -- grid HZ ----------------------------------------------------------------


def test_price_cells_order_and_pruning():
    inst = make_instance([[1, 0], [0, 1]])
    cells = list(price_cells(inst, GridConfig(F(1), F(2))))
    assert cells[0] == (0, 0)
    # (0, 0) is visited once, under its first zero
    assert cells.count((0, 0)) == 1
    assert all(0 in p for p in cells)
    assert all(sum(p) <= 2 for p in cells)


def test_grid_hz_opposed():
    x, p = find_hz_equilibrium_grid(make_instance([[1, 0], [0, 1]]), GridConfig(delta=1))
    assert x == IDENTITY and p == (0, 0)


def test_grid_hz_identical():
    inst = make_instance([[1, 0], [1, 0]])
    x, p = find_hz_equilibrium_grid(inst, GridConfig(F(1, 4), F(2)))
    assert p == (2, 0)
    assert x == UNIFORM
    assert check_hz_equilibrium(inst, x, p).holds


def test_grid_hz_all_ones():
    x, p = find_hz_equilibrium_grid(make_instance([[1, 1], [1, 1]]))
    assert x == IDENTITY and p == (0, 0)


def test_grid_hz_workers_match_serial():
    inst = make_instance([[3, 1, 0], [3, 0, 1], [2, 2, 1]])
    serial = find_hz_equilibrium_grid(inst, GridConfig(eps=F(1, 100)))
    parallel = find_hz_equilibrium_grid(inst, GridConfig(eps=F(1, 100)), workers=2)
    assert serial == parallel


def test_grid_hz_results_are_ef_and_po(rng):
    for _ in range(8):
        inst = random_unit_instance(rng, rng.choice([2, 3]))
        try:
            x, p = find_hz_equilibrium_grid(inst)
        except NotFound:
            continue
        assert check_envy_free(inst, x).holds
        assert check_pareto_optimal(inst, x).holds


def test_grid_hz_not_found_reports_closest():
    # identical agents need the price 2 on the liked item; a cap of 1 misses it
    inst = make_instance([[1, 0], [1, 0]])
    with pytest.raises(NotFound) as info:
        find_hz_equilibrium_grid(inst, GridConfig(F(1, 2), F(1)))
    assert info.value.closest is not None
    assert info.value.excess > 0


def test_grid_hz_item_cap():
    with pytest.raises(TooManyItems):
        find_hz_equilibrium_grid(make_instance([[1] * 5 for _ in range(5)]))


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(delta=0)
    with pytest.raises(ValueError):
        GridConfig(eps=-1)
    with pytest.raises(ValueError):
        GridConfig(delta=2, price_cap=1)
