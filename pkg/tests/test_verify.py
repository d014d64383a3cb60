from fractions import Fraction as F

import pytest

from matchfair import make_instance
from matchfair.verify import (
    InfeasibleBudget,
    InfeasibleEarnings,
    ToleranceConfig,
    best_affordable_bundle,
    best_earning_bundle,
    check_earnings_equilibrium,
    check_envy_free,
    check_hz_equilibrium,
    check_pareto_optimal,
)

import oracles
from conftest import fig1, fig2, t_alloc

HALF = F(1, 2)
UNIFORM = ((HALF, HALF), (HALF, HALF))


def test_fig2_envy_free_set_is_one_half():
    # oracle: the defining inequalities on a fine t-grid
    u = [[-1, -2], [0, -1]]
    ef_ts = [F(k, 100) for k in range(101) if oracles.envy_free_direct(u, t_alloc(F(k, 100)))]
    assert ef_ts == [HALF]
    assert check_envy_free(fig2(), t_alloc(HALF)).holds


def test_fig2_t_zero_envy_witness():
    assert not oracles.envy_free_direct([[-1, -2], [0, -1]], t_alloc(0))
    v = check_envy_free(fig2(), t_alloc(0))
    assert not v.holds
    assert (v.witness["envier"], v.witness["envied"]) == (1, 0)
    assert v.witness["own_value"] == -1 and v.witness["other_value"] == 0


def test_single_agent_is_envy_free():
    assert check_envy_free(make_instance([[-3, 2]], demands=[2]), [[1, 1]]).holds


class TestPareto:
    def test_fig2_every_allocation(self):
        # any fractional perfect matching is Pareto-optimal here
        for k in range(0, 11):
            assert check_pareto_optimal(fig2(), t_alloc(F(k, 10))).holds

    def test_swap_improves_both(self):
        inst = make_instance([[1, 0], [0, 1]])
        v = check_pareto_optimal(inst, [[0, 1], [1, 0]])
        assert not v.holds
        assert v.witness["better_allocation"] == ((1, 0), (0, 1))
        assert oracles.dominating_grid_point([[1, 0], [0, 1]], [[0, 1], [1, 0]]) is not None

    def test_one_by_one(self):
        assert check_pareto_optimal(make_instance([[-4]]), [[1]]).holds


class TestBestBundles:
    goods = make_instance([[1, 0], [1, 0]])

    def test_budget_binds(self):
        b = best_affordable_bundle(self.goods, 0, [2, 0])
        assert (b.value, b.money) == (HALF, 1)

    def test_free_market(self):
        b = best_affordable_bundle(self.goods, 0, [0, 0])
        assert (b.value, b.money) == (1, 0)

    def test_fig1_chores(self):
        b = best_affordable_bundle(fig1(10), 0, [0, 0])
        assert b.value == -1 and b.money == 0 and b.bundle == (1, 0)

    def test_unaffordable(self):
        with pytest.raises(InfeasibleBudget):
            best_affordable_bundle(self.goods, 0, [2, 3])

    def test_earning_bundle_matches_grid(self):
        b = best_earning_bundle(self.goods, 0, [0, 2])
        # oracle: y2 on a grid, feasible iff 2 y2 >= 1, maximise y1 then earnings
        feas = [F(k, 1000) for k in range(1001) if 2 * F(k, 1000) >= 1]
        best_val = max(1 - y2 for y2 in feas)
        best_earn = max(2 * y2 for y2 in feas if 1 - y2 == best_val)
        assert (b.value, b.money) == (best_val, best_earn) == (HALF, 1)

    def test_vacuous_earnings(self):
        inst = make_instance([[3, -1, 2], [0, 0, 0], [0, 0, 0]])
        assert best_earning_bundle(inst, 0, [1, 1, 1]).value == 3

    def test_no_earning_bundle(self):
        with pytest.raises(InfeasibleEarnings):
            best_earning_bundle(self.goods, 0, [0, 0])


class TestHZ:
    goods = make_instance([[1, 0], [1, 0]])

    def test_shared_good(self):
        assert oracles.hz_equilibrium_grid([[1, 0], [1, 0]], UNIFORM, [2, 0])
        assert check_hz_equilibrium(self.goods, UNIFORM, [2, 0]).holds

    def test_price_too_low(self):
        assert not oracles.hz_equilibrium_grid([[1, 0], [1, 0]], UNIFORM, [1, 0])
        v = check_hz_equilibrium(self.goods, UNIFORM, [1, 0])
        assert not v.holds and v.witness["condition"] == 4
        assert v.witness["best_utility"] == 1

    def test_free_favourites(self):
        inst = make_instance([[1, 0], [0, 1]])
        assert oracles.hz_equilibrium_grid([[1, 0], [0, 1]], [[1, 0], [0, 1]], [0, 0])
        assert check_hz_equilibrium(inst, [[1, 0], [0, 1]], [0, 0]).holds

    def test_overspending(self):
        v = check_hz_equilibrium(self.goods, UNIFORM, [3, 0])
        assert not v.holds and v.witness["condition"] == 3

    def test_not_cheapest(self):
        # both items equally good for agent 0; paying for the dear one is not cheapest
        inst = make_instance([[1, 1], [1, 0]])
        v = check_hz_equilibrium(inst, [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]], [F(1, 2), F(1, 2)])
        assert not v.holds and v.witness["condition"] == 4

    def test_invalid_allocation(self):
        v = check_hz_equilibrium(self.goods, [[1, 1], [0, 0]], [0, 0])
        assert not v.holds and v.witness["condition"] == 1

    def test_eps_relaxes_budget(self):
        x = ((F(3, 5), F(2, 5)), (F(2, 5), F(3, 5)))
        assert not check_hz_equilibrium(self.goods, x, [2, 0]).holds
        assert check_hz_equilibrium(self.goods, x, [2, 0], ToleranceConfig(F(1, 5))).holds


class TestEarnings:
    goods = make_instance([[1, 0], [1, 0]])

    def test_converted_equilibrium(self):
        assert check_earnings_equilibrium(self.goods, UNIFORM, [0, 2]).holds

    def test_under_earning(self):
        v = check_earnings_equilibrium(self.goods, UNIFORM, [0, 1])
        assert not v.holds and v.witness["condition"] == 3
        assert v.witness["earned"] == HALF

    def test_single_chore(self):
        assert check_earnings_equilibrium(make_instance([[-5]]), [[1]], [1]).holds


def test_eps_monotone():
    inst = make_instance([[3, 1, 0], [0, 2, 2], [1, 1, 4]])
    x = [[F(1, 2), F(1, 2), 0], [F(1, 2), 0, F(1, 2)], [0, F(1, 2), F(1, 2)]]
    p = [1, F(1, 2), 0]
    held = False
    for k in range(0, 30):
        v = check_hz_equilibrium(inst, x, p, ToleranceConfig(F(k, 10))).holds
        assert v or not held
        held = held or v
    assert held
