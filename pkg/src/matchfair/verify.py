"""Exact certificates for envy-freeness, Pareto-optimality and the two
equilibrium notions (spending and earning).

Every failing verdict names what broke.  Equilibrium witnesses use condition
numbers 1-4: agent rows, item columns, budget/earnings, optimal bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .core import (
    BUDGET,
    EARNINGS_FLOOR,
    Instance,
    MatchfairError,
    Verdict,
    as_price_vector,
    check_allocation_shape,
    dot,
    envy_report,
    envy_table,
    to_fraction,
    validate_allocation,
)
from .lp import LinearProgram, solve_lp


class InfeasibleBudget(MatchfairError, ValueError):
    pass


class InfeasibleEarnings(MatchfairError, ValueError):
    pass


@dataclass(frozen=True)
class ToleranceConfig:
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        eps = to_fraction(self.eps)
        if eps < 0:
            raise ValueError(f"eps must be nonnegative, got {eps}")
        object.__setattr__(self, "eps", eps)


EXACT = ToleranceConfig()


class BundleChoice(NamedTuple):
    value: Fraction
    money: Fraction
    bundle: tuple[Fraction, ...]


def check_envy_free(inst: Instance, x) -> Verdict:
    rep = envy_report(inst, x)
    if rep.envy_free:
        return Verdict(True)
    i, k = rep.worst_pair
    table = envy_table(inst, x)
    return Verdict(
        False,
        {
            "envier": i,
            "envied": k,
            "own_value": table[i][i],
            "other_value": table[i][k],
            "gap": rep.additive_gap,
        },
    )


def _allocation_lp(inst: Instance, n_extra: int = 0) -> LinearProgram:
    """Objective placeholder plus row/column constraints over ``y[i][j]``
    (flattened row-major) followed by ``n_extra`` further variables."""
    n, m = inst.n_agents, inst.n_items
    nv = n * m + n_extra
    lp = LinearProgram([0] * nv, "max")
    for i in range(n):
        row = [0] * nv
        for j in range(m):
            row[i * m + j] = 1
        lp.add(row, "=", inst.demands[i])
    for j in range(m):
        col = [0] * nv
        for i in range(n):
            col[i * m + j] = 1
        lp.add(col, "=", 1)
    return lp


def _unflatten(values, n: int, m: int):
    return tuple(tuple(values[i * m + j] for j in range(m)) for i in range(n))


def _pareto_program(inst: Instance, x):
    """Maximise the total improvement over allocations that make nobody worse
    off than under ``x``."""
    n, m = inst.n_agents, inst.n_items
    lp = _allocation_lp(inst, n_extra=n)
    lp.objective = tuple([Fraction(0)] * (n * m) + [Fraction(1)] * n)
    for i in range(n):
        row = [Fraction(0)] * (n * m + n)
        for j in range(m):
            row[i * m + j] = inst.utilities[i][j]
        row[n * m + i] = Fraction(-1)
        lp.add(row, ">=", dot(inst.utilities[i], x[i]))
    sol = solve_lp(lp)
    if not sol.optimal:
        raise RuntimeError(f"Pareto LP returned {sol.status.value}")
    return sol


def pareto_slack(inst: Instance, x) -> Fraction:
    """Largest total utility gain available without hurting anyone."""
    return _pareto_program(inst, check_allocation_shape(inst, x)).objective_value


def check_pareto_optimal(inst: Instance, x) -> Verdict:
    x = check_allocation_shape(inst, x)
    sol = _pareto_program(inst, x)
    if sol.objective_value == 0:
        return Verdict(True)
    n, m = inst.n_agents, inst.n_items
    y = _unflatten(sol.x, n, m)
    gains = tuple(dot(inst.utilities[i], y[i]) - dot(inst.utilities[i], x[i]) for i in range(n))
    return Verdict(False, {"better_allocation": y, "gains": gains, "total_gain": sol.objective_value})


def _bundle_lp(inst: Instance, i: int, money, relation: str, d) -> LinearProgram:
    m = inst.n_items
    lp = LinearProgram(inst.utilities[i], "max")
    lp.add([1] * m, "=", d)
    lp.add(money, relation, d)
    return lp


def _two_stage(inst, i, money, relation, d, money_sense) -> Optional[BundleChoice]:
    lp = _bundle_lp(inst, i, money, relation, d)
    first = solve_lp(lp)
    if not first.optimal:
        return None
    value = first.objective_value
    lp.objective = tuple(money)
    lp.sense = money_sense
    lp.add(inst.utilities[i], ">=", value)
    second = solve_lp(lp)
    if not second.optimal:
        raise RuntimeError(f"second stage returned {second.status.value}")
    return BundleChoice(value, second.objective_value, second.x)


def best_affordable_bundle(inst: Instance, i: int, p, d=None) -> BundleChoice:
    """Best utility over bundles of size ``d`` costing at most ``d``, and the
    least money spent on any bundle attaining it."""
    p = as_price_vector(p, inst.n_items)
    d = inst.demands[i] if d is None else to_fraction(d)
    res = _two_stage(inst, i, p, "<=", d * BUDGET, "min")
    if res is None:
        raise InfeasibleBudget(f"agent {i} cannot afford any bundle at prices {p}")
    return res


def best_earning_bundle(inst: Instance, i: int, q, d=None) -> BundleChoice:
    """Best utility over bundles of size ``d`` earning at least ``d``, and the
    most money earned by any bundle attaining it."""
    q = as_price_vector(q, inst.n_items)
    d = inst.demands[i] if d is None else to_fraction(d)
    res = _two_stage(inst, i, q, ">=", d * EARNINGS_FLOOR, "max")
    if res is None:
        raise InfeasibleEarnings(f"no bundle of agent {i} earns {d} at payments {q}")
    return res


def _utility_range(inst: Instance, i: int) -> Fraction:
    row = inst.utilities[i]
    return max(row) - min(row)


def _matching_conditions(inst, x) -> Optional[Verdict]:
    v = validate_allocation(inst, x)
    if v.holds:
        return None
    w = dict(v.witness)
    w["condition"] = 2 if w["reason"] == "column_sum" else 1
    return Verdict(False, w)


def check_hz_equilibrium(inst: Instance, x, p, tol: ToleranceConfig = EXACT) -> Verdict:
    x = check_allocation_shape(inst, x)
    p = as_price_vector(p, inst.n_items)
    eps = tol.eps
    bad = _matching_conditions(inst, x)
    if bad is not None:
        return bad
    for i in range(inst.n_agents):
        spent = dot(p, x[i])
        if spent > inst.demands[i] * BUDGET + eps:
            return Verdict(False, {"condition": 3, "agent": i, "spent": spent, "budget": inst.demands[i] * BUDGET})
    for i in range(inst.n_agents):
        try:
            best = best_affordable_bundle(inst, i, p)
        except InfeasibleBudget:
            return Verdict(False, {"condition": 3, "agent": i, "reason": "no affordable bundle"})
        got = dot(inst.utilities[i], x[i])
        spent = dot(p, x[i])
        slack = eps * _utility_range(inst, i)
        if got < best.value - slack or spent > best.money + eps:
            return Verdict(
                False,
                {
                    "condition": 4,
                    "agent": i,
                    "utility": got,
                    "best_utility": best.value,
                    "spent": spent,
                    "cheapest": best.money,
                    "better_bundle": best.bundle,
                },
            )
    return Verdict(True)


def check_earnings_equilibrium(inst: Instance, x, q, tol: ToleranceConfig = EXACT) -> Verdict:
    x = check_allocation_shape(inst, x)
    q = as_price_vector(q, inst.n_items)
    eps = tol.eps
    bad = _matching_conditions(inst, x)
    if bad is not None:
        return bad
    for i in range(inst.n_agents):
        earned = dot(q, x[i])
        if earned < inst.demands[i] * EARNINGS_FLOOR - eps:
            return Verdict(False, {"condition": 3, "agent": i, "earned": earned, "floor": inst.demands[i] * EARNINGS_FLOOR})
    for i in range(inst.n_agents):
        try:
            best = best_earning_bundle(inst, i, q)
        except InfeasibleEarnings:
            return Verdict(False, {"condition": 3, "agent": i, "reason": "no earning bundle"})
        got = dot(inst.utilities[i], x[i])
        earned = dot(q, x[i])
        slack = eps * _utility_range(inst, i)
        if got < best.value - slack or earned < best.money - eps:
            return Verdict(
                False,
                {
                    "condition": 4,
                    "agent": i,
                    "utility": got,
                    "best_utility": best.value,
                    "earned": earned,
                    "highest_earning": best.money,
                    "better_bundle": best.bundle,
                },
            )
    return Verdict(True)
