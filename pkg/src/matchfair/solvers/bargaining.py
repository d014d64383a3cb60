"""Nash-bargaining style programs over fractional perfect matchings.

Goods: maximise the product of utilities (log-concave; solved by away-step
conditional gradient with an exact linear oracle).

Chores: minimise the product of disutilities, or maximise it over the
Pareto-optimal allocations.  Both are non-convex and only used on tiny
instances, so they are solved by exhaustive grid search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..core import (
    Allocation,
    EnvyReport,
    Instance,
    MatchfairError,
    dot,
    envy_report,
    proportional_allocation,
    to_fraction,
    validate_instance,
)
from ..lp import LinearProgram, solve_lp
from ..verify import check_pareto_optimal, pareto_slack
from . import _grid

log = logging.getLogger(__name__)

MAX_GRID_AGENTS = 3


class TooLarge(MatchfairError, ValueError):
    pass


class NoPoGridPoint(MatchfairError, RuntimeError):
    pass


class SignError(MatchfairError, ValueError):
    pass


@dataclass(frozen=True)
class NbConfig:
    tolerance: float = 1e-9
    max_iters: int = 10_000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass(frozen=True)
class NashResult:
    allocation: Allocation
    nash_welfare: Fraction
    gap: float
    iterations: int
    zero_utility_agents: tuple[int, ...] = ()
    pareto_slack: Fraction = Fraction(0)


@dataclass(frozen=True)
class ProductResult:
    allocation: Allocation
    product: Fraction
    envy: EnvyReport
    delta: Fraction
    grid_size: int = 0
    po_checks: int = field(default=0, compare=False)


def _linear_oracle(inst: Instance, grad: np.ndarray) -> Allocation:
    """Exact maximiser of ``<grad, y>`` over the allocation polytope."""
    n, m = inst.n_agents, inst.n_items
    lp = LinearProgram([Fraction(float(g)) for g in grad.ravel()], "max")
    for i in range(n):
        row = [0] * (n * m)
        row[i * m:(i + 1) * m] = [1] * m
        lp.add(row, "=", inst.demands[i])
    for j in range(m):
        col = [0] * (n * m)
        for i in range(n):
            col[i * m + j] = 1
        lp.add(col, "=", 1)
    sol = solve_lp(lp)
    return tuple(tuple(sol.x[i * m:(i + 1) * m]) for i in range(n))


def _line_search(a: np.ndarray, b: np.ndarray, gmax: float) -> float:
    """argmax over [0, gmax] of sum(log(a + g b)), a > 0."""

    def slope(g):
        return float(np.sum(b / (a + g * b)))

    if slope(0.0) <= 0:
        return 0.0
    top = gmax
    if np.any(a + gmax * b <= 0):
        # log blows up at the far end; back off to where every term is positive
        top = gmax * (1 - 1e-12)
        while np.any(a + top * b <= 0):
            top *= 0.5
    if slope(top) >= 0:
        return top
    return brentq(slope, 0.0, top, xtol=1e-15)


def solve_nash_bargaining_goods(inst: Instance, config: NbConfig = NbConfig()) -> NashResult:
    """Maximise the product of utilities over allocations (nonnegative
    utilities).  Agents who value nothing are left out of the product and take
    whatever the others leave."""
    validate_instance(inst)
    if any(v < 0 for row in inst.utilities for v in row):
        raise SignError("Nash bargaining over goods needs nonnegative utilities")
    n, m = inst.n_agents, inst.n_items
    U = np.array([[float(v) for v in row] for row in inst.utilities])
    active = np.array([any(v > 0 for v in row) for row in inst.utilities])
    zero_agents = tuple(int(i) for i in np.flatnonzero(~active))

    def as_array(x):
        return np.array([[float(v) for v in row] for row in x])

    atoms: list[Allocation] = [proportional_allocation(inst)]
    arrays = [as_array(atoms[0])]
    weights = [1.0]
    X = arrays[0].copy()
    gap = float("inf")
    it = 0
    for it in range(1, config.max_iters + 1):
        util = np.sum(U * X, axis=1)
        grad = np.zeros_like(U)
        grad[active] = U[active] / util[active, None]
        s = _linear_oracle(inst, grad)
        S = as_array(s)
        gap = float(np.sum(grad * (S - X)))
        if gap <= config.tolerance:
            break
        scores = [float(np.sum(grad * A)) for A in arrays]
        k_away = int(np.argmin(scores))
        away_gap = float(np.sum(grad * (X - arrays[k_away])))
        if gap >= away_gap or weights[k_away] >= 1.0:
            D, gmax, toward = S - X, 1.0, True
        else:
            wa = weights[k_away]
            D, gmax, toward = X - arrays[k_away], wa / (1.0 - wa), False
        a = util[active]
        b = np.sum(U * D, axis=1)[active]
        g = _line_search(a, b, gmax)
        if toward:
            weights = [w * (1 - g) for w in weights]
            try:
                k = atoms.index(s)
                weights[k] += g
            except ValueError:
                atoms.append(s)
                arrays.append(S)
                weights.append(g)
        else:
            weights = [w * (1 + g) for w in weights]
            weights[k_away] -= g
        keep = [k for k, w in enumerate(weights) if w > 1e-15]
        atoms = [atoms[k] for k in keep]
        arrays = [arrays[k] for k in keep]
        weights = [weights[k] for k in keep]
        X = sum(w * A for w, A in zip(weights, arrays))
    else:
        log.warning("Nash bargaining stopped after %d iterations, gap %.3g", it, gap)

    x = _round_combination(atoms, weights)
    welfare = prod((dot(inst.utilities[i], x[i]) for i in range(n) if active[i]), start=Fraction(1))
    return NashResult(x, welfare, gap, it, zero_agents, pareto_slack(inst, x))


def _round_combination(atoms, weights) -> Allocation:
    """Exact convex combination with weights rounded to nearby rationals."""
    fw = [Fraction(w).limit_denominator(10**12) for w in weights]
    total = sum(fw)
    fw = [w / total for w in fw]
    n, m = len(atoms[0]), len(atoms[0][0])
    return tuple(
        tuple(sum((w * a[i][j] for w, a in zip(fw, atoms)), Fraction(0)) for j in range(m))
        for i in range(n)
    )


def _check_chores(inst: Instance, max_agents: int):
    validate_instance(inst)
    if any(v > 0 for row in inst.utilities for v in row):
        raise SignError("disutility programs need nonpositive utilities")
    if inst.n_agents > max_agents:
        raise TooLarge(f"{inst.n_agents} agents exceed the grid cap of {max_agents}")


def default_delta(inst: Instance) -> Fraction:
    """Finest step among 1/100, 1/20, 1/10, 1/4 that keeps the grid small."""
    free = (inst.n_agents - 1) * (inst.n_items - 1)
    for steps in (100, 20, 10, 4):
        if (steps + 1) ** free <= 250_000 and _divides(inst, Fraction(1, steps)):
            return Fraction(1, steps)
    return Fraction(1)


def _divides(inst, delta) -> bool:
    try:
        _grid.units(inst, delta)
    except _grid.OffGrid:
        return False
    return True


def _disutility_table(inst: Instance, delta: Fraction):
    """Grid points and the integer-scaled disutility of each agent at each."""
    U, L = _grid.integer_utilities(inst)
    points = list(_grid.grid_points(inst, delta))
    vals = [tuple(-sum(a * b for a, b in zip(U[i], k[i])) for i in range(len(U))) for k in points]
    # value_i = vals_i * delta / L
    return points, vals, delta / L


def solve_min_disutility_product(
    inst: Instance, delta: Optional[Fraction] = None, max_agents: int = MAX_GRID_AGENTS
) -> ProductResult:
    """Minimise the product of disutilities.

    The minimum of a product of nonnegative linear forms over a polytope is
    attained at a vertex, and every vertex of the allocation polytope lies on
    the grid once the step divides all demands, so the grid minimum is the
    exact minimum.
    """
    _check_chores(inst, max_agents)
    delta = to_fraction(delta) if delta is not None else default_delta(inst)
    points, vals, unit = _disutility_table(inst, delta)
    best = min(range(len(points)), key=lambda p: (prod(vals[p]), _grid.lex_key(points[p])))
    x = _grid.to_allocation(points[best], delta)
    product = prod((Fraction(v) * unit for v in vals[best]), start=Fraction(1))
    return ProductResult(x, product, envy_report(inst, x), delta, len(points))


def _dominated(vals: np.ndarray, v: np.ndarray) -> bool:
    """Is the disutility vector ``v`` beaten by some grid point?"""
    weakly = np.all(vals <= v, axis=1)
    strictly = np.any(vals < v, axis=1)
    return bool(np.any(weakly & strictly))


def solve_pareto_constrained_nb(
    inst: Instance, delta: Optional[Fraction] = None, max_agents: int = MAX_GRID_AGENTS
) -> ProductResult:
    """Maximise the product of disutilities over the Pareto-optimal grid
    points.  The step is halved once if no grid point is Pareto-optimal."""
    _check_chores(inst, max_agents)
    delta = to_fraction(delta) if delta is not None else default_delta(inst)
    for attempt in range(2):
        res = _pcnb_on_grid(inst, delta)
        if res is not None:
            return res
        delta /= 2
    raise NoPoGridPoint(f"no Pareto-optimal point on the grid down to step {delta * 2}")


def _pcnb_on_grid(inst: Instance, delta: Fraction) -> Optional[ProductResult]:
    points, vals, unit = _disutility_table(inst, delta)
    arr = np.array(vals, dtype=object if _too_wide(vals) else np.int64)
    order = sorted(range(len(points)), key=lambda p: (-prod(vals[p]), _grid.lex_key(points[p])))
    checks = 0
    for p in order:
        # a grid point dominating p refutes Pareto-optimality without an LP
        if _dominated(arr, arr[p]):
            continue
        x = _grid.to_allocation(points[p], delta)
        checks += 1
        if check_pareto_optimal(inst, x).holds:
            product = prod((Fraction(v) * unit for v in vals[p]), start=Fraction(1))
            return ProductResult(x, product, envy_report(inst, x), delta, len(points), checks)
    return None


def _too_wide(vals) -> bool:
    return any(abs(v) >= 2**62 for row in vals for v in row)


def disutility_product(inst: Instance, x) -> Fraction:
    return prod((-dot(inst.utilities[i], x[i]) for i in range(inst.n_agents)), start=Fraction(1))
