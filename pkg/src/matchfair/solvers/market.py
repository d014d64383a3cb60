"""Approximate HZ equilibria by enumerating price vectors on a grid.

Some equilibrium always has a free item, so for every choice of free item
``j0`` the remaining prices run over ``{0, delta, ..., cap}``.  At each price
vector the agents' best affordable bundles are computed exactly and one LP
decides whether a market-clearing allocation hands every agent such a bundle.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from ..core import (
    Allocation,
    Instance,
    MatchfairError,
    PriceVector,
    to_fraction,
    validate_instance,
)
from ..lp import LinearProgram, Status, check_feasible, solve_lp
from ..verify import ToleranceConfig, best_affordable_bundle, check_hz_equilibrium

MAX_GRID_ITEMS = 4


@dataclass(frozen=True)
class GridConfig:
    delta: Fraction = Fraction(1, 4)
    price_cap: Optional[Fraction] = None  # None: number of items
    eps: Fraction = Fraction(0)

    def __post_init__(self):
        delta = to_fraction(self.delta)
        eps = to_fraction(self.eps)
        if delta <= 0:
            raise ValueError("delta must be positive")
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "eps", eps)
        if self.price_cap is not None:
            cap = to_fraction(self.price_cap)
            if cap <= 0:
                raise ValueError("price_cap must be positive")
            if delta > cap:
                raise ValueError("delta must not exceed price_cap")
            object.__setattr__(self, "price_cap", cap)

    def cap_for(self, inst: Instance) -> Fraction:
        return self.price_cap if self.price_cap is not None else Fraction(inst.n_items)


class NotFound(MatchfairError, RuntimeError):
    def __init__(self, message: str, closest: Optional[PriceVector] = None, excess: Optional[Fraction] = None):
        super().__init__(message)
        self.closest = closest
        self.excess = excess


class TooManyItems(MatchfairError, ValueError):
    pass


def price_cells(inst: Instance, config: GridConfig) -> Iterator[PriceVector]:
    """Price vectors in search order: by free item, then lexicographically.

    A vector with several zeros is only visited under its first zero, and
    vectors costing more than all agents' money together are skipped.
    """
    m = inst.n_items
    cap = config.cap_for(inst)
    steps = int(cap / config.delta)
    grid = [k * config.delta for k in range(steps + 1)]
    money = sum(inst.demands)
    for j0 in range(m):
        for rest in itertools.product(grid, repeat=m - 1):
            if any(v == 0 for v in rest[:j0]):
                continue
            if sum(rest) > money:
                continue
            yield rest[:j0] + (Fraction(0),) + rest[j0:]


@dataclass(frozen=True)
class _Cell:
    prices: PriceVector
    allocation: Optional[Allocation]
    excess: Fraction


def _clearing_program(inst: Instance, p, floors, ceilings) -> LinearProgram:
    n, m = inst.n_agents, inst.n_items
    nv = n * m
    lp = LinearProgram([0] * nv, "max")
    for i in range(n):
        row = [0] * nv
        row[i * m:(i + 1) * m] = [1] * m
        lp.add(row, "=", inst.demands[i])
    for j in range(m):
        col = [0] * nv
        for i in range(n):
            col[i * m + j] = 1
        lp.add(col, "=", 1)
    for i in range(n):
        urow = [Fraction(0)] * nv
        prow = [Fraction(0)] * nv
        urow[i * m:(i + 1) * m] = inst.utilities[i]
        prow[i * m:(i + 1) * m] = p
        lp.add(urow, ">=", floors[i])
        lp.add(prow, "<=", ceilings[i])
    return lp


def _lexicographic_max(lp: LinearProgram, n_vars: int) -> tuple:
    """Fix the variables one at a time at their largest feasible value."""
    for k in range(n_vars):
        obj = [0] * n_vars
        obj[k] = 1
        lp.objective = tuple(Fraction(v) for v in obj)
        lp.sense = "max"
        sol = solve_lp(lp)
        row = [0] * n_vars
        row[k] = 1
        lp.add(row, "=", sol.x[k])
    return sol.x


def _evaluate(inst: Instance, p: PriceVector, eps: Fraction) -> _Cell:
    n, m = inst.n_agents, inst.n_items
    choices = [best_affordable_bundle(inst, i, p) for i in range(n)]
    # excess demand when every agent takes its cheapest optimal bundle
    excess = sum(
        (max(Fraction(0), sum((c.bundle[j] for c in choices), Fraction(0)) - 1) for j in range(m)),
        Fraction(0),
    )
    if sum(p) > sum(c.money for c in choices):
        return _Cell(p, None, excess)
    floors = [
        c.value - eps * (max(inst.utilities[i]) - min(inst.utilities[i]))
        for i, c in enumerate(choices)
    ]
    # spending stays within the exact cheapest cost even when utility has slack
    ceilings = [c.money for c in choices]
    lp = _clearing_program(inst, p, floors, ceilings)
    if check_feasible(lp).status is not Status.OPTIMAL:
        return _Cell(p, None, excess)
    flat = _lexicographic_max(lp, n * m)
    x = tuple(tuple(flat[i * m:(i + 1) * m]) for i in range(n))
    return _Cell(p, x, Fraction(0))


def _evaluate_packed(args):
    return _evaluate(*args)


def find_hz_equilibrium_grid(
    inst: Instance, config: GridConfig = GridConfig(), workers: int = 1, max_items: int = MAX_GRID_ITEMS
) -> tuple[Allocation, PriceVector]:
    """First grid price vector (in search order) supporting an equilibrium.

    The allocation returned is the lexicographically largest clearing one.
    Raises :class:`NotFound` with the cell of least excess demand otherwise.
    """
    validate_instance(inst)
    if inst.n_items > max_items:
        raise TooManyItems(f"{inst.n_items} items exceed the grid cap of {max_items}")
    tol = ToleranceConfig(config.eps)
    closest: Optional[_Cell] = None

    def accept(cell: _Cell):
        nonlocal closest
        if cell.allocation is not None and check_hz_equilibrium(inst, cell.allocation, cell.prices, tol).holds:
            return cell.allocation, cell.prices
        if cell.allocation is None and (closest is None or cell.excess < closest.excess):
            closest = cell
        return None

    cells = price_cells(inst, config)
    if workers <= 1:
        for p in cells:
            found = accept(_evaluate(inst, p, config.eps))
            if found:
                return found
    else:
        chunk = 8 * workers
        with ProcessPoolExecutor(max_workers=workers) as pool:
            while True:
                batch = list(itertools.islice(cells, chunk))
                if not batch:
                    break
                for cell in pool.map(_evaluate_packed, [(inst, p, config.eps) for p in batch]):
                    found = accept(cell)
                    if found:
                        return found
    raise NotFound(
        f"no equilibrium on the price grid (delta={config.delta}, cap={config.cap_for(inst)},"
        f" eps={config.eps}); try a finer delta, a larger cap or a positive eps",
        closest.prices if closest else None,
        closest.excess if closest else None,
    )
