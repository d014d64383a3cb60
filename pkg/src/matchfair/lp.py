"""Exact rational linear programming.

A dense two-phase tableau simplex with Bland's rule.  Pivoting runs on
``gmpy2.mpq`` when available (an order of magnitude faster than ``Fraction``)
and every number crossing the module boundary is a ``Fraction``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import DimensionMismatch, Vector, as_vector, to_fraction

try:
    from gmpy2 import mpq as _num
except ImportError:  # pragma: no cover
    _num = Fraction

_ZERO = _num(0)
_ONE = _num(1)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class Constraint:
    coeffs: Vector
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", as_vector(self.coeffs))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))


@dataclass
class LinearProgram:
    """``sense`` ``objective . x`` subject to ``constraints``.

    ``lower`` holds per-variable lower bounds (0 by default); ``None`` marks a
    free variable.
    """

    objective: Sequence
    sense: str = "max"
    constraints: list[Constraint] = field(default_factory=list)
    lower: Optional[list] = None

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        self.objective = as_vector(self.objective)
        n = len(self.objective)
        if self.lower is None:
            self.lower = [Fraction(0)] * n
        else:
            self.lower = [None if b is None else to_fraction(b) for b in self.lower]
        if len(self.lower) != n:
            raise DimensionMismatch("lower bounds do not match objective length")
        for con in self.constraints:
            if len(con.coeffs) != n:
                raise DimensionMismatch(
                    f"constraint has {len(con.coeffs)} coefficients, expected {n}"
                )

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def add(self, coeffs, relation: str, rhs) -> "LinearProgram":
        con = Constraint(coeffs, relation, rhs)
        if len(con.coeffs) != self.n_vars:
            raise DimensionMismatch(
                f"constraint has {len(con.coeffs)} coefficients, expected {self.n_vars}"
            )
        self.constraints.append(con)
        return self

    def is_satisfied_by(self, x: Sequence[Fraction]) -> bool:
        for v, lb in zip(x, self.lower):
            if lb is not None and v < lb:
                return False
        for con in self.constraints:
            lhs = sum((a * b for a, b in zip(con.coeffs, x)), Fraction(0))
            if con.relation == "<=" and lhs > con.rhs:
                return False
            if con.relation == ">=" and lhs < con.rhs:
                return False
            if con.relation == "=" and lhs != con.rhs:
                return False
        return True


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: Optional[Vector] = None
    objective_value: Optional[Fraction] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


class _Tableau:
    """Rows ``A x = b`` with an explicit basis; the cost row stores reduced
    costs of a minimisation problem and its last entry is ``-objective``."""

    def __init__(self, rows, rhs, basis, n_cols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n_cols = n_cols
        self.cost: list = []
        self.cost_rhs = _ZERO

    def set_cost(self, c):
        cost = list(c)
        cost_rhs = _ZERO
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[r]
                for j in range(self.n_cols):
                    if row[j]:
                        cost[j] -= cb * row[j]
                cost_rhs -= cb * self.rhs[r]
        self.cost, self.cost_rhs = cost, cost_rhs

    def pivot(self, r: int, col: int):
        row = self.rows[r]
        piv = row[col]
        if piv != _ONE:
            inv = _ONE / piv
            for j in range(self.n_cols):
                if row[j]:
                    row[j] *= inv
            self.rhs[r] *= inv
        nz = [j for j in range(self.n_cols) if row[j]]
        brow = self.rhs[r]
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other[col]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[k] -= f * brow
        f = self.cost[col]
        if f:
            for j in nz:
                self.cost[j] -= f * row[j]
            self.cost_rhs -= f * brow
        self.basis[r] = col

    def run(self, allowed: Sequence[bool]) -> Status:
        """Bland's rule: smallest improving column enters, ties in the ratio
        test go to the smallest basic variable."""
        while True:
            col = -1
            for j in range(self.n_cols):
                if allowed[j] and self.cost[j] < 0:
                    col = j
                    break
            if col < 0:
                return Status.OPTIMAL
            best_r = -1
            best_ratio = None
            for r, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    ratio = self.rhs[r] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[r] < self.basis[best_r])
                    ):
                        best_r, best_ratio = r, ratio
            if best_r < 0:
                return Status.UNBOUNDED
            self.pivot(best_r, col)


def _standardize(lp: LinearProgram):
    """Map to ``min c.z, A z (rel) b, z >= 0`` with ``b >= 0``.

    Returns the standard form plus a function recovering the original x.
    """
    cols: list[tuple[int, int]] = []  # (original var, sign)
    shift = []
    for k, lb in enumerate(lp.lower):
        if lb is None:
            cols.append((k, 1))
            cols.append((k, -1))
            shift.append(Fraction(0))
        else:
            cols.append((k, 1))
            shift.append(lb)
    sign = 1 if lp.sense == "min" else -1
    c = [_num(sign * lp.objective[k] * s) for k, s in cols]
    rows = []
    for con in lp.constraints:
        a = [_num(con.coeffs[k] * s) for k, s in cols]
        b = con.rhs - sum((con.coeffs[k] * shift[k] for k in range(lp.n_vars)), Fraction(0))
        rel = con.relation
        b = _num(b)
        if b < 0:
            a = [-v for v in a]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append((a, rel, b))

    def recover(z):
        x = list(shift)
        for (k, s), v in zip(cols, z):
            if v:
                x[k] += s * _frac(v)
        return tuple(x)

    return c, rows, recover


def _phase_one(c_len: int, rows):
    """Build the tableau with slacks and artificials and drive the artificials
    to zero.  Returns ``(tableau, n_struct_and_slack)`` or ``None`` if
    infeasible."""
    n_slack = sum(1 for _, rel, _ in rows if rel != "=")
    n_art = sum(1 for _, rel, _ in rows if rel != "<=")
    n_real = c_len + n_slack
    n_cols = n_real + n_art
    t_rows, rhs, basis = [], [], []
    s_idx, a_idx = c_len, n_real
    for a, rel, b in rows:
        row = list(a) + [_ZERO] * (n_slack + n_art)
        if rel == "<=":
            row[s_idx] = _ONE
            basis.append(s_idx)
            s_idx += 1
        elif rel == ">=":
            row[s_idx] = -_ONE
            s_idx += 1
            row[a_idx] = _ONE
            basis.append(a_idx)
            a_idx += 1
        else:
            row[a_idx] = _ONE
            basis.append(a_idx)
            a_idx += 1
        t_rows.append(row)
        rhs.append(b)
    tab = _Tableau(t_rows, rhs, basis, n_cols)
    if n_art:
        tab.set_cost([_ZERO] * n_real + [_ONE] * n_art)
        tab.run([True] * n_cols)
        if tab.cost_rhs != 0:
            return None
        # move degenerate artificials out of the basis, dropping redundant rows
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] >= n_real:
                row = tab.rows[r]
                col = next((j for j in range(n_real) if row[j]), -1)
                if col < 0:
                    del tab.rows[r]
                    del tab.rhs[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, col)
            r += 1
    for row in tab.rows:
        del row[n_real:]
    tab.n_cols = n_real
    return tab, n_real


def _solve(lp: LinearProgram, optimise: bool) -> LpSolution:
    c, rows, recover = _standardize(lp)
    built = _phase_one(len(c), rows)
    if built is None:
        return LpSolution(Status.INFEASIBLE)
    tab, n_real = built
    status = Status.OPTIMAL
    if optimise:
        tab.set_cost(list(c) + [_ZERO] * (n_real - len(c)))
        status = tab.run([True] * n_real)
        if status is Status.UNBOUNDED:
            return LpSolution(Status.UNBOUNDED)
    z = [_ZERO] * n_real
    for r, b in enumerate(tab.basis):
        z[b] = tab.rhs[r]
    x = recover(z[: len(c)])
    value = sum((a * b for a, b in zip(lp.objective, x)), Fraction(0))
    return LpSolution(status, x, value)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Exact optimum of ``lp`` as a basic feasible solution."""
    return _solve(lp, optimise=True)


def check_feasible(lp: LinearProgram) -> LpSolution:
    """Phase one only: any exact feasible point, or ``Infeasible``.

    ``objective_value`` is the objective evaluated at the returned point.
    """
    return _solve(lp, optimise=False)
