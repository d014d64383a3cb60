"""Domain types for fractional matching markets and the envy accounting shared by
every other module.

All numeric quantities are :class:`fractions.Fraction`.  Chores are negative
utilities; the sign of a utility carries no special meaning anywhere in the
library.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Optional, Sequence

Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]
Allocation = Matrix
PriceVector = Vector
EarningsVector = Vector

#: Money handed to each agent per unit of demand (HZ budget) and the earnings
#: floor per unit of demand in the earnings variant.
BUDGET = Fraction(1)
EARNINGS_FLOOR = Fraction(1)


class MatchfairError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(MatchfairError, ValueError):
    pass


class DemandMismatch(MatchfairError, ValueError):
    pass


class NonPositiveDemand(MatchfairError, ValueError):
    pass


class NegativePrice(MatchfairError, ValueError):
    pass


class NonPositiveScale(MatchfairError, ValueError):
    pass


def to_fraction(value: Any) -> Fraction:
    """Convert an int, Fraction, rational-like or ``"num/den"`` string exactly.

    Floats are refused: the point of the library is that nothing on the ingest
    path rounds.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        if any(ch in text for ch in ".eE"):
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"floats are not accepted as exact rationals: {value!r}")
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    # gmpy2.mpq and friends expose numerator/denominator without registering
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(value: Fraction) -> str:
    """Serialize as ``"num/den"`` (integers keep the ``/1``)."""
    value = to_fraction(value)
    return f"{value.numerator}/{value.denominator}"


def as_vector(values: Iterable[Any]) -> Vector:
    return tuple(to_fraction(v) for v in values)


def as_matrix(rows: Iterable[Iterable[Any]]) -> Matrix:
    return tuple(as_vector(r) for r in rows)


def dot(u: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(u) != len(y):
        raise DimensionMismatch(f"length {len(u)} vs {len(y)}")
    return sum((a * b for a, b in zip(u, y)), Fraction(0))


@dataclass(frozen=True)
class Instance:
    """A market: utilities ``u[i][j]`` of agent ``i`` for one unit of item ``j``
    and per-agent demands ``d[i]`` (unit demands when omitted).

    Construction only checks shapes; :func:`validate_instance` checks the
    demand accounting.
    """

    utilities: Matrix
    demands: Vector = None  # type: ignore[assignment]
    agents: Optional[tuple[str, ...]] = field(default=None, compare=False)
    items: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        u = as_matrix(self.utilities)
        if not u or not u[0]:
            raise DimensionMismatch("utility matrix must be non-empty")
        width = len(u[0])
        if any(len(row) != width for row in u):
            raise DimensionMismatch("utility rows have different lengths")
        d = as_vector(self.demands) if self.demands is not None else (Fraction(1),) * len(u)
        if len(d) != len(u):
            raise DimensionMismatch(f"{len(d)} demands for {len(u)} agents")
        object.__setattr__(self, "utilities", u)
        object.__setattr__(self, "demands", d)
        if self.agents is not None:
            if len(self.agents) != len(u):
                raise DimensionMismatch("agent names do not match utility rows")
            object.__setattr__(self, "agents", tuple(self.agents))
        if self.items is not None:
            if len(self.items) != width:
                raise DimensionMismatch("item names do not match utility columns")
            object.__setattr__(self, "items", tuple(self.items))

    @property
    def n_agents(self) -> int:
        return len(self.utilities)

    @property
    def n_items(self) -> int:
        return len(self.utilities[0])

    @property
    def unit_demand(self) -> bool:
        return all(d == 1 for d in self.demands)

    def agent_names(self) -> tuple[str, ...]:
        return self.agents or tuple(f"a{i}" for i in range(self.n_agents))

    def item_names(self) -> tuple[str, ...]:
        return self.items or tuple(f"g{j}" for j in range(self.n_items))

    def with_utilities(self, utilities) -> "Instance":
        return Instance(utilities, self.demands, self.agents, self.items)


def validate_instance(raw: Instance) -> Instance:
    """Return ``raw`` if demands are positive and sum to the number of items."""
    for i, d in enumerate(raw.demands):
        if d <= 0:
            raise NonPositiveDemand(f"agent {i} has demand {d}")
    total = sum(raw.demands, Fraction(0))
    if total != raw.n_items:
        raise DemandMismatch(f"demands sum to {total} but there are {raw.n_items} items")
    return raw


def make_instance(utilities, demands=None, agents=None, items=None) -> Instance:
    return validate_instance(Instance(utilities, demands, agents, items))


@dataclass(frozen=True)
class ShiftSpec:
    """The affine utility map ``u[i][j] -> a * u[i][j] + c[i]``."""

    c: Vector
    a: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "c", as_vector(self.c))
        a = to_fraction(self.a)
        if a <= 0:
            raise NonPositiveScale(f"scale must be positive, got {a}")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check.  A failing verdict always carries a witness that can
    be re-checked by hand (the offending indices and the violated quantities).
    """

    holds: bool
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class EnvyReport:
    envy_free: bool
    worst_pair: Optional[tuple[int, int]]
    additive_gap: Fraction
    multiplicative_ratio: Optional[Fraction] = None


def as_price_vector(values, n_items: Optional[int] = None) -> PriceVector:
    p = as_vector(values)
    if n_items is not None and len(p) != n_items:
        raise DimensionMismatch(f"{len(p)} prices for {n_items} items")
    for j, v in enumerate(p):
        if v < 0:
            raise NegativePrice(f"entry {j} is negative: {v}")
    return p


as_earnings_vector = as_price_vector


def check_allocation_shape(inst: Instance, x: Matrix) -> Matrix:
    x = as_matrix(x)
    if len(x) != inst.n_agents or any(len(r) != inst.n_items for r in x):
        raise DimensionMismatch(
            f"allocation shape does not match {inst.n_agents}x{inst.n_items} instance"
        )
    return x


def validate_allocation(inst: Instance, x) -> Verdict:
    """Check that ``x`` is a fractional perfect matching of ``inst``."""
    x = check_allocation_shape(inst, x)
    for i, row in enumerate(x):
        for j, v in enumerate(row):
            if v < 0:
                return Verdict(False, {"reason": "negative_entry", "agent": i, "item": j, "value": v})
    for i, row in enumerate(x):
        s = sum(row, Fraction(0))
        if s != inst.demands[i]:
            return Verdict(
                False, {"reason": "row_sum", "agent": i, "sum": s, "expected": inst.demands[i]}
            )
    for j in range(inst.n_items):
        s = sum((x[i][j] for i in range(inst.n_agents)), Fraction(0))
        if s != 1:
            return Verdict(False, {"reason": "column_sum", "item": j, "sum": s, "expected": Fraction(1)})
    return Verdict(True)


def bundle_utility(inst: Instance, i: int, y) -> Fraction:
    y = as_vector(y)
    if len(y) != inst.n_items:
        raise DimensionMismatch(f"bundle has {len(y)} entries, expected {inst.n_items}")
    return dot(inst.utilities[i], y)


def proportional_allocation(inst: Instance) -> Allocation:
    """Every agent receives ``d_i / n`` of every item."""
    n = inst.n_items
    return tuple(tuple(d / n for _ in range(n)) for d in inst.demands)


def envy_table(inst: Instance, x) -> list[list[Fraction]]:
    """``table[i][k]`` is agent i's per-demand value of agent k's bundle."""
    x = check_allocation_shape(inst, x)
    return [
        [dot(inst.utilities[i], x[k]) / inst.demands[k] for k in range(inst.n_agents)]
        for i in range(inst.n_agents)
    ]


def envy_report(inst: Instance, x) -> EnvyReport:
    table = envy_table(inst, x)
    n = inst.n_agents
    best_gap: Optional[Fraction] = None
    best_pair = None
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            gap = table[i][k] - table[i][i]
            # strict comparison keeps the lexicographically first pair on ties
            if best_gap is None or gap > best_gap:
                best_gap, best_pair = gap, (i, k)
    if best_gap is None:
        return EnvyReport(True, None, Fraction(0))
    if best_gap <= 0:
        return EnvyReport(True, None, best_gap)
    i, k = best_pair
    own, other = -table[i][i], -table[i][k]
    ratio = own / other if own > 0 and other > 0 else None
    return EnvyReport(False, best_pair, best_gap, ratio)
