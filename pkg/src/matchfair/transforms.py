"""Utility and price transformations that leave fairness, efficiency and
equilibrium verdicts unchanged.

* affine utility maps ``u -> a u + c`` (per-agent ``c``, common ``a > 0``);
* the per-agent affine normalisation of bivalued rows onto ``{0, 1}``;
* the bijection between HZ prices and HZ earnings;
* moving an equilibrium price vector so that some item is free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    DimensionMismatch,
    Instance,
    MatchfairError,
    PriceVector,
    EarningsVector,
    ShiftSpec,
    as_price_vector,
    to_fraction,
)


class NotBivalued(MatchfairError, ValueError):
    pass


class UnnormalizablePrices(MatchfairError, ValueError):
    pass


class DegenerateConversion(UserWarning):
    """The conversion formula's denominator vanished or went negative."""


class DegeneratePrices(DegenerateConversion):
    pass


class DegenerateEarnings(DegenerateConversion):
    pass


#: Reference maximum used when the largest entry is at most 1.  Any value > 1
#: works; 2 keeps both directions mutually inverse (see ``prices_to_earnings``).
_DEGENERATE_REFERENCE = Fraction(2)


def shift_utilities(inst: Instance, spec: ShiftSpec) -> Instance:
    if len(spec.c) != inst.n_agents:
        raise DimensionMismatch(f"{len(spec.c)} shifts for {inst.n_agents} agents")
    u = [[spec.a * v + spec.c[i] for v in row] for i, row in enumerate(inst.utilities)]
    return inst.with_utilities(u)


def scale_utilities(inst: Instance, a) -> Instance:
    return shift_utilities(inst, ShiftSpec((0,) * inst.n_agents, a))


@dataclass(frozen=True)
class AffineRecord:
    """Row map ``u' = (u - offset) / width``; ``width == 0`` marks a constant
    row, which maps to all zeros."""

    offset: Fraction
    width: Fraction

    def forward(self, v: Fraction) -> Fraction:
        return (v - self.offset) / self.width if self.width else Fraction(0)

    def inverse(self, v: Fraction) -> Fraction:
        return self.width * v + self.offset


def reduce_bivalued_to_dichotomous(inst: Instance) -> tuple[Instance, tuple[AffineRecord, ...]]:
    records = []
    rows = []
    for i, row in enumerate(inst.utilities):
        values = sorted(set(row))
        if len(values) > 2:
            raise NotBivalued(f"agent {i} has {len(values)} distinct utilities")
        rec = AffineRecord(values[0], values[-1] - values[0])
        records.append(rec)
        rows.append([rec.forward(v) for v in row])
    return inst.with_utilities(rows), tuple(records)


def restore_utilities(inst: Instance, records) -> Instance:
    """Undo :func:`reduce_bivalued_to_dichotomous` on the utility matrix.

    Allocations and prices need no translation: the per-agent affine map
    preserves every equilibrium.
    """
    if len(records) != inst.n_agents:
        raise DimensionMismatch("one record per agent required")
    u = [[rec.inverse(v) for v in row] for rec, row in zip(records, inst.utilities)]
    return inst.with_utilities(u)


def _reflect(v, category) -> tuple[Fraction, ...]:
    """``w_j = (M - v_j) / (M - 1)`` with ``M = max(v)``, or ``M = 2`` when
    ``max(v) <= 1``.

    The map reverses the order of unit-sum bundles and sends "costs at most 1"
    to "earns at least 1".  For ``max(v) <= 1`` every unit bundle already
    costs at most 1, and ``w = 2 - v`` preserves that while staying invertible.
    """
    vmax = max(v)
    ref = vmax
    if vmax <= 1:
        warnings.warn(
            f"maximum entry {vmax} <= 1; using reference {_DEGENERATE_REFERENCE}",
            category,
            stacklevel=3,
        )
        ref = _DEGENERATE_REFERENCE
    return tuple((ref - x) / (ref - 1) for x in v)


def prices_to_earnings(p) -> EarningsVector:
    """Earnings making ``(x, q)`` an earnings equilibrium whenever ``(x, p)`` is
    an HZ equilibrium.  Emits :class:`DegeneratePrices` when ``max(p) <= 1``."""
    return _reflect(as_price_vector(p), DegeneratePrices)


def earnings_to_prices(q) -> PriceVector:
    """Inverse direction of :func:`prices_to_earnings`."""
    return _reflect(as_price_vector(q), DegenerateEarnings)


def normalize_prices_zero_min(p) -> PriceVector:
    p = as_price_vector(p)
    lo, hi = min(p), max(p)
    if lo == hi:
        return tuple(Fraction(0) for _ in p)
    if lo >= 1:
        raise UnnormalizablePrices(f"minimum price {lo} >= 1 with unequal prices")
    return tuple((v - lo) / (1 - lo) for v in p)


def parse_shift(values, a=1) -> ShiftSpec:
    return ShiftSpec(tuple(to_fraction(v) for v in values), a)
