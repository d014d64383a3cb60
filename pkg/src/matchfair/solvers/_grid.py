"""Enumeration of allocations whose entries are multiples of a step."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterator

from ..core import Instance, MatchfairError


class OffGrid(MatchfairError, ValueError):
    pass


def units(inst: Instance, delta: Fraction) -> tuple[list[int], int]:
    """Row totals and column total of the grid, counted in steps of ``delta``."""
    col = 1 / delta
    rows = [d / delta for d in inst.demands]
    if col.denominator != 1 or any(r.denominator != 1 for r in rows):
        raise OffGrid(f"step {delta} does not divide every demand and 1")
    return [int(r) for r in rows], int(col)


def _compositions(total: int, caps: list[int], start: int = 0) -> Iterator[tuple[int, ...]]:
    if start == len(caps) - 1:
        if total <= caps[start]:
            yield (total,)
        return
    rest = sum(caps[start + 1:])
    for k in range(max(0, total - rest), min(total, caps[start]) + 1):
        for tail in _compositions(total - k, caps, start + 1):
            yield (k,) + tail


def grid_points(inst: Instance, delta: Fraction) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Yield integer matrices ``k`` with ``k * delta`` a valid allocation."""
    rows, col = units(inst, delta)
    m = inst.n_items

    def fill(i: int, caps: list[int], acc):
        if i == len(rows) - 1:
            if sum(caps) == rows[i]:
                yield acc + (tuple(caps),)
            return
        for r in _compositions(rows[i], caps):
            yield from fill(i + 1, [c - v for c, v in zip(caps, r)], acc + (r,))

    yield from fill(0, [col] * m, ())


def integer_utilities(inst: Instance) -> tuple[list[list[int]], int]:
    """Utilities scaled by the common denominator ``L`` to integers."""
    L = lcm(*(v.denominator for row in inst.utilities for v in row))
    return [[int(v * L) for v in row] for row in inst.utilities], L


def to_allocation(k, delta: Fraction):
    return tuple(tuple(Fraction(v) * delta for v in row) for row in k)


def lex_key(k) -> tuple[int, ...]:
    """Ties go to the allocation putting the most mass on early items for early
    agents (the identity among permutations)."""
    return tuple(-v for row in k for v in row)
