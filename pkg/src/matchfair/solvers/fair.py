"""Envy-free allocations by linear programming, and the blow-up of agent
types into individual unit-demand agents."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core import (
    Allocation,
    Instance,
    MatchfairError,
    envy_report,
    proportional_allocation,
    validate_instance,
)
from ..lp import LinearProgram, solve_lp
from ..verify import check_envy_free, check_pareto_optimal


class WrongArity(MatchfairError, ValueError):
    pass


class NonIntegerDemand(MatchfairError, ValueError):
    pass


def welfare_max_ef_program(inst: Instance) -> LinearProgram:
    n, m = inst.n_agents, inst.n_items
    nv = n * m
    objective = [inst.utilities[i][j] for i in range(n) for j in range(m)]
    lp = LinearProgram(objective, "max")
    u, d = inst.utilities, inst.demands
    # d_k u_i.x_i >= d_i u_i.x_k, the per-demand envy condition with cleared denominators
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            row = [Fraction(0)] * nv
            for j in range(m):
                row[i * m + j] += d[k] * u[i][j]
                row[k * m + j] -= d[i] * u[i][j]
            lp.add(row, ">=", 0)
    for i in range(n):
        row = [0] * nv
        for j in range(m):
            row[i * m + j] = 1
        lp.add(row, "=", d[i])
    for j in range(m):
        col = [0] * nv
        for i in range(n):
            col[i * m + j] = 1
        lp.add(col, "=", 1)
    return lp


def solve_welfare_max_ef(inst: Instance) -> Allocation:
    """Utilitarian optimum over the envy-free allocations."""
    validate_instance(inst)
    if not envy_report(inst, proportional_allocation(inst)).envy_free:
        raise AssertionError("proportional allocation is not envy-free")
    sol = solve_lp(welfare_max_ef_program(inst))
    if not sol.optimal:
        raise AssertionError(f"envy-free program returned {sol.status.value}")
    m = inst.n_items
    x = tuple(tuple(sol.x[i * m:(i + 1) * m]) for i in range(inst.n_agents))
    assert check_envy_free(inst, x).holds
    return x


def solve_two_type_ef_po(inst: Instance) -> Allocation:
    """EF and PO for two agent types: with two agents any Pareto improvement of
    an envy-free allocation stays envy-free, so the welfare optimum over the
    envy-free set is Pareto-optimal outright."""
    if inst.n_agents != 2:
        raise WrongArity(f"need exactly 2 agent types, got {inst.n_agents}")
    x = solve_welfare_max_ef(inst)
    verdict = check_pareto_optimal(inst, x)
    if not verdict.holds:
        raise AssertionError(f"two-type optimum is not Pareto-optimal: {verdict.witness}")
    return x


@dataclass(frozen=True)
class TypeExpansion:
    """Unit-demand instance with one agent per unit of each type's demand."""

    contracted: Instance
    instance: Instance
    owner: tuple[int, ...]

    def expand(self, x) -> Allocation:
        """Split each type's bundle equally among the agents it represents."""
        return tuple(
            tuple(v / self.contracted.demands[t] for v in x[t]) for t in self.owner
        )


def expand_types(inst: Instance) -> TypeExpansion:
    owner: list[int] = []
    names: list[str] = []
    for t, d in enumerate(inst.demands):
        if d.denominator != 1:
            raise NonIntegerDemand(f"type {t} has demand {d}")
        owner.extend([t] * int(d))
        names.extend(f"{inst.agent_names()[t]}#{c}" for c in range(int(d)))
    expanded = Instance(
        [inst.utilities[t] for t in owner], None, tuple(names), inst.items
    )
    return TypeExpansion(inst, validate_instance(expanded), tuple(owner))
