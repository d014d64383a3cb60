from .bargaining import (
    NashResult,
    NbConfig,
    NoPoGridPoint,
    ProductResult,
    SignError,
    TooLarge,
    disutility_product,
    solve_min_disutility_product,
    solve_nash_bargaining_goods,
    solve_pareto_constrained_nb,
)
from .fair import (
    NonIntegerDemand,
    TypeExpansion,
    WrongArity,
    expand_types,
    solve_two_type_ef_po,
    solve_welfare_max_ef,
)
from .market import GridConfig, NotFound, TooManyItems, find_hz_equilibrium_grid

__all__ = [
    "GridConfig",
    "NashResult",
    "NbConfig",
    "NoPoGridPoint",
    "NonIntegerDemand",
    "NotFound",
    "ProductResult",
    "SignError",
    "TooLarge",
    "TooManyItems",
    "TypeExpansion",
    "WrongArity",
    "disutility_product",
    "expand_types",
    "find_hz_equilibrium_grid",
    "solve_min_disutility_product",
    "solve_nash_bargaining_goods",
    "solve_pareto_constrained_nb",
    "solve_two_type_ef_po",
    "solve_welfare_max_ef",
]
