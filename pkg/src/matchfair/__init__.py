"""Fair division in one-sided matching markets with goods, chores and mixed manna."""

from .core import (
    Allocation,
    EnvyReport,
    Instance,
    ShiftSpec,
    Verdict,
    bundle_utility,
    envy_report,
    make_instance,
    validate_allocation,
    validate_instance,
)
from .verify import (
    ToleranceConfig,
    best_affordable_bundle,
    best_earning_bundle,
    check_earnings_equilibrium,
    check_envy_free,
    check_hz_equilibrium,
    check_pareto_optimal,
)

__version__ = "0.1.0"
