"""Command line interface.

Exit status: 0 success / verdict holds, 1 verdict fails, 2 usage or input
error, 3 solver gave up (NotFound, TooLarge and friends).

Reports are JSON on stdout; with ``--out DIR`` they are also written to
``DIR/report.json`` next to any produced allocation, price or CSV files.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from . import io
from .core import (
    Instance,
    MatchfairError,
    ShiftSpec,
    dot,
    envy_report,
    envy_table,
    make_instance,
    to_fraction,
    validate_allocation,
)
from .solvers import (
    GridConfig,
    NbConfig,
    NoPoGridPoint,
    NotFound,
    TooLarge,
    TooManyItems,
    WrongArity,
    disutility_product,
    expand_types,
    find_hz_equilibrium_grid,
    solve_min_disutility_product,
    solve_nash_bargaining_goods,
    solve_pareto_constrained_nb,
    solve_two_type_ef_po,
    solve_welfare_max_ef,
)
from .transforms import (
    DegenerateConversion,
    earnings_to_prices,
    normalize_prices_zero_min,
    prices_to_earnings,
    reduce_bivalued_to_dichotomous,
    shift_utilities,
)
from .verify import (
    ToleranceConfig,
    check_earnings_equilibrium,
    check_envy_free,
    check_hz_equilibrium,
    check_pareto_optimal,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
SOLVER_ERRORS = (NotFound, TooLarge, TooManyItems, WrongArity, NoPoGridPoint)
DEMO_DELTA = Fraction(1, 100)
#: Markers left in instance files by transforms after which ratios of
#: disutilities no longer mean anything.
SHIFTED = ("shift", "dichotomize")


class Outcome:
    """What a command produced: the report, extra files and the exit code."""

    def __init__(self, report: dict, code: int = EXIT_OK, files: Optional[dict] = None):
        self.report = report
        self.code = code
        self.files = files or {}


def rational_arg(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def rational_list_arg(text: str) -> tuple[Fraction, ...]:
    return tuple(rational_arg(v) for v in text.split(","))


def _header(args) -> dict:
    return {"tool": "matchfair", "version": __version__, "command": _without_out(args.argv)}


def _without_out(argv) -> list:
    # the output directory does not affect results; keep reports location-independent
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(a)
    return kept


def _instance_section(inst: Instance) -> dict:
    return {"digest": io.digest(inst), "agents": list(inst.agent_names()), "items": list(inst.item_names())}


def _verdict(v) -> dict:
    return {"holds": v.holds, "witness": io.to_plain(v.witness)}


def _envy_section(inst: Instance, x, shifted: bool = False) -> dict:
    rep = envy_report(inst, x)
    names = inst.agent_names()
    out = {
        "envy_free": rep.envy_free,
        "worst_pair": [names[k] for k in rep.worst_pair] if rep.worst_pair else None,
        "additive_gap": io.to_plain(rep.additive_gap),
        "multiplicative_ratio": io.to_plain(rep.multiplicative_ratio),
        "table": io.to_plain(envy_table(inst, x)),
    }
    if shifted:
        out["multiplicative_ratio"] = None
        out["multiplicative_ratio_suppressed"] = "utilities were shifted; disutility ratios are not meaningful"
    return out


def _allocation_section(inst: Instance, x, shifted: bool = False) -> dict:
    names = inst.agent_names()
    return {
        "allocation": io.to_plain(x),
        "utilities": {names[i]: io.to_plain(dot(inst.utilities[i], x[i])) for i in range(inst.n_agents)},
        "envy": _envy_section(inst, x, shifted),
    }


def _is_shifted(doc: dict) -> bool:
    return doc.get("derived_by") in SHIFTED


# -- validate ---------------------------------------------------------------


def cmd_validate(args) -> Outcome:
    inst, doc = io.read_instance(args.instance)
    report = _header(args)
    report["instance"] = _instance_section(inst)
    report["instance_valid"] = True
    code = EXIT_OK
    if args.allocation:
        x = io.read_allocation(args.allocation)
        v = validate_allocation(inst, x)
        report["allocation_valid"] = _verdict(v)
        code = EXIT_OK if v.holds else EXIT_FAIL
    return Outcome(report, code)


# -- check ------------------------------------------------------------------


def cmd_check(args) -> Outcome:
    inst, doc = io.read_instance(args.instance)
    x = io.read_allocation(args.allocation)
    tol = ToleranceConfig(args.eps)
    report = _header(args)
    report["instance"] = _instance_section(inst)
    report["kind"] = args.kind
    report["eps"] = io.to_plain(tol.eps)
    if args.kind == "ef":
        v = check_envy_free(inst, x)
    elif args.kind == "po":
        v = check_pareto_optimal(inst, x)
    elif args.kind == "hz":
        if not args.prices:
            raise MatchfairError("check hz needs --prices")
        p = io.read_vector(args.prices, "prices")
        report["prices"] = io.to_plain(p)
        v = check_hz_equilibrium(inst, x, p, tol)
    else:
        if not args.earnings:
            raise MatchfairError("check earnings needs --earnings")
        q = io.read_vector(args.earnings, "earnings")
        report["earnings"] = io.to_plain(q)
        v = check_earnings_equilibrium(inst, x, q, tol)
    report["verdict"] = _verdict(v)
    if validate_allocation(inst, x).holds:
        report.update(_allocation_section(inst, x, _is_shifted(doc)))
    return Outcome(report, EXIT_OK if v.holds else EXIT_FAIL)


# -- solve ------------------------------------------------------------------


def cmd_solve(args) -> Outcome:
    inst, doc = io.read_instance(args.instance)
    report = _header(args)
    report["instance"] = _instance_section(inst)
    report["kind"] = args.kind
    files: dict = {}
    prices = None
    extra: dict = {}
    if args.kind == "welfare-ef":
        x = solve_welfare_max_ef(inst)
    elif args.kind == "two-type":
        x = solve_two_type_ef_po(inst)
        if all(d.denominator == 1 for d in inst.demands):
            exp = expand_types(inst)
            extra["expanded_envy_free"] = _verdict(check_envy_free(exp.instance, exp.expand(x)))
    elif args.kind == "nb":
        res = solve_nash_bargaining_goods(inst, NbConfig(args.tolerance, args.max_iters))
        x = res.allocation
        extra.update(
            nash_welfare=io.to_plain(res.nash_welfare),
            duality_gap=res.gap,
            iterations=res.iterations,
            zero_utility_agents=[inst.agent_names()[i] for i in res.zero_utility_agents],
            pareto_slack=io.to_plain(res.pareto_slack),
        )
    elif args.kind in ("min-product", "pcnb"):
        solver = solve_min_disutility_product if args.kind == "min-product" else solve_pareto_constrained_nb
        res = solver(inst, args.delta)
        x = res.allocation
        extra.update(product=io.to_plain(res.product), delta=io.to_plain(res.delta), grid_size=res.grid_size)
    else:
        config = GridConfig(args.delta or Fraction(1, 4), args.cap, args.eps)
        x, prices = find_hz_equilibrium_grid(inst, config, workers=args.workers)
        tol = ToleranceConfig(config.eps)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DegenerateConversion)
            q = prices_to_earnings(prices)
        extra.update(
            prices=io.to_plain(prices),
            earnings=io.to_plain(q),
            earnings_degenerate=bool(caught),
            eps=io.to_plain(config.eps),
            hz_equilibrium=_verdict(check_hz_equilibrium(inst, x, prices, tol)),
            earnings_equilibrium=_verdict(check_earnings_equilibrium(inst, x, q, tol)),
        )
        files["prices.json"] = io.dumps({"prices": io.to_plain(prices)})
    report.update(extra)
    report.update(_allocation_section(inst, x, _is_shifted(doc)))
    report["envy_free"] = _verdict(check_envy_free(inst, x))
    report["pareto_optimal"] = _verdict(check_pareto_optimal(inst, x))
    files["allocation.json"] = io.dumps({"allocation": io.to_plain(x)})
    return Outcome(report, EXIT_OK, files)


# -- transform --------------------------------------------------------------


def _degenerate_call(fn, v):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateConversion)
        out = fn(v)
    return out, bool(caught)


def cmd_transform(args) -> Outcome:
    report = _header(args)
    report["kind"] = args.kind
    outputs: dict = {}
    if args.kind in ("shift", "scale", "dichotomize"):
        inst, doc = io.read_instance(args.input)
        if args.kind == "dichotomize":
            new, records = reduce_bivalued_to_dichotomous(inst)
            outputs["instance.json"] = io.instance_to_doc(new, derived_by="dichotomize")
            outputs["records.json"] = {"records": io.to_plain(records)}
        else:
            if args.kind == "shift":
                if args.c is None:
                    raise MatchfairError("transform shift needs --c")
                spec = ShiftSpec(args.c, args.a if args.a is not None else 1)
            else:
                if args.a is None:
                    raise MatchfairError("transform scale needs --a")
                spec = ShiftSpec((0,) * inst.n_agents, args.a)
            new = shift_utilities(inst, spec)
            marker = {"derived_by": "shift"} if any(spec.c) or _is_shifted(doc) else {}
            outputs["instance.json"] = io.instance_to_doc(new, **marker)
    elif args.kind == "to-earnings":
        q, degenerate = _degenerate_call(prices_to_earnings, io.read_vector(args.input, "prices"))
        outputs["earnings.json"] = {"earnings": io.to_plain(q)}
        report["degenerate"] = degenerate
    elif args.kind == "to-prices":
        p, degenerate = _degenerate_call(earnings_to_prices, io.read_vector(args.input, "earnings"))
        outputs["prices.json"] = {"prices": io.to_plain(p)}
        report["degenerate"] = degenerate
    else:
        p = normalize_prices_zero_min(io.read_vector(args.input, "prices"))
        outputs["prices.json"] = {"prices": io.to_plain(p)}
    report["outputs"] = outputs
    return Outcome(report, EXIT_OK, {name: io.dumps(doc) for name, doc in outputs.items()})


# -- demo -------------------------------------------------------------------


def figure_instance(which: str, c: Fraction = Fraction(10)) -> Instance:
    """The two-agent, two-chore examples; agent ``i`` dislikes ``j'`` more."""
    if which == "fig1":
        u = [[-1, -c], [0, -1]]
    else:
        u = [[-1, -2], [0, -1]]
    return make_instance(u, agents=("i", "i'"), items=("j", "j'"))


def _t_allocation(t: Fraction):
    # t is the share of j' held by i
    return ((1 - t, t), (t, 1 - t))


def _curve(inst: Instance, delta: Fraction):
    steps = 1 / delta
    if steps.denominator != 1:
        raise MatchfairError(f"delta {delta} must divide 1")
    rows = []
    for k in range(int(steps) + 1):
        t = k * delta
        x = _t_allocation(t)
        rows.append([t, disutility_product(inst, x), envy_report(inst, x).additive_gap])
    return rows


def _csv(rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "objective", "envy_gap"])
    for row in rows:
        w.writerow([io.to_plain(v) for v in row])
    return buf.getvalue()


def cmd_demo(args) -> Outcome:
    delta = args.delta or DEMO_DELTA
    report = _header(args)
    report["demo"] = args.which
    if args.which == "fig1":
        c = args.param if args.param is not None else Fraction(10)
        if c <= 1:
            raise MatchfairError("fig1 needs --param C > 1")
        inst = figure_instance("fig1", c)
        report["param"] = io.to_plain(c)
        res = solve_min_disutility_product(inst, delta)
        t = res.allocation[0][1]
        curve = _curve(inst, delta)
        # (Ct + 1 - t)(1 - t) >= 0 on [0, 1] and vanishes only at t = 1
        grid_min = min(curve, key=lambda r: r[1])[0]
        report["instance"] = _instance_section(inst)
        report["min_product"] = {
            "t": io.to_plain(t),
            "product": io.to_plain(res.product),
            "envy_factor": io.to_plain(res.envy.multiplicative_ratio),
            **_allocation_section(inst, res.allocation),
        }
        report["closed_form"] = {"minimizer": "1/1", "curve_minimizer": io.to_plain(grid_min)}
        reproduced = t == 1 and grid_min == 1 and res.envy.multiplicative_ratio == c
    else:
        inst = figure_instance("fig2")
        res = solve_pareto_constrained_nb(inst, delta)
        t = res.allocation[0][1]
        ef = solve_welfare_max_ef(inst)
        curve = _curve(inst, delta)
        # 1 - t^2 is maximal at t = 0
        grid_max = max(curve, key=lambda r: r[1])[0]
        report["instance"] = _instance_section(inst)
        report["pareto_constrained_nb"] = {
            "t": io.to_plain(t),
            "product": io.to_plain(res.product),
            "additive_envy_gap": io.to_plain(res.envy.additive_gap),
            **_allocation_section(inst, res.allocation),
        }
        report["ef_alternative"] = {
            "t": io.to_plain(ef[0][1]),
            "pareto_optimal": _verdict(check_pareto_optimal(inst, ef)),
            **_allocation_section(inst, ef),
        }
        report["closed_form"] = {"maximizer": "0/1", "curve_maximizer": io.to_plain(grid_max)}
        reproduced = t == 0 and grid_max == 0 and res.product == 1 and ef[0][1] == Fraction(1, 2)
    report["delta"] = io.to_plain(delta)
    report["curve"] = {"columns": ["t", "objective", "envy_gap"], "rows": io.to_plain(curve)}
    report["reproduced"] = reproduced
    files = {f"{args.which}_curve.csv": _csv(curve)}
    return Outcome(report, EXIT_OK if reproduced else EXIT_FAIL, files)


# -- wiring -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchfair", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"matchfair {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--out", type=Path, help="directory for report and output files")

    p = sub.add_parser("validate", help="check an instance file (and optionally an allocation)")
    p.add_argument("instance")
    p.add_argument("--allocation")
    common(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("check", help="run a verifier")
    p.add_argument("kind", choices=["ef", "po", "hz", "earnings"])
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--prices")
    p.add_argument("--earnings")
    p.add_argument("--eps", type=rational_arg, default=Fraction(0))
    common(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("solve", help="run a solver")
    p.add_argument("kind", choices=["welfare-ef", "two-type", "nb", "min-product", "pcnb", "grid-hz"])
    p.add_argument("instance")
    p.add_argument("--delta", type=rational_arg, help="grid step (grid-hz default 1/4)")
    p.add_argument("--cap", type=rational_arg, help="largest grid price (default: number of items)")
    p.add_argument("--eps", type=rational_arg, default=Fraction(0))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-iters", type=int, default=10_000)
    common(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("transform", help="apply a transformation")
    p.add_argument("kind", choices=["shift", "scale", "dichotomize", "to-earnings", "to-prices", "normalize"])
    p.add_argument("input")
    p.add_argument("--c", type=rational_list_arg, help="comma-separated per-agent shifts")
    p.add_argument("--a", type=rational_arg, help="positive scale")
    common(p)
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("demo", help="reproduce the two chores counterexamples")
    p.add_argument("which", choices=["fig1", "fig2"])
    p.add_argument("--param", type=rational_arg, help="C for fig1 (default 10)")
    p.add_argument("--delta", type=rational_arg, help="curve step (default 1/100)")
    common(p)
    p.set_defaults(handler=cmd_demo)
    return parser


def run(argv=None) -> tuple[int, Optional[dict]]:
    """Run a command; returns the exit code and the report (if any)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    args.argv = argv
    try:
        outcome = args.handler(args)
    except SOLVER_ERRORS as exc:
        report = _header(args)
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NotFound) and exc.closest is not None:
            report["error"]["closest_prices"] = io.to_plain(exc.closest)
            report["error"]["excess_demand"] = io.to_plain(exc.excess)
        outcome = Outcome(report, EXIT_SOLVER)
    except (MatchfairError, ValueError) as exc:
        print(f"matchfair: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None
    text = io.dumps(outcome.report)
    if args.out is not None:
        for name, content in outcome.files.items():
            io.write_atomic(args.out / name, content)
        io.write_atomic(args.out / "report.json", text)
    sys.stdout.write(text)
    return outcome.code, outcome.report


def main(argv=None) -> int:
    return run(argv)[0]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
