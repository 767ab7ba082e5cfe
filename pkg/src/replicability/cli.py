"""Command-line interface.

One binary, six subcommands: ``analyze`` (run a procedure on a p-value
CSV), ``adjust`` (emit an adjusted p-value table), ``simulate`` (run a
scenario file), ``power`` (closed-form two-stage power), and
``calibrate-oracle`` / ``probe-selection`` utilities.

Exit codes: 0 success, 1 usage error, 2 data error, 3 applicability
error, 4 I/O error. Diagnostics go to stderr; with ``--quiet`` nothing
but data is written to stdout.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import adjust as adjust_mod
from . import dataio, procedures, sim
from .errors import ApplicabilityError, DataError
from .selection import probe_validity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_APPLICABILITY = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="replicability", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run a replicability procedure on a CSV")
    analyze.add_argument("--input", required=True)
    analyze.add_argument("--mode", choices=("fdr", "fwer"), default="fdr")
    analyze.add_argument("--q1", type=float)
    analyze.add_argument("--q", type=float)
    analyze.add_argument("--alpha1", type=float)
    analyze.add_argument("--alpha", type=float)
    analyze.add_argument("--dependence", default="independent")
    analyze.add_argument("--t", type=float)
    analyze.add_argument("--selection", default="followup")
    analyze.add_argument("--method", choices=("bonferroni", "holm"), default="bonferroni")
    analyze.add_argument("--out", default=".")
    analyze.add_argument("--quiet", action="store_true")

    adj = sub.add_parser("adjust", help="emit a ranked adjusted p-value table")
    adj.add_argument("--input", required=True)
    adj.add_argument("--c", type=float, required=True)
    adj.add_argument("--flavor", choices=("bonferroni", "fdr"), default="fdr")
    adj.add_argument("--dependence", default="independent")
    adj.add_argument("--t", type=float)
    adj.add_argument("--q", type=float)
    adj.add_argument("--out", default="adjusted.csv")
    adj.add_argument("--full-precision", action="store_true")

    simulate = sub.add_parser("simulate", help="run a scenario file")
    simulate.add_argument("--scenario", required=True)
    simulate.add_argument("--out")
    simulate.add_argument("--workers", type=int, default=1)

    power = sub.add_parser("power", help="closed-form two-stage power")
    power.add_argument("--mu11", type=float, required=True)
    power.add_argument("--mu21", type=float, required=True)
    power.add_argument("--m", type=int, required=True)
    power.add_argument("--alpha1", type=float)
    power.add_argument("--alpha", type=float, required=True)
    power.add_argument("--grid-c", metavar="LO:HI:N", help="sweep c over a grid")
    power.add_argument("--out")

    oracle = sub.add_parser("calibrate-oracle", help="solve the oracle level q'")
    oracle.add_argument("--f00", type=float, required=True)
    oracle.add_argument("--f01", type=float, required=True)
    oracle.add_argument("--q", type=float, required=True)
    oracle.add_argument("--w1", type=float, default=1.0)
    oracle.add_argument("--input", help="also run the calibrated procedure")
    oracle.add_argument("--selection", default="followup")
    oracle.add_argument("--out", default=".")
    oracle.add_argument("--quiet", action="store_true")

    probe = sub.add_parser("probe-selection", help="stress a selection rule's validity")
    probe.add_argument("--input", required=True)
    probe.add_argument("--selection", required=True)
    probe.add_argument("--grid-size", type=int, default=16)
    probe.add_argument("--seed", type=int, default=0)
    return parser


def _levels(args) -> tuple[float, float]:
    if args.mode == "fwer":
        lo, hi = args.alpha1, args.alpha
        names = "--alpha1/--alpha"
    else:
        lo = args.q1 if args.q1 is not None else args.alpha1
        hi = args.q if args.q is not None else args.alpha
        names = "--q1/--q"
    if lo is None or hi is None:
        raise UsageError(f"{args.mode} mode needs {names}")
    if not 0.0 < lo < hi < 1.0:
        raise UsageError(f"levels must satisfy 0 < {lo} < {hi} < 1")
    return lo, hi


def _cmd_analyze(args) -> int:
    data = dataio.parse_pvalue_csv(args.input)
    rule = dataio.parse_rule_spec(args.selection)
    lo, hi = _levels(args)
    mode = dataio.parse_dependence(args.dependence)
    if mode is procedures.Dependence.ARBITRARY_PRIMARY_ITEM2 and args.t is None:
        raise UsageError("--dependence item2 requires --t")
    if args.mode == "fwer":
        report = procedures.fwer_two_stage(
            data, rule, lo, hi, procedures.FwerMethod(args.method)
        )
        params = {"alpha1": lo, "alpha": hi, "method": args.method}
    else:
        report = procedures.fdr_two_stage(data, rule, lo, hi, mode, args.t)
        params = {"q1": lo, "q": hi, "dependence": mode.value, "t": args.t}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_discoveries_csv(data, report, out / "discoveries.csv")
    (out / "summary.txt").write_text(
        dataio.summary_text(report, data, params), encoding="utf-8"
    )
    if not args.quiet:
        print(f"{report.procedure}: rejected {report.r2} of R1={report.r1}")
        for rid in report.rejected_ids:
            print(f"  {rid}")
    return EXIT_OK


def _cmd_adjust(args) -> int:
    data = dataio.parse_pvalue_csv(args.input)
    mode = dataio.parse_dependence(args.dependence)
    table = adjust_mod.build_adjusted_table(
        data, c=args.c, flavor=args.flavor, mode=mode, t=args.t, q=args.q
    )
    dataio.write_adjusted_csv(table, args.out, full=args.full_precision)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    parsed = dataio.parse_scenario_file(args.scenario)
    if parsed.sweep_axis is not None:
        rows = sim.sweep(
            parsed.scenario, parsed.sweep_axis, parsed.sweep_grid, workers=args.workers
        )
    else:
        rows = [(0.0, sim.run_scenario(parsed.scenario, workers=args.workers))]
    text = dataio.sim_csv_text(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise UsageError(f"bad grid spec {spec!r}; expected LO:HI:N") from None


def _cmd_power(args) -> int:
    if args.grid_c:
        if args.alpha is None:
            raise UsageError("--grid-c needs --alpha")
        lines = ["c,power"]
        for c in _parse_grid(args.grid_c):
            value = sim.analytic_power_two_stage(
                args.mu11, args.mu21, args.m, c * args.alpha, args.alpha
            )
            lines.append(f"{dataio.fmt(float(c))},{value:.6g}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    pi1 = sim.analytic_power_bonf_max(args.mu11, args.mu21, args.m, args.alpha)
    print(f"pi1 = {pi1:.6g}")
    if args.alpha1 is not None:
        pi2 = sim.analytic_power_two_stage(
            args.mu11, args.mu21, args.m, args.alpha1, args.alpha
        )
        print(f"pi2 = {pi2:.6g}")
    return EXIT_OK


def _cmd_calibrate_oracle(args) -> int:
    qp = sim.solve_oracle_qprime(args.f00, args.f01, args.q, args.w1)
    print(f"q_prime = {qp:.6g}")
    if args.input:
        data = dataio.parse_pvalue_csv(args.input)
        rule = dataio.parse_rule_spec(args.selection)
        report = procedures.oracle_calibrated_run(
            data, rule, args.f00, args.f01, args.q, args.w1
        )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dataio.write_discoveries_csv(data, report, out / "discoveries.csv")
        params = {"f00": args.f00, "f01": args.f01, "q": args.q, "w1": args.w1}
        (out / "summary.txt").write_text(
            dataio.summary_text(report, data, params), encoding="utf-8"
        )
        if not args.quiet:
            print(f"{report.procedure}: rejected {report.r2} of R1={report.r1}")
    return EXIT_OK


def _cmd_probe_selection(args) -> int:
    data = dataio.parse_pvalue_csv(args.input)
    rule = dataio.parse_rule_spec(args.selection)
    report = probe_validity(data=data, rule=rule, grid_size=args.grid_size, seed=args.seed)
    print(
        f"rule={report.rule_kind} probed={report.probed} "
        f"counterexamples={len(report.counterexamples)}"
    )
    for ce in report.counterexamples[:10]:
        print(
            f"  {ce.perturbed_id} -> p1={ce.replacement_p1:g} changes the "
            f"selection ({len(ce.selection_before)} -> {len(ce.selection_after)} ids)"
        )
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "adjust": _cmd_adjust,
    "simulate": _cmd_simulate,
    "power": _cmd_power,
    "calibrate-oracle": _cmd_calibrate_oracle,
    "probe-selection": _cmd_probe_selection,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ApplicabilityError as exc:
        print(f"applicability error: {exc}", file=sys.stderr)
        return EXIT_APPLICABILITY
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
