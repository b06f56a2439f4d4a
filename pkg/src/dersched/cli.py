"""Command-line front end.

Subcommands:

- run          simulate a day and write intervals.csv / summary.csv / plotdata/
- check        validate a scenario and report per-interval reserve feasibility
- size         minimum inverter rating for a PV array plus discharge rate
- size-storage battery bank amp-hours from the derating chain

Exit codes: 0 success, 1 validation failure (or an unholdable reserve
target under ``check``), 2 file/parse problems.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .factors import SizingInputs, size_inverter, size_storage_ah
from .model import consistency_warnings
from .scenario_io import (BUILTIN_SCENARIOS, ScenarioParseError, emit_results,
                          parse_scenario)
from .simulator import ScenarioValidationError, run_day_ahead

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    if args.seed is not None:
        rc = dataclasses.replace(scenario.reserve_consumption,
                                 rng_seed=args.seed)
        scenario = dataclasses.replace(scenario, reserve_consumption=rc)
    if args.tsrp is not None:
        if args.tsrp < 0:
            print(f"error: --tsrp must be >= 0, got {args.tsrp}",
                  file=sys.stderr)
            return EXIT_VALIDATION
        scenario = dataclasses.replace(
            scenario, tsrp_kw=tuple([args.tsrp] * scenario.n_intervals))

    records = run_day_ahead(scenario)
    written = emit_results(records, args.out)
    unmet = sum(1 for r in records if r.tsrp_unmet)
    dt = scenario.interval_hours
    print(f"simulated {len(records)} intervals "
          f"({len(scenario.ders)} units, dt={_fmt(dt)} h)")
    print(f"energy: committed {_fmt(sum(r.total_ucp_kw for r in records) * dt)}"
          f" kWh, non-dispatchable "
          f"{_fmt(sum(r.total_nd_kw for r in records) * dt)} kWh, "
          f"reserve consumed "
          f"{_fmt(sum(r.reserve_consumed_kw for r in records) * dt)} kWh")
    if unmet:
        print(f"warning: reserve target unmet on {unmet} interval(s); "
              f"see 'dersched check'", file=sys.stderr)
    print(f"wrote {len(written)} files under {args.out}")
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    for w in consistency_warnings(scenario):
        print(f"warning: {w}")

    records = run_day_ahead(scenario)
    print(f"{'index':>5} {'time_h':>7} {'tsrp_kw':>9} "
          f"{'lo_kw':>9} {'hi_kw':>9} status")
    unmet = 0
    for r, target in zip(records, scenario.tsrp_kw):
        lo, hi = r.tsrp_window_kw
        status = "unmet" if r.tsrp_unmet else "ok"
        unmet += r.tsrp_unmet
        print(f"{r.index:>5} {_fmt(r.time_hours):>7} {_fmt(target):>9} "
              f"{_fmt(lo):>9} {_fmt(hi):>9} {status}")
    if unmet:
        print(f"reserve target unmet on {unmet} of {len(records)} intervals")
        return EXIT_VALIDATION
    print(f"scenario ok: reserve target holdable on all {len(records)} "
          f"intervals")
    return EXIT_OK


def _cmd_size(args: argparse.Namespace) -> int:
    print(_fmt(size_inverter(args.pv_kw, args.dr_kw, args.headroom)))
    return EXIT_OK


def _cmd_size_storage(args: argparse.Namespace) -> int:
    inputs = SizingInputs(
        k_p=args.k_p, pv_size_w=args.pv_w, dr_max_hours=args.dr_hours,
        ssv_volts=args.ssv, k_t=args.k_t, eta_s=args.eta_s,
        eta_cc=args.eta_cc, eta_w=args.eta_w, dod=args.dod, d_t=args.d_t)
    print(_fmt(size_storage_ah(inputs)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dersched",
        description="Day-ahead scheduling for solar-plus-storage fleets.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="simulate one day and write result files")
    run_p.add_argument("scenario",
                       help="scenario YAML path or bundled name "
                            f"({', '.join(sorted(BUILTIN_SCENARIOS))})")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the reserve-consumption RNG seed")
    run_p.add_argument("--tsrp", type=float, default=None,
                       help="override the reserve target with a constant kW")
    run_p.set_defaults(func=_cmd_run)

    check_p = sub.add_parser(
        "check", help="validate a scenario and report reserve feasibility")
    check_p.add_argument("scenario", help="scenario YAML path or bundled name")
    check_p.set_defaults(func=_cmd_check)

    size_p = sub.add_parser(
        "size", help="minimum inverter rating for PV plus discharge rate")
    size_p.add_argument("--pv-kw", type=float, required=True,
                        help="maximum predicted PV power, kW")
    size_p.add_argument("--dr-kw", type=float, required=True,
                        help="maximum storage discharge rate, kW")
    size_p.add_argument("--headroom", type=float, default=0.0,
                        help="fractional headroom (default 0)")
    size_p.set_defaults(func=_cmd_size)

    ss_p = sub.add_parser(
        "size-storage", help="battery bank size in amp-hours")
    ss_p.add_argument("--k-p", type=float, required=True,
                      help="PV sizing coefficient")
    ss_p.add_argument("--pv-w", type=float, required=True,
                      help="PV array size, W")
    ss_p.add_argument("--dr-hours", type=float, required=True,
                      help="discharge envelope, hours")
    ss_p.add_argument("--ssv", type=float, required=True,
                      help="storage system voltage, V")
    ss_p.add_argument("--k-t", type=float, required=True,
                      help="temperature derating factor")
    ss_p.add_argument("--eta-s", type=float, required=True,
                      help="inverter efficiency")
    ss_p.add_argument("--eta-cc", type=float, required=True,
                      help="charge-controller efficiency")
    ss_p.add_argument("--eta-w", type=float, required=True,
                      help="wiring efficiency")
    ss_p.add_argument("--dod", type=float, required=True,
                      help="allowed depth of discharge, fraction")
    ss_p.add_argument("--d-t", type=float, required=True,
                      help="design margin factor")
    ss_p.set_defaults(func=_cmd_size_storage)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioValidationError as e:
        print("scenario validation failed:", file=sys.stderr)
        for v in e.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
