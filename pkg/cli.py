"""
Command-line entry point for the MANET simulator.

    python cli.py simulate --scenario scenario.txt --seed 3 --out runs/one
    python cli.py sweep --scenario scenario.txt --param nodes=20,40,60,80 --seeds 10 --out runs/sweep
    python cli.py analyze --trace runs/one/trace.txt
    python cli.py plot --csv runs/sweep/aggregate.csv --metric pdr --out pdr.svg
    python cli.py compare --csv runs/sweep/aggregate.csv
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import settings
from app.core.exceptions import SimulatorException, ValidationError
from app.core.logging_config import get_logger, setup_logging
from app.harness.comparison import DEFAULT_TOLERANCE, compare_csv
from app.harness.exports import report_row, write_run_artifacts
from app.harness.plotting import PLOT_METRICS, plot_aggregate
from app.harness.scenario_io import build_scenario, load_scenario
from app.harness.sweep import run_sweep
from app.harness.trace_io import analyze_trace
from app.models.scenario import ScenarioConfig, SweepSpec
from app.simulation import run_scenario

logger = get_logger(__name__)


def _base_scenario(args: argparse.Namespace) -> ScenarioConfig:
    scenario = load_scenario(args.scenario) if args.scenario else build_scenario({}, "<defaults>")
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "protocol", None):
        overrides["protocol"] = args.protocol
    if overrides:
        scenario = build_scenario({**scenario.model_dump(), **overrides}, args.scenario or "<defaults>")
    return scenario


def parse_param(text: str) -> tuple[str, List[str]]:
    name, sep, values = text.partition("=")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not sep or not name.strip() or not items:
        raise ValidationError(f"--param must look like name=v1,v2,..., got {text!r}", error_code="INVALID_PARAM")
    return name.strip(), items


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _base_scenario(args)
    result = run_scenario(scenario, record_mobility=args.mobility_csv)
    paths = write_run_artifacts(result, args.out)
    print(json.dumps(report_row(scenario, result.report), indent=2))
    if result.switches:
        print(f"{len(result.switches)} protocol switches")
    print(f"Artifacts written to {Path(args.out)} ({', '.join(sorted(paths))})")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    param, values = parse_param(args.param)
    protocols = [p.strip() for p in args.protocols.split(",") if p.strip()] if args.protocols else None
    try:
        spec = SweepSpec(base=_base_scenario(args), param=param, values=values, seeds=args.seeds, protocols=protocols)
    except ValueError as e:
        raise ValidationError(f"Invalid sweep: {e}", error_code="SWEEP_INVALID") from e
    result = run_sweep(spec, args.out, workers=args.workers or settings.SWEEP_WORKERS)
    print(f"{len(result.reports)} runs, {len(result.aggregate)} aggregate rows")
    print(f"Reports: {result.reports_path}")
    print(f"Aggregate: {result.aggregate_path}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    report = analyze_trace(args.trace, args.duration)
    print(json.dumps(report.model_dump(), indent=2))
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    summary = plot_aggregate(args.csv, args.metric, args.out)
    points = ", ".join(f"{p}: {n}" for p, n in summary.points.items())
    print(f"Wrote {summary.path} ({points})")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    verdicts = compare_csv(args.csv, args.tolerance)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        verdicts.to_csv(args.out, index=False, lineterminator="\n")
    print(verdicts.to_string(index=False) if not verdicts.empty else "No MRP rows with both constituents found")
    outside = verdicts["inside"] == False  # noqa: E712
    if args.allow_favorable:
        outside &= ~verdicts["favorable"].astype(bool)
    return 1 if outside.any() else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manet", description="MANET routing simulator with MRP protocol switching")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Run one scenario")
    simulate.add_argument("--scenario", help="key=value scenario file (defaults when omitted)")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--protocol", help="aodv, dsr, dsdv, tora, mrp or mrp:<a>+<b>")
    simulate.add_argument("--out", required=True)
    simulate.add_argument("--mobility-csv", action="store_true", help="Also write node positions per tick")
    simulate.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("sweep", help="Run a parameter sweep")
    sweep.add_argument("--scenario")
    sweep.add_argument("--param", required=True, help="name=v1,v2,...")
    sweep.add_argument("--seeds", type=int, default=1)
    sweep.add_argument("--protocols", help="Comma-separated protocol tokens")
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(func=cmd_sweep)

    analyze = sub.add_parser("analyze", help="Recompute metrics from a trace file")
    analyze.add_argument("--trace", required=True)
    analyze.add_argument("--duration", type=float, default=None)
    analyze.set_defaults(func=cmd_analyze)

    plot = sub.add_parser("plot", help="Plot one metric of an aggregate CSV as SVG")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--metric", required=True, help=f"one of {', '.join(sorted(PLOT_METRICS))}")
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot)

    compare = sub.add_parser("compare", help="Check MRP rows against their constituents' envelope")
    compare.add_argument("--csv", required=True)
    compare.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    compare.add_argument("--out")
    compare.add_argument(
        "--allow-favorable", action="store_true", help="Do not fail on values that beat both constituents"
    )
    compare.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except SimulatorException as e:
        logger.debug(f"{type(e).__name__} [{e.error_code}]: {e.details}")
        print(f"error: {e.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
