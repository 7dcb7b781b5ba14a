"""Command line interface for unmonitored customer estimation."""

import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from ..errors import CustomerEstimationError, InputError
from ..estimators import OptimizerSettings
from ..logging_config import configure_logging
from ..simulation import (
    SWEEP_AXES,
    benchmark_parameters,
    find_scenario,
    run_scenario,
    run_sweep,
    scenario_catalog,
)
from .config import PERIOD_MONTHS, RunConfig, load_run_config
from .ingestion import ingest
from .reporting import write_report, write_reports, write_summary, write_tables
from .service import CustomerEstimationService, estimate_pipeline, split_periods
from .synthetic import generate_log
from .validation import load_flags, validate

logger = logging.getLogger(__name__)


def _numbers(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _run_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(
        args.config,
        seed=args.seed,
        output_dir=args.out,
        period_frequency=getattr(args, "period_frequency", None),
        estimator=getattr(args, "estimator", None),
        gamma=getattr(args, "gamma", None),
        n_baskets=args.n_baskets,
        m_segments=args.m_segments,
        delimiter=args.delimiter,
    )


def _load_lines(args: argparse.Namespace, config: RunConfig) -> pd.DataFrame:
    result = ingest(args.data, delimiter=config.delimiter)
    summary = result.summary
    print(
        f"Ingested {summary.accepted} of {summary.rows} rows "
        f"({len(summary.rejected)} rejected), {summary.baskets} baskets, "
        f"{100.0 * summary.monitored_share:.1f}% monitored"
    )
    return result.lines


def cmd_estimate(args: argparse.Namespace) -> int:
    config = _run_config(args)
    lines = _load_lines(args, config)
    reports = estimate_pipeline(lines, config)
    if len(reports) == 1 and config.period_frequency is None:
        paths = write_report(reports[0], config.output_dir)
    else:
        paths = write_reports(reports, config.output_dir)
    for report in reports:
        totals = report.totals
        print(
            f"{report.period}: {totals.estimated_customers:.0f} unmonitored customers "
            f"(naive {totals.naive_customers:.0f}, monitored {totals.monitored_customers})"
        )
    print("Wrote " + ", ".join(str(path) for path in paths))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    granularities = [part.strip() for part in args.period_frequency.split(",")] if args.period_frequency else None
    unknown = [part for part in granularities or [] if part not in PERIOD_MONTHS]
    if unknown:
        raise InputError(f"unknown period frequencies {unknown}; use W, M, Q or Y")
    args.period_frequency = None
    config = _run_config(args)
    lines = _load_lines(args, config)
    flags = load_flags(args.flags)
    result = validate(lines, flags, config, granularities)
    if not result.rows:
        raise InputError("no period could be validated")
    summary = result.summary()
    paths = write_tables({"validation": result.table(), "validation_summary": summary}, config.output_dir)
    print(summary.to_string(index=False))
    print("Wrote " + ", ".join(str(path) for path in paths))
    return 0


def cmd_cluster_only(args: argparse.Namespace) -> int:
    config = _run_config(args)
    lines = _load_lines(args, config)
    stacked: Dict[str, List[pd.DataFrame]] = {"baskets": [], "basket_types": [], "segments_centers": []}
    for label, period_lines in split_periods(lines, config.period_frequency):
        service = CustomerEstimationService(config.for_period(label))
        for name, table in service.cluster_only(period_lines).items():
            table.insert(0, "period", label)
            stacked[name].append(table)
    tables = {name: pd.concat(parts, ignore_index=True) for name, parts in stacked.items()}
    paths = write_tables(tables, config.output_dir)
    print("Wrote " + ", ".join(str(path) for path in paths))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    estimators = ["naive", "mle"]
    if args.include_ls:
        estimators.append("least-squares")
    if args.map_gamma:
        estimators.append("map")
    settings = OptimizerSettings.from_env()
    workers = args.workers if args.workers is not None else int(os.getenv("SIMULATION_WORKERS", "1"))
    out = args.out or RunConfig().output_dir

    if args.sweep:
        if not args.grid:
            raise InputError("a sweep needs --grid values")
        base = benchmark_parameters(args.nu, args.seed).updated(estimate_frequencies=not args.population_frequencies)
        sweep = run_sweep(
            args.sweep, args.grid, base, estimators=estimators, settings=settings, prior=args.map_gamma, workers=workers
        )
        paths = write_tables({f"sweep_{args.sweep}": sweep.table()}, out)
        print(sweep.table().to_string(index=False))
        print("Wrote " + ", ".join(str(path) for path in paths))
        return 0

    catalog = scenario_catalog(args.nu, args.seed)
    if args.population_frequencies:
        catalog = [config.updated(estimate_frequencies=False) for config in catalog]
    labels = args.scenario or ["all"]
    selected = catalog if "all" in labels else [find_scenario(label, catalog) for label in labels]
    rows = []
    for config in selected:
        result = run_scenario(config, estimators, settings, args.map_gamma, workers)
        rows.extend(result.summary_rows())
    table = pd.DataFrame(rows)
    paths = write_tables({"table1": table}, out)
    paths.append(write_summary({"scenarios": rows}, out))
    print(table[["scenario", "estimator", "mean_ape", "sd_ape", "q95_ape"]].to_string(index=False))
    print("Wrote " + ", ".join(str(path) for path in paths))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    log = generate_log(
        seed=args.seed or 0,
        monitored=args.monitored,
        unmonitored=args.unmonitored,
        timestamps=args.periods,
    )
    try:
        log.write(args.out, args.flags)
    except OSError as e:
        raise InputError(f"cannot write {args.out}: {e}") from e
    print(
        f"Wrote {len(log.lines)} product lines to {args.out} "
        f"({log.monitored_customers} monitored, {log.unmonitored_customers} unmonitored customers)"
    )
    return 0


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="Transaction log (delimited text)")
    parser.add_argument("--config", help="Flat KEY=value run configuration")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--n-baskets", dest="n_baskets", type=int)
    parser.add_argument("--m-segments", dest="m_segments", type=int)
    parser.add_argument("--delimiter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="customer-estimation", description=__doc__)
    parser.add_argument("--log-level", help="Overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="cmd", required=True)

    estimate_p = sub.add_parser("estimate", help="Estimate unmonitored customers")
    _add_run_options(estimate_p)
    estimate_p.add_argument("--period-frequency", dest="period_frequency", choices=["W", "M", "Q", "Y"])
    estimate_p.add_argument("--estimator", choices=["mle", "least-squares", "map"])
    estimate_p.add_argument("--gamma", type=_numbers, help="Dirichlet prior, e.g. 2,2,2")
    estimate_p.set_defaults(handler=cmd_estimate)

    validate_p = sub.add_parser("validate", help="Validate on a split of the monitored customers")
    _add_run_options(validate_p)
    validate_p.add_argument("--flags", required=True, help="CSV with customer_id,flag")
    validate_p.add_argument("--period-frequency", dest="period_frequency", help="Comma list of W, M, Q, Y")
    validate_p.add_argument("--estimator", choices=["mle", "least-squares", "map"])
    validate_p.add_argument("--gamma", type=_numbers)
    validate_p.set_defaults(handler=cmd_validate)

    cluster_p = sub.add_parser("cluster-only", help="Write basket types and segment centers")
    _add_run_options(cluster_p)
    cluster_p.add_argument("--period-frequency", dest="period_frequency", choices=["W", "M", "Q", "Y"])
    cluster_p.set_defaults(handler=cmd_cluster_only)

    simulate_p = sub.add_parser("simulate", help="Run the simulation study")
    simulate_p.add_argument("--scenario", nargs="+", help="Scenario labels i..ix or all")
    simulate_p.add_argument("--sweep", choices=SWEEP_AXES)
    simulate_p.add_argument("--grid", type=_numbers)
    simulate_p.add_argument("--nu", type=int, help="Replications (default SIMULATION_REPLICATIONS)")
    simulate_p.add_argument("--seed", type=int, help="Master seed (default SIMULATION_SEED)")
    simulate_p.add_argument("--out", help="Output directory")
    simulate_p.add_argument("--include-ls", action="store_true", help="Also score least squares")
    simulate_p.add_argument("--map-gamma", type=_numbers, help="Also score MAP with this prior")
    simulate_p.add_argument("--workers", type=int, help="Threads (default SIMULATION_WORKERS)")
    simulate_p.add_argument(
        "--population-frequencies",
        dest="population_frequencies",
        action="store_true",
        help="Give the proposed estimator f0 instead of frequencies counted from the monitored draw",
    )
    simulate_p.set_defaults(handler=cmd_simulate)

    generate_p = sub.add_parser("generate", help="Write a synthetic transaction log")
    generate_p.add_argument("--out", required=True, help="Log file to write")
    generate_p.add_argument("--flags", help="Also write member flags here")
    generate_p.add_argument("--seed", type=int)
    generate_p.add_argument("--monitored", type=int, default=1000)
    generate_p.add_argument("--unmonitored", type=int, default=1000)
    generate_p.add_argument("--periods", action="store_true", help="Spread visits over one year")
    generate_p.set_defaults(handler=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        Exit code: 0 ok, 2 input or validation error, 3 identifiability
        error, 4 optimizer non-convergence
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except CustomerEstimationError as e:
        logger.error("%s failed: %s", args.cmd, e)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
