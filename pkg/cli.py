#!/usr/bin/env python3
"""
Command-line front end for umedopt.

Run: python cli.py umed --family poisson --theta 5
     python cli.py estimate --data sample.csv [--method optimal|hampel|mle --m 0.05]
     python cli.py asympt --theta 5
     python cli.py bias-table --lambdas 5,10,20 --epsilons 0.1,0.2
     python cli.py efficiency-table --lambdas 5,10,20
     python cli.py simulate --config configs/published.yaml --workers 4 --output out/results.csv

Every subcommand takes --format csv|json, --output PATH and -v.
Exit codes: 0 success, 2 usage/input/config error, 3 solver or simulation failure,
4 internal error.
"""

import argparse
import os
import sys
import time
import uuid
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from audit import file_fingerprint, get_logger, log_error, log_run, setup_logging
from report import FORMATS, render_record, render_table, sibling_path, simulation_documents, write_output
from umedopt import (
    DomainError,
    EstimationError,
    SampleFileLoader,
    SimulationConfig,
    bias_table,
    efficiency_table,
    estimate_hampel,
    estimate_mle,
    estimate_optimal,
    estimator_limit_law,
    g_lateral,
    g_prime,
    resolve_family,
    run_simulation,
    umed,
    umed_limit_law,
)
from umedopt.asymptotics import LawCase, asymptotic_efficiency
from umedopt.estimator import HampelConfig

load_dotenv()

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_INTERNAL = 4


def _number_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _load_sample(path: str):
    loader = SampleFileLoader()
    dist, error = loader.process(path)
    if error:
        raise DomainError(f"{path}: {error}")
    info = loader.get_file_info(dist)
    get_logger().info(
        "loaded path=%s n=%d distinct=%d min=%d max=%d mean=%.4f",
        path, info["n"], info["distinct_values"], info["min"], info["max"], info["mean"],
    )
    return dist


def default_workers() -> int:
    raw = (os.environ.get("UMEDOPT_WORKERS") or "1").strip()
    try:
        workers = int(raw)
    except ValueError:
        raise DomainError(f"UMEDOPT_WORKERS must be an integer, got {raw!r}") from None
    if workers < 1:
        raise DomainError(f"UMEDOPT_WORKERS must be at least 1, got {workers}")
    return workers


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_umed(args) -> int:
    if args.data is not None:
        dist = _load_sample(args.data)
    else:
        dist = resolve_family(args.family).at(args.theta)
    res = umed(dist)
    record = {"value": res.value, "k0": res.k0, "p0": res.p0, "boundary": res.boundary}
    write_output(render_record(record, args.format), args.output)
    return EXIT_OK


def cmd_estimate(args) -> int:
    family = resolve_family(args.family)
    dist = _load_sample(args.data)
    if args.method == "hampel":
        res = estimate_hampel(dist, family, HampelConfig(m=args.m))
    elif args.method == "mle":
        res = estimate_mle(dist, family)
    else:
        res = estimate_optimal(dist, family)
    record = {"method": res.method, "theta_hat": res.theta_hat, "umed_target": res.umed_target}
    if args.method == "hampel":
        record["m"] = res.m
    record["n"] = dist.n
    write_output(render_record(record, args.format), args.output)
    return EXIT_OK


def cmd_asympt(args) -> int:
    family = resolve_family(args.family)
    dist = family.at(args.theta)
    umed_law = umed_limit_law(dist)
    est_law = estimator_limit_law(family, args.theta)
    record = {"theta": args.theta, "case": umed_law.case.value}
    if umed_law.case is LawCase.INTERIOR:
        record.update({
            "umed_sigma2": umed_law.sigma2,
            "g_prime": g_prime(family, args.theta),
            "estimator_variance": est_law.sigma2,
            "efficiency": asymptotic_efficiency(family, args.theta),
        })
    else:
        left, right = g_lateral(family, args.theta)
        record.update({
            "umed_left_scale": umed_law.left_scale,
            "umed_right_scale": umed_law.right_scale,
            "g_left": left,
            "g_right": right,
            "estimator_left_scale": est_law.left_scale,
            "estimator_right_scale": est_law.right_scale,
        })
    write_output(render_record(record, args.format), args.output)
    return EXIT_OK


def cmd_bias_table(args) -> int:
    for eps in args.epsilons:
        if not 0.0 <= eps < 0.5:
            raise DomainError(f"--epsilons values must lie in [0, 0.5), got {eps}")
    frame = bias_table(args.family, args.lambdas, args.epsilons)
    write_output(render_table(frame, args.format, title="max_bias"), args.output)
    return EXIT_OK


def cmd_efficiency_table(args) -> int:
    frame = efficiency_table(args.family, args.lambdas)
    write_output(render_table(frame, args.format, title="asymptotic_efficiency"), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = SimulationConfig.from_file(args.config)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise DomainError(f"--workers must be at least 1, got {workers}")
    result = run_simulation(config, workers=workers)
    documents = simulation_documents(result, config, args.format)
    if args.output is None:
        write_output("\n".join(documents.values()))
    else:
        base = Path(args.output)
        for suffix, text in documents.items():
            write_output(text, str(sibling_path(base, suffix)))
    logger = get_logger()
    logger.info("simulate wrote cells=%d fingerprint=%s", len(result.records), config.fingerprint())
    logger.info("%s", result.summary())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="csv", help="output format (default csv)")
    common.add_argument("--output", default=None, help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    family = argparse.ArgumentParser(add_help=False)
    family.add_argument("--family", default="poisson", help="family id, e.g. poisson or binomial:20")

    parser = argparse.ArgumentParser(prog="umedopt", description="Uniform-median optimal estimation for count data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("umed", parents=[common, family], help="uniform median of F_theta or of a data file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--theta", type=float)
    src.add_argument("--data", help="one integer per line, or k,count pairs")
    p.set_defaults(func=cmd_umed)

    p = sub.add_parser("estimate", parents=[common, family], help="estimate theta from a data file")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("optimal", "hampel", "mle"), default="optimal")
    p.add_argument("--m", type=float, default=None, help="Huber truncation level (hampel only)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("asympt", parents=[common, family], help="limit laws and efficiency at theta")
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_asympt)

    p = sub.add_parser("bias-table", parents=[common, family], help="maximum asymptotic bias table")
    p.add_argument("--lambdas", type=_number_list, default=[5.0, 10.0, 20.0])
    p.add_argument("--epsilons", type=_number_list, default=[0.1, 0.2])
    p.set_defaults(func=cmd_bias_table)

    p = sub.add_parser("efficiency-table", parents=[common, family], help="asymptotic efficiency table")
    p.add_argument("--lambdas", type=_number_list, default=[5.0, 10.0, 20.0])
    p.set_defaults(func=cmd_efficiency_table)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run from a YAML/JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None, help="process count (default $UMEDOPT_WORKERS or 1)")
    p.set_defaults(func=cmd_simulate)
    return parser


def _input_path(args) -> Optional[str]:
    return getattr(args, "data", None) or getattr(args, "config", None)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "estimate" and args.method == "hampel" and args.m is None:
        parser.print_usage(sys.stderr)
        print("error: --method hampel needs --m", file=sys.stderr)
        return EXIT_INPUT

    setup_logging("INFO" if args.verbose else None)
    logger = get_logger()
    run_id = str(uuid.uuid4())
    ledger_args = {k: v for k, v in vars(args).items() if k != "func"}
    fingerprint = file_fingerprint(_input_path(args))
    start = time.perf_counter()
    logger.info("command=%s run_id=%s args=%s", args.command, run_id, ledger_args)

    try:
        code = args.func(args)
    except DomainError as e:
        code, error = EXIT_INPUT, e
    except EstimationError as e:
        code, error = EXIT_SOLVER, e
    except Exception as e:  # InvariantError or anything unexpected
        code, error = EXIT_INTERNAL, e
    else:
        error = None

    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        log_error(args.command, error, exit_code=code, args=ledger_args, run_id=run_id, input_fingerprint=fingerprint)
    else:
        log_run(
            status="success", command=args.command, args=ledger_args, run_id=run_id,
            input_fingerprint=fingerprint, exit_code=code,
        )
    logger.info("command=%s run_id=%s exit_code=%d duration_sec=%.3f", args.command, run_id, code, time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
