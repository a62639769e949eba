"""Command-line driver: run a custom solve or a named experiment.

Examples:
    swarmeq experiment kp2 --output kp2.json
    swarmeq experiment multistate --set N=2048 --format csv --output runs/multi.csv
    swarmeq solve --set kernel=qanr --set eps=0.3 --set nu=0.001 --set stages=6
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentConfig,
    ResultRecord,
    emit,
    run_experiment,
)


def _parse_override(item: str) -> tuple[str, object]:
    if "=" not in item:
        raise argparse.ArgumentTypeError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    try:
        value: object = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings like grid=uniform
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmeq",
        description="Compute and verify critical points of the aggregation-diffusion energy",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
        help="override an experiment parameter (repeatable); values parse as JSON",
    )
    common.add_argument("--output", help="write results to this path")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--seed", type=int, help="random seed (stochastic experiments)")

    run = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    run.add_argument("name", choices=EXPERIMENT_NAMES)

    sub.add_parser("solve", parents=[common], help="run a single custom solve")
    return parser


def _summary_line(record: ResultRecord) -> str:
    status = record.metrics.get("converged")
    tag = {True: "converged", False: "NOT CONVERGED", None: "done"}[status]
    extras = []
    for key in ("total_energy", "lambda_inf", "iterations", "aggregates",
                "effective_dimension", "l1_error_exact"):
        if key in record.metrics and record.metrics[key] is not None:
            val = record.metrics[key]
            extras.append(f"{key}={val:.6g}" if isinstance(val, float) else f"{key}={val}")
    label = ", ".join(
        f"{k}={v}" for k, v in list(record.parameters.items())[:3]
    )
    return f"[{record.experiment}] {label}: {tag} ({', '.join(extras)})"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = dict(_parse_override(item) for item in args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    name = args.name if args.command == "experiment" else "custom"
    try:
        cfg = ExperimentConfig(
            experiment=name,
            overrides=overrides,
            output=args.output,
            fmt=args.format,
        )
        records = run_experiment(cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for record in records:
        print(_summary_line(record))
    if args.output:
        written = emit(records, args.format, args.output)
        print(f"wrote {len(written)} file(s); primary: {written[0]}")
    return 0 if all(r.tolerated for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
