"""Command-line entry points: run sweeps, plot CSV results, validate configs.

Config files are JSON with the ExperimentConfig field names. Flag overrides
win over the file; --threads falls back to the BCOPS_THREADS environment
variable, then 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .metrics import ABSTENTION_RATE, CLASS_COVERAGE, MEAN_COVERAGE, METRIC_NAMES
from .svgplot import render_lineplot
from .sweep import (
    ExperimentConfig,
    aggregate_result,
    prepare_mnist,
    read_csv,
    run_metadata,
    run_sweep,
    write_csv,
    write_summary_csv,
)


def _load_config(path: str) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must contain a JSON object")
    return ExperimentConfig.from_dict(raw)


def _resolve_threads(flag_value) -> int:
    if flag_value is not None:
        return max(1, flag_value)
    env = os.environ.get("BCOPS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"BCOPS_THREADS must be an integer, got {env!r}")
    return 1


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.reps is not None:
        config = replace(config, repetitions=args.reps)
    out_dir = Path(args.out or config.output_dir or "results")
    threads = _resolve_threads(args.threads)

    result = run_sweep(config, threads=threads)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(result, out_dir / "sweep.csv")
    summary = aggregate_result(result)
    write_summary_csv(summary, out_dir / "summary.csv")
    (out_dir / "run_metadata.json").write_text(
        json.dumps(run_metadata(config, threads), indent=2) + "\n", encoding="utf-8"
    )
    for metric in METRIC_NAMES:
        if any(r.metric_name == metric for r in summary):
            render_lineplot(summary, metric, out_dir / f"{metric}.svg", alpha=config.alpha)
    print(f"wrote sweep.csv, summary.csv, run_metadata.json and plots to {out_dir}")
    return 0


def _cmd_plot(args) -> int:
    result = read_csv(args.csv)
    summary = aggregate_result(result)
    render_lineplot(summary, args.metric, args.out, alpha=args.alpha)
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    config = _load_config(args.config)
    if config.experiment == "mnist":
        ctx = prepare_mnist(config.mnist_paths)
        print(
            f"config ok: experiment=mnist, train rows={ctx.train.n_rows} "
            f"(digits 0-5), test rows={ctx.test.n_rows}"
        )
    else:
        print(
            f"config ok: experiment={config.experiment}, "
            f"phi levels={len(config.phi_grid)}, repetitions={config.resolved_repetitions}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcops",
        description="Conformal prediction sets with abstention under label noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a noise sweep from a JSON config")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--out", help="output directory (overrides config output_dir)")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--reps", type=int, help="override the repetition count")
    p_run.add_argument("--threads", type=int, help="worker threads (env BCOPS_THREADS, default 1)")
    p_run.set_defaults(func=_cmd_run)

    p_plot = sub.add_parser("plot", help="render an SVG line plot from a sweep CSV")
    p_plot.add_argument("--csv", required=True, help="long-form sweep CSV")
    p_plot.add_argument("--metric", required=True, choices=METRIC_NAMES)
    p_plot.add_argument("--out", required=True, help="output SVG file")
    p_plot.add_argument("--alpha", type=float, default=0.05, help="reference level for coverage plots")
    p_plot.set_defaults(func=_cmd_plot)

    p_val = sub.add_parser("validate", help="parse a config and dry-run data loading")
    p_val.add_argument("--config", required=True, help="JSON config file")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
