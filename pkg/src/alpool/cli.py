"""Command-line entry points: batch experiments, reports, labeling service.

  al run    --config FILE [--strategy S] [--seed N] [--out DIR]
  al report --manifest FILE --format {csv,markdown} [--out DIR] [--no-plots]
  al serve  --addr HOST:PORT --store DIR
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, build_plan, load_config_file
from .loop import run_suite
from .metrics import render_report
from .oracle import make_simulated_oracle
from .plots import render_learning_curves
from .results import load_manifest_results, write_run_outputs
from .server import serve_forever
from .strategies import STRATEGY_NAMES


def cmd_run(args: argparse.Namespace) -> int:
    raw = load_config_file(args.config)
    plan = build_plan(
        raw, Path(args.config).parent, strategy_override=args.strategy, seed_override=args.seed
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    snapshot = dict(raw)
    snapshot.setdefault("strategy", {})
    snapshot["strategy"] = {**raw.get("strategy", {}), "names": plan.strategies}
    snapshot.setdefault("loop", {})
    snapshot["loop"] = {**raw.get("loop", {}), "seeds": plan.seeds}
    (out_dir / "config.json").write_text(
        json.dumps(snapshot, indent=2) + "\n", encoding="utf-8"
    )

    oracle = make_simulated_oracle(plan.train)
    results = run_suite(plan.base, plan.strategies, plan.seeds, plan.train, plan.test, oracle)
    manifest_path = write_run_outputs(results, out_dir)
    for result in results:
        print(
            f"{result.config.run_id}: final accuracy "
            f"{result.final_accuracy:.3f}, auc {result.auc:.3f}"
        )
    print(f"wrote {len(results)} runs, manifest {manifest_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    manifest_path = Path(args.manifest)
    results = load_manifest_results(manifest_path)
    documents = render_report(results, args.format)
    out_dir = Path(args.out) if args.out else manifest_path.parent / "report"
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    if args.format == "markdown":
        sections = {
            "summary": "Mean rank and mean result",
            "accuracy": "Final accuracy per dataset (mean±sd)",
            "auc": "AUC per dataset (mean±sd)",
            "query_time": "Query time in seconds (mean±sd)",
        }
        report = "# Active learning report\n\n" + "\n".join(
            f"## {title}\n\n{documents[key]}" for key, title in sections.items()
        )
        path = out_dir / "report.md"
        path.write_text(report, encoding="utf-8")
        written.append(path)
    else:
        for key in ("summary", "accuracy", "auc", "query_time"):
            path = out_dir / f"report_{key}.csv"
            path.write_text(documents[key], encoding="utf-8")
            written.append(path)

    curves_path = out_dir / "curves.csv"
    curves_path.write_text(documents["curves_csv"], encoding="utf-8")
    written.append(curves_path)

    if not args.no_plots:
        written.extend(render_learning_curves(results, out_dir / "plots"))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--addr must look like HOST:PORT, got {args.addr!r}")
    serve_forever(host, int(port), args.store)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="al", description="Pool-based active learning engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a suite of simulated-oracle experiments")
    run.add_argument("--config", required=True, help="experiment config JSON")
    run.add_argument("--strategy", choices=STRATEGY_NAMES, help="override the config strategies")
    run.add_argument("--seed", type=int, help="override the config seeds")
    run.add_argument("--out", default="al-output", help="output directory")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="render tables and figures from a manifest")
    report.add_argument("--manifest", required=True)
    report.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    report.add_argument("--out", default=None, help="report directory (default: beside manifest)")
    report.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    report.set_defaults(func=cmd_report)

    serve = sub.add_parser("serve", help="serve the labeling session HTTP API")
    serve.add_argument("--addr", default="127.0.0.1:8765", help="HOST:PORT to bind")
    serve.add_argument("--store", required=True, help="session store directory")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports everything
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
