"""Command-line experiment runner.

    learnedbloom model --fp 0.01 --fn 0.5 --alpha 0.6185 --b 10
    learnedbloom simulate --scenario paper-section-5 --seed 1
    learnedbloom sweep --scenario range-example --oracle bucket
    learnedbloom bloomier --scenario bloomier-supplement

Tables go to stdout (CSV, or JSON with ``--format json``); diagnostics go to
stderr. Any error exits nonzero.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Any

from . import experiments
from .experiments import ConfigError, SCHEMA_VERSION

# config fields exposed as flags, with their parsers
_FLAGS: dict[str, Any] = {
    "seed": int, "trials": int, "n_keys": int, "universe": int, "oracle": str,
    "target_fp": float, "target_fn": float, "tau": float, "num_buckets": int,
    "b": float, "b1": float, "b2": float, "zeta_per_key": float, "backup_bits_per_key": float,
    "alpha": float, "n_queries": int, "u": int, "r_prime": int, "c": float,
    "value_oracle": str, "jobs": int,
}
_LIST_FLAGS = {"taus": float, "r_values": int}


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(columns: list[str], comments: list[str], rows: list[dict], fmt: str, command: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "columns": columns,
               "comments": comments, "rows": [{c: row.get(c, "") for c in columns} for row in rows]}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} command={command}\n")
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _add_config_flags(p: argparse.ArgumentParser, default_scenario: str) -> None:
    p.add_argument("--scenario", choices=experiments.SCENARIOS)
    p.set_defaults(default_scenario=default_scenario)
    p.add_argument("--config", metavar="JSON", help="JSON file of config fields; flags override it")
    p.add_argument("--format", choices=("csv", "json"))
    for name, typ in _FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    for name, typ in _LIST_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, nargs="+")
    p.add_argument("--query-range", dest="query_ranges", type=int, nargs=2, action="append", metavar=("LO", "HI"))


def _config_from(args: argparse.Namespace) -> experiments.ExperimentConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(experiments.load_config_file(args.config))
    scenario = values.pop("scenario", None)
    if args.scenario is not None:
        scenario = args.scenario
    if scenario is None:
        scenario = args.default_scenario
    for name in list(_FLAGS) + list(_LIST_FLAGS) + ["query_ranges", "format"]:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = [list(q) for q in v] if name == "query_ranges" else v
    return experiments.make_config(scenario, values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="learnedbloom", description="Learned Bloom filter models and simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("model", help="evaluate the closed-form models")
    m.add_argument("--fp", type=float, required=True)
    m.add_argument("--fn", type=float, required=True)
    m.add_argument("--alpha", type=float, default=0.6185)
    m.add_argument("--b", type=float, default=10.0)
    m.add_argument("--b1", type=float)
    m.add_argument("--b2", type=float)
    m.add_argument("--format", choices=("csv", "json"), default="csv")

    _add_config_flags(sub.add_parser("simulate", help="build filters and measure FPRs"), "paper-section-5")
    _add_config_flags(sub.add_parser("sweep", help="profile an oracle over a threshold grid"), "range-example")
    _add_config_flags(sub.add_parser("bloomier", help="plain and learned Bloomier filters"), "bloomier-supplement")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "model":
            comments, rows = experiments.run_model(args.fp, args.fn, args.alpha, args.b, args.b1, args.b2)
            out = render(experiments.MODEL_COLUMNS, comments, rows, args.format, "model")
        else:
            cfg = _config_from(args)
            runner, columns = {
                "simulate": (experiments.run_simulate, experiments.SIMULATE_COLUMNS),
                "sweep": (experiments.run_sweep, experiments.SWEEP_COLUMNS),
                "bloomier": (experiments.run_bloomier, experiments.BLOOMIER_COLUMNS),
            }[args.command]
            comments, rows = runner(cfg)
            out = render(columns, comments, rows, cfg.format, args.command)
    except ConfigError as exc:
        print(f"learnedbloom: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"learnedbloom: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
