"""Write every scenario's CSV table into an output directory.

    python3 scripts/reproduce_tables.py --out results --seed 0 --trials 3
"""
from __future__ import annotations

import argparse
import contextlib
import pathlib
import sys

from learnedbloom.cli import main as cli_main

RUNS = {
    "model_worked_example": ["model", "--fp", "0.01", "--fn", "0.5", "--alpha", "0.6185", "--b", "10"],
    "model_b8": ["model", "--fp", "0.01", "--fn", "0.5", "--alpha", "0.6185", "--b", "8"],
    "range_example": ["simulate", "--scenario", "range-example"],
    "range_example_sweep": ["sweep", "--scenario", "range-example", "--oracle", "bucket"],
    "section_4": ["simulate", "--scenario", "paper-section-4"],
    "section_5": ["simulate", "--scenario", "paper-section-5"],
    "bloomier": ["bloomier", "--scenario", "bloomier-supplement"],
}


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, cmd in RUNS.items():
        if cmd[0] != "model":
            cmd = cmd + ["--seed", str(args.seed), "--trials", str(args.trials), "--jobs", str(args.jobs)]
        path = args.out / f"{name}.csv"
        with open(path, "w") as fh, contextlib.redirect_stdout(fh):
            code = cli_main(cmd)
        if code:
            print(f"{name}: failed with exit code {code}", file=sys.stderr)
            return code
        print(f"wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
