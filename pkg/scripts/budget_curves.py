"""Model FPR against total bits per key for plain, learned and sandwiched filters.

Prints a CSV with one row per budget; the sandwich uses the optimal split,
so its backup share stays fixed at b2* once the budget exceeds it.

    python3 scripts/budget_curves.py --fp 0.01 --fn 0.5 --max-b 16
"""
from __future__ import annotations

import argparse
import csv
import sys

from learnedbloom import analysis


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fp", type=float, default=0.01)
    p.add_argument("--fn", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=analysis.STANDARD_ALPHA)
    p.add_argument("--max-b", type=float, default=16.0)
    p.add_argument("--step", type=float, default=0.5)
    args = p.parse_args(argv)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["b", "plain_fpp", "learned_fpr", "sandwich_b1", "sandwich_b2", "sandwich_fpr"])
    steps = int(round(args.max_b / args.step))
    for i in range(steps + 1):
        b = i * args.step
        split = analysis.allocate_budget(b, args.fp, args.fn, args.alpha)
        w.writerow([b, analysis.bloom_model_fpp(b, args.alpha),
                    analysis.learned_fpr_model(args.fp, args.fn, b, args.alpha), split.b1, split.b2,
                    analysis.sandwich_fpr_model(args.fp, args.fn, split.b1, split.b2, args.alpha)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
