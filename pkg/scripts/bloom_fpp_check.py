"""Measured FPP of real Bloom filters against rho^k and the alpha^b model.

    python3 scripts/bloom_fpp_check.py --n 10000 --probes 1000000
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from learnedbloom import analysis
from learnedbloom.bloom import BloomFilter
from learnedbloom.experiments import sample_distinct, substream


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--probes", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", type=float, nargs="+", default=[4, 6, 8, 10, 12, 16])
    args = p.parse_args(argv)
    keys = sample_distinct(substream(args.seed, 0), 0, 2**40, args.n)
    probes = substream(args.seed, 1).integers(2**40, 2**41, args.probes)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["bits_per_key", "k", "fill", "empirical_fpp", "stderr", "instance_fpp", "model_fpp"])
    for b in args.bits:
        f = BloomFilter.for_keys(keys, b, seed=args.seed)
        rate = float(np.mean(f.contains_many(probes)))
        w.writerow([b, f.k, f.fill_fraction(), rate, analysis.standard_error(rate, args.probes), f.fpp(),
                    analysis.bloom_model_fpp(b)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
