#!/usr/bin/env python3
"""Retrain the EEG identifier at several training-set fractions and report accuracy."""
import argparse
import sys

from deepkey import evaluation, synthgen
from deepkey.config import Config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--subjects", type=int, default=4)
    ap.add_argument("--sessions", type=int, default=2)
    ap.add_argument("--seconds", type=float, default=15.0)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--fractions", default="20,40,60,80,100",
                    help="comma-separated training percentages")
    ap.add_argument("--n-iter", type=int, default=300)
    args = ap.parse_args()

    cfg = Config(seed=args.seed, n_iter_eeg=args.n_iter)
    profiles = synthgen.make_profiles(args.subjects, args.seed)
    recs = [synthgen.generate_eeg(p, synthgen.SessionConfig.for_index(i), args.seconds)
            for p in profiles for i in range(args.sessions)]
    fractions = [float(v) / 100.0 for v in args.fractions.split(",")]
    print("fraction  eeg_accuracy")
    for frac, acc in evaluation.datasize_sweep(recs, cfg, fractions):
        print(f"{frac:7.0%}  {acc:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
