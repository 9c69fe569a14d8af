#!/usr/bin/env python3
"""End-to-end demo: generate a cohort, train a bundle, authenticate, evaluate.

Everything lands in a scratch directory (default ./demo_out) and the run is
fully deterministic in --seed.
"""
import argparse
import sys
from pathlib import Path

from deepkey import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--subjects", type=int, default=4)
    ap.add_argument("--sessions", type=int, default=2)
    ap.add_argument("--seconds", type=float, default=20.0)
    ap.add_argument("--config", default=None,
                    help="optional config file passed through to training")
    args = ap.parse_args()

    out = Path(args.out)
    data = out / "data"
    bundle = out / "model.dkey"
    impostor = args.subjects - 1  # highest id stays unenrolled

    steps = [
        ["gen", "--subjects", str(args.subjects), "--sessions", str(args.sessions),
         "--seconds", str(args.seconds), "--seed", str(args.seed),
         "--out", str(data), "--force"],
        ["train", "--data", str(data), "--out", str(bundle),
         "--exclude-subjects", str(impostor)]
        + (["--config", args.config] if args.config else []),
        ["auth", "--bundle", str(bundle),
         "--eeg", str(data / "s00_sess0_eeg.csv"),
         "--gait", str(data / "s00_sess0_gait.csv"),
         "--log", str(out / "auth.log")],
        ["eval", "--bundle", str(bundle), "--data", str(data),
         "--impostor-subjects", str(impostor), "--out", str(out / "eval")],
    ]
    for argv in steps:
        print(f"\n$ deepkey {' '.join(argv)}")
        code = cli.main(argv)
        if code not in (0, 1):  # auth exit 1 just means Deny
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
