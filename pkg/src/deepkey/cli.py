"""Command-line surface: gen / train / auth / eval."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import evaluation, synthgen
from .config import ENV_CONFIG, Config
from .dsp import Modality, load_recording
from .errors import DeepkeyError, RequestError
from .pipeline import (AuthRequest, Verdict, authenticate, load_system,
                       save_system, train_system)

EXIT_APPROVE = 0
EXIT_DENY = 1
EXIT_INPUT_ERROR = 2


def _load_config(path: str | None) -> Config:
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    return Config.load(path) if path else Config()


def _parse_id_list(raw: str) -> list[int]:
    return [int(v) for v in raw.split(",") if v.strip() != ""]


def cmd_gen(args) -> int:
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        print(f"error: output directory {out} is not empty (use --force)",
              file=sys.stderr)
        return EXIT_INPUT_ERROR
    manifest = synthgen.write_dataset(out, args.subjects, args.sessions,
                                      args.seconds, args.seed)
    print(f"wrote {len(manifest['files'])} recordings to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    recordings, _ = synthgen.load_dataset(args.data)
    if args.exclude_subjects:
        excluded = set(_parse_id_list(args.exclude_subjects))
        recordings = [r for r in recordings if r.subject_id not in excluded]
    t0 = time.perf_counter()
    system, report = train_system(recordings, cfg)
    save_system(system, args.out)
    print(f"trained in {time.perf_counter() - t0:.1f}s, bundle -> {args.out}")
    print(f"holdout accuracy  eeg={report.eeg_holdout_accuracy:.4f}  "
          f"gait={report.gait_holdout_accuracy:.4f}")
    return 0


def cmd_auth(args) -> int:
    system = load_system(args.bundle)
    try:
        req = AuthRequest(eeg=load_recording(args.eeg), gait=load_recording(args.gait))
        decision = authenticate(req, system)
    except DeepkeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    record = {
        "timestamp": time.time(),
        "verdict": decision.verdict.value,
        "reason": decision.reason.value,
        "e_id": decision.e_id,
        "g_id": decision.g_id,
        "stage_timings": decision.stage_timings,
    }
    line = json.dumps(record, sort_keys=True)
    print(line)
    if args.log:
        with open(args.log, "a") as f:
            f.write(line + "\n")
    return EXIT_APPROVE if decision.verdict is Verdict.APPROVE else EXIT_DENY


def cmd_eval(args) -> int:
    system = load_system(args.bundle)
    recordings, _ = synthgen.load_dataset(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.datasize_sweep:
        fractions = [float(v) / 100.0 for v in _parse_id_list(args.datasize_sweep)]
        enrolled = set(int(s) for s in system.enrolled)
        train_recs = [r for r in recordings if r.subject_id in enrolled]
        rows = evaluation.datasize_sweep(train_recs, system.config, fractions)
        p = out_dir / "datasize_sweep.csv"
        p.write_text("fraction,eeg_accuracy\n"
                     + "\n".join(f"{f:.2f},{a:.6f}" for f, a in rows) + "\n")
        for f, a in rows:
            print(f"fraction {f:.0%}: eeg accuracy {a:.4f}")
        print(f"sweep table -> {p}")
        return 0
    impostors = _parse_id_list(args.impostor_subjects) if args.impostor_subjects else []
    result = evaluation.evaluate_system(system, recordings, impostors)
    for modality in (Modality.EEG, Modality.GAIT):
        rep, scores, true = evaluation.holdout_report(system, recordings, modality)
        if modality is Modality.EEG:
            result.eeg_report, result.eeg_scores, result.eeg_true = rep, scores, true
        else:
            result.gait_report, result.gait_scores, result.gait_true = rep, scores, true
    written = evaluation.write_reports(result, out_dir)
    fmt = lambda v: "undefined" if v is None else f"{v:.4f}"
    print(f"FAR={fmt(result.far)} FRR={fmt(result.frr)} "
          f"gate_block_FAR={fmt(result.gate_block_far)} "
          f"({result.n_genuine} genuine / {result.n_impostor} impostor requests)")
    print(f"eeg holdout accuracy {result.eeg_report.accuracy:.4f}, "
          f"gait holdout accuracy {result.gait_report.accuracy:.4f}")
    print("reports:", ", ".join(str(p) for p in written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepkey",
        description="Dual-biometric (EEG + gait) authentication pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--subjects", type=int, default=7)
    g.add_argument("--sessions", type=int, default=3)
    g.add_argument("--seconds", type=float, default=60.0)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(fn=cmd_gen)

    t = sub.add_parser("train", help="train gate + identifiers into a bundle")
    t.add_argument("--data", required=True)
    t.add_argument("--config", default=None)
    t.add_argument("--out", required=True)
    t.add_argument("--exclude-subjects", default=None,
                   help="comma-separated subject ids left unenrolled")
    t.set_defaults(fn=cmd_train)

    a = sub.add_parser("auth", help="authenticate one EEG/gait recording pair")
    a.add_argument("--bundle", required=True)
    a.add_argument("--eeg", required=True)
    a.add_argument("--gait", required=True)
    a.add_argument("--log", default=None, help="append a JSON line per decision")
    a.set_defaults(fn=cmd_auth)

    e = sub.add_parser("eval", help="evaluate a bundle on a dataset")
    e.add_argument("--bundle", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--impostor-subjects", default=None)
    e.add_argument("--datasize-sweep", default=None,
                   help="comma-separated training percentages, e.g. 20,40,60,80,100")
    e.add_argument("--out", default="eval_out")
    e.set_defaults(fn=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DeepkeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
