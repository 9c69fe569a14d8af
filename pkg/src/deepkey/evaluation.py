"""Evaluation harness: request construction, FAR/FRR runs, reports, datasize sweep."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsp, gatekeeper, identifier, metrics
from .config import Config
from .dsp import Modality, Recording
from .errors import ParameterError
from .pipeline import (AuthRequest, DeepkeySystem, Reason, Verdict, authenticate,
                       _labeled_samples, _train_modality)

DEFAULT_EEG_REQ = 400   # EEG instances per authentication request
DEFAULT_GAIT_REQ = 80   # gait instances per authentication request


def build_requests(eeg: Recording, gait: Recording,
                   eeg_len: int = DEFAULT_EEG_REQ,
                   gait_len: int = DEFAULT_GAIT_REQ) -> list[AuthRequest]:
    """Pair up consecutive chunks of the two recordings into requests."""
    n = min(eeg.n_instances // eeg_len, gait.n_instances // gait_len)
    out = []
    for i in range(n):
        e = Recording(data=eeg.data[i * eeg_len:(i + 1) * eeg_len],
                      sample_rate=eeg.sample_rate, modality=eeg.modality,
                      subject_id=eeg.subject_id)
        g = Recording(data=gait.data[i * gait_len:(i + 1) * gait_len],
                      sample_rate=gait.sample_rate, modality=gait.modality,
                      subject_id=gait.subject_id)
        out.append(AuthRequest(eeg=e, gait=g))
    return out


@dataclass
class EvalResult:
    far: float | None
    frr: float | None
    gate_block_far: float | None       # impostor blocks passing the gate
    n_genuine: int
    n_impostor: int
    eeg_report: metrics.ClassificationReport | None = None
    gait_report: metrics.ClassificationReport | None = None
    eeg_scores: np.ndarray | None = None   # [n_hold, K] KNN vote fractions
    eeg_true: np.ndarray | None = None
    gait_scores: np.ndarray | None = None
    gait_true: np.ndarray | None = None
    stage_stats: dict = field(default_factory=dict)
    decisions: list = field(default_factory=list)


def _pair_by_subject(recordings: list[Recording]) -> dict[int, tuple[Recording, Recording]]:
    """subject -> (concatenated EEG, concatenated gait)."""
    out = {}
    subjects = sorted({r.subject_id for r in recordings})
    for s in subjects:
        e = [r for r in recordings if r.subject_id == s and r.modality is Modality.EEG]
        g = [r for r in recordings if r.subject_id == s and r.modality is Modality.GAIT]
        if not e or not g:
            continue
        cat = lambda rs: Recording(
            data=np.concatenate([r.data for r in rs], axis=0),
            sample_rate=rs[0].sample_rate, modality=rs[0].modality, subject_id=s)
        out[s] = (cat(e), cat(g))
    return out


def evaluate_system(system: DeepkeySystem, recordings: list[Recording],
                    impostor_ids: list[int],
                    eeg_len: int = DEFAULT_EEG_REQ,
                    gait_len: int = DEFAULT_GAIT_REQ) -> EvalResult:
    """Run authentication over genuine and impostor requests and score the log."""
    enrolled = set(int(s) for s in system.enrolled)
    impostors = set(impostor_ids)
    if impostors & enrolled:
        raise ParameterError("impostor subjects overlap the enrolled set")
    timer = metrics.StageTimer()
    log: list[tuple[bool, bool]] = []
    decisions = []
    gate_pass_impostor = 0
    gate_blocks_impostor = 0
    for subject, (eeg, gait) in _pair_by_subject(recordings).items():
        is_genuine = subject in enrolled
        if not is_genuine and subject not in impostors:
            continue
        for req in build_requests(eeg, gait, eeg_len, gait_len):
            with timer.time("request"):
                dec = authenticate(req, system)
            accepted = (dec.verdict is Verdict.APPROVE
                        and (not is_genuine or dec.e_id == subject))
            log.append((is_genuine, accepted))
            decisions.append((subject, dec))
            if not is_genuine:
                gate_blocks_impostor += 1
                if dec.reason is not Reason.IMPOSTOR_FILTERED:
                    gate_pass_impostor += 1
    # accepted-impostor containment: every accepted request passed the gate
    for subject, dec in decisions:
        if dec.verdict is Verdict.APPROVE:
            assert dec.reason is Reason.APPROVED
    far, frr = metrics.far_frr(log)
    gate_far = (gate_pass_impostor / gate_blocks_impostor) if gate_blocks_impostor else None
    return EvalResult(far=far, frr=frr, gate_block_far=gate_far,
                      n_genuine=sum(1 for g, _ in log if g),
                      n_impostor=sum(1 for g, _ in log if not g),
                      stage_stats=timer.stats(), decisions=decisions)


def holdout_report(system: DeepkeySystem, recordings: list[Recording],
                   modality: Modality) -> tuple[metrics.ClassificationReport,
                                                np.ndarray, np.ndarray]:
    """Per-class report on the training holdout split (same split as training)."""
    cfg = system.config
    label_of = {int(s): i for i, s in enumerate(system.enrolled)}
    recs = [r for r in recordings
            if r.modality is modality and r.subject_id in label_of]
    if modality is Modality.EEG:
        recs = [dsp.apply_filter(system.delta_filter, r) for r in recs]
        model, bank, seed = system.eeg_model, system.eeg_bank, cfg.seed + 1
    else:
        model, bank, seed = system.gait_model, system.gait_bank, cfg.seed + 2
    samples = _labeled_samples(recs, label_of, cfg.window)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    cut = int(round(cfg.train_split * len(samples)))
    hold = [samples[i] for i in order[cut:]]
    X = np.stack([s.data for s in hold])
    codes = identifier.extract_codes(model, X)
    y_true = np.array([s.subject_id for s in hold])
    y_pred = np.array([identifier.knn_predict(bank, c, cfg.knn_k, cfg.knn_metric)
                       for c in codes])
    scores = np.stack([identifier.knn_vote_fractions(bank, c, cfg.knn_k, model.n_classes)
                       for c in codes])
    report = metrics.classification_report(y_true, y_pred, model.n_classes)
    return report, scores, y_true


def datasize_sweep(recordings: list[Recording], cfg: Config,
                   fractions: list[float]) -> list[tuple[float, float]]:
    """Retrain the EEG identifier at each training fraction; returns (fraction, accuracy)."""
    label_of = {s: i for i, s in
                enumerate(sorted({r.subject_id for r in recordings}))}
    coeffs = dsp.design_bandpass(cfg.filter_order, cfg.band_low, cfg.band_high,
                                 dsp.EEG_RATE)
    eeg = [dsp.apply_filter(coeffs, r) for r in recordings
           if r.modality is Modality.EEG]
    samples = _labeled_samples(eeg, label_of, cfg.window)
    out = []
    for frac in fractions:
        _, acc = _train_modality(samples, cfg, cfg.n_iter_eeg, cfg.seed + 1,
                                 len(label_of), fraction=frac)
        out.append((frac, acc))
    return out


# ---------------------------------------------------------------------------
# CSV report emission
# ---------------------------------------------------------------------------

def write_reports(result: EvalResult, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def w(name: str, lines: list[str]):
        p = out_dir / name
        p.write_text("\n".join(lines) + "\n")
        written.append(p)

    for label, rep in (("eeg", result.eeg_report), ("gait", result.gait_report)):
        if rep is None:
            continue
        lines = ["class,precision,recall,f1,support"]
        for k in range(len(rep.support)):
            lines.append(f"{k},{rep.precision[k]:.6f},{rep.recall[k]:.6f},"
                         f"{rep.f1[k]:.6f},{rep.support[k]}")
        lines.append(f"macro,{rep.macro_precision:.6f},{rep.macro_recall:.6f},"
                     f"{rep.macro_f1:.6f},{int(rep.support.sum())}")
        lines.append(f"accuracy,{rep.accuracy:.6f},,,")
        w(f"report_{label}.csv", lines)

    fmt = lambda v: "undefined" if v is None else f"{v:.6f}"
    w("summary.csv", [
        "metric,value",
        f"far,{fmt(result.far)}",
        f"frr,{fmt(result.frr)}",
        f"gate_block_far,{fmt(result.gate_block_far)}",
        f"n_genuine,{result.n_genuine}",
        f"n_impostor,{result.n_impostor}",
    ])

    # one-vs-rest ROC points over KNN vote fractions
    for label, scores, true in (("eeg", result.eeg_scores, result.eeg_true),
                                ("gait", result.gait_scores, result.gait_true)):
        if scores is None:
            continue
        lines = ["class,fpr,tpr,auc"]
        for k in range(scores.shape[1]):
            labels01 = (true == k).astype(int)
            if labels01.sum() in (0, len(labels01)):
                continue
            auc = metrics.roc_auc(scores[:, k], labels01)
            for fpr, tpr in metrics.roc_points(scores[:, k], labels01):
                lines.append(f"{k},{fpr:.6f},{tpr:.6f},{auc:.6f}")
        w(f"roc_{label}.csv", lines)
    return written
