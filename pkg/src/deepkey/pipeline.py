"""End-to-end authentication: gatekeeper -> parallel EEG/gait identification -> fusion.

A request is approved only when the invalid-ID gate passes and the EEG-derived
and gait-derived identities coincide.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import dsp, gatekeeper, identifier, modelio, nn
from .config import Config
from .dsp import Modality, Recording
from .errors import ConfigError, ParameterError, RequestError
from .metrics import StageTimer

_METRICS = ("euclidean", "manhattan")


class Verdict(str, Enum):
    APPROVE = "approve"
    DENY = "deny"


class Reason(str, Enum):
    APPROVED = "approved"
    IMPOSTOR_FILTERED = "impostor_filtered"
    ID_MISMATCH = "id_mismatch"


@dataclass(frozen=True)
class AuthRequest:
    eeg: Recording
    gait: Recording
    claimed_id: int | None = None


@dataclass(frozen=True)
class AuthDecision:
    verdict: Verdict
    reason: Reason
    e_id: int | None
    g_id: int | None
    stage_timings: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.APPROVE:
            assert self.reason is Reason.APPROVED and self.e_id == self.g_id
        if self.reason is Reason.IMPOSTOR_FILTERED:
            assert self.e_id is None and self.g_id is None


def _majority(ids: list[int]) -> int:
    counts = np.bincount(np.asarray(ids, dtype=np.int64))
    return int(np.argmax(counts))  # ties break toward the smallest id


@dataclass
class DeepkeySystem:
    """Trained bundle: gate + both identifiers + code banks + preprocessing."""

    gate: gatekeeper.GateModel
    eeg_model: identifier.IdentifierModel
    eeg_bank: identifier.CodeBank
    gait_model: identifier.IdentifierModel
    gait_bank: identifier.CodeBank
    enrolled: np.ndarray  # subject ids, index = class label
    config: Config

    @property
    def delta_filter(self) -> dsp.FilterCoefficients:
        return dsp.design_bandpass(self.config.filter_order, self.config.band_low,
                                   self.config.band_high, dsp.EEG_RATE)

    def gate_check(self, eeg: Recording) -> bool:
        """True when the first gate block looks genuine."""
        rec = dsp.apply_filter(self.delta_filter, eeg) if self.config.gate_input_filtered else eeg
        block = rec.data[:self.config.gate_block]
        verdict, _ = gatekeeper.filter_block(self.gate, block)
        return verdict == "genuine"

    def _identify_windows(self, rec: Recording, model: identifier.IdentifierModel,
                          bank: identifier.CodeBank) -> int:
        samples = dsp.segment(rec, self.config.window)
        X = np.stack([s.data for s in samples])
        codes = identifier.extract_codes(model, X)
        ids = [identifier.knn_predict(bank, c, self.config.knn_k, self.config.knn_metric)
               for c in codes]
        return int(self.enrolled[_majority(ids)])

    def identify_eeg(self, eeg: Recording) -> int:
        return self._identify_windows(dsp.apply_filter(self.delta_filter, eeg),
                                      self.eeg_model, self.eeg_bank)

    def identify_gait(self, gait: Recording) -> int:
        return self._identify_windows(gait, self.gait_model, self.gait_bank)


def authenticate(req: AuthRequest, system) -> AuthDecision:
    """Gate on the first EEG block, then consistency-check the two identities."""
    cfg = system.config
    if req.eeg.modality is not Modality.EEG or req.gait.modality is not Modality.GAIT:
        raise RequestError("request modalities are swapped or wrong")
    if req.eeg.n_instances < max(cfg.gate_block, cfg.window):
        raise RequestError(
            f"EEG recording too short: {req.eeg.n_instances} < {cfg.gate_block} instances")
    if req.gait.n_instances < cfg.window:
        raise RequestError(
            f"gait recording too short: {req.gait.n_instances} < {cfg.window} instances")

    timer = StageTimer()
    with timer.time("gate"):
        genuine = system.gate_check(req.eeg)
    if not genuine:
        return AuthDecision(Verdict.DENY, Reason.IMPOSTOR_FILTERED, None, None,
                            timer.last())
    with timer.time("eeg_id"):
        e_id = system.identify_eeg(req.eeg)
    with timer.time("gait_id"):
        g_id = system.identify_gait(req.gait)
    if e_id == g_id:
        return AuthDecision(Verdict.APPROVE, Reason.APPROVED, e_id, g_id, timer.last())
    return AuthDecision(Verdict.DENY, Reason.ID_MISMATCH, e_id, g_id, timer.last())


def compose_frr(filter_frr: float, gait_acc: float, eeg_acc: float) -> float:
    """Overall FRR: gate rejection, then gait error, then EEG error on survivors."""
    for v in (filter_frr, gait_acc, eeg_acc):
        if not (0.0 <= v <= 1.0):
            raise ParameterError("compose_frr inputs must lie in [0, 1]")
    return filter_frr + (1.0 - filter_frr) * ((1.0 - gait_acc) + gait_acc * (1.0 - eeg_acc))


# ---------------------------------------------------------------------------
# System training
# ---------------------------------------------------------------------------

@dataclass
class TrainReport:
    eeg_holdout_accuracy: float
    gait_holdout_accuracy: float
    eeg_initial_loss: float
    eeg_final_loss: float
    gait_initial_loss: float
    gait_final_loss: float


def _labeled_samples(recs: list[Recording], label_of: dict[int, int],
                     window: int) -> list[dsp.Sample]:
    out = []
    for rec in recs:
        for s in dsp.segment(rec, window):
            out.append(dsp.Sample(data=s.data, modality=s.modality,
                                  subject_id=label_of[rec.subject_id]))
    return out


def _split(n: int, frac: float, rng: np.random.Generator):
    order = rng.permutation(n)
    cut = int(round(frac * n))
    return order[:cut], order[cut:]


def _train_modality(samples, cfg: Config, n_iter: int, seed: int, n_classes: int,
                    fraction: float = 1.0):
    tc = identifier.TrainConfig(hidden=cfg.hidden, lr=cfg.lr, l2=cfg.l2,
                                n_iter=n_iter, batch_size=cfg.batch_size, seed=seed)
    rng = np.random.default_rng(seed)
    train_idx, hold_idx = _split(len(samples), cfg.train_split, rng)
    if fraction < 1.0:  # datasize sweep: shrink the training side, keep the holdout
        train_idx = train_idx[:max(2, int(round(fraction * len(train_idx))))]
    train = [samples[i] for i in train_idx]
    hold = [samples[i] for i in hold_idx]
    result = identifier.train_identifier(train, tc, n_classes=n_classes)
    if hold:
        X = np.stack([s.data for s in hold])
        codes = identifier.extract_codes(result.model, X)
        preds = [identifier.knn_predict(result.bank, c, cfg.knn_k, cfg.knn_metric)
                 for c in codes]
        acc = float(np.mean([p == s.subject_id for p, s in zip(preds, hold)]))
    else:
        acc = float("nan")
    return result, acc


def train_system(recordings: list[Recording], config: Config | None = None
                 ) -> tuple[DeepkeySystem, TrainReport]:
    """Train gate + both identifiers on enrollment recordings (subject ids required)."""
    cfg = config or Config()
    eeg = [r for r in recordings if r.modality is Modality.EEG]
    gait = [r for r in recordings if r.modality is Modality.GAIT]
    subject_set = {r.subject_id for r in recordings}
    if None in subject_set:
        raise ConfigError("every enrollment recording needs a subject_id")
    subjects = sorted(subject_set)
    for s in subjects:
        if not any(r.subject_id == s for r in eeg):
            raise ConfigError(f"subject {s} has no EEG enrollment data")
        if not any(r.subject_id == s for r in gait):
            raise ConfigError(f"subject {s} has no gait enrollment data")
    label_of = {s: i for i, s in enumerate(subjects)}
    K = len(subjects)

    coeffs = dsp.design_bandpass(cfg.filter_order, cfg.band_low, cfg.band_high,
                                 dsp.EEG_RATE)
    # gatekeeper: raw (or filtered) EEG instances pooled over all enrolled subjects
    gate_src = [dsp.apply_filter(coeffs, r) if cfg.gate_input_filtered else r
                for r in eeg]
    instances = np.concatenate([r.data for r in gate_src], axis=0)
    rng = np.random.default_rng(cfg.seed)
    if instances.shape[0] > cfg.gate_max_train:
        idx = np.sort(rng.choice(instances.shape[0], cfg.gate_max_train, replace=False))
        instances = instances[idx]
    gate = gatekeeper.train_gate(instances, nu=cfg.nu,
                                 gamma=cfg.gamma if cfg.gamma > 0 else None)

    eeg_samples = _labeled_samples([dsp.apply_filter(coeffs, r) for r in eeg],
                                   label_of, cfg.window)
    gait_samples = _labeled_samples(gait, label_of, cfg.window)
    eeg_res, eeg_acc = _train_modality(eeg_samples, cfg, cfg.n_iter_eeg,
                                       cfg.seed + 1, K)
    gait_res, gait_acc = _train_modality(gait_samples, cfg, cfg.n_iter_gait,
                                         cfg.seed + 2, K)

    system = DeepkeySystem(gate=gate,
                           eeg_model=eeg_res.model, eeg_bank=eeg_res.bank,
                           gait_model=gait_res.model, gait_bank=gait_res.bank,
                           enrolled=np.array(subjects, dtype=np.int64), config=cfg)
    report = TrainReport(
        eeg_holdout_accuracy=eeg_acc, gait_holdout_accuracy=gait_acc,
        eeg_initial_loss=eeg_res.loss_history[0], eeg_final_loss=eeg_res.loss_history[-1],
        gait_initial_loss=gait_res.loss_history[0], gait_final_loss=gait_res.loss_history[-1])
    return system, report


# ---------------------------------------------------------------------------
# Bundle serialization (single binary container)
# ---------------------------------------------------------------------------

_CONFIG_FIELDS = [f for f in Config.__dataclass_fields__]


def _config_to_tensors(cfg: Config) -> dict[str, np.ndarray]:
    out = {}
    for name in _CONFIG_FIELDS:
        v = getattr(cfg, name)
        if name == "knn_metric":
            v = _METRICS.index(v)
        out[f"config/{name}"] = np.array(float(v))
    return out


def _config_from_tensors(t: dict[str, np.ndarray]) -> Config:
    values = {}
    for name, fld in Config.__dataclass_fields__.items():
        raw = float(t[f"config/{name}"])
        if name == "knn_metric":
            values[name] = _METRICS[int(raw)]
        elif fld.type == "int":
            values[name] = int(raw)
        elif fld.type == "bool":
            values[name] = bool(raw)
        else:
            values[name] = raw
    return Config(**values)


def _model_tensors(prefix: str, model: identifier.IdentifierModel,
                   bank: identifier.CodeBank) -> dict[str, np.ndarray]:
    out = {f"{prefix}/param/{k}": v for k, v in model.params.named().items()}
    out[f"{prefix}/bank/codes"] = bank.codes
    out[f"{prefix}/bank/labels"] = bank.labels.astype(np.float64)
    out[f"{prefix}/n_classes"] = np.array(float(model.n_classes))
    return out


def _model_from_tensors(prefix: str, t: dict[str, np.ndarray], modality: Modality,
                        hidden: int):
    plen = len(f"{prefix}/param/")
    named = {k[plen:]: t[k] for k in t if k.startswith(f"{prefix}/param/")}
    model = identifier.IdentifierModel(
        params=nn.ModelParams.from_named(named), modality=modality,
        n_classes=int(float(t[f"{prefix}/n_classes"])), hidden=hidden)
    bank = identifier.CodeBank(codes=t[f"{prefix}/bank/codes"],
                               labels=t[f"{prefix}/bank/labels"].astype(np.int64))
    return model, bank


def save_system(system: DeepkeySystem, path: str | Path) -> None:
    t: dict[str, np.ndarray] = {}
    t.update(_config_to_tensors(system.config))
    t["enrolled"] = system.enrolled.astype(np.float64)
    g = system.gate
    t["gate/support_vectors"] = g.support_vectors
    t["gate/alphas"] = g.alphas
    t["gate/rho"] = np.array(g.rho)
    t["gate/gamma"] = np.array(g.gamma)
    t["gate/nu"] = np.array(g.nu)
    t["gate/mean"] = g.mean
    t["gate/std"] = g.std
    t.update(_model_tensors("eeg", system.eeg_model, system.eeg_bank))
    t.update(_model_tensors("gait", system.gait_model, system.gait_bank))
    modelio.save_tensors(path, t)


def load_system(path: str | Path) -> DeepkeySystem:
    t = modelio.load_tensors(path)
    cfg = _config_from_tensors(t)
    gate = gatekeeper.GateModel(
        support_vectors=t["gate/support_vectors"], alphas=t["gate/alphas"],
        rho=float(t["gate/rho"]), gamma=float(t["gate/gamma"]),
        nu=float(t["gate/nu"]), mean=t["gate/mean"], std=t["gate/std"])
    eeg_model, eeg_bank = _model_from_tensors("eeg", t, Modality.EEG, cfg.hidden)
    gait_model, gait_bank = _model_from_tensors("gait", t, Modality.GAIT, cfg.hidden)
    return DeepkeySystem(gate=gate, eeg_model=eeg_model, eeg_bank=eeg_bank,
                         gait_model=gait_model, gait_bank=gait_bank,
                         enrolled=t["enrolled"].astype(np.int64), config=cfg)
