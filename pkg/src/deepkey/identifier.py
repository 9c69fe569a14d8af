"""Per-modality subject identification: attention-RNN training, code bank, KNN."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .dsp import Modality, Sample
from .errors import ParameterError, TrainingError

HIDDEN = 64
DEFAULT_LR = 0.001
DEFAULT_L2 = 0.001
DEFAULT_ITER = 1000
DEFAULT_K = 3


@dataclass
class TrainConfig:
    hidden: int = HIDDEN
    lr: float = DEFAULT_LR
    l2: float = DEFAULT_L2
    n_iter: int = DEFAULT_ITER
    batch_size: int = 256  # 0 = full batch
    seed: int = 0


@dataclass
class IdentifierModel:
    params: nn.ModelParams
    modality: Modality
    n_classes: int
    hidden: int = HIDDEN


@dataclass
class CodeBank:
    codes: np.ndarray   # [n, hidden], the weighted codes of the training samples
    labels: np.ndarray  # [n] subject ids in 0..K-1


@dataclass
class TrainResult:
    model: IdentifierModel
    bank: CodeBank
    loss_history: list[float] = field(default_factory=list)


def _stack(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([s.data for s in samples]).astype(np.float64)
    y = np.array([s.subject_id for s in samples], dtype=np.int64)
    if np.any(y < 0):
        raise ParameterError("every training sample needs a subject_id")
    return X, y


def extract_codes(model: IdentifierModel, X: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Weighted codes C_att for a batch [n, T, D]; chunked to bound memory."""
    out = []
    for start in range(0, X.shape[0], chunk):
        _, state = nn.forward(model.params, X[start:start + chunk])
        out.append(state.C_att)
    return np.concatenate(out, axis=0)


def train_identifier(samples: list[Sample], config: TrainConfig | None = None,
                     n_classes: int | None = None) -> TrainResult:
    """Train the attention-RNN on labeled samples and fill the code bank."""
    config = config or TrainConfig()
    if len(samples) < 4:
        raise TrainingError("need at least 2 subjects with at least 2 samples each")
    X, y = _stack(samples)
    classes = np.unique(y)
    if classes.size < 2:
        raise TrainingError("training data contains a single class")
    K = n_classes if n_classes is not None else int(classes.max()) + 1
    counts = np.bincount(y, minlength=K)
    if np.any(counts[classes] < 2):
        raise TrainingError("every subject needs at least 2 samples")
    Y = np.eye(K)[y]

    rng = np.random.default_rng(config.seed)
    params = nn.init_params(X.shape[2], config.hidden, K, rng)
    named = params.named()
    adam = nn.AdamState.init(named)

    n = X.shape[0]
    bs = config.batch_size if config.batch_size and config.batch_size < n else n
    order = rng.permutation(n)
    pos = 0
    history = []
    for _ in range(config.n_iter):
        if bs == n:
            idx = slice(None)
        else:
            if pos + bs > n:
                order = rng.permutation(n)
                pos = 0
            idx = order[pos:pos + bs]
            pos += bs
        logits, state = nn.forward(params, X[idx])
        history.append(nn.loss(logits, Y[idx], config.l2, params))
        grads = nn.backward(params, state, Y[idx], config.l2)
        nn.adam_step(named, grads, config.lr, adam)

    model = IdentifierModel(params=params, modality=samples[0].modality,
                            n_classes=K, hidden=config.hidden)
    bank = CodeBank(codes=extract_codes(model, X), labels=y)
    return TrainResult(model=model, bank=bank, loss_history=history)


# ---------------------------------------------------------------------------
# KNN on learned codes
# ---------------------------------------------------------------------------

def _neighbors(bank: CodeBank, code: np.ndarray, k: int,
               metric: str = "euclidean") -> tuple[np.ndarray, np.ndarray]:
    if k <= 0:
        raise ParameterError("k must be positive")
    if bank.codes.shape[0] == 0:
        raise ParameterError("empty code bank")
    if k > bank.codes.shape[0]:
        raise ParameterError("k exceeds the number of stored codes")
    diff = bank.codes - code
    if metric == "euclidean":
        d = np.linalg.norm(diff, axis=1)
    elif metric == "manhattan":
        d = np.abs(diff).sum(axis=1)
    else:
        raise ParameterError(f"unknown KNN metric {metric!r}")
    # stable sort keyed by (distance, index) for deterministic neighbor choice
    return np.argsort(d, kind="stable")[:k], d


def knn_predict(bank: CodeBank, code: np.ndarray, k: int = DEFAULT_K,
                metric: str = "euclidean") -> int:
    """Majority label among the k nearest codes.

    Vote ties break by smallest summed distance, then by smallest label.
    """
    idx, d = _neighbors(bank, code, k, metric)
    labels = bank.labels[idx]
    dist = d[idx]
    best = None
    for lab in np.unique(labels):
        mask = labels == lab
        key = (-int(mask.sum()), float(dist[mask].sum()), int(lab))
        if best is None or key < best:
            best = key
    return best[2]


def knn_vote_fractions(bank: CodeBank, code: np.ndarray, k: int, n_classes: int) -> np.ndarray:
    """Fraction of the k nearest neighbors voting for each class (ROC score)."""
    idx, _ = _neighbors(bank, code, k)
    return np.bincount(bank.labels[idx], minlength=n_classes) / k


def identify(model: IdentifierModel, bank: CodeBank, sample: Sample,
             k: int = DEFAULT_K, metric: str = "euclidean") -> int:
    """encode -> attention -> weighted code -> KNN; pure function of the inputs."""
    _, state = nn.forward(model.params, sample.data)
    return knn_predict(bank, state.C_att[0], k, metric)
