"""Invalid-ID gatekeeper: nu-formulation one-class SVM with RBF kernel.

Trained only on genuine EEG instance vectors; the dual is solved by a
two-coordinate SMO with maximal-violating-pair selection (no external QP
dependency, fully deterministic).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TrainingError

DEFAULT_NU = 0.15
KKT_TOL = 1e-4


@dataclass
class GateModel:
    support_vectors: np.ndarray  # [n_sv, D], standardized coordinates
    alphas: np.ndarray           # [n_sv], sum to 1
    rho: float
    gamma: float
    nu: float
    mean: np.ndarray             # per-channel training mean
    std: np.ndarray              # per-channel training std

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


def _rbf(x: np.ndarray, y: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix exp(-gamma * ||x_i - y_j||^2), shapes [n, D] x [m, D] -> [n, m]."""
    sq = (np.sum(x * x, axis=1)[:, None] + np.sum(y * y, axis=1)[None, :]
          - 2.0 * x @ y.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def train_gate(genuine_instances: np.ndarray, nu: float = DEFAULT_NU,
               gamma: float | None = None, tol: float = KKT_TOL,
               max_iter: int | None = None) -> GateModel:
    """Fit the nu-one-class SVM on genuine instance vectors [n, D]."""
    X = np.asarray(genuine_instances, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 10:
        raise ParameterError("need a [n>=10, D] matrix of genuine instances")
    if not (0.0 < nu < 1.0):
        raise ParameterError("nu must lie in (0, 1)")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    if np.any(std < 1e-12):
        raise TrainingError("degenerate training data: a channel has zero variance")
    Xs = (X - mean) / std
    n = Xs.shape[0]
    if gamma is None:
        gamma = 1.0 / (Xs.shape[1] * Xs.var())
    if gamma <= 0:
        raise ParameterError("gamma must be positive")

    Q = _rbf(Xs, Xs, gamma)
    C = 1.0 / (nu * n)
    alpha = np.zeros(n)
    k = int(np.floor(nu * n))
    alpha[:k] = C
    if k < n:
        alpha[k] = 1.0 - k * C
    g = Q @ alpha  # gradient of the dual objective 0.5 a'Qa

    if max_iter is None:
        max_iter = 100_000 * max(1, n // 100)
    eps = 1e-12
    for _ in range(max_iter):
        up = alpha < C - eps      # can increase
        down = alpha > eps        # can decrease
        gi = np.where(up, g, np.inf)
        gj = np.where(down, g, -np.inf)
        i = int(np.argmin(gi))
        j = int(np.argmax(gj))
        if g[j] - g[i] <= tol:
            break
        eta = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        if eta > 1e-12:
            delta = (g[j] - g[i]) / eta
        else:
            delta = np.inf
        delta = min(delta, C - alpha[i], alpha[j])
        alpha[i] += delta
        alpha[j] -= delta
        g += delta * (Q[:, i] - Q[:, j])

    free = (alpha > eps) & (alpha < C - eps)
    if np.any(free):
        rho = float(g[free].mean())
    else:
        lo = g[alpha < C - eps]
        hi = g[alpha > eps]
        rho = float((lo.min() + hi.max()) / 2.0)

    sv = alpha > eps
    return GateModel(support_vectors=Xs[sv].copy(), alphas=alpha[sv].copy(),
                     rho=rho, gamma=float(gamma), nu=nu, mean=mean, std=std)


def decision_value(m: GateModel, x: np.ndarray) -> float:
    """Positive => genuine-like, negative => outlier."""
    xs = np.atleast_2d(m.standardize(x))
    k = _rbf(xs, m.support_vectors, m.gamma)
    return float((k @ m.alphas)[0] - m.rho)


def decision_values(m: GateModel, X: np.ndarray) -> np.ndarray:
    xs = m.standardize(np.atleast_2d(X))
    return _rbf(xs, m.support_vectors, m.gamma) @ m.alphas - m.rho


def filter_block(m: GateModel, block: np.ndarray) -> tuple[str, float]:
    """Mean-of-signs vote over the rows of a [block, D] chunk; ties fail closed."""
    vals = decision_values(m, block)
    score = float(np.mean(np.sign(vals)))
    verdict = "genuine" if score > 0.0 else "impostor"
    return verdict, score
