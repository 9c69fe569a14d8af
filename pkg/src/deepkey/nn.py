"""Deterministic neural-network kernel: dense layers, LSTM, attention, analytic BPTT, Adam.

Everything is float64 numpy. Parameters live in small dataclasses; ``ModelParams.named()``
exposes them as an ordered name -> array mapping shared by the optimizer, the gradient
check and the binary serializer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit as sigmoid

from .errors import NumericError, ParameterError

GATES = ("o", "f", "i", "m")  # output, forget, input, input-modulation


@dataclass
class DenseParams:
    W: np.ndarray  # [in, out]
    b: np.ndarray  # [out]


@dataclass
class LstmParams:
    """Per-gate input weights, recurrent weights and biases."""

    w_x: dict[str, np.ndarray]  # gate -> [in, hidden]
    w_h: dict[str, np.ndarray]  # gate -> [hidden, hidden]
    b: dict[str, np.ndarray]    # gate -> [hidden]

    @property
    def hidden(self) -> int:
        return self.w_h["o"].shape[0]

    def _cat(self):
        wx = np.concatenate([self.w_x[g] for g in GATES], axis=1)
        wh = np.concatenate([self.w_h[g] for g in GATES], axis=1)
        b = np.concatenate([self.b[g] for g in GATES])
        return wx, wh, b


# The attention-weight map is realized as a second LSTM with the encoder's hidden size.
AttentionParams = LstmParams


@dataclass
class ModelParams:
    """All trainable tensors of the attention-based encoder-decoder network."""

    dense1: DenseParams
    dense2: DenseParams
    encoder: LstmParams
    attention: AttentionParams
    decoder: DenseParams

    def named(self) -> dict[str, np.ndarray]:
        """Ordered name -> array view of every parameter tensor (shared storage)."""
        out: dict[str, np.ndarray] = {
            "dense1.W": self.dense1.W, "dense1.b": self.dense1.b,
            "dense2.W": self.dense2.W, "dense2.b": self.dense2.b,
        }
        for prefix, p in (("encoder", self.encoder), ("attention", self.attention)):
            for g in GATES:
                out[f"{prefix}.wx_{g}"] = p.w_x[g]
                out[f"{prefix}.wh_{g}"] = p.w_h[g]
                out[f"{prefix}.b_{g}"] = p.b[g]
        out["decoder.W"] = self.decoder.W
        out["decoder.b"] = self.decoder.b
        return out

    def weight_matrix_names(self) -> list[str]:
        """Names of the tensors the l2 penalty applies to (biases excluded)."""
        return [k for k in self.named() if not k.split(".")[1].startswith("b")]

    @classmethod
    def from_named(cls, named: dict[str, np.ndarray]) -> "ModelParams":
        def lstm(prefix):
            return LstmParams(
                w_x={g: named[f"{prefix}.wx_{g}"] for g in GATES},
                w_h={g: named[f"{prefix}.wh_{g}"] for g in GATES},
                b={g: named[f"{prefix}.b_{g}"] for g in GATES},
            )
        return cls(
            dense1=DenseParams(named["dense1.W"], named["dense1.b"]),
            dense2=DenseParams(named["dense2.W"], named["dense2.b"]),
            encoder=lstm("encoder"),
            attention=lstm("attention"),
            decoder=DenseParams(named["decoder.W"], named["decoder.b"]),
        )


def init_params(d_in: int, hidden: int, n_classes: int, rng: np.random.Generator) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    def mat(fan_in, fan_out):
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=(fan_in, fan_out))

    def dense(fan_in, fan_out):
        return DenseParams(W=mat(fan_in, fan_out), b=np.zeros(fan_out))

    def lstm(fan_in, h):
        return LstmParams(
            w_x={g: mat(fan_in, h) for g in GATES},
            w_h={g: mat(h, h) for g in GATES},
            b={g: np.zeros(h) for g in GATES},
        )

    return ModelParams(
        dense1=dense(d_in, hidden),
        dense2=dense(hidden, hidden),
        encoder=lstm(hidden, hidden),
        attention=lstm(hidden, hidden),
        decoder=dense(hidden, n_classes),
    )


# ---------------------------------------------------------------------------
# Elementary forward operations
# ---------------------------------------------------------------------------

def dense_forward(x: np.ndarray, p: DenseParams) -> np.ndarray:
    """Affine map applied row-wise: x W + b."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != p.W.shape[0]:
        raise ParameterError(
            f"dense input width {x.shape[-1]} does not match W rows {p.W.shape[0]}")
    return x @ p.W + p.b


def tanh_layer(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def lstm_step(x_t, h_prev, c_prev, p: LstmParams):
    """One LSTM cell update; accepts vectors or [B, ...] batches."""
    x_t = np.atleast_2d(np.asarray(x_t, dtype=np.float64))
    h_prev = np.atleast_2d(np.asarray(h_prev, dtype=np.float64))
    c_prev = np.atleast_2d(np.asarray(c_prev, dtype=np.float64))
    wx, wh, b = p._cat()
    z = x_t @ wx + h_prev @ wh + b
    h = p.hidden
    o = sigmoid(z[:, 0 * h:1 * h])
    f = sigmoid(z[:, 1 * h:2 * h])
    i = sigmoid(z[:, 2 * h:3 * h])
    m = np.tanh(z[:, 3 * h:4 * h])
    c_t = f * c_prev + i * m
    if not np.all(np.isfinite(c_t)):
        raise NumericError("non-finite LSTM cell state c_t")
    h_t = o * np.tanh(c_t)
    if h_t.shape[0] == 1:
        return h_t[0], c_t[0]
    return h_t, c_t


def _lstm_forward(xs: np.ndarray, p: LstmParams):
    """Run the LSTM over xs [B, T, in]; returns final hidden state and step caches."""
    B, T, _ = xs.shape
    hdim = p.hidden
    wx, wh, b = p._cat()
    h = np.zeros((B, hdim))
    c = np.zeros((B, hdim))
    cache = []
    for t in range(T):
        x_t = xs[:, t, :]
        z = x_t @ wx + h @ wh + b
        o = sigmoid(z[:, 0 * hdim:1 * hdim])
        f = sigmoid(z[:, 1 * hdim:2 * hdim])
        i = sigmoid(z[:, 2 * hdim:3 * hdim])
        m = np.tanh(z[:, 3 * hdim:4 * hdim])
        c_new = f * c + i * m
        tc = np.tanh(c_new)
        h_new = o * tc
        cache.append((x_t, h, c, o, f, i, m, tc))
        h, c = h_new, c_new
    if not np.all(np.isfinite(h)):
        raise NumericError("non-finite LSTM hidden output")
    return h, cache


def _lstm_backward(p: LstmParams, cache, dh_last: np.ndarray, lam: float):
    """BPTT through one LSTM; returns (dx [B,T,in], per-tensor grads)."""
    wx, wh, _ = p._cat()
    hdim = p.hidden
    T = len(cache)
    B = dh_last.shape[0]
    d_in = cache[0][0].shape[1]
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * hdim)
    dx = np.zeros((B, T, d_in))
    dh = dh_last
    dc = np.zeros_like(dh_last)
    for t in reversed(range(T)):
        x_t, h_prev, c_prev, o, f, i, m, tc = cache[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        df = dc * c_prev
        di = dc * m
        dm = dc * i
        a = np.concatenate([
            do * o * (1.0 - o),
            df * f * (1.0 - f),
            di * i * (1.0 - i),
            dm * (1.0 - m * m),
        ], axis=1)
        dwx += x_t.T @ a
        dwh += h_prev.T @ a
        db += a.sum(axis=0)
        dx[:, t, :] = a @ wx.T
        dh = a @ wh.T
        dc = dc * f
    grads = {}
    for gi, g in enumerate(GATES):
        sl = slice(gi * hdim, (gi + 1) * hdim)
        grads[f"wx_{g}"] = dwx[:, sl] + 2.0 * lam * p.w_x[g]
        grads[f"wh_{g}"] = dwh[:, sl] + 2.0 * lam * p.w_h[g]
        grads[f"b_{g}"] = db[sl]
    return dx, grads


# ---------------------------------------------------------------------------
# Full model forward / backward
# ---------------------------------------------------------------------------

@dataclass
class NetState:
    """Per-call caches populated by forward(); consumed by backward()."""

    x: np.ndarray            # [B, T, D] input
    a1: np.ndarray           # [B, T, H] first tanh-dense output
    a2: np.ndarray           # [B, T, H] second tanh-dense output
    enc_cache: list = field(default_factory=list)
    att_cache: list = field(default_factory=list)
    C: np.ndarray | None = None        # [B, H] encoder final hidden (the code)
    scores: np.ndarray | None = None   # [B, H] unnormalized attention weights
    W_att: np.ndarray | None = None    # [B, H] softmax-normalized weights
    C_att: np.ndarray | None = None    # [B, H] weighted code
    logits: np.ndarray | None = None   # [B, K]


def encode(x: np.ndarray, params: ModelParams) -> tuple[np.ndarray, NetState]:
    """Dense stack + encoder LSTM; returns the code C = h_T and the state."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None, :, :]
    a1 = np.tanh(dense_forward(x, params.dense1))
    a2 = np.tanh(dense_forward(a1, params.dense2))
    C, enc_cache = _lstm_forward(a2, params.encoder)
    state = NetState(x=x, a1=a1, a2=a2, enc_cache=enc_cache, C=C)
    return (C[0] if single else C), state


def attention_weights(state: NetState, att: AttentionParams) -> np.ndarray:
    """Softmax-normalized attention weights from the attention LSTM's final hidden state."""
    scores, att_cache = _lstm_forward(state.a2, att)
    state.scores = scores
    state.att_cache = att_cache
    state.W_att = softmax(scores, axis=1)
    return state.W_att


def weighted_code(C: np.ndarray, W_att: np.ndarray) -> np.ndarray:
    return C * W_att


def decode(C_att: np.ndarray, out_layer: DenseParams) -> np.ndarray:
    return dense_forward(C_att, out_layer)


def forward(params: ModelParams, x: np.ndarray) -> tuple[np.ndarray, NetState]:
    """Full pass: dense stack -> encoder LSTM -> attention -> weighted code -> logits.

    x may be one sample [T, D] or a batch [B, T, D]; logits are returned with a
    batch axis, state always carries batched caches.
    """
    _, state = encode(x, params)
    attention_weights(state, params.attention)
    state.C_att = weighted_code(state.C, state.W_att)
    state.logits = decode(state.C_att, params.decoder)
    if not np.all(np.isfinite(state.logits)):
        raise NumericError("non-finite logits")
    return state.logits, state


def l2_penalty(params: ModelParams, lam: float) -> float:
    named = params.named()
    return lam * sum(float(np.sum(named[k] ** 2)) for k in params.weight_matrix_names())


def loss(logits: np.ndarray, y_onehot: np.ndarray, lam: float, params: ModelParams) -> float:
    """Softmax cross-entropy summed over the batch plus l2 penalty on every weight matrix."""
    logits = np.atleast_2d(logits)
    y = np.atleast_2d(y_onehot)
    if logits.shape != y.shape:
        raise ParameterError(f"logits {logits.shape} vs targets {y.shape}")
    z = logits - np.max(logits, axis=1, keepdims=True)
    log_norm = np.log(np.sum(np.exp(z), axis=1))
    ce = float(np.sum(log_norm - np.sum(z * y, axis=1)))
    return ce + l2_penalty(params, lam)


def backward(params: ModelParams, state: NetState, y_onehot: np.ndarray,
             lam: float) -> dict[str, np.ndarray]:
    """Analytic gradients of loss() w.r.t. every parameter tensor."""
    y = np.atleast_2d(y_onehot)
    probs = softmax(state.logits, axis=1)
    dlogits = probs - y

    grads: dict[str, np.ndarray] = {}
    grads["decoder.W"] = state.C_att.T @ dlogits + 2.0 * lam * params.decoder.W
    grads["decoder.b"] = dlogits.sum(axis=0)

    dC_att = dlogits @ params.decoder.W.T
    dC = dC_att * state.W_att
    dW_att = dC_att * state.C
    # softmax Jacobian, row-wise
    dscores = state.W_att * (dW_att - np.sum(dW_att * state.W_att, axis=1, keepdims=True))

    dx_enc, enc_grads = _lstm_backward(params.encoder, state.enc_cache, dC, lam)
    dx_att, att_grads = _lstm_backward(params.attention, state.att_cache, dscores, lam)
    for k, v in enc_grads.items():
        grads[f"encoder.{k}"] = v
    for k, v in att_grads.items():
        grads[f"attention.{k}"] = v

    da2 = dx_enc + dx_att
    dz2 = da2 * (1.0 - state.a2 ** 2)
    H = state.a2.shape[2]
    D = state.x.shape[2]
    grads["dense2.W"] = (state.a1.reshape(-1, H).T @ dz2.reshape(-1, H)
                         + 2.0 * lam * params.dense2.W)
    grads["dense2.b"] = dz2.sum(axis=(0, 1))
    da1 = dz2 @ params.dense2.W.T
    dz1 = da1 * (1.0 - state.a1 ** 2)
    grads["dense1.W"] = (state.x.reshape(-1, D).T @ dz1.reshape(-1, H)
                         + 2.0 * lam * params.dense1.W)
    grads["dense1.b"] = dz1.sum(axis=(0, 1))

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for tensor {name}")
    return grads


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, named: dict[str, np.ndarray]) -> "AdamState":
        return cls(m={k: np.zeros_like(a) for k, a in named.items()},
                   v={k: np.zeros_like(a) for k, a in named.items()})


def adam_step(named: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              lr: float, st: AdamState) -> AdamState:
    """Standard Adam with bias correction; updates tensors in place."""
    st.t += 1
    b1, b2 = st.beta1, st.beta2
    c1 = 1.0 - b1 ** st.t
    c2 = 1.0 - b2 ** st.t
    for k, p in named.items():
        g = grads[k]
        st.m[k] = b1 * st.m[k] + (1.0 - b1) * g
        st.v[k] = b2 * st.v[k] + (1.0 - b2) * g * g
        m_hat = st.m[k] / c1
        v_hat = st.v[k] / c2
        p -= lr * m_hat / (np.sqrt(v_hat) + st.eps)
    return st
