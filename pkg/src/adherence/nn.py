"""Small sequence-regression network built on numpy.

The package trains recurrent regressors on occupancy contexts and on raw
entry sequences, so this module implements the pieces directly: a batched
LSTM with hand-written backpropagation through time, an optional backward
direction, mean or last-step pooling, an affine head producing one scalar
per sequence, mean squared error, and Adam.  Everything is float64 and all
randomness flows through an explicit numpy Generator.

Gate order inside the stacked weight matrices is input, forget, cell, output.
The forget-gate bias starts at one.
"""

from __future__ import annotations

import numpy as np

GATE_ORDER = "ifgo"


def sigmoid(x: np.ndarray) -> np.ndarray:
    # evaluated piecewise so large negative inputs do not overflow exp
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_lstm_params(rng: np.random.Generator, input_dim: int, hidden: int,
                     prefix: str) -> dict:
    """Uniform(-1/sqrt(hidden)) init; forget bias raised to 1."""
    k = 1.0 / np.sqrt(hidden)
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    return {
        f"{prefix}_W": rng.uniform(-k, k, size=(input_dim, 4 * hidden)),
        f"{prefix}_U": rng.uniform(-k, k, size=(hidden, 4 * hidden)),
        f"{prefix}_b": b,
    }


def lstm_forward(X: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray):
    """Run the cell over a (B, T, D) batch.  Returns (B, T, H) states + cache."""
    B, T, D = X.shape
    H = U.shape[0]
    XW = X.reshape(B * T, D) @ W
    XW = XW.reshape(B, T, 4 * H)
    hs = np.zeros((B, T, H))
    i_g = np.zeros((B, T, H))
    f_g = np.zeros((B, T, H))
    g_g = np.zeros((B, T, H))
    o_g = np.zeros((B, T, H))
    cs = np.zeros((B, T, H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        z = XW[:, t] + h @ U + b
        i = sigmoid(z[:, 0:H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:4 * H])
        c = f * c + i * g
        h = o * np.tanh(c)
        i_g[:, t], f_g[:, t], g_g[:, t], o_g[:, t] = i, f, g, o
        cs[:, t] = c
        hs[:, t] = h
    cache = (X, i_g, f_g, g_g, o_g, cs, hs, U)
    return hs, cache


def lstm_backward(dhs: np.ndarray, cache) -> tuple:
    """Gradients of the cell parameters given d(loss)/d(hidden states)."""
    X, i_g, f_g, g_g, o_g, cs, hs, U = cache
    B, T, D = X.shape
    H = U.shape[0]
    dXW = np.zeros((B, T, 4 * H))
    dU = np.zeros_like(U)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i, f, g, o = i_g[:, t], f_g[:, t], g_g[:, t], o_g[:, t]
        c = cs[:, t]
        c_prev = cs[:, t - 1] if t > 0 else np.zeros((B, H))
        h_prev = hs[:, t - 1] if t > 0 else np.zeros((B, H))
        dh = dhs[:, t] + dh_next
        tc = np.tanh(c)
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        dXW[:, t] = dz
        dU += h_prev.T @ dz
        dh_next = dz @ U.T
    dW = X.reshape(B * T, D).T @ dXW.reshape(B * T, 4 * H)
    db = dXW.sum(axis=(0, 1))
    return dW, dU, db


class SequenceRegressor:
    """LSTM (optionally bidirectional) + pooling + affine head -> one scalar.

    ``pooling`` is "mean" (average the per-step states) or "last".
    """

    def __init__(self, input_dim: int, hidden: int = 64, bidirectional: bool = True,
                 pooling: str = "mean", seed: int = 0):
        if pooling not in ("mean", "last"):
            raise ValueError(f"unknown pooling {pooling!r}")
        self.input_dim = input_dim
        self.hidden = hidden
        self.bidirectional = bidirectional
        self.pooling = pooling
        rng = np.random.default_rng(seed)
        self.params = init_lstm_params(rng, input_dim, hidden, "fw")
        feat = hidden
        if bidirectional:
            self.params.update(init_lstm_params(rng, input_dim, hidden, "bw"))
            feat = 2 * hidden
        k = 1.0 / np.sqrt(feat)
        self.params["head_w"] = rng.uniform(-k, k, size=feat)
        self.params["head_b"] = np.zeros(1)

    def _features(self, X: np.ndarray):
        p = self.params
        hs_f, cache_f = lstm_forward(X, p["fw_W"], p["fw_U"], p["fw_b"])
        if self.bidirectional:
            hs_b_rev, cache_b = lstm_forward(X[:, ::-1], p["bw_W"], p["bw_U"], p["bw_b"])
            hs = np.concatenate([hs_f, hs_b_rev[:, ::-1]], axis=2)
        else:
            cache_b = None
            hs = hs_f
        if self.pooling == "mean":
            pooled = hs.mean(axis=1)
        else:
            pooled = hs[:, -1]
        return pooled, (cache_f, cache_b, X.shape[1])

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Scalar prediction per sequence; X is (B, T, input_dim)."""
        pooled, _ = self._features(np.asarray(X, dtype=np.float64))
        return pooled @ self.params["head_w"] + self.params["head_b"][0]

    def loss_and_gradients(self, X: np.ndarray, y: np.ndarray) -> tuple:
        """Mean squared error and its gradient for every parameter."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        B, T, _ = X.shape
        p = self.params
        pooled, (cache_f, cache_b, _) = self._features(X)
        pred = pooled @ p["head_w"] + p["head_b"][0]
        err = pred - y
        loss = float(np.mean(err * err))
        dpred = 2.0 * err / B
        grads = {
            "head_w": pooled.T @ dpred,
            "head_b": np.array([dpred.sum()]),
        }
        dpooled = np.outer(dpred, p["head_w"])
        H = self.hidden
        if self.pooling == "mean":
            dhs = np.repeat(dpooled[:, None, :], T, axis=1) / T
        else:
            dhs = np.zeros((B, T, dpooled.shape[1]))
            dhs[:, -1] = dpooled
        dW, dU, db = lstm_backward(np.ascontiguousarray(dhs[:, :, :H]), cache_f)
        grads["fw_W"], grads["fw_U"], grads["fw_b"] = dW, dU, db
        if self.bidirectional:
            dhs_b = np.ascontiguousarray(dhs[:, ::-1, H:])
            dW, dU, db = lstm_backward(dhs_b, cache_b)
            grads["bw_W"], grads["bw_U"], grads["bw_b"] = dW, dU, db
        return loss, grads


class Adam:
    """Standard Adam with bias correction, keyed by parameter name."""

    def __init__(self, params: dict, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for key, g in grads.items():
            self.m[key] = b1 * self.m[key] + (1 - b1) * g
            self.v[key] = b2 * self.v[key] + (1 - b2) * g * g
            m_hat = self.m[key] / (1 - b1 ** self.t)
            v_hat = self.v[key] / (1 - b2 ** self.t)
            params[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def flatten_params(params: dict) -> tuple:
    """Concatenate parameters into one vector plus a (name, shape) spec."""
    spec = [(name, params[name].shape) for name in sorted(params)]
    vector = np.concatenate([params[name].ravel() for name, _ in spec])
    return vector, spec

def unflatten_params(vector: np.ndarray, spec) -> dict:
    params = {}
    pos = 0
    for name, shape in spec:
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        params[name] = vector[pos:pos + size].reshape(shape).copy()
        pos += size
    if pos != vector.size:
        raise ValueError(f"parameter vector has {vector.size} values, spec wants {pos}")
    return params


def gradient_check(model: SequenceRegressor, X: np.ndarray, y: np.ndarray,
                   eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    _, grads = model.loss_and_gradients(X, y)
    worst = 0.0
    for name, value in model.params.items():
        flat = value.ravel()
        gflat = grads[name].ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            up, _ = model.loss_and_gradients(X, y)
            flat[idx] = orig - eps
            down, _ = model.loss_and_gradients(X, y)
            flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            # central differences at this eps resolve about 1e-10 of
            # absolute error in float64, so entries smaller than the
            # floor are held to an absolute bar rather than a relative
            # one that would only measure roundoff
            denom = max(1e-4, abs(numeric) + abs(gflat[idx]))
            worst = max(worst, abs(numeric - gflat[idx]) / denom)
    return worst
