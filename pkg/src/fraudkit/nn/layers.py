"""Layer forward/backward passes for the dense-tensor network engine.

All arrays are batch-first float64. Convolutions are valid-padding,
stride 1. Every layer caches what its backward pass needs during
forward and exposes params/grads dicts for the optimizer.
"""

from dataclasses import dataclass

import numpy as np


def _relu(x):
    return np.maximum(x, 0.0)


def _sigmoid(x):
    # Branch on sign to avoid overflow in exp.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(x):
    shifted = x - x.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


ACTIVATIONS = ("relu", "sigmoid", "tanh", "softmax")


def apply_activation(x, kind):
    if kind == "relu":
        return _relu(x)
    if kind == "sigmoid":
        return _sigmoid(x)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "softmax":
        return _softmax(x)
    raise ValueError(f"unknown activation {kind!r}")


def _glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _he_uniform(rng, shape, fan_in, _fan_out):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


_INITS = {"glorot": _glorot_uniform, "he": _he_uniform}


class Layer:
    kind = "layer"

    def __init__(self):
        self.params = {}
        self.grads = {}

    def init_params(self, in_shape, rng):
        """Allocate parameters for the per-sample input shape; returns out shape."""
        return self.output_shape(in_shape)

    def output_shape(self, in_shape):
        raise NotImplementedError

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def hyperparams(self):
        return {}


class Dense(Layer):
    kind = "dense"

    def __init__(self, units, init="glorot"):
        super().__init__()
        if units < 1:
            raise ValueError("units must be positive")
        self.units = units
        self.init = init

    def output_shape(self, in_shape):
        if len(in_shape) != 1:
            raise ValueError(f"dense expects a flat input, got shape {in_shape}")
        return (self.units,)

    def init_params(self, in_shape, rng):
        (n,) = in_shape
        self.params = {
            "W": _INITS[self.init](rng, (self.units, n), n, self.units),
            "b": np.zeros(self.units),
        }
        self.zero_grads()
        return (self.units,)

    def forward(self, x, train=False, rng=None):
        if x.shape[1] != self.params["W"].shape[1]:
            raise ValueError(
                f"dense expects width {self.params['W'].shape[1]}, got {x.shape[1]}"
            )
        self._x = x
        return x @ self.params["W"].T + self.params["b"]

    def backward(self, grad):
        self.grads["W"] += grad.T @ self._x
        self.grads["b"] += grad.sum(axis=0)
        return grad @ self.params["W"]

    def hyperparams(self):
        return {"units": self.units, "init": self.init}


def dense_forward(W, b, x):
    """y = Wx + b for a single vector (shape-checked)."""
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if W.shape != (b.shape[0], x.shape[0]):
        raise ValueError(f"shape mismatch: W {W.shape}, b {b.shape}, x {x.shape}")
    y = W @ x + b
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("non-finite dense output")
    return y


class Conv2D(Layer):
    """Valid-padding stride-1 cross-correlation over [h, w, c_in] inputs."""

    kind = "conv2d"

    def __init__(self, channels, kernel_size, init="he"):
        super().__init__()
        self.channels = channels
        self.kernel_size = kernel_size
        self.init = init

    def output_shape(self, in_shape):
        h, w, _c = in_shape
        k = self.kernel_size
        if k > h or k > w:
            raise ValueError(f"kernel {k}x{k} larger than input {h}x{w}")
        return (h - k + 1, w - k + 1, self.channels)

    def init_params(self, in_shape, rng):
        _h, _w, c_in = in_shape
        k = self.kernel_size
        fan_in = k * k * c_in
        fan_out = k * k * self.channels
        self.params = {
            "K": _INITS[self.init](rng, (k, k, c_in, self.channels), fan_in, fan_out),
            "b": np.zeros(self.channels),
        }
        self.zero_grads()
        return self.output_shape(in_shape)

    def _im2col(self, x, oh, ow):
        k = self.kernel_size
        b, _h, _w, c = x.shape
        cols = np.empty((b, oh, ow, k * k * c))
        for di in range(k):
            for dj in range(k):
                patch = x[:, di : di + oh, dj : dj + ow, :]
                cols[:, :, :, (di * k + dj) * c : (di * k + dj + 1) * c] = patch
        return cols

    def forward(self, x, train=False, rng=None):
        k = self.kernel_size
        oh, ow = x.shape[1] - k + 1, x.shape[2] - k + 1
        if oh < 1 or ow < 1:
            raise ValueError(f"kernel {k}x{k} larger than input {x.shape[1:3]}")
        self._x_shape = x.shape
        self._cols = self._im2col(x, oh, ow)
        wmat = self.params["K"].reshape(-1, self.channels)
        return self._cols @ wmat + self.params["b"]

    def backward(self, grad):
        k = self.kernel_size
        b, oh, ow, _ = grad.shape
        wmat = self.params["K"].reshape(-1, self.channels)
        self.grads["K"] += np.tensordot(self._cols, grad, axes=([0, 1, 2], [0, 1, 2])).reshape(
            self.params["K"].shape
        )
        self.grads["b"] += grad.sum(axis=(0, 1, 2))
        dcols = grad @ wmat.T
        dx = np.zeros(self._x_shape)
        c = self._x_shape[3]
        for di in range(k):
            for dj in range(k):
                sl = dcols[:, :, :, (di * k + dj) * c : (di * k + dj + 1) * c]
                dx[:, di : di + oh, dj : dj + ow, :] += sl
        return dx

    def hyperparams(self):
        return {"channels": self.channels, "kernel_size": self.kernel_size, "init": self.init}


def conv2d_forward(x, kernels, bias):
    """Single-sample conv2d: [h,w,c_in] x [k,k,c_in,c_out] -> [oh,ow,c_out]."""
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    layer = Conv2D(kernels.shape[3], kernels.shape[0])
    layer.params = {"K": kernels, "b": bias}
    return layer.forward(x[None])[0]


class Conv1D(Layer):
    """Valid-padding stride-1 cross-correlation over [length, c_in] inputs."""

    kind = "conv1d"

    def __init__(self, channels, kernel_size, init="he"):
        super().__init__()
        self.channels = channels
        self.kernel_size = kernel_size
        self.init = init

    def output_shape(self, in_shape):
        length, _c = in_shape
        k = self.kernel_size
        if k > length:
            raise ValueError(f"kernel {k} longer than input {length}")
        return (length - k + 1, self.channels)

    def init_params(self, in_shape, rng):
        _length, c_in = in_shape
        k = self.kernel_size
        fan_in = k * c_in
        self.params = {
            "K": _INITS[self.init](rng, (k, c_in, self.channels), fan_in, k * self.channels),
            "b": np.zeros(self.channels),
        }
        self.zero_grads()
        return self.output_shape(in_shape)

    def forward(self, x, train=False, rng=None):
        k = self.kernel_size
        ol = x.shape[1] - k + 1
        if ol < 1:
            raise ValueError(f"kernel {k} longer than input {x.shape[1]}")
        b, _, c = x.shape
        cols = np.empty((b, ol, k * c))
        for d in range(k):
            cols[:, :, d * c : (d + 1) * c] = x[:, d : d + ol, :]
        self._x_shape = x.shape
        self._cols = cols
        wmat = self.params["K"].reshape(-1, self.channels)
        return cols @ wmat + self.params["b"]

    def backward(self, grad):
        k = self.kernel_size
        ol = grad.shape[1]
        c = self._x_shape[2]
        wmat = self.params["K"].reshape(-1, self.channels)
        self.grads["K"] += np.tensordot(self._cols, grad, axes=([0, 1], [0, 1])).reshape(
            self.params["K"].shape
        )
        self.grads["b"] += grad.sum(axis=(0, 1))
        dcols = grad @ wmat.T
        dx = np.zeros(self._x_shape)
        for d in range(k):
            dx[:, d : d + ol, :] += dcols[:, :, d * c : (d + 1) * c]
        return dx

    def hyperparams(self):
        return {"channels": self.channels, "kernel_size": self.kernel_size, "init": self.init}


def conv1d_forward(x, kernels, bias):
    """Single-sample conv1d: [len,c_in] x [k,c_in,c_out] -> [ol,c_out]."""
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    layer = Conv1D(kernels.shape[2], kernels.shape[0])
    layer.params = {"K": kernels, "b": np.asarray(bias, dtype=np.float64)}
    return layer.forward(x[None])[0]


class MaxPool1D(Layer):
    """Channel-wise max over non-overlapping windows; pool=1 is the identity."""

    kind = "maxpool1d"

    def __init__(self, pool):
        super().__init__()
        if pool < 1:
            raise ValueError("pool size must be >= 1")
        self.pool = pool

    def output_shape(self, in_shape):
        length, c = in_shape
        if self.pool > length:
            raise ValueError(f"pool {self.pool} larger than input length {length}")
        return (length // self.pool, c)

    def forward(self, x, train=False, rng=None):
        p = self.pool
        b, length, c = x.shape
        if p > length:
            raise ValueError(f"pool {p} larger than input length {length}")
        n_win = length // p
        windows = x[:, : n_win * p, :].reshape(b, n_win, p, c)
        self._x_shape = x.shape
        self._argmax = windows.argmax(axis=2)
        return windows.max(axis=2)

    def backward(self, grad):
        b, n_win, c = grad.shape
        p = self.pool
        dwin = np.zeros((b, n_win, p, c))
        bi, wi, ci = np.ogrid[:b, :n_win, :c]
        dwin[bi, wi, self._argmax, ci] = grad
        dx = np.zeros(self._x_shape)
        dx[:, : n_win * p, :] = dwin.reshape(b, n_win * p, c)
        return dx

    def hyperparams(self):
        return {"pool": self.pool}


class Dropout(Layer):
    """Inverted dropout: train-time zeroing with 1/(1-rate) rescale."""

    kind = "dropout"

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("train-mode dropout needs a random generator")
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            return grad
        return grad * self._mask

    def hyperparams(self):
        return {"rate": self.rate}


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, train=False, rng=None):
        self._x_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._x_shape)


class Activation(Layer):
    kind = "activation"

    def __init__(self, activation):
        super().__init__()
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.activation = activation

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x, train=False, rng=None):
        if self.activation == "relu":
            self._x = x
            return _relu(x)
        out = apply_activation(x, self.activation)
        self._out = out
        return out

    def backward(self, grad):
        a = self.activation
        if a == "relu":
            return grad * (self._x > 0)
        if a == "sigmoid":
            return grad * self._out * (1.0 - self._out)
        if a == "tanh":
            return grad * (1.0 - self._out**2)
        # softmax over the last axis
        s = self._out
        return (grad - (grad * s).sum(axis=-1, keepdims=True)) * s

    def hyperparams(self):
        return {"activation": self.activation}


@dataclass
class LSTMParams:
    """Gate weights [hidden x (hidden + input)] and biases [hidden]."""

    W_f: np.ndarray
    W_i: np.ndarray
    W_g: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_g: np.ndarray
    b_o: np.ndarray


@dataclass
class LSTMState:
    h: np.ndarray
    c: np.ndarray


def _inner(x, kind):
    if kind == "tanh":
        return np.tanh(x)
    if kind == "relu":
        return _relu(x)
    raise ValueError(f"unknown inner activation {kind!r}")


def lstm_step(p, s, x, inner_act="tanh"):
    """One gate-equation step: returns the new LSTMState.

    z = [h_{t-1}, x_t]; f/i/o = sigmoid gates; g = phi(W_g z + b_g);
    c_t = f*c + i*g; h_t = o * phi(c_t).
    """
    h, c = np.asarray(s.h, dtype=np.float64), np.asarray(s.c, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    z = np.concatenate([h, x], axis=-1)
    f = _sigmoid(z @ p.W_f.T + p.b_f)
    i = _sigmoid(z @ p.W_i.T + p.b_i)
    g = _inner(z @ p.W_g.T + p.b_g, inner_act)
    o = _sigmoid(z @ p.W_o.T + p.b_o)
    c_t = f * c + i * g
    h_t = o * _inner(c_t, inner_act)
    return LSTMState(h=h_t, c=c_t)


class LSTM(Layer):
    """Sequence LSTM returning the final hidden state.

    Input shape [T, input_dim]; output [hidden]. The inner activation
    phi applies to both the candidate transform and the cell-state
    output path; gate activations are always sigmoid.
    """

    kind = "lstm"

    def __init__(self, hidden, inner_act="tanh", init="glorot"):
        super().__init__()
        self.hidden = hidden
        self.inner_act = inner_act
        self.init = init

    def output_shape(self, in_shape):
        if len(in_shape) != 2:
            raise ValueError(f"lstm expects [T, input_dim], got {in_shape}")
        return (self.hidden,)

    def init_params(self, in_shape, rng):
        _t, input_dim = in_shape
        h = self.hidden
        zdim = h + input_dim
        self.params = {}
        for gate in ("f", "i", "g", "o"):
            self.params[f"W_{gate}"] = _INITS[self.init](rng, (h, zdim), zdim, h)
            self.params[f"b_{gate}"] = np.zeros(h)
        self.zero_grads()
        return (h,)

    def _phi(self, x):
        return _inner(x, self.inner_act)

    def _dphi(self, pre):
        if self.inner_act == "tanh":
            return 1.0 - np.tanh(pre) ** 2
        return (pre > 0).astype(np.float64)

    def forward(self, x, train=False, rng=None):
        b, T, _ = x.shape
        h = np.zeros((b, self.hidden))
        c = np.zeros((b, self.hidden))
        self._cache = []
        p = self.params
        for t in range(T):
            z = np.concatenate([h, x[:, t, :]], axis=1)
            f = _sigmoid(z @ p["W_f"].T + p["b_f"])
            i = _sigmoid(z @ p["W_i"].T + p["b_i"])
            a_g = z @ p["W_g"].T + p["b_g"]
            g = self._phi(a_g)
            o = _sigmoid(z @ p["W_o"].T + p["b_o"])
            c_new = f * c + i * g
            h_new = o * self._phi(c_new)
            self._cache.append((z, f, i, a_g, g, o, c, c_new))
            h, c = h_new, c_new
        self._x_shape = x.shape
        return h

    def backward(self, grad):
        p = self.params
        H = self.hidden
        dx = np.zeros(self._x_shape)
        dh = grad
        dc = np.zeros_like(grad)
        for t in range(self._x_shape[1] - 1, -1, -1):
            z, f, i, a_g, g, o, c_prev, c_new = self._cache[t]
            do = dh * self._phi(c_new)
            dc = dc + dh * o * self._dphi(c_new)
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            da_f = df * f * (1.0 - f)
            da_i = di * i * (1.0 - i)
            da_g = dg * self._dphi(a_g)
            da_o = do * o * (1.0 - o)
            for name, da in (("f", da_f), ("i", da_i), ("g", da_g), ("o", da_o)):
                self.grads[f"W_{name}"] += da.T @ z
                self.grads[f"b_{name}"] += da.sum(axis=0)
            dz = da_f @ p["W_f"] + da_i @ p["W_i"] + da_g @ p["W_g"] + da_o @ p["W_o"]
            dh = dz[:, :H]
            dx[:, t, :] = dz[:, H:]
            dc = dc * f
        return dx

    def hyperparams(self):
        return {"hidden": self.hidden, "inner_act": self.inner_act, "init": self.init}


LAYER_KINDS = {
    cls.kind: cls
    for cls in (Dense, Conv1D, Conv2D, MaxPool1D, Dropout, Flatten, Activation, LSTM)
}
