"""Minimal feed-forward network engine with exact backpropagation.

Layers: dense, embedding, conv1d (valid padding, stride 1), maxpool1d
(stride = pool width, ties routed to the first maximum), flatten, dropout
(inverted scaling), relu. The output head is a dense layer feeding either
a single sigmoid unit or a two-unit softmax; the paired losses are binary
cross-entropy and cross-entropy. Everything is float64.
"""

from __future__ import annotations

import json
import struct

import numpy as np

CLAMP = 1e-7  # probability clamp for the cross-entropy losses


class ShapeError(ValueError):
    pass


def _glorot(rng: np.random.Generator, shape, fan_in, fan_out) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base: params/grads are parallel lists of float64 arrays."""

    def __init__(self):
        self.params: list[np.ndarray] = []
        self.grads: list[np.ndarray] = []

    def forward(self, x, training, rng):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def out_shape(self, in_shape):
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, n_in, n_out, rng):
        super().__init__()
        W = _glorot(rng, (n_in, n_out), n_in, n_out)
        b = np.zeros(n_out)
        self.params = [W, b]
        self.grads = [np.zeros_like(W), np.zeros_like(b)]

    def forward(self, x, training, rng):
        if x.ndim != 2 or x.shape[1] != self.params[0].shape[0]:
            raise ShapeError(
                f"dense expects (batch, {self.params[0].shape[0]}), got {x.shape}"
            )
        self._x = x
        return x @ self.params[0] + self.params[1]

    def backward(self, dout):
        self.grads[0][...] = self._x.T @ dout
        self.grads[1][...] = dout.sum(axis=0)
        return dout @ self.params[0].T

    def out_shape(self, in_shape):
        return (self.params[0].shape[1],)


class Embedding(Layer):
    def __init__(self, n_rows, dim, rng, init=None):
        super().__init__()
        if init is not None:
            E = np.array(init, dtype=float)
            if E.shape != (n_rows, dim):
                raise ShapeError(f"embedding init shape {E.shape} != {(n_rows, dim)}")
        else:
            E = _glorot(rng, (n_rows, dim), n_rows, dim)
        self.params = [E]
        self.grads = [np.zeros_like(E)]

    def forward(self, x, training, rng):
        if x.ndim != 2:
            raise ShapeError(f"embedding expects (batch, length), got {x.shape}")
        self._idx = x.astype(np.int64)
        return self.params[0][self._idx]

    def backward(self, dout):
        g = self.grads[0]
        g[...] = 0.0
        np.add.at(g, self._idx, dout)
        return None  # integer input, no upstream gradient

    def out_shape(self, in_shape):
        return (in_shape[0], self.params[0].shape[1])


class Conv1d(Layer):
    """Valid padding, stride 1. Kernel shape (width, in_channels, filters)."""

    def __init__(self, width, in_channels, filters, rng):
        super().__init__()
        W = _glorot(rng, (width, in_channels, filters),
                    width * in_channels, width * filters)
        b = np.zeros(filters)
        self.params = [W, b]
        self.grads = [np.zeros_like(W), np.zeros_like(b)]

    def forward(self, x, training, rng):
        W, b = self.params
        k, cin, _ = W.shape
        if x.ndim != 3 or x.shape[2] != cin:
            raise ShapeError(f"conv1d expects (batch, length, {cin}), got {x.shape}")
        if x.shape[1] < k:
            raise ShapeError(f"conv1d: length {x.shape[1]} < kernel width {k}")
        self._x = x
        L_out = x.shape[1] - k + 1
        out = np.tile(b, (x.shape[0], L_out, 1))
        for i in range(k):
            out += np.einsum("blc,cf->blf", x[:, i:i + L_out, :], W[i])
        return out

    def backward(self, dout):
        W, _ = self.params
        k = W.shape[0]
        x = self._x
        L_out = dout.shape[1]
        dx = np.zeros_like(x)
        for i in range(k):
            self.grads[0][i] = np.einsum("blc,blf->cf", x[:, i:i + L_out, :], dout)
            dx[:, i:i + L_out, :] += np.einsum("blf,cf->blc", dout, W[i])
        self.grads[1][...] = dout.sum(axis=(0, 1))
        return dx

    def out_shape(self, in_shape):
        k, _, f = self.params[0].shape
        L_out = in_shape[0] - k + 1
        if L_out < 1:
            raise ShapeError(f"conv1d: length {in_shape[0]} < kernel width {k}")
        return (L_out, f)


class MaxPool1d(Layer):
    """Non-overlapping windows (stride = width); trailing remainder dropped."""

    def __init__(self, width):
        super().__init__()
        self.width = width

    def forward(self, x, training, rng):
        if x.ndim != 3:
            raise ShapeError(f"maxpool1d expects (batch, length, channels), got {x.shape}")
        p = self.width
        L_out = x.shape[1] // p
        if L_out < 1:
            raise ShapeError(f"maxpool1d: length {x.shape[1]} < pool width {p}")
        windows = x[:, :L_out * p, :].reshape(x.shape[0], L_out, p, x.shape[2])
        self._argmax = windows.argmax(axis=2)  # first max on ties
        self._in_shape = x.shape
        return windows.max(axis=2)

    def backward(self, dout):
        B, L, C = self._in_shape
        p = self.width
        L_out = dout.shape[1]
        dwin = np.zeros((B, L_out, p, C))
        b, l, c = np.ogrid[:B, :L_out, :C]
        dwin[b, l, self._argmax, c] = dout
        dx = np.zeros((B, L, C))
        dx[:, :L_out * p, :] = dwin.reshape(B, L_out * p, C)
        return dx

    def out_shape(self, in_shape):
        L_out = in_shape[0] // self.width
        if L_out < 1:
            raise ShapeError(f"maxpool1d: length {in_shape[0]} < pool width {self.width}")
        return (L_out, in_shape[1])


class Flatten(Layer):
    def forward(self, x, training, rng):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)

    def out_shape(self, in_shape):
        n = 1
        for s in in_shape:
            n *= s
        return (n,)


class Dropout(Layer):
    """Inverted dropout: kept units scaled by 1/keep at train time."""

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"drop rate must be in [0, 1), got {rate}")
        self.rate = rate

    def forward(self, x, training, rng):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) >= self.rate) / keep
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask

    def out_shape(self, in_shape):
        return in_shape


class Relu(Layer):
    def forward(self, x, training, rng):
        self._x = x
        return np.maximum(x, 0.0)

    def backward(self, dout):
        return dout * (self._x > 0)

    def out_shape(self, in_shape):
        return in_shape


def sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def bce_loss(pred: float, label: int) -> float:
    """-[y ln p + (1-y) ln(1-p)] with p clamped into [1e-7, 1 - 1e-7]."""
    p = min(max(pred, CLAMP), 1.0 - CLAMP)
    return -(label * np.log(p) + (1 - label) * np.log(1.0 - p))


def _build_layer(spec: dict, in_shape, rng, embedding_init=None) -> Layer:
    kind = spec["kind"]
    if kind == "dense":
        if len(in_shape) != 1:
            raise ShapeError(f"dense after shape {in_shape}; flatten first")
        return Dense(in_shape[0], spec["units"], rng)
    if kind == "embedding":
        return Embedding(spec["rows"], spec["dim"], rng, init=embedding_init)
    if kind == "conv1d":
        if len(in_shape) != 2:
            raise ShapeError(f"conv1d needs (length, channels) input, got {in_shape}")
        return Conv1d(spec["width"], in_shape[1], spec["filters"], rng)
    if kind == "maxpool1d":
        return MaxPool1d(spec["width"])
    if kind == "flatten":
        return Flatten()
    if kind == "dropout":
        return Dropout(spec["rate"])
    if kind == "relu":
        return Relu()
    raise ValueError(f"unknown layer kind {kind!r}")


class Network:
    """Layer stack plus a sigmoid or softmax classification head.

    `input_shape` is (features,) for vector input or (max_len,) for integer
    sequences (which must start with an embedding layer). Construction is
    deterministic given the seed.
    """

    def __init__(self, specs: list[dict], input_shape: tuple, head: str = "sigmoid",
                 seed: int = 0, embedding_init: np.ndarray | None = None):
        if head not in ("sigmoid", "softmax"):
            raise ValueError(f"unknown head {head!r}")
        self.specs = specs
        self.head = head
        self.seed = seed
        self.input_shape = tuple(input_shape)
        rng = np.random.default_rng(seed)
        self.layers: list[Layer] = []
        shape = self.input_shape
        for spec in specs:
            layer = _build_layer(spec, shape, rng,
                                 embedding_init if spec["kind"] == "embedding" else None)
            shape = layer.out_shape(shape)
            self.layers.append(layer)
        if len(shape) != 1:
            raise ShapeError(f"head needs flat input, got shape {shape}")
        self.head_dense = Dense(shape[0], 1 if head == "sigmoid" else 2, rng)
        self._train_rng = np.random.default_rng(seed + 1)

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.params)
        out.extend(self.head_dense.params)
        return out

    @property
    def grads(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend(layer.grads)
        out.extend(self.head_dense.grads)
        return out

    def forward(self, x, training: bool = False):
        """Probabilities: (batch,) for sigmoid, (batch, 2) for softmax."""
        x = np.asarray(x)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"input shape {x.shape[1:]} does not match network input "
                f"{self.input_shape}"
            )
        for layer in self.layers:
            x = layer.forward(x, training, self._train_rng)
        z = self.head_dense.forward(x, training, self._train_rng)
        if self.head == "sigmoid":
            return sigmoid(z[:, 0])
        return softmax(z)

    def loss_and_backward(self, x, y, training: bool = True) -> float:
        """Mean cross-entropy over the batch; fills every grad buffer."""
        y = np.asarray(y)
        p = self.forward(x, training=training)
        n = p.shape[0]
        if self.head == "sigmoid":
            pc = np.clip(p, CLAMP, 1.0 - CLAMP)
            loss = float(np.mean(-(y * np.log(pc) + (1 - y) * np.log(1 - pc))))
            # d(loss)/dz collapses to (p - y)/n; zero where the clamp is flat
            live = (p > CLAMP) & (p < 1.0 - CLAMP)
            dz = ((p - y) * live / n)[:, None]
        else:
            pc = np.clip(p[np.arange(n), y], CLAMP, 1.0 - CLAMP)
            loss = float(np.mean(-np.log(pc)))
            onehot = np.zeros_like(p)
            onehot[np.arange(n), y] = 1.0
            live = (p[np.arange(n), y] > CLAMP)[:, None]
            dz = (p - onehot) * live / n
        dout = self.head_dense.backward(dz)
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return loss

    def loss(self, x, y) -> float:
        p = self.forward(np.asarray(x), training=False)
        y = np.asarray(y)
        if self.head == "sigmoid":
            pc = np.clip(p, CLAMP, 1.0 - CLAMP)
            return float(np.mean(-(y * np.log(pc) + (1 - y) * np.log(1 - pc))))
        pc = np.clip(p[np.arange(p.shape[0]), y], CLAMP, 1.0 - CLAMP)
        return float(np.mean(-np.log(pc)))

    def predict(self, x) -> np.ndarray:
        """Binary votes: sigmoid -> 1 iff p >= 0.5; softmax -> argmax."""
        p = self.forward(x, training=False)
        if self.head == "sigmoid":
            return (p >= 0.5).astype(int)
        return p.argmax(axis=1)

    # persistence: uint32 header length, JSON header, float64 LE blob

    def save(self, path: str) -> None:
        header = json.dumps({
            "specs": self.specs,
            "head": self.head,
            "seed": self.seed,
            "input_shape": list(self.input_shape),
        }).encode("utf-8")
        with open(path, "wb") as f:
            f.write(struct.pack("<I", len(header)))
            f.write(header)
            for p in self.params:
                f.write(p.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str) -> "Network":
        with open(path, "rb") as f:
            (hlen,) = struct.unpack("<I", f.read(4))
            meta = json.loads(f.read(hlen).decode("utf-8"))
            net = cls(meta["specs"], tuple(meta["input_shape"]),
                      head=meta["head"], seed=meta["seed"])
            for p in net.params:
                raw = f.read(p.size * 8)
                p[...] = np.frombuffer(raw, dtype="<f8").reshape(p.shape)
        return net


def grad_check(net: Network, x, y, eps: float = 1e-5) -> float:
    """Max relative error of backprop vs central finite differences.

    Dropout must be off (training=False keeps masks identity)."""
    net.loss_and_backward(x, y, training=False)
    analytic = [g.copy() for g in net.grads]
    worst = 0.0
    for p, g in zip(net.params, analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lp = net.loss(x, y)
            flat[i] = orig - eps
            lm = net.loss(x, y)
            flat[i] = orig
            num = (lp - lm) / (2 * eps)
            rel = abs(gflat[i] - num) / max(1e-8, abs(gflat[i]) + abs(num))
            worst = max(worst, rel)
    return worst
