"""Minimal deterministic neural-network engine on numpy.

Dense layers, 5x5 valid convolutions, 2x2 max-pooling, ReLU, flatten and
inverted dropout, with soft-label cross-entropy, reverse-mode gradients and
momentum SGD.  Everything is float64 by default; float32 is an opt-in speed
flag on ``init_params``.  All randomness flows through explicit
``numpy.random.Generator`` objects or integer seeds, so identical inputs give
bit-identical outputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np


class ShapeError(ValueError):
    """Layer shapes do not compose, or an input does not match the spec."""


class NumericError(RuntimeError):
    """Non-finite value encountered during training."""


# ---------------------------------------------------------------------------
# layer descriptors and network specification


@dataclass(frozen=True)
class Dense:
    in_dim: int
    out_dim: int
    bias: bool = True


@dataclass(frozen=True)
class Conv2D:
    in_ch: int
    out_ch: int
    kernel: int = 5
    bias: bool = True


@dataclass(frozen=True)
class MaxPool2x2:
    pass


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dropout:
    rate: float


Layer = Dense | Conv2D | MaxPool2x2 | ReLU | Flatten | Dropout


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description: ordered layers plus input/output contract.

    ``input_shape`` is either a flat feature dimension (int) or an image
    shape ``(channels, height, width)``.  The final activation must be flat
    with ``num_classes`` entries (a single entry is also accepted for
    two-class margin networks).
    """

    layers: tuple[Layer, ...]
    input_shape: tuple[int, ...] | int
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if isinstance(self.input_shape, (list, tuple)):
            object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        else:
            object.__setattr__(self, "input_shape", int(self.input_shape))
        activation_shapes(self)  # validates composition, raises ShapeError

    @property
    def output_dim(self) -> int:
        shp = activation_shapes(self)[-1]
        return shp[0] if len(shp) == 1 else -1


def _shape_after(layer: Layer, shp: tuple[int, ...], idx: int) -> tuple[int, ...]:
    name = type(layer).__name__
    if isinstance(layer, Dense):
        if len(shp) != 1 or shp[0] != layer.in_dim:
            raise ShapeError(f"layer {idx} ({name}): expects flat input of {layer.in_dim}, got {shp}")
        return (layer.out_dim,)
    if isinstance(layer, Conv2D):
        if len(shp) != 3 or shp[0] != layer.in_ch:
            raise ShapeError(f"layer {idx} ({name}): expects (C={layer.in_ch},H,W) input, got {shp}")
        c, h, w = shp
        k = layer.kernel
        if h < k or w < k:
            raise ShapeError(f"layer {idx} ({name}): input {h}x{w} smaller than kernel {k}")
        return (layer.out_ch, h - k + 1, w - k + 1)
    if isinstance(layer, MaxPool2x2):
        if len(shp) != 3 or shp[1] % 2 or shp[2] % 2:
            raise ShapeError(f"layer {idx} ({name}): needs (C,H,W) with even H,W, got {shp}")
        return (shp[0], shp[1] // 2, shp[2] // 2)
    if isinstance(layer, Flatten):
        return (int(np.prod(shp)),)
    if isinstance(layer, Dropout):
        if not 0.0 <= layer.rate < 1.0:
            raise ShapeError(f"layer {idx} ({name}): rate must lie in [0,1), got {layer.rate}")
        return shp
    return shp  # ReLU


@lru_cache(maxsize=None)
def activation_shapes(spec: NetworkSpec) -> tuple[tuple[int, ...], ...]:
    """Per-layer activation shapes (input shape first), validated to compose."""
    shp = (spec.input_shape,) if isinstance(spec.input_shape, int) else spec.input_shape
    shapes = [shp]
    for i, layer in enumerate(spec.layers):
        shp = _shape_after(layer, shp, i)
        shapes.append(shp)
    if len(shp) != 1:
        raise ShapeError(f"final activation {shp} is not flat")
    if shp[0] != spec.num_classes and not (shp[0] == 1 and spec.num_classes == 2):
        raise ShapeError(f"final dimension {shp[0]} does not match num_classes={spec.num_classes}")
    return tuple(shapes)


def homogeneity_degree(spec: NetworkSpec) -> Optional[int]:
    """Degree L such that scaling all parameters by c scales outputs by c**L.

    Only bias-free networks are positively homogeneous; returns None when any
    layer carries a bias term.  L counts the parameterized layers.
    """
    degree = 0
    for layer in spec.layers:
        if isinstance(layer, (Dense, Conv2D)):
            if layer.bias:
                return None
            degree += 1
    return degree


def mlp_spec(input_dim: int, hidden: Sequence[int], num_classes: int,
             bias: bool = True, dropout: float = 0.0) -> NetworkSpec:
    """Fully connected ReLU network with the given hidden widths."""
    layers: list[Layer] = []
    prev = input_dim
    for h in hidden:
        layers.append(Dense(prev, h, bias=bias))
        layers.append(ReLU())
        if dropout > 0.0:
            layers.append(Dropout(dropout))
        prev = h
    layers.append(Dense(prev, num_classes, bias=bias))
    return NetworkSpec(tuple(layers), input_dim, num_classes)


def cnn_spec(input_shape: tuple[int, int, int], num_classes: int,
             conv_channels: Sequence[int] = (6, 16), fc_sizes: Sequence[int] = (120, 84),
             kernel: int = 5, bias: bool = True, dropout: float = 0.0) -> NetworkSpec:
    """Small image classifier: conv/ReLU/pool blocks then fully connected head."""
    c, h, w = input_shape
    layers: list[Layer] = []
    for out_ch in conv_channels:
        layers.append(Conv2D(c, out_ch, kernel=kernel, bias=bias))
        layers.append(ReLU())
        layers.append(MaxPool2x2())
        c, h, w = out_ch, (h - kernel + 1) // 2, (w - kernel + 1) // 2
    layers.append(Flatten())
    prev = c * h * w
    for f in fc_sizes:
        layers.append(Dense(prev, f, bias=bias))
        layers.append(ReLU())
        if dropout > 0.0:
            layers.append(Dropout(dropout))
        prev = f
    layers.append(Dense(prev, num_classes, bias=bias))
    return NetworkSpec(tuple(layers), tuple(input_shape), num_classes)


# ---------------------------------------------------------------------------
# parameters


@dataclass
class ModelParams:
    """Flat list of parameter tensors in canonical layer order.

    For every Dense/Conv2D layer the weight tensor appears first, followed by
    the bias vector when the layer has one.  Dense weights have shape
    (in, out); convolution weights (out_ch, in_ch, k, k).
    """

    arrays: list[np.ndarray]

    @property
    def dtype(self):
        return self.arrays[0].dtype if self.arrays else np.dtype(np.float64)

    def copy(self) -> "ModelParams":
        return ModelParams([a.copy() for a in self.arrays])

    def astype(self, dtype) -> "ModelParams":
        return ModelParams([a.astype(dtype) for a in self.arrays])

    def scaled(self, c: float) -> "ModelParams":
        return ModelParams([a * c for a in self.arrays])

    def norm(self) -> float:
        """Euclidean norm over all entries of all tensors."""
        return float(np.sqrt(sum(float(np.vdot(a, a)) for a in self.arrays)))

    def num_entries(self) -> int:
        return int(sum(a.size for a in self.arrays))

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays)


def param_slots(spec: NetworkSpec) -> list[tuple[int, str, tuple[int, ...]]]:
    """(layer index, 'w'|'b', shape) for every parameter tensor, in order."""
    slots = []
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Dense):
            slots.append((i, "w", (layer.in_dim, layer.out_dim)))
            if layer.bias:
                slots.append((i, "b", (layer.out_dim,)))
        elif isinstance(layer, Conv2D):
            slots.append((i, "w", (layer.out_ch, layer.in_ch, layer.kernel, layer.kernel)))
            if layer.bias:
                slots.append((i, "b", (layer.out_ch,)))
    return slots


def validate_params(params: ModelParams, spec: NetworkSpec) -> None:
    slots = param_slots(spec)
    if len(params.arrays) != len(slots):
        raise ShapeError(f"expected {len(slots)} parameter tensors, got {len(params.arrays)}")
    for a, (idx, kind, shp) in zip(params.arrays, slots):
        if a.shape != shp:
            raise ShapeError(f"layer {idx} tensor '{kind}': expected shape {shp}, got {a.shape}")
    if not params.all_finite():
        raise NumericError("parameters contain non-finite entries")


def init_params(spec: NetworkSpec, seed, dtype=np.float64) -> ModelParams:
    """He-style initialization: weights ~ N(0, 2/fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    arrays = []
    for _, kind, shp in param_slots(spec):
        if kind == "w":
            fan_in = shp[0] if len(shp) == 2 else int(np.prod(shp[1:]))
            arrays.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), shp).astype(dtype))
        else:
            arrays.append(np.zeros(shp, dtype=dtype))
    return ModelParams(arrays)


def zeros_like(params: ModelParams) -> ModelParams:
    return ModelParams([np.zeros_like(a) for a in params.arrays])


# ---------------------------------------------------------------------------
# dropout masks


@dataclass
class DropoutMask:
    """One mask per Dropout layer, activation-shaped, entries in {0, 1/(1-rate)}."""

    masks: list[np.ndarray]


def sample_dropout_mask(spec: NetworkSpec, rate: Optional[float], rng: np.random.Generator) -> DropoutMask:
    """Keep each unit with probability 1-rate and scale kept units by 1/(1-rate).

    ``rate=None`` uses each Dropout layer's own rate; a float overrides all of
    them (used at inference time for implicit-ensemble sampling).
    """
    if rate is not None and not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0,1), got {rate}")
    shapes = activation_shapes(spec)
    masks = []
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Dropout):
            r = layer.rate if rate is None else rate
            shp = shapes[i]  # dropout preserves shape
            if r == 0.0:
                masks.append(np.ones(shp))
            else:
                keep = rng.random(shp) >= r
                masks.append(keep / (1.0 - r))
    return DropoutMask(masks)


# ---------------------------------------------------------------------------
# forward pass


def _im2col(x: np.ndarray, k: int):
    # x (n, c, h, w) -> (n, c*k*k, p) with p = (h-k+1)*(w-k+1)
    windows = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    n, c, ho, wo = windows.shape[:4]
    cols = windows.transpose(0, 1, 4, 5, 2, 3).reshape(n, c * k * k, ho * wo)
    return np.ascontiguousarray(cols), ho, wo


def _col2im(dcols: np.ndarray, x_shape, k: int, ho: int, wo: int) -> np.ndarray:
    n, c, h, w = x_shape
    dx = np.zeros((n, c, h, w), dtype=dcols.dtype)
    d = dcols.reshape(n, c, k, k, ho, wo)
    for di in range(k):
        for dj in range(k):
            dx[:, :, di:di + ho, dj:dj + wo] += d[:, :, di, dj]
    return dx


def _maxpool(x: np.ndarray):
    n, c, h, w = x.shape
    blocks = (x.reshape(n, c, h // 2, 2, w // 2, 2)
               .transpose(0, 1, 2, 4, 3, 5)
               .reshape(n, c, h // 2, w // 2, 4))
    idx = blocks.argmax(axis=-1)  # first max on ties, deterministic
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, idx


def _maxpool_backward(dy: np.ndarray, idx: np.ndarray, x_shape) -> np.ndarray:
    n, c, h, w = x_shape
    blocks = np.zeros((n, c, h // 2, w // 2, 4), dtype=dy.dtype)
    np.put_along_axis(blocks, idx[..., None], dy[..., None], axis=-1)
    return (blocks.reshape(n, c, h // 2, w // 2, 2, 2)
                  .transpose(0, 1, 2, 4, 3, 5)
                  .reshape(n, c, h, w))


def _run_forward(params: ModelParams, spec: NetworkSpec, x: np.ndarray,
                 mask: Optional[DropoutMask], keep_cache: bool):
    """Batched forward pass; x has a leading batch axis.

    Overflow from diverged parameters propagates as inf/nan and is caught by
    the training guards rather than warned about here.
    """
    cache = [] if keep_cache else None
    p = iter(params.arrays)
    m = iter(mask.masks) if mask is not None else None
    a = x
    with np.errstate(over="ignore", invalid="ignore"):
        for layer in spec.layers:
            if isinstance(layer, Dense):
                w = next(p)
                b = next(p) if layer.bias else None
                if keep_cache:
                    cache.append(("dense", a, w, b))
                a = a @ w
                if b is not None:
                    a = a + b
            elif isinstance(layer, Conv2D):
                w = next(p)
                b = next(p) if layer.bias else None
                cols, ho, wo = _im2col(a, layer.kernel)
                w_mat = w.reshape(layer.out_ch, -1)
                out = np.matmul(w_mat, cols)  # (n, out_ch, p)
                if b is not None:
                    out = out + b[:, None]
                if keep_cache:
                    cache.append(("conv", a.shape, cols, w_mat, layer.kernel, ho, wo))
                a = out.reshape(a.shape[0], layer.out_ch, ho, wo)
            elif isinstance(layer, MaxPool2x2):
                out, idx = _maxpool(a)
                if keep_cache:
                    cache.append(("pool", a.shape, idx))
                a = out
            elif isinstance(layer, ReLU):
                if keep_cache:
                    cache.append(("relu", a))
                a = np.maximum(a, 0.0)
            elif isinstance(layer, Flatten):
                if keep_cache:
                    cache.append(("flatten", a.shape))
                a = a.reshape(a.shape[0], -1)
            elif isinstance(layer, Dropout):
                mk = next(m) if m is not None else None
                if keep_cache:
                    cache.append(("dropout", mk))
                if mk is not None:
                    a = a * mk
    return a, cache


def _check_input(spec: NetworkSpec, x: np.ndarray, batched: bool):
    expect = (spec.input_shape,) if isinstance(spec.input_shape, int) else spec.input_shape
    got = x.shape[1:] if batched else x.shape
    if got != expect:
        raise ShapeError(f"input shape {got} does not match network input {expect}")


def forward(params: ModelParams, spec: NetworkSpec, x: np.ndarray,
            mask: Optional[DropoutMask] = None) -> np.ndarray:
    """Logits for a single input; without a mask, dropout layers are identity."""
    x = np.asarray(x, dtype=params.dtype)
    _check_input(spec, x, batched=False)
    out, _ = _run_forward(params, spec, x[None], mask, keep_cache=False)
    return out[0]


def forward_batch(params: ModelParams, spec: NetworkSpec, x: np.ndarray,
                  mask: Optional[DropoutMask] = None) -> np.ndarray:
    """Logits for a batch of inputs (leading batch axis)."""
    x = np.asarray(x, dtype=params.dtype)
    _check_input(spec, x, batched=True)
    out, _ = _run_forward(params, spec, x, mask, keep_cache=False)
    return out


# ---------------------------------------------------------------------------
# loss


def log_softmax(logits: np.ndarray) -> np.ndarray:
    # non-finite logits yield nan here; training guards catch them explicitly
    with np.errstate(invalid="ignore", over="ignore"):
        z = logits - logits.max(axis=-1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        z = np.exp(logits - logits.max(axis=-1, keepdims=True))
        return z / z.sum(axis=-1, keepdims=True)


def _check_simplex(label: np.ndarray, tol: float = 1e-9):
    if label.min() < -tol:
        raise ValueError("soft label has negative entries")
    if abs(float(label.sum()) - 1.0) > tol:
        raise ValueError(f"soft label sums to {float(label.sum())}, expected 1")


def soft_cross_entropy(logits: np.ndarray, soft_label: np.ndarray) -> float:
    """-sum_k y_k log softmax(logits)_k, stabilized via log-sum-exp."""
    logits = np.asarray(logits, dtype=np.float64)
    soft_label = np.asarray(soft_label, dtype=np.float64)
    if logits.shape != soft_label.shape or logits.ndim != 1:
        raise ShapeError(f"logits {logits.shape} vs label {soft_label.shape}")
    _check_simplex(soft_label)
    return float(-(soft_label * log_softmax(logits)).sum())


def soft_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-example losses for batched logits/labels; no simplex re-validation."""
    return -(labels * log_softmax(logits)).sum(axis=-1)


# ---------------------------------------------------------------------------
# gradients


def _backward(params: ModelParams, spec: NetworkSpec, cache, dlogits: np.ndarray) -> ModelParams:
    grads: list[Optional[np.ndarray]] = [None] * len(params.arrays)
    slot = len(params.arrays)
    da = dlogits
    for layer, entry in zip(reversed(spec.layers), reversed(cache)):
        if isinstance(layer, Dense):
            _, a_in, w, b = entry
            if b is not None:
                slot -= 1
                grads[slot] = da.sum(axis=0)
            slot -= 1
            grads[slot] = a_in.T @ da
            da = da @ w.T
        elif isinstance(layer, Conv2D):
            _, x_shape, cols, w_mat, k, ho, wo = entry
            n = x_shape[0]
            dout = da.reshape(n, layer.out_ch, ho * wo)
            if layer.bias:
                slot -= 1
                grads[slot] = dout.sum(axis=(0, 2))
            slot -= 1
            dw = np.matmul(dout, cols.transpose(0, 2, 1)).sum(axis=0)
            grads[slot] = dw.reshape(layer.out_ch, layer.in_ch, k, k)
            dcols = np.matmul(w_mat.T, dout)
            da = _col2im(dcols, x_shape, k, ho, wo)
        elif isinstance(layer, MaxPool2x2):
            _, x_shape, idx = entry
            da = _maxpool_backward(da, idx, x_shape)
        elif isinstance(layer, ReLU):
            _, a_in = entry
            da = da * (a_in > 0)
        elif isinstance(layer, Flatten):
            _, x_shape = entry
            da = da.reshape(x_shape)
        elif isinstance(layer, Dropout):
            _, mk = entry
            if mk is not None:
                da = da * mk
    return ModelParams(grads)  # type: ignore[arg-type]


def value_and_grad(params: ModelParams, spec: NetworkSpec, x: np.ndarray, y: np.ndarray,
                   weights: np.ndarray, mask: Optional[DropoutMask] = None):
    """Per-example losses and the gradient of sum_i w_i * loss_i.

    ``x`` (m, *input), ``y`` (m, K) soft labels, ``weights`` (m,) >= 0.
    """
    x = np.asarray(x, dtype=params.dtype)
    _check_input(spec, x, batched=True)
    logits, cache = _run_forward(params, spec, x, mask, keep_cache=True)
    losses = soft_cross_entropy_batch(logits, y)
    dlogits = (softmax(logits) - y) * weights[:, None]
    grad_p = _backward(params, spec, cache, dlogits.astype(params.dtype))
    return losses, grad_p


def grad(params: ModelParams, spec: NetworkSpec,
         batch: Sequence[tuple], mask: Optional[DropoutMask] = None) -> ModelParams:
    """Gradient of sum_i w_i * soft_cross_entropy(forward(x_i), y_i).

    ``batch`` is a sequence of (example, weight) pairs where each example has
    ``.x`` and ``.y`` attributes; linear in the weights; an empty batch gives
    a zero gradient.
    """
    if len(batch) == 0:
        return zeros_like(params)
    w = np.asarray([float(wi) for _, wi in batch], dtype=np.float64)
    if w.min() < 0:
        raise ValueError("example weights must be nonnegative")
    x = np.stack([np.asarray(ex.x, dtype=params.dtype) for ex, _ in batch])
    y = np.stack([np.asarray(ex.y, dtype=np.float64) for ex, _ in batch])
    _, g = value_and_grad(params, spec, x, y, w, mask)
    return g


# ---------------------------------------------------------------------------
# SGD


@dataclass
class TrainConfig:
    """Optimizer and stopping-rule settings for one training run.

    ``stop_rule`` is either "fixed" (train exactly ``epochs`` epochs) or
    "separable" (train until 100% train accuracy, then ``extra_epochs`` more,
    with ``epochs`` acting as a hard cap).  ``seed`` is the master seed from
    which all member-level streams are derived.
    """

    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    epochs: int = 100
    minibatch_size: int = 32
    seed: int = 0
    stop_rule: str = "fixed"
    extra_epochs: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be >= 1")
        if self.stop_rule not in ("fixed", "separable"):
            raise ValueError(f"unknown stop_rule {self.stop_rule!r}")


def sgd_step(params: ModelParams, gradient: ModelParams, cfg: TrainConfig,
             velocity: Optional[ModelParams] = None):
    """v <- momentum*v + g + weight_decay*theta; theta <- theta - lr*v."""
    if len(gradient.arrays) != len(params.arrays):
        raise ShapeError("gradient does not match parameter layout")
    for g in gradient.arrays:
        if not np.isfinite(g).all():
            raise NumericError("non-finite gradient; aborting training step")
    if velocity is None:
        velocity = zeros_like(params)
    new_v, new_p = [], []
    for th, g, v in zip(params.arrays, gradient.arrays, velocity.arrays):
        step = cfg.momentum * v + g
        if cfg.weight_decay != 0.0:
            step = step + cfg.weight_decay * th
        new_v.append(step)
        new_p.append(th - cfg.learning_rate * step)
    return ModelParams(new_p), ModelParams(new_v)


# ---------------------------------------------------------------------------
# spec <-> plain dict (for manifests)


def spec_to_dict(spec: NetworkSpec) -> dict:
    layers = []
    for layer in spec.layers:
        if isinstance(layer, Dense):
            layers.append({"kind": "dense", "in": layer.in_dim, "out": layer.out_dim, "bias": layer.bias})
        elif isinstance(layer, Conv2D):
            layers.append({"kind": "conv2d", "in": layer.in_ch, "out": layer.out_ch,
                           "kernel": layer.kernel, "bias": layer.bias})
        elif isinstance(layer, MaxPool2x2):
            layers.append({"kind": "maxpool2x2"})
        elif isinstance(layer, ReLU):
            layers.append({"kind": "relu"})
        elif isinstance(layer, Flatten):
            layers.append({"kind": "flatten"})
        elif isinstance(layer, Dropout):
            layers.append({"kind": "dropout", "rate": layer.rate})
    shape = spec.input_shape
    return {"layers": layers,
            "input_shape": list(shape) if isinstance(shape, tuple) else shape,
            "num_classes": spec.num_classes}


def spec_from_dict(d: dict) -> NetworkSpec:
    layers: list[Layer] = []
    for entry in d["layers"]:
        kind = entry["kind"]
        if kind == "dense":
            layers.append(Dense(entry["in"], entry["out"], entry.get("bias", True)))
        elif kind == "conv2d":
            layers.append(Conv2D(entry["in"], entry["out"], entry.get("kernel", 5), entry.get("bias", True)))
        elif kind == "maxpool2x2":
            layers.append(MaxPool2x2())
        elif kind == "relu":
            layers.append(ReLU())
        elif kind == "flatten":
            layers.append(Flatten())
        elif kind == "dropout":
            layers.append(Dropout(entry["rate"]))
        else:
            raise ValueError(f"unknown layer kind {kind!r}")
    shape = d["input_shape"]
    return NetworkSpec(tuple(layers), tuple(shape) if isinstance(shape, list) else shape,
                       d["num_classes"])


# ---------------------------------------------------------------------------
# parameter serialization: magic "MPKP", version, then shape-prefixed tensors


PARAMS_MAGIC = b"MPKP"
PARAMS_VERSION = 1


def save_params(params: ModelParams, path) -> None:
    """Flat binary dump: header then per-tensor shape + little-endian float64."""
    with open(path, "wb") as f:
        f.write(PARAMS_MAGIC)
        f.write(struct.pack("<II", PARAMS_VERSION, len(params.arrays)))
        for a in params.arrays:
            f.write(struct.pack("<I", a.ndim))
            f.write(struct.pack(f"<{a.ndim}I", *a.shape))
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_params(path) -> ModelParams:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != PARAMS_MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        version, count = struct.unpack("<II", f.read(8))
        if version != PARAMS_VERSION:
            raise ValueError(f"unsupported params version {version}")
        arrays = []
        for _ in range(count):
            (ndim,) = struct.unpack("<I", f.read(4))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
            nbytes = 8 * int(np.prod(shape)) if ndim else 8
            raw = f.read(nbytes)
            if len(raw) != nbytes:
                raise ValueError(f"truncated params file {path}")
            arrays.append(np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
    return ModelParams(arrays)
