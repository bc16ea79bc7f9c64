"""Samplers for predictive-distribution ingredients.

Dirichlet-based resampling weights (flat, stabilized, and with a pseudo-point
tail block), Beta mixing coefficients, mixup draws, label-preserving feature
augmentations and the synthetic base measures.  Every sampler is a pure
function of its inputs and an explicit ``numpy.random.Generator``; callers
own the rng streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import LabeledExample


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative example weights plus a tag telling whether they sum to one."""

    values: np.ndarray
    sums_to_one: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.min() < 0:
            raise ValueError("weights must be nonnegative")

    def __len__(self):
        return len(self.values)

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(self.values * c, sums_to_one=False)


def sample_bb_weights(n: int, rng: np.random.Generator) -> WeightVector:
    """Flat Dirichlet(1,...,1) draw via unit exponentials normalized by their sum."""
    if n < 1:
        raise ValueError("need at least one observation")
    e = rng.standard_exponential(n)
    return WeightVector(e / e.sum())


def sample_stabilized_bb_weights(n: int, bound_m: float, rng: np.random.Generator) -> WeightVector:
    """Flat Dirichlet draw shifted by eta = 1/(bound_m - n), then renormalized.

    The shift bounds every weight below by eta/(1 + n*eta) > 0.  The shifted
    vector is renormalized to sum to one (the raw shift does not preserve the
    total mass).
    """
    if bound_m <= n:
        raise ValueError(f"bound_m must exceed n, got bound_m={bound_m} n={n}")
    eta = 1.0 / (bound_m - n)
    w = sample_bb_weights(n, rng).values
    return WeightVector((w + eta) / (1.0 + n * eta))


def sample_dp_weights(n: int, c: float, t: int, rng: np.random.Generator) -> WeightVector:
    """Dirichlet(1,..,1, c/t,..,c/t) over n observations plus t pseudo-points.

    With c=0 the tail block is a point mass at zero: the tail weights are
    exactly 0 and the first n entries reproduce a flat-Dirichlet draw from
    the same rng state bitwise.
    """
    if n < 1:
        raise ValueError("need at least one observation")
    if t < 1:
        raise ValueError("pseudo-count t must be >= 1")
    if c < 0:
        raise ValueError("concentration c must be nonnegative")
    head = rng.standard_exponential(n)
    tail = rng.gamma(c / t, size=t) if c > 0 else np.zeros(t)
    # block-wise total keeps the c=0 case bitwise equal to a bootstrap draw
    total = head.sum() + tail.sum()
    return WeightVector(np.concatenate([head, tail]) / total)


def sample_beta(alpha: float, rng: np.random.Generator) -> float:
    """Beta(alpha, alpha) via the ratio of two Gamma(alpha, 1) draws."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    while True:
        g1 = rng.gamma(alpha)
        g2 = rng.gamma(alpha)
        if g1 + g2 > 0.0:  # guards against simultaneous underflow at tiny alpha
            return float(g1 / (g1 + g2))


# ---------------------------------------------------------------------------
# feature augmentations (label-preserving, shape-preserving)


@dataclass(frozen=True)
class PadCrop:
    """Zero-pad by ``pad`` pixels on every side, then crop a random window."""

    pad: int


@dataclass(frozen=True)
class HorizontalFlip:
    p: float = 0.5


@dataclass(frozen=True)
class GaussianJitter:
    """Additive isotropic N(0, var) noise on every feature coordinate."""

    var: float


@dataclass(frozen=True)
class Identity:
    pass


Transform = PadCrop | HorizontalFlip | GaussianJitter | Identity


@dataclass(frozen=True)
class AugmentationSet:
    """Ordered feature transforms applied in sequence; empty means identity."""

    transforms: tuple[Transform, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "transforms", tuple(self.transforms))

    def __bool__(self):
        return len(self.transforms) > 0


def _apply_transform(t: Transform, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if isinstance(t, Identity):
        return x
    if isinstance(t, HorizontalFlip):
        if rng.random() < t.p:
            return x[..., ::-1].copy()
        return x
    if isinstance(t, GaussianJitter):
        return x + rng.normal(0.0, np.sqrt(t.var), x.shape)
    if isinstance(t, PadCrop):
        if x.ndim != 3:
            raise ValueError("PadCrop expects (channels, height, width) features")
        p = t.pad
        c, h, w = x.shape
        padded = np.zeros((c, h + 2 * p, w + 2 * p), dtype=x.dtype)
        padded[:, p:p + h, p:p + w] = x
        oi = int(rng.integers(2 * p + 1))
        oj = int(rng.integers(2 * p + 1))
        return padded[:, oi:oi + h, oj:oj + w].copy()
    raise TypeError(f"unknown transform {t!r}")


def sample_h_aug(z: LabeledExample, aug: AugmentationSet, rng: np.random.Generator) -> LabeledExample:
    """Randomly transform the features of ``z``; the label is never touched.

    An empty augmentation set returns the input unchanged (the point-mass
    case), consuming no randomness.
    """
    if not aug:
        return z
    x = z.x
    for t in aug.transforms:
        x = _apply_transform(t, x, rng)
    if x.shape != z.x.shape:
        raise ValueError("augmentation changed the feature shape")
    return LabeledExample(x, z.y)


# ---------------------------------------------------------------------------
# mixup


def mixup_pair(z_i: LabeledExample, z_j: LabeledExample, lam: float) -> LabeledExample:
    """Convex combination of two examples: features and soft labels alike."""
    if z_i.x.shape != z_j.x.shape or z_i.y.shape != z_j.y.shape:
        raise ValueError("mixup operands must share feature shape and class count")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0,1], got {lam}")
    return LabeledExample(lam * z_i.x + (1.0 - lam) * z_j.x,
                          lam * z_i.y + (1.0 - lam) * z_j.y)


def sample_mixup(data: Sequence[LabeledExample], alpha: float, rng: np.random.Generator) -> LabeledExample:
    """One mixup draw: i, j uniform with replacement, fresh Beta(alpha, alpha) lambda."""
    n = len(data)
    if n == 0:
        raise ValueError("cannot mixup an empty dataset")
    i = int(rng.integers(n))
    j = int(rng.integers(n))
    lam = sample_beta(alpha, rng)
    return mixup_pair(data[i], data[j], lam)


def mixup_arrays(x: np.ndarray, y: np.ndarray, t: int, alpha: float,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """t independent mixup draws over stacked features/labels, vectorized.

    Pair indices and the Beta(alpha, alpha) coefficient are resampled for
    every draw; block sampling only changes the rng layout, not the law.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    m = len(x)
    if m == 0:
        raise ValueError("cannot mixup an empty batch")
    i = rng.integers(m, size=t)
    j = rng.integers(m, size=t)
    g1 = rng.gamma(alpha, size=t)
    g2 = rng.gamma(alpha, size=t)
    total = g1 + g2
    while (total == 0.0).any():  # simultaneous underflow at tiny alpha
        bad = total == 0.0
        g1[bad] = rng.gamma(alpha, size=int(bad.sum()))
        g2[bad] = rng.gamma(alpha, size=int(bad.sum()))
        total = g1 + g2
    lam = g1 / total
    lam_x = lam.reshape((t,) + (1,) * (x.ndim - 1))
    return (lam_x * x[i] + (1.0 - lam_x) * x[j],
            lam[:, None] * y[i] + (1.0 - lam[:, None]) * y[j])


def sample_pseudo_batch(aug_batch: Sequence[LabeledExample], t_mb: int, alpha: float,
                        rng: np.random.Generator) -> list[LabeledExample]:
    """t_mb independent mixup draws over an (already augmented) minibatch."""
    if len(aug_batch) == 0:
        raise ValueError("pseudo-batch source must be nonempty")
    if t_mb == 0:
        return []
    x = np.stack([z.x for z in aug_batch])
    y = np.stack([z.y for z in aug_batch])
    px, py = mixup_arrays(x, y, t_mb, alpha, rng)
    return [LabeledExample(px[k], py[k]) for k in range(t_mb)]


# ---------------------------------------------------------------------------
# base measures for pseudo-observations


@dataclass(frozen=True)
class PerturbedEmpirical:
    """A random observation with N(0, var) noise added to its features."""

    var: float


@dataclass(frozen=True)
class UniformBox:
    """Features uniform in a per-coordinate box, label uniform over K one-hots."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in np.atleast_1d(self.lower)))
        object.__setattr__(self, "upper", tuple(float(v) for v in np.atleast_1d(self.upper)))
        if len(self.lower) != len(self.upper):
            raise ValueError("lower/upper bounds must have equal length")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")


@dataclass(frozen=True)
class MixupMeasure:
    """Mixup over augmented observations, used as a data-driven base measure."""

    alpha: float
    aug: AugmentationSet = field(default_factory=AugmentationSet)


BaseMeasure = PerturbedEmpirical | UniformBox | MixupMeasure


def sample_base_measure(bm: BaseMeasure, data: Sequence[LabeledExample],
                        rng: np.random.Generator) -> LabeledExample:
    """One pseudo-observation from the given base measure."""
    if isinstance(bm, UniformBox):
        lo = np.asarray(bm.lower)
        hi = np.asarray(bm.upper)
        x = lo + rng.random(len(lo)) * (hi - lo)
        y = np.zeros(bm.num_classes)
        y[int(rng.integers(bm.num_classes))] = 1.0
        return LabeledExample(x, y)
    if len(data) == 0:
        raise ValueError("data-driven base measures need a nonempty dataset")
    if isinstance(bm, PerturbedEmpirical):
        z = data[int(rng.integers(len(data)))]
        if bm.var == 0.0:
            return z
        return LabeledExample(z.x + rng.normal(0.0, np.sqrt(bm.var), z.x.shape), z.y)
    if isinstance(bm, MixupMeasure):
        i = int(rng.integers(len(data)))
        j = int(rng.integers(len(data)))
        z_i = sample_h_aug(data[i], bm.aug, rng)
        z_j = sample_h_aug(data[j], bm.aug, rng)
        lam = sample_beta(bm.alpha, rng)
        return mixup_pair(z_i, z_j, lam)
    raise TypeError(f"unknown base measure {bm!r}")
