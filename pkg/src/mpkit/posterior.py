"""Posterior-sampling trainers and ensemble prediction.

Every ensemble algorithm here fits B independent members; member b of a run
with master seed s draws from three dedicated rng streams seeded by
(s, b, purpose), so a B=1 run embeds bitwise in a B=4 run and members may be
fitted in parallel without changing results.

Weighted-loss conventions: per-minibatch losses are averaged over the actual
batch length and resampling weights are rescaled to have mean one, so the
effective learning rate matches unweighted training; mixup pseudo-points
carry loss mass ratio relative to the (augmented) observations, with the
whole batch normalized by the combined mass.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .data import Dataset
from .network import (Dropout, ModelParams, NetworkSpec, NumericError, TrainConfig,
                      forward, forward_batch, init_params, load_params, sample_dropout_mask,
                      save_params, softmax, spec_from_dict, spec_to_dict, validate_params,
                      value_and_grad, zeros_like, sgd_step)
from .samplers import (AugmentationSet, BaseMeasure, WeightVector, mixup_arrays,
                       sample_base_measure, sample_bb_weights, sample_dp_weights,
                       sample_h_aug, sample_stabilized_bb_weights)

STREAM_INIT = 0
STREAM_WEIGHTS = 1
STREAM_TRAIN = 2
STREAM_EVAL = 3


class SeparationError(RuntimeError):
    """Training failed to reach 100% train accuracy within the epoch cap."""


def member_rng(seed: int, member: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, member, stream])


@dataclass(frozen=True)
class ConcentrationRatio:
    """Ratio of base-measure mass to observation mass; infinity is its own state."""

    value: float = 0.0
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            object.__setattr__(self, "value", 0.0)
        elif self.value < 0:
            raise ValueError("concentration ratio must be nonnegative")

    @staticmethod
    def inf() -> "ConcentrationRatio":
        return ConcentrationRatio(0.0, True)

    @property
    def is_zero(self) -> bool:
        return not self.infinite and self.value == 0.0

    def __str__(self):
        return "inf" if self.infinite else repr(self.value)


@dataclass(frozen=True)
class PredictiveConfig:
    """Settings of the augmented predictive distribution used by mixup training."""

    r: ConcentrationRatio = field(default_factory=ConcentrationRatio)
    alpha: float = 1.0
    t_mb: Optional[int] = None  # None: match the actual minibatch length
    aug: AugmentationSet = field(default_factory=AugmentationSet)

    def __post_init__(self):
        if not self.r.is_zero and self.alpha <= 0:
            raise ValueError("alpha must be positive when pseudo-points are drawn")
        if self.t_mb is not None and self.t_mb < 1:
            raise ValueError("t_mb must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    batch_losses: list[float]
    train_acc: Optional[float] = None

    @property
    def mean_loss(self) -> float:
        return float(np.mean(self.batch_losses)) if self.batch_losses else float("nan")


MemberLog = list[EpochRecord]


@dataclass
class Ensemble:
    """B fitted parameter sets sharing one architecture, plus provenance."""

    spec: NetworkSpec
    members: list[ModelParams]
    provenance: dict = field(default_factory=dict)
    logs: list[MemberLog] = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("an ensemble needs at least one member")
        for m in self.members:
            validate_params(m, self.spec)

    @property
    def num_members(self) -> int:
        return len(self.members)


# ---------------------------------------------------------------------------
# shared training machinery


def _spec_has_dropout(spec: NetworkSpec) -> bool:
    return any(isinstance(l, Dropout) and l.rate > 0 for l in spec.layers)


def train_accuracy(params: ModelParams, spec: NetworkSpec, dataset: Dataset,
                   chunk: int = 256) -> float:
    hard = dataset.class_indices
    hits = 0
    for i in range(0, len(dataset), chunk):
        logits = forward_batch(params, spec, dataset.features[i:i + chunk])
        hits += int((logits.argmax(axis=1) == hard[i:i + chunk]).sum())
    return hits / len(dataset)


def dataset_mean_loss(params: ModelParams, spec: NetworkSpec, dataset: Dataset,
                      chunk: int = 256) -> float:
    from .network import soft_cross_entropy_batch
    total = 0.0
    for i in range(0, len(dataset), chunk):
        logits = forward_batch(params, spec, dataset.features[i:i + chunk])
        total += float(soft_cross_entropy_batch(logits, dataset.labels[i:i + chunk]).sum())
    return total / len(dataset)


def _step(params, velocity, spec, xb, yb, wb, mask, cfg):
    """One SGD step on the weighted batch; returns new state and the batch loss."""
    losses, g = value_and_grad(params, spec, xb, yb, wb, mask)
    batch_loss = float(wb @ losses)
    if not np.isfinite(batch_loss):
        raise NumericError("non-finite batch loss")
    params, velocity = sgd_step(params, g, cfg, velocity)
    return params, velocity, batch_loss


def _augmented_batch(dataset: Dataset, idx: np.ndarray, aug: AugmentationSet,
                     rng: np.random.Generator):
    """Feature/label arrays for a minibatch with per-example augmentation."""
    if not aug:
        return dataset.features[idx], dataset.labels[idx]
    examples = [sample_h_aug(dataset[i], aug, rng) for i in idx]
    return np.stack([e.x for e in examples]), np.stack([e.y for e in examples])


def _epoch_indices(n: int, n_mb: int, rng: np.random.Generator) -> list[np.ndarray]:
    perm = rng.permutation(n)
    return [perm[i:i + n_mb] for i in range(0, n, n_mb)]


class _StopTracker:
    """Implements the fixed / train-to-separation-plus-N stopping rules."""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.separated_at: Optional[int] = None

    def need_accuracy(self) -> bool:
        return self.cfg.stop_rule == "separable"

    def should_stop(self, completed: int, acc: Optional[float]) -> bool:
        if self.cfg.stop_rule == "fixed":
            return completed >= self.cfg.epochs
        if self.separated_at is None and acc is not None and acc >= 1.0:
            self.separated_at = completed
        if self.separated_at is not None:
            return completed >= self.separated_at + self.cfg.extra_epochs
        if completed >= self.cfg.epochs:
            raise SeparationError(
                f"did not reach 100% train accuracy within the {self.cfg.epochs}-epoch cap")
        return False


def train_member_erm(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig,
                     loss_weights: Optional[WeightVector] = None,
                     init: Optional[ModelParams] = None,
                     rng: Optional[np.random.Generator] = None,
                     log: Optional[MemberLog] = None,
                     on_epoch: Optional[Callable[[int, ModelParams], None]] = None) -> ModelParams:
    """SGD on the (optionally re-weighted) empirical loss.

    Per-example weights default to one; per-batch losses are normalized by
    the actual batch length.  Dropout layers in the spec are activated with a
    fresh mask every step.  Training order, initialization and masks are all
    driven by ``rng``/``cfg.seed``, so identical inputs give bit-identical
    parameters.
    """
    n = len(dataset)
    if loss_weights is not None:
        weights = np.asarray(loss_weights.values, dtype=np.float64)
        if len(weights) != n:
            raise ValueError(f"got {len(weights)} weights for {n} examples")
    else:
        weights = np.ones(n)
    params = init.copy() if init is not None else init_params(spec, [cfg.seed, 0, STREAM_INIT])
    rng = rng if rng is not None else member_rng(cfg.seed, 0, STREAM_TRAIN)
    velocity = zeros_like(params)
    use_dropout = _spec_has_dropout(spec)
    stop = _StopTracker(cfg)
    epoch = 0
    if cfg.stop_rule == "fixed" and cfg.epochs == 0:
        return params
    while True:
        batch_losses = []
        for idx in _epoch_indices(n, cfg.minibatch_size, rng):
            mask = sample_dropout_mask(spec, None, rng) if use_dropout else None
            wb = weights[idx] / len(idx)
            try:
                params, velocity, bl = _step(params, velocity, spec,
                                             dataset.features[idx], dataset.labels[idx],
                                             wb, mask, cfg)
            except NumericError as e:
                raise NumericError(f"{e} (epoch {epoch})") from None
            batch_losses.append(bl)
        acc = train_accuracy(params, spec, dataset) if stop.need_accuracy() else None
        if log is not None:
            log.append(EpochRecord(epoch, batch_losses, acc))
        epoch += 1
        if on_epoch is not None:
            on_epoch(epoch, params)
        if stop.should_stop(epoch, acc):
            return params


def train_member_mixup_mp(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig,
                          pcfg: PredictiveConfig,
                          init: ModelParams, rng: np.random.Generator,
                          log: Optional[MemberLog] = None,
                          on_epoch: Optional[Callable[[int, ModelParams], None]] = None) -> ModelParams:
    """One member of the augmentation-based predictive-resampling ensemble.

    Per batch: every real point is replaced by a random augmentation of
    itself, t_mb pseudo-points are mixup draws over the augmented batch, and
    the step loss is the expected loss under the combined measure, which
    assigns mass 1 to the m augmented observations and mass ratio*m spread
    over the pseudo-points:

        [sum(real)/m + ratio * sum(pseudo)/t_mb] / (1 + ratio)

    Normalizing by the total mass keeps the gradient scale (and hence the
    usable learning rate) independent of ratio.  ratio=0 skips pseudo
    sampling entirely and reduces to the plain empirical loss; ratio=inf
    drops the real-data term and averages the pseudo losses, reducing to
    plain mixup training.
    """
    r = pcfg.r
    n = len(dataset)
    params = init.copy()
    velocity = zeros_like(params)
    use_dropout = _spec_has_dropout(spec)
    stop = _StopTracker(cfg)
    epoch = 0
    if cfg.stop_rule == "fixed" and cfg.epochs == 0:
        return params
    while True:
        batch_losses = []
        for idx in _epoch_indices(n, cfg.minibatch_size, rng):
            m = len(idx)
            aug_x, aug_y = _augmented_batch(dataset, idx, pcfg.aug, rng)
            if not r.is_zero:
                t = pcfg.t_mb if pcfg.t_mb is not None else m
                px, py = mixup_arrays(aug_x, aug_y, t, pcfg.alpha, rng)
            mask = sample_dropout_mask(spec, None, rng) if use_dropout else None
            if r.infinite:
                xb, yb = px, py
                wb = np.full(t, 1.0 / t)
            elif r.is_zero:
                xb, yb = aug_x, aug_y
                wb = np.full(m, 1.0 / m)
            else:
                xb = np.concatenate([aug_x, px])
                yb = np.concatenate([aug_y, py])
                total = 1.0 + r.value
                wb = np.concatenate([np.full(m, 1.0 / (m * total)),
                                     np.full(t, r.value / (t * total))])
            try:
                params, velocity, bl = _step(params, velocity, spec, xb, yb, wb, mask, cfg)
            except NumericError as e:
                raise NumericError(f"{e} (epoch {epoch})") from None
            batch_losses.append(bl)
        acc = train_accuracy(params, spec, dataset) if stop.need_accuracy() else None
        if log is not None:
            log.append(EpochRecord(epoch, batch_losses, acc))
        epoch += 1
        if on_epoch is not None:
            on_epoch(epoch, params)
        if stop.should_stop(epoch, acc):
            return params


def train_member_mixup(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig,
                       alpha: float, aug: AugmentationSet, t_mb: Optional[int],
                       init: ModelParams, rng: np.random.Generator,
                       log: Optional[MemberLog] = None) -> ModelParams:
    """Plain mixup training: every step fits t_mb mixup draws over the batch."""
    n = len(dataset)
    params = init.copy()
    velocity = zeros_like(params)
    use_dropout = _spec_has_dropout(spec)
    stop = _StopTracker(cfg)
    epoch = 0
    if cfg.stop_rule == "fixed" and cfg.epochs == 0:
        return params
    while True:
        batch_losses = []
        for idx in _epoch_indices(n, cfg.minibatch_size, rng):
            aug_x, aug_y = _augmented_batch(dataset, idx, aug, rng)
            t = t_mb if t_mb is not None else len(idx)
            xb, yb = mixup_arrays(aug_x, aug_y, t, alpha, rng)
            mask = sample_dropout_mask(spec, None, rng) if use_dropout else None
            wb = np.full(t, 1.0 / t)
            try:
                params, velocity, bl = _step(params, velocity, spec, xb, yb, wb, mask, cfg)
            except NumericError as e:
                raise NumericError(f"{e} (epoch {epoch})") from None
            batch_losses.append(bl)
        acc = train_accuracy(params, spec, dataset) if stop.need_accuracy() else None
        if log is not None:
            log.append(EpochRecord(epoch, batch_losses, acc))
        epoch += 1
        if stop.should_stop(epoch, acc):
            return params


# ---------------------------------------------------------------------------
# ensemble trainers


def _run_members(worker, payloads, jobs: int):
    if jobs <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=min(jobs, len(payloads))) as pool:
        return list(pool.map(worker, payloads))


def _de_member(payload):
    dataset, spec, cfg, b, dtype = payload
    log: MemberLog = []
    init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
    p = train_member_erm(dataset, spec, cfg, None, init,
                         rng=member_rng(cfg.seed, b, STREAM_TRAIN), log=log)
    return p, log


def train_de(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig, num_members: int = 4,
             dtype=np.float64, jobs: int = 1) -> Ensemble:
    """Deep ensemble: independently initialized members on the unweighted loss."""
    results = _run_members(_de_member, [(dataset, spec, cfg, b, dtype) for b in range(num_members)], jobs)
    return Ensemble(spec, [p for p, _ in results],
                    {"algorithm": "de", "seed": cfg.seed, "num_members": num_members},
                    [lg for _, lg in results])


def _bb_member(payload):
    dataset, spec, cfg, b, dtype, stabilized, bound_m, donor_params = payload
    n = len(dataset)
    wrng = member_rng(cfg.seed, b, STREAM_WEIGHTS)
    wv = (sample_stabilized_bb_weights(n, bound_m, wrng) if stabilized
          else sample_bb_weights(n, wrng))
    if donor_params is not None:
        init = donor_params.astype(dtype)
    else:
        init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
    log: MemberLog = []
    p = train_member_erm(dataset, spec, cfg, wv.scaled(n), init,
                         rng=member_rng(cfg.seed, b, STREAM_TRAIN), log=log)
    return p, log


def train_bb(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig, num_members: int = 4,
             stabilized: bool = False, bound_m: Optional[float] = None,
             init_mode: str = "random", donor: Optional[Ensemble] = None,
             dtype=np.float64, jobs: int = 1) -> Ensemble:
    """Bayesian-bootstrap ensemble: one Dirichlet weight draw per member.

    Weights are rescaled by n so they average one.  ``init_mode='from-ensemble'``
    starts member b from the donor ensemble's member b (the pretrained-ensemble
    protocol); seeds stay paired with a deep ensemble run of the same config.
    """
    if init_mode not in ("random", "from-ensemble"):
        raise ValueError(f"unknown init_mode {init_mode!r}")
    if init_mode == "from-ensemble":
        if donor is None or donor.num_members != num_members:
            raise ValueError("from-ensemble initialization needs a donor with matching size")
    if stabilized and (bound_m is None or bound_m <= len(dataset)):
        raise ValueError("stabilized weights need bound_m > n")
    payloads = [(dataset, spec, cfg, b, dtype, stabilized, bound_m,
                 donor.members[b] if init_mode == "from-ensemble" else None)
                for b in range(num_members)]
    results = _run_members(_bb_member, payloads, jobs)
    return Ensemble(spec, [p for p, _ in results],
                    {"algorithm": "bb", "seed": cfg.seed, "num_members": num_members,
                     "stabilized": stabilized, "bound_m": bound_m, "init_mode": init_mode},
                    [lg for _, lg in results])


def _dp_member(payload):
    dataset, bm, c, t, spec, cfg, b, dtype = payload
    n = len(dataset)
    wrng = member_rng(cfg.seed, b, STREAM_WEIGHTS)
    # pseudo data first, then weights; with c=0 the tail carries zero mass and
    # the run degenerates to a Bayesian-bootstrap member on the same streams
    if c > 0:
        pseudo = [sample_base_measure(bm, dataset, wrng) for _ in range(t)]
    else:
        pseudo = []
    wv = sample_dp_weights(n, c, t, wrng)
    if pseudo:
        train_set = Dataset(
            np.concatenate([dataset.features, np.stack([e.x for e in pseudo])]),
            np.concatenate([dataset.labels, np.stack([e.y for e in pseudo])]))
        weights = wv.scaled(n + c)
    else:
        train_set = dataset
        weights = WeightVector(wv.values[:n], sums_to_one=True).scaled(n + c)
    log: MemberLog = []
    init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
    p = train_member_erm(train_set, spec, cfg, weights, init,
                         rng=member_rng(cfg.seed, b, STREAM_TRAIN), log=log)
    return p, log


def train_dp_mp(dataset: Dataset, bm: BaseMeasure, c: float, t: int,
                spec: NetworkSpec, cfg: TrainConfig, num_members: int = 4,
                dtype=np.float64, jobs: int = 1) -> Ensemble:
    """Posterior sampling with pseudo-observations from a base measure.

    Per member: draw t pseudo-points, draw Dirichlet(1..1, c/t..c/t) weights
    over the n+t points (rescaled by n+c so magnitudes match unweighted
    training) and minimize the weighted loss.
    """
    if t < 1:
        raise ValueError("pseudo-count t must be >= 1")
    if c < 0:
        raise ValueError("concentration c must be nonnegative")
    payloads = [(dataset, bm, c, t, spec, cfg, b, dtype) for b in range(num_members)]
    results = _run_members(_dp_member, payloads, jobs)
    return Ensemble(spec, [p for p, _ in results],
                    {"algorithm": "dp-mp", "seed": cfg.seed, "num_members": num_members,
                     "c": c, "t": t, "base_measure": repr(bm)},
                    [lg for _, lg in results])


def _mixup_mp_member(payload):
    dataset, spec, cfg, pcfg, b, dtype = payload
    log: MemberLog = []
    init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
    p = train_member_mixup_mp(dataset, spec, cfg, pcfg, init,
                              member_rng(cfg.seed, b, STREAM_TRAIN), log=log)
    return p, log


def train_mixup_mp(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig,
                   pcfg: PredictiveConfig, num_members: int = 4,
                   dtype=np.float64, jobs: int = 1) -> Ensemble:
    """Ensemble over the augment-plus-mixup predictive distribution."""
    payloads = [(dataset, spec, cfg, pcfg, b, dtype) for b in range(num_members)]
    results = _run_members(_mixup_mp_member, payloads, jobs)
    return Ensemble(spec, [p for p, _ in results],
                    {"algorithm": "mixup-mp", "seed": cfg.seed, "num_members": num_members,
                     "r": str(pcfg.r), "alpha": pcfg.alpha, "t_mb": pcfg.t_mb},
                    [lg for _, lg in results])


def _mixup_member(payload):
    dataset, spec, cfg, alpha, aug, t_mb, b, dtype = payload
    log: MemberLog = []
    init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
    p = train_member_mixup(dataset, spec, cfg, alpha, aug, t_mb, init,
                           member_rng(cfg.seed, b, STREAM_TRAIN), log=log)
    return p, log


def train_mixup(dataset: Dataset, spec: NetworkSpec, cfg: TrainConfig, alpha: float,
                aug: AugmentationSet = AugmentationSet(), t_mb: Optional[int] = None,
                num_members: int = 1, dtype=np.float64, jobs: int = 1) -> Ensemble:
    """Mixup training (one member) or a mixup ensemble (several members)."""
    payloads = [(dataset, spec, cfg, alpha, aug, t_mb, b, dtype) for b in range(num_members)]
    results = _run_members(_mixup_member, payloads, jobs)
    return Ensemble(spec, [p for p, _ in results],
                    {"algorithm": "mixup", "seed": cfg.seed, "num_members": num_members,
                     "alpha": alpha, "t_mb": t_mb},
                    [lg for _, lg in results])


# ---------------------------------------------------------------------------
# prediction


def _canonical_mean(stack: np.ndarray) -> np.ndarray:
    # sort each class column before reducing so the result is bitwise
    # invariant under permutations of the contributing networks
    ordered = np.sort(stack, axis=0)
    return np.add.reduce(ordered, axis=0) / stack.shape[0]


def ensemble_predict(ens: Ensemble, x: np.ndarray,
                     dropout: Optional[tuple[float, int, np.random.Generator]] = None) -> np.ndarray:
    """Mean of the member softmax outputs for a single input.

    With ``dropout=(rate, passes, rng)`` each member contributes ``passes``
    stochastically masked forward passes (implicit-ensemble inference; a
    one-member ensemble then gives plain Monte Carlo dropout).
    """
    contribs = []
    for m in ens.members:
        if dropout is None:
            contribs.append(softmax(forward(m, ens.spec, x)))
        else:
            rate, passes, rng = dropout
            for _ in range(passes):
                mask = sample_dropout_mask(ens.spec, rate, rng)
                contribs.append(softmax(forward(m, ens.spec, x, mask)))
    return _canonical_mean(np.stack(contribs))


def predict_proba(ens: Ensemble, features: np.ndarray,
                  dropout: Optional[tuple[float, int, np.random.Generator]] = None,
                  chunk: int = 256) -> np.ndarray:
    """Vectorized ensemble probabilities for a feature batch (n, ...).

    Masks for dropout inference are drawn once per (member, pass) and applied
    to every example, i.e. each pass evaluates one realized subnetwork.
    """
    n = len(features)
    contribs = []
    if dropout is None:
        passes = [(m, None) for m in ens.members]
    else:
        rate, count, rng = dropout
        passes = [(m, sample_dropout_mask(ens.spec, rate, rng))
                  for m in ens.members for _ in range(count)]
    for m, mask in passes:
        rows = [softmax(forward_batch(m, ens.spec, features[i:i + chunk], mask))
                for i in range(0, n, chunk)]
        contribs.append(np.concatenate(rows))
    return _canonical_mean(np.stack(contribs))


# ---------------------------------------------------------------------------
# ensemble directory format: manifest.json + one binary params file per member


def save_ensemble(ens: Ensemble, out_dir, force: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    if manifest_path.exists() and not force:
        raise FileExistsError(f"{manifest_path} exists; pass force=True to overwrite")
    member_files = [f"member_{b:03d}.mpkp" for b in range(ens.num_members)]
    for fname, params in zip(member_files, ens.members):
        save_params(params, out / fname)
    for b, log in enumerate(ens.logs):
        with open(out / f"member_{b:03d}_log.csv", "w") as f:
            f.write("epoch,mean_loss,train_acc\n")
            for rec in log:
                acc = "" if rec.train_acc is None else repr(rec.train_acc)
                f.write(f"{rec.epoch},{repr(rec.mean_loss)},{acc}\n")
    dtype = str(ens.members[0].dtype)
    manifest = {
        "format": "mpkit-ensemble",
        "version": 1,
        "num_members": ens.num_members,
        "dtype": dtype,
        "spec": spec_to_dict(ens.spec),
        "provenance": ens.provenance,
        "members": member_files,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_ensemble(path) -> Ensemble:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    if manifest.get("format") != "mpkit-ensemble":
        raise ValueError(f"{path} is not an ensemble directory")
    spec = spec_from_dict(manifest["spec"])
    dtype = np.dtype(manifest.get("dtype", "float64"))
    members = [load_params(path / f).astype(dtype) for f in manifest["members"]]
    return Ensemble(spec, members, manifest.get("provenance", {}))
