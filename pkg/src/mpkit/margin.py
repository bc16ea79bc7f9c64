"""Normalized-margin diagnostics and the paired ensemble-equivalency harness.

For a bias-free ReLU network whose output scales as c**L when the parameters
are scaled by c, the minimum classification margin divided by ||theta||_2**L
is invariant under positive rescaling of the parameters, which makes it a
scale-free progress measure for training on separable data.  The harness
trains deep-ensemble members and Bayesian-bootstrap members in matched pairs
(same initialization and data order) and reports per-member test metrics,
ensemble calibration and margin traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .metrics import CalibrationReport, evaluate
from .network import (ModelParams, NetworkSpec, TrainConfig, forward_batch,
                      homogeneity_degree, init_params)
from .posterior import (Ensemble, STREAM_INIT, STREAM_TRAIN, STREAM_WEIGHTS, member_rng,
                        predict_proba, train_accuracy, train_member_erm)
from .samplers import sample_bb_weights


def margins(params: ModelParams, spec: NetworkSpec, dataset: Dataset) -> np.ndarray:
    """Per-example classification margins under the given parameters.

    Multi-output networks use the true-class logit minus the best other
    logit; single-output two-class networks use the signed output with class
    0 mapped to -1 and class 1 to +1.
    """
    logits = forward_batch(params, spec, dataset.features)
    hard = dataset.class_indices
    if logits.shape[1] == 1:
        if dataset.num_classes != 2:
            raise ValueError("single-output margins need a two-class dataset")
        sign = 2.0 * hard - 1.0
        return sign * logits[:, 0]
    true_logit = logits[np.arange(len(dataset)), hard]
    masked = logits.copy()
    masked[np.arange(len(dataset)), hard] = -np.inf
    return true_logit - masked.max(axis=1)


def normalized_margin(params: ModelParams, spec: NetworkSpec, dataset: Dataset) -> float:
    """min_i margin_i / ||theta||_2**L; requires a bias-free ReLU architecture."""
    degree = homogeneity_degree(spec)
    if degree is None:
        raise ValueError("normalized margin needs a homogeneous (bias-free) network")
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    gamma_min = float(margins(params, spec, dataset).min())
    return gamma_min / params.norm() ** degree


@dataclass(frozen=True)
class MarginPoint:
    epoch: int
    gamma_min: float
    param_norm: float
    normalized: float
    train_acc: float


MarginTrace = list[MarginPoint]


def margin_point(params: ModelParams, spec: NetworkSpec, dataset: Dataset, epoch: int) -> MarginPoint:
    degree = homogeneity_degree(spec)
    if degree is None:
        raise ValueError("margin traces need a homogeneous (bias-free) network")
    logits = forward_batch(params, spec, dataset.features)
    hard = dataset.class_indices
    if logits.shape[1] == 1:
        per_example = (2.0 * hard - 1.0) * logits[:, 0]
        acc = float(((logits[:, 0] > 0) == (hard == 1)).mean())
    else:
        true_logit = logits[np.arange(len(dataset)), hard]
        masked = logits.copy()
        masked[np.arange(len(dataset)), hard] = -np.inf
        per_example = true_logit - masked.max(axis=1)
        acc = float((logits.argmax(axis=1) == hard).mean())
    g = float(per_example.min())
    norm = params.norm()
    return MarginPoint(epoch, g, norm, g / norm ** degree, acc)


class _MarginTracer:
    """Per-epoch callback recording margin checkpoints every N epochs."""

    def __init__(self, spec: NetworkSpec, dataset: Dataset, every: int):
        self.spec = spec
        self.dataset = dataset
        self.every = every
        self.trace: MarginTrace = []
        self.last_epoch = 0

    def __call__(self, epoch: int, params: ModelParams):
        self.last_epoch = epoch
        if epoch % self.every == 0:
            self.trace.append(margin_point(params, self.spec, self.dataset, epoch))

    def finish(self, params: ModelParams) -> MarginTrace:
        if not self.trace or self.trace[-1].epoch != self.last_epoch:
            self.trace.append(margin_point(params, self.spec, self.dataset, self.last_epoch))
        return self.trace


@dataclass
class MemberResult:
    member: int
    test_acc: float
    test_nll: float
    final_train_acc: float
    margin_trace: MarginTrace = field(default_factory=list)


@dataclass
class EquivalencyReport:
    mode: str
    de_members: list[MemberResult]
    bb_members: list[MemberResult]
    de_report: CalibrationReport
    bb_report: CalibrationReport
    de_ensemble: Ensemble
    bb_ensemble: Ensemble

    def scatter_rows(self) -> list[dict]:
        rows = []
        for d, b in zip(self.de_members, self.bb_members):
            rows.append({"member": d.member, "de_acc": d.test_acc, "bb_acc": b.test_acc,
                         "de_loss": d.test_nll, "bb_loss": b.test_nll})
        return rows

    def to_dict(self) -> dict:
        def member_dict(m: MemberResult) -> dict:
            return {"member": m.member, "test_acc": m.test_acc, "test_nll": m.test_nll,
                    "final_train_acc": m.final_train_acc,
                    "margin_trace": [{"epoch": p.epoch, "gamma_min": p.gamma_min,
                                      "param_norm": p.param_norm, "normalized": p.normalized,
                                      "train_acc": p.train_acc} for p in m.margin_trace]}
        return {"mode": self.mode,
                "de": {"ensemble": self.de_report.to_dict(),
                       "members": [member_dict(m) for m in self.de_members]},
                "bb": {"ensemble": self.bb_report.to_dict(),
                       "members": [member_dict(m) for m in self.bb_members]}}


def _member_metrics(params: ModelParams, spec: NetworkSpec, member: int,
                    train_ds: Dataset, test_ds: Dataset, trace: MarginTrace) -> MemberResult:
    probs = predict_proba(Ensemble(spec, [params]), test_ds.features)
    rep = evaluate(probs, test_ds.class_indices)
    return MemberResult(member, rep.acc, rep.nll, train_accuracy(params, spec, train_ds), trace)


def run_equivalency_experiment(train_ds: Dataset, test_ds: Dataset, spec: NetworkSpec,
                               cfg: TrainConfig, num_members: int = 4,
                               mode: str = "de-init",
                               checkpoint_every: int = 10,
                               dtype=np.float64) -> EquivalencyReport:
    """Train matched deep-ensemble and Bayesian-bootstrap members and compare.

    mode="random-paired": member b of both ensembles starts from the same
    random initialization and data order; both train to 100% train accuracy
    plus ``cfg.extra_epochs`` (the epoch cap aborts the experiment if
    separation is never reached).  mode="de-init": the bootstrap members are
    initialized from the fitted deep-ensemble members and train
    ``cfg.extra_epochs`` further epochs with their weighted loss.
    """
    if mode not in ("random-paired", "de-init"):
        raise ValueError(f"unknown mode {mode!r}")
    if homogeneity_degree(spec) is None:
        raise ValueError("equivalency experiment expects a bias-free (homogeneous) network")
    n = len(train_ds)

    de_members: list[MemberResult] = []
    de_params: list[ModelParams] = []
    for b in range(num_members):
        tracer = _MarginTracer(spec, train_ds, checkpoint_every)
        init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
        p = train_member_erm(train_ds, spec, cfg, None, init,
                             rng=member_rng(cfg.seed, b, STREAM_TRAIN), on_epoch=tracer)
        de_params.append(p)
        de_members.append(_member_metrics(p, spec, b, train_ds, test_ds, tracer.finish(p)))

    bb_members: list[MemberResult] = []
    bb_params: list[ModelParams] = []
    for b in range(num_members):
        wv = sample_bb_weights(n, member_rng(cfg.seed, b, STREAM_WEIGHTS)).scaled(n)
        tracer = _MarginTracer(spec, train_ds, checkpoint_every)
        if mode == "random-paired":
            init = init_params(spec, [cfg.seed, b, STREAM_INIT], dtype)
            bb_cfg = cfg
        else:
            init = de_params[b]
            bb_cfg = TrainConfig(learning_rate=cfg.learning_rate, momentum=cfg.momentum,
                                 weight_decay=cfg.weight_decay, epochs=cfg.extra_epochs,
                                 minibatch_size=cfg.minibatch_size, seed=cfg.seed,
                                 stop_rule="fixed")
        p = train_member_erm(train_ds, spec, bb_cfg, wv, init,
                             rng=member_rng(cfg.seed, b, STREAM_TRAIN), on_epoch=tracer)
        bb_params.append(p)
        bb_members.append(_member_metrics(p, spec, b, train_ds, test_ds, tracer.finish(p)))

    de_ens = Ensemble(spec, de_params, {"algorithm": "de", "seed": cfg.seed,
                                        "num_members": num_members})
    bb_ens = Ensemble(spec, bb_params, {"algorithm": "bb", "seed": cfg.seed,
                                        "num_members": num_members, "init_mode": mode})
    de_rep = evaluate(predict_proba(de_ens, test_ds.features), test_ds.class_indices)
    bb_rep = evaluate(predict_proba(bb_ens, test_ds.features), test_ds.class_indices)
    return EquivalencyReport(mode, de_members, bb_members, de_rep, bb_rep, de_ens, bb_ens)


def write_equivalency_outputs(report: EquivalencyReport, out_dir) -> None:
    """report.json plus the paired-member scatter CSV."""
    from pathlib import Path
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    with open(out / "scatter.csv", "w") as f:
        f.write("member,de_acc,bb_acc,de_loss,bb_loss\n")
        for row in report.scatter_rows():
            f.write(f"{row['member']},{repr(row['de_acc'])},{repr(row['bb_acc'])},"
                    f"{repr(row['de_loss'])},{repr(row['bb_loss'])}\n")
    with open(out / "margins.csv", "w") as f:
        f.write("method,member,epoch,gamma_min,param_norm,normalized_margin,train_acc\n")
        for tag, members in (("de", report.de_members), ("bb", report.bb_members)):
            for m in members:
                for p in m.margin_trace:
                    f.write(f"{tag},{m.member},{p.epoch},{repr(p.gamma_min)},"
                            f"{repr(p.param_norm)},{repr(p.normalized)},{repr(p.train_acc)}\n")
