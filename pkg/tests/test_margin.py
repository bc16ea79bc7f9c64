import numpy as np
import pytest

from mpkit.data import Dataset, one_hot
from mpkit.margin import (margin_point, margins, normalized_margin,
                          run_equivalency_experiment)
from mpkit.network import (Dense, ModelParams, NetworkSpec, TrainConfig, init_params,
                           mlp_spec)
from mpkit.posterior import SeparationError


def blob_task(n_per=10, seed=0, gap=3.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_per, 2)) * 0.3 + [-gap, 0.0]
    b = rng.standard_normal((n_per, 2)) * 0.3 + [gap, 0.0]
    return Dataset(np.concatenate([a, b]), one_hot(np.array([0] * n_per + [1] * n_per), 2))


def homogeneous_spec():
    return mlp_spec(2, [8], 2, bias=False)


# ---------------------------------------------------------------------------
# margins


def test_margin_hand_value():
    # identity map gives logits (3,1,0) for true class 0: margin 3-1 = 2
    spec = NetworkSpec((Dense(3, 3, bias=False),), 3, 3)
    p = ModelParams([np.eye(3)])
    ds = Dataset(np.array([[3.0, 1.0, 0.0]]), one_hot(np.array([0]), 3))
    assert margins(p, spec, ds)[0] == 2.0
    assert normalized_margin(p, spec, ds) == pytest.approx(2.0 / p.norm(), abs=1e-12)


def test_margin_misclassified_negative():
    spec = NetworkSpec((Dense(2, 2, bias=False),), 2, 2)
    p = ModelParams([np.eye(2)])
    ds = Dataset(np.array([[0.0, 1.0]]), one_hot(np.array([0]), 2))
    assert margins(p, spec, ds)[0] < 0
    assert normalized_margin(p, spec, ds) < 0


def test_single_output_binary_margin():
    spec = NetworkSpec((Dense(2, 1, bias=False),), 2, 2)
    p = ModelParams([np.array([[1.0], [0.0]])])
    ds = Dataset(np.array([[2.0, 0.0], [-3.0, 0.0]]), one_hot(np.array([1, 0]), 2))
    per = margins(p, spec, ds)
    assert per.tolist() == [2.0, 3.0]


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_normalized_margin_scale_invariant(c):
    spec = homogeneous_spec()
    ds = blob_task()
    p = init_params(spec, 3)
    base = normalized_margin(p, spec, ds)
    scaled = normalized_margin(p.scaled(c), spec, ds)
    assert scaled == pytest.approx(base, rel=1e-9)


def test_normalized_margin_rejects_biased_network():
    spec = mlp_spec(2, [8], 2, bias=True)
    ds = blob_task()
    with pytest.raises(ValueError, match="homogeneous"):
        normalized_margin(init_params(spec, 0), spec, ds)


def test_margin_point_consistent():
    spec = homogeneous_spec()
    ds = blob_task()
    p = init_params(spec, 5)
    pt = margin_point(p, spec, ds, 13)
    assert pt.epoch == 13
    assert pt.normalized == pytest.approx(pt.gamma_min / pt.param_norm ** 2, rel=1e-12)
    assert 0.0 <= pt.train_acc <= 1.0


# ---------------------------------------------------------------------------
# the paired experiment


def exp_cfg(**kw):
    base = dict(learning_rate=0.1, epochs=400, minibatch_size=8, seed=11,
                stop_rule="separable", extra_epochs=10, weight_decay=0.0)
    base.update(kw)
    return TrainConfig(**base)


def test_de_init_zero_extra_epochs_identical():
    train = blob_task(12, seed=1)
    test = blob_task(8, seed=2)
    rep = run_equivalency_experiment(train, test, homogeneous_spec(),
                                     exp_cfg(extra_epochs=0), num_members=2, mode="de-init")
    for d, b in zip(rep.de_members, rep.bb_members):
        assert d.test_acc == b.test_acc
        assert d.test_nll == b.test_nll
    assert rep.de_report.to_dict() == rep.bb_report.to_dict()
    for p, q in zip(rep.de_ensemble.members, rep.bb_ensemble.members):
        assert all(np.array_equal(x, y) for x, y in zip(p.arrays, q.arrays))


def test_random_paired_members_share_initialization():
    train = blob_task(12, seed=3)
    test = blob_task(8, seed=4)
    rep = run_equivalency_experiment(train, test, homogeneous_spec(),
                                     exp_cfg(extra_epochs=3), num_members=2,
                                     mode="random-paired")
    assert len(rep.de_members) == len(rep.bb_members) == 2
    # all members separate the training data under the stopping rule
    for m in rep.de_members + rep.bb_members:
        assert m.final_train_acc == 1.0
    # margin traces exist and end near each other for matched pairs
    for d, b in zip(rep.de_members, rep.bb_members):
        assert d.margin_trace and b.margin_trace
        assert d.margin_trace[-1].normalized == pytest.approx(
            b.margin_trace[-1].normalized, rel=0.5)


def test_experiment_aborts_without_separation():
    feats = np.zeros((4, 2))
    ds = Dataset(feats, one_hot(np.array([0, 1, 0, 1]), 2))
    with pytest.raises(SeparationError):
        run_equivalency_experiment(ds, ds, homogeneous_spec(),
                                   exp_cfg(epochs=4), num_members=1)


def test_experiment_rejects_biased_spec():
    ds = blob_task()
    with pytest.raises(ValueError, match="homogeneous"):
        run_equivalency_experiment(ds, ds, mlp_spec(2, [8], 2, bias=True), exp_cfg())


def test_normalized_margin_grows_during_training():
    # monitored trend, not a theorem at finite step size: the normalized
    # margin at the last checkpoint should exceed the first once separated
    train = blob_task(12, seed=7)
    test = blob_task(6, seed=8)
    rep = run_equivalency_experiment(train, test, homogeneous_spec(),
                                     exp_cfg(extra_epochs=30), num_members=2,
                                     mode="random-paired", checkpoint_every=5)
    for m in rep.de_members:
        assert len(m.margin_trace) >= 2
        assert m.margin_trace[-1].normalized > m.margin_trace[0].normalized


def test_scatter_rows_schema():
    train = blob_task(10, seed=5)
    test = blob_task(6, seed=6)
    rep = run_equivalency_experiment(train, test, homogeneous_spec(),
                                     exp_cfg(extra_epochs=0), num_members=3, mode="de-init")
    rows = rep.scatter_rows()
    assert len(rows) == 3
    assert set(rows[0]) == {"member", "de_acc", "bb_acc", "de_loss", "bb_loss"}
