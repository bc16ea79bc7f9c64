import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpkit.metrics import evaluate, predictive_entropy, predictive_uncertainty


def brute_force_report(probs, labels, m=15):
    """Independent re-binning oracle: explicit interval comparisons per sample."""
    probs = np.asarray(probs)
    labels = np.asarray(labels)
    n = len(probs)
    preds = probs.argmax(axis=1)
    confs = probs.max(axis=1)
    correct = preds == labels

    acc = correct.sum() / n
    nll = -np.mean([np.log(max(probs[i, labels[i]], 1e-12)) for i in range(n)])

    bins = [[] for _ in range(m)]
    for i in range(n):
        placed = False
        for b in range(1, m + 1):
            # interval ((b-1)/m, b/m]; confidence 0 goes to the first bin
            if (confs[i] > (b - 1) / m or b == 1) and confs[i] <= b / m:
                bins[b - 1].append(i)
                placed = True
                break
        if not placed:  # confidence marginally above 1 from simplex tolerance
            bins[m - 1].append(i)
    oe = 0.0
    ue = 0.0
    stats = []
    for b in range(m):
        idx = bins[b]
        if not idx:
            stats.append((0, 0.0, 0.0))
            continue
        c = float(np.mean([confs[i] for i in idx]))
        a = float(np.mean([1.0 if correct[i] else 0.0 for i in idx]))
        if c > a:
            oe += len(idx) / n * (c - a)
        else:
            ue += len(idx) / n * (a - c)
        stats.append((len(idx), c, a))
    return {"acc": acc, "nll": nll, "ece": oe + ue, "oe": oe, "ue": ue, "bins": stats}


def random_prediction_set(rng):
    n = int(rng.integers(1, 60))
    k = int(rng.integers(2, 7))
    probs = rng.dirichlet(np.ones(k) * rng.uniform(0.2, 3.0), size=n)
    labels = rng.integers(0, k, size=n)
    return probs, labels


# ---------------------------------------------------------------------------
# evaluate


def test_perfect_one_hot_predictions():
    probs = np.eye(4)[[0, 1, 2, 3]]
    rep = evaluate(probs, [0, 1, 2, 3])
    assert rep.acc == 1.0
    assert rep.nll == pytest.approx(0.0, abs=1e-12)
    assert rep.ece == 0.0 and rep.oe == 0.0 and rep.ue == 0.0


def test_hand_binned_two_sample_case():
    probs = [[0.6, 0.4], [0.6, 0.4]]
    rep = evaluate(probs, [0, 1])
    assert rep.acc == 0.5
    # both fall in the bin covering (8/15, 9/15]; bin accuracy 0.5, conf 0.6
    occupied = [b for b in rep.bins if b.count]
    assert len(occupied) == 1 and occupied[0].count == 2
    assert occupied[0].accuracy == 0.5
    assert occupied[0].confidence == pytest.approx(0.6)
    assert rep.ece == pytest.approx(0.1, abs=1e-12)
    assert rep.oe == pytest.approx(0.1, abs=1e-12)
    assert rep.ue == 0.0


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        probs, labels = random_prediction_set(rng)
        rep = evaluate(probs, labels)
        ref = brute_force_report(probs, labels)
        assert abs(rep.acc - ref["acc"]) < 1e-12
        assert abs(rep.nll - ref["nll"]) < 1e-12
        assert abs(rep.ece - ref["ece"]) < 1e-12
        assert abs(rep.oe - ref["oe"]) < 1e-12
        assert abs(rep.ue - ref["ue"]) < 1e-12
        for got, (cnt, c, a) in zip(rep.bins, ref["bins"]):
            assert got.count == cnt
            assert abs(got.confidence - c) < 1e-12
            assert abs(got.accuracy - a) < 1e-12


def test_ece_is_exactly_oe_plus_ue():
    rng = np.random.default_rng(7)
    for _ in range(200):
        probs, labels = random_prediction_set(rng)
        rep = evaluate(probs, labels)
        assert rep.ece == rep.oe + rep.ue  # exact by construction


def test_bin_counts_sum_to_n():
    rng = np.random.default_rng(8)
    probs, labels = random_prediction_set(rng)
    rep = evaluate(probs, labels)
    assert sum(b.count for b in rep.bins) == len(probs)


def test_metrics_in_unit_interval():
    rng = np.random.default_rng(9)
    for _ in range(100):
        probs, labels = random_prediction_set(rng)
        rep = evaluate(probs, labels)
        for v in (rep.ece, rep.oe, rep.ue, rep.acc):
            assert 0.0 <= v <= 1.0


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    probs, labels = random_prediction_set(rng)
    perm = rng.permutation(len(probs))
    a = evaluate(probs, labels)
    b = evaluate(probs[perm], labels[perm])
    assert (a.acc, a.nll, a.ece, a.oe, a.ue) == (b.acc, b.nll, b.ece, b.oe, b.ue)


def test_rejects_empty_and_bad_labels():
    with pytest.raises(ValueError):
        evaluate(np.zeros((0, 2)), [])
    with pytest.raises(ValueError):
        evaluate([[0.5, 0.5]], [2])
    with pytest.raises(ValueError):
        evaluate([[0.9, 0.4]], [0])


def test_nll_clamps_tiny_probabilities():
    rep = evaluate([[1.0, 0.0]], [1])
    assert rep.nll == pytest.approx(-np.log(1e-12))


def test_argmax_tie_breaks_low_index():
    rep = evaluate([[0.5, 0.5]], [0])
    assert rep.acc == 1.0
    rep = evaluate([[0.5, 0.5]], [1])
    assert rep.acc == 0.0


# ---------------------------------------------------------------------------
# entropy and uncertainty


def test_entropy_one_hot_zero():
    assert predictive_entropy([0.0, 1.0, 0.0]) == 0.0


def test_entropy_uniform_five():
    assert predictive_entropy([0.2] * 5) == pytest.approx(np.log(5), abs=1e-12)


def test_entropy_half_half():
    assert predictive_entropy([0.5, 0.5, 0.0, 0.0]) == pytest.approx(np.log(2), abs=1e-12)


def test_uncertainty_one_hot_zero():
    assert predictive_uncertainty([1.0, 0.0, 0.0], 3) == 0.0


@pytest.mark.parametrize("k", [2, 3, 5, 10])
def test_uncertainty_uniform_is_one(k):
    assert predictive_uncertainty([1.0 / k] * k, k) == pytest.approx(1.0, abs=1e-12)


def test_uncertainty_hand_value():
    # sum p^2 = 0.36 + 4*0.01 = 0.4 -> raw 0.6 -> /0.8 = 0.75
    assert predictive_uncertainty([0.6, 0.1, 0.1, 0.1, 0.1], 5) == pytest.approx(0.75, abs=1e-12)


def test_uncertainty_monotone_in_concentration():
    vals = [predictive_uncertainty([p, 1 - p], 2) for p in (0.5, 0.6, 0.8, 0.95, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_uncertainty_rejects_small_k():
    with pytest.raises(ValueError):
        predictive_uncertainty([1.0], 1)
