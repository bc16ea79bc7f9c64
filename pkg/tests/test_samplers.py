import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mpkit.data import LabeledExample, gen_synthetic_clusters
from mpkit.samplers import (AugmentationSet, GaussianJitter, HorizontalFlip, Identity,
                            MixupMeasure, PadCrop, PerturbedEmpirical, UniformBox,
                            mixup_pair, sample_base_measure, sample_bb_weights, sample_beta,
                            sample_dp_weights, sample_h_aug, sample_mixup,
                            sample_pseudo_batch, sample_stabilized_bb_weights)


def rng_of(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# bootstrap weights


def test_bb_single_point_is_one():
    w = sample_bb_weights(1, rng_of())
    assert w.values.tolist() == [1.0]


def test_bb_rejects_empty():
    with pytest.raises(ValueError):
        sample_bb_weights(0, rng_of())


@given(st.integers(1, 50), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_bb_sums_to_one(n, seed):
    w = sample_bb_weights(n, rng_of(seed))
    assert abs(w.values.sum() - 1.0) < 1e-12
    assert w.values.min() >= 0
    assert w.sums_to_one


def test_bb_dirichlet_moments():
    # flat Dirichlet over n=5: mean 1/5, var (1/5)(4/5)/(5+1)
    n, draws = 5, 50_000
    w = np.stack([sample_bb_weights(n, r).values
                  for r in [rng_of(s) for s in range(draws)]])
    mean_se = w.std(axis=0, ddof=1) / np.sqrt(draws)
    assert (np.abs(w.mean(axis=0) - 0.2) < 4 * mean_se).all()
    target_var = 0.2 * 0.8 / 6
    centered = (w - w.mean(axis=0)) ** 2
    var_se = centered.std(axis=0, ddof=1) / np.sqrt(draws)
    assert (np.abs(w.var(axis=0, ddof=1) - target_var) < 4 * var_se).all()


def test_stabilized_single_point_is_one():
    w = sample_stabilized_bb_weights(1, 2.0, rng_of())
    assert w.values.tolist() == [pytest.approx(1.0, abs=1e-15)]


def test_stabilized_rejects_bound_below_n():
    with pytest.raises(ValueError):
        sample_stabilized_bb_weights(10, 10.0, rng_of())


def test_stabilized_lower_bound():
    # n=10, bound 20 -> eta=0.1 -> every weight >= 0.1/(1+1) = 0.05
    n, eta = 10, 0.1
    floor = eta / (1 + n * eta)
    mins = [sample_stabilized_bb_weights(n, 20.0, rng_of(s)).values.min()
            for s in range(10_000)]
    assert min(mins) > 0.005
    assert min(mins) >= floor - 1e-15


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_stabilized_sums_to_one(n, seed):
    w = sample_stabilized_bb_weights(n, n + 3.0, rng_of(seed))
    assert abs(w.values.sum() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# weights with a pseudo-point tail


def test_dp_zero_concentration_degenerates_to_bb():
    seed = 99
    w_dp = sample_dp_weights(6, 0.0, 4, rng_of(seed))
    w_bb = sample_bb_weights(6, rng_of(seed))
    assert np.array_equal(w_dp.values[6:], np.zeros(4))
    assert np.array_equal(w_dp.values[:6], w_bb.values)


@pytest.mark.parametrize("n,c", [(10, 1.0), (100, 10.0)])
def test_dp_weight_means(n, c):
    t, draws = 10, 50_000
    w = np.stack([sample_dp_weights(n, c, t, rng_of(s)).values for s in range(draws)])
    head = w[:, :n]
    tail_mass = w[:, n:].sum(axis=1)
    head_se = head.std(axis=0, ddof=1) / np.sqrt(draws)
    assert (np.abs(head.mean(axis=0) - 1.0 / (n + c)) < 4 * head_se).all()
    tail_se = tail_mass.std(ddof=1) / np.sqrt(draws)
    assert abs(tail_mass.mean() - c / (n + c)) < 4 * tail_se


def test_dp_length_and_normalization():
    w = sample_dp_weights(7, 2.0, 5, rng_of(1))
    assert len(w) == 12
    assert abs(w.values.sum() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# beta


def test_beta_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        sample_beta(0.0, rng_of())


def test_beta_alpha_one_is_uniform():
    r = rng_of(7)
    draws = np.array([sample_beta(1.0, r) for _ in range(50_000)])
    d, _ = stats.kstest(draws, "uniform")
    assert d < 0.02


@pytest.mark.parametrize("alpha", [0.1, 1.0, 2.0])
def test_beta_mean_half(alpha):
    r = rng_of(8)
    draws = np.array([sample_beta(alpha, r) for _ in range(50_000)])
    se = draws.std(ddof=1) / np.sqrt(len(draws))
    assert abs(draws.mean() - 0.5) < 4 * se


def test_beta_alpha_two_variance():
    # Var Beta(a,a) = 1/(4(2a+1)) -> 1/20 at a=2
    r = rng_of(9)
    draws = np.array([sample_beta(2.0, r) for _ in range(50_000)])
    centered = (draws - draws.mean()) ** 2
    se = centered.std(ddof=1) / np.sqrt(len(draws))
    assert abs(draws.var(ddof=1) - 0.05) < 4 * se


# ---------------------------------------------------------------------------
# mixup


def pt(x, y):
    return LabeledExample(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def test_mixup_lambda_one_returns_first():
    a = pt([1, 2], [1, 0])
    b = pt([3, 4], [0, 1])
    m = mixup_pair(a, b, 1.0)
    assert np.array_equal(m.x, a.x) and np.array_equal(m.y, a.y)


def test_mixup_identical_points_fixed():
    a = pt([1, 2], [0.5, 0.5])
    for lam in (0.0, 0.3, 1.0):
        m = mixup_pair(a, a, lam)
        assert np.allclose(m.x, a.x) and np.allclose(m.y, a.y)


def test_mixup_half_one_hot_labels():
    a = pt([0, 0], [1, 0, 0])
    b = pt([1, 1], [0, 1, 0])
    m = mixup_pair(a, b, 0.5)
    assert np.array_equal(m.y, [0.5, 0.5, 0.0])


def test_mixup_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        mixup_pair(pt([1], [1, 0]), pt([1, 2], [1, 0]), 0.5)


def test_sample_mixup_singleton():
    data = [pt([2, 3], [1, 0])]
    for alpha in (0.1, 1.0, 5.0):
        m = sample_mixup(data, alpha, rng_of(3))
        assert np.allclose(m.x, [2, 3]) and np.allclose(m.y, [1, 0])


def test_sample_mixup_rejects_empty():
    with pytest.raises(ValueError):
        sample_mixup([], 1.0, rng_of())


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_sample_mixup_label_on_simplex(seed):
    data = gen_synthetic_clusters(0)
    m = sample_mixup(data, 1.0, rng_of(seed))
    assert abs(m.y.sum() - 1.0) < 1e-12
    assert m.y.min() >= 0


def test_sample_mixup_two_point_mean_is_midpoint():
    data = [pt([0.0, 0.0], [1, 0]), pt([2.0, 4.0], [0, 1])]
    r = rng_of(11)
    xs = np.stack([sample_mixup(data, 1.0, r).x for _ in range(10_000)])
    se = xs.std(axis=0, ddof=1) / np.sqrt(len(xs))
    assert (np.abs(xs.mean(axis=0) - [1.0, 2.0]) < 4 * se).all()


def test_mixup_features_in_bounding_box():
    data = gen_synthetic_clusters(1)
    lo = data.features.min(axis=0)
    hi = data.features.max(axis=0)
    r = rng_of(12)
    for _ in range(500):
        m = sample_mixup(data, 0.4, r)
        assert (m.x >= lo - 1e-12).all() and (m.x <= hi + 1e-12).all()


# ---------------------------------------------------------------------------
# augmentations


def test_h_aug_empty_set_is_identity():
    z = pt([1, 2], [1, 0])
    out = sample_h_aug(z, AugmentationSet(), rng_of())
    assert out is z


def test_hflip_applied_twice_is_original():
    img = np.arange(12.0).reshape(1, 3, 4)
    z = LabeledExample(img, np.array([1.0, 0.0]))
    aug = AugmentationSet((HorizontalFlip(p=1.0),))
    once = sample_h_aug(z, aug, rng_of(0))
    twice = sample_h_aug(once, aug, rng_of(1))
    assert np.array_equal(twice.x, img)
    assert not np.array_equal(once.x, img)


def test_h_aug_label_untouched():
    img = np.ones((1, 8, 8))
    y = np.array([0.25, 0.75])
    aug = AugmentationSet((PadCrop(2), HorizontalFlip(0.5), GaussianJitter(0.1), Identity()))
    out = sample_h_aug(LabeledExample(img, y), aug, rng_of(5))
    assert out.y is y
    assert out.x.shape == img.shape


def test_padcrop_offsets_uniform():
    # a single bright pixel tracks the crop offset; 9x9 offsets for pad=4
    img = np.zeros((1, 28, 28))
    img[0, 14, 14] = 1.0
    z = LabeledExample(img, np.array([1.0, 0.0]))
    aug = AugmentationSet((PadCrop(4),))
    r = rng_of(6)
    counts = np.zeros((9, 9))
    for _ in range(10_000):
        out = sample_h_aug(z, aug, r).x[0]
        i, j = np.unravel_index(out.argmax(), out.shape)
        counts[14 + 4 - i, 14 + 4 - j] += 1
    chi2 = ((counts - counts.mean()) ** 2 / counts.mean()).sum()
    assert chi2 < stats.chi2.isf(0.001, 80)


# ---------------------------------------------------------------------------
# pseudo batches


def test_pseudo_batch_zero_count():
    assert sample_pseudo_batch([pt([1], [1, 0])], 0, 1.0, rng_of()) == []


def test_pseudo_batch_single_source_copies():
    src = [pt([5.0, 6.0], [0, 1])]
    out = sample_pseudo_batch(src, 7, 1.0, rng_of(2))
    assert len(out) == 7
    for z in out:
        assert np.allclose(z.x, [5.0, 6.0]) and np.allclose(z.y, [0, 1])


def test_pseudo_batch_convex_hull():
    data = [pt([0, 0], [1, 0]), pt([1, 0], [0, 1]), pt([0, 1], [1, 0])]
    out = sample_pseudo_batch(data, 200, 0.7, rng_of(3))
    xs = np.stack([z.x for z in out])
    assert xs.min() >= -1e-12 and xs.max() <= 1 + 1e-12


# ---------------------------------------------------------------------------
# base measures


def test_perturbed_zero_variance_returns_raw():
    data = gen_synthetic_clusters(2)
    z = sample_base_measure(PerturbedEmpirical(0.0), data, rng_of(4))
    idx = np.where((data.features == z.x).all(axis=1))[0]
    assert len(idx) == 1
    assert np.array_equal(data.labels[idx[0]], z.y)


def test_perturbed_labels_from_source():
    data = gen_synthetic_clusters(3)
    r = rng_of(5)
    for _ in range(50):
        z = sample_base_measure(PerturbedEmpirical(4.0), data, r)
        assert z.y.sum() == 1.0 and set(np.unique(z.y)) <= {0.0, 1.0}


def test_perturbed_variance():
    data = [pt([0.0, 0.0], [1, 0])]
    r = rng_of(6)
    xs = np.stack([sample_base_measure(PerturbedEmpirical(4.0), data, r).x
                   for _ in range(50_000)])
    var = xs.var(axis=0, ddof=1)
    se = 4.0 * np.sqrt(2.0 / len(xs))  # Var(s^2) ~ 2 sigma^4 / n for normals
    assert (np.abs(var - 4.0) < 4 * se).all()


def test_uniform_box_properties():
    bm = UniformBox((-15.0, -15.0), (15.0, 15.0), 5)
    r = rng_of(7)
    seen = set()
    for _ in range(500):
        z = sample_base_measure(bm, [], r)
        assert (z.x >= -15).all() and (z.x <= 15).all()
        assert z.y.sum() == 1.0 and z.y.max() == 1.0 and len(z.y) == 5
        seen.add(int(z.y.argmax()))
    assert seen == {0, 1, 2, 3, 4}


def test_mixup_measure_delegates():
    data = gen_synthetic_clusters(4)
    z = sample_base_measure(MixupMeasure(1.0), data, rng_of(8))
    assert abs(z.y.sum() - 1.0) < 1e-12
    lo, hi = data.features.min(0), data.features.max(0)
    assert (z.x >= lo - 1e-12).all() and (z.x <= hi + 1e-12).all()


def test_empty_dataset_rejected_for_data_driven():
    with pytest.raises(ValueError):
        sample_base_measure(PerturbedEmpirical(1.0), [], rng_of())


# ---------------------------------------------------------------------------
# reproducibility


@pytest.mark.parametrize("draw", [
    lambda r: sample_bb_weights(8, r).values,
    lambda r: sample_dp_weights(5, 1.0, 3, r).values,
    lambda r: sample_beta(0.7, r),
    lambda r: sample_mixup(gen_synthetic_clusters(0), 1.0, r).x,
])
def test_samplers_reproducible(draw):
    a = draw(np.random.default_rng(321))
    b = draw(np.random.default_rng(321))
    assert np.array_equal(a, b)
