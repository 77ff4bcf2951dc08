import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextmeasure.cmeasure import (
    CAMO,
    E_FACTOR,
    GENERIC,
    CmParams,
    context_measure,
    context_measure_camo,
    forward_inference,
    loop_terms,
    reverse_deduction,
    reverse_exact,
)
from contextmeasure.correlation import kernel_for_mask
from contextmeasure.errors import DimensionMismatch, EmptyGroundTruth, InvalidMap
from contextmeasure.selftest import double_sum
from contextmeasure.synthetic import disk

from .conftest import random_mask

# X = Y = centered radius-8 disk in 64x64, alpha 6, beta 1
DISK8_SCORE = 0.6380451681455117


def disk8():
    return disk((64, 64), (32, 32), 8)


def test_disk_regression():
    y = disk8()
    assert context_measure(y, y) == pytest.approx(DISK8_SCORE, abs=1e-12)


def test_disk_score_matches_double_sum():
    y = disk8()
    k = kernel_for_mask(y, 6.0)
    fwd = y * double_sum(y, k)
    rev = np.clip(E_FACTOR * y * -np.expm1(-double_sum(y, k)), 0, 1)
    f_m, r_m = fwd.sum() / y.sum(), rev.sum() / y.sum()
    assert context_measure(y, y) == pytest.approx(2 * f_m * r_m / (f_m + r_m), abs=1e-12)


def test_forward_matches_oracle(rng):
    y = random_mask(rng, (24, 24), 0.3)
    x = rng.random((24, 24))
    k = kernel_for_mask(y, 6.0)
    fwd = forward_inference(x, y, k)
    assert np.max(np.abs(fwd - x * double_sum(y, k))) <= 1e-10
    assert np.all(fwd <= x + 1e-15)


def test_zero_prediction():
    y = disk8()
    k = kernel_for_mask(y, 6.0)
    z = np.zeros_like(y)
    assert not forward_inference(z, y, k).any()
    assert not reverse_deduction(z, y, k).any()
    assert not reverse_exact(z, y, k.source).any()
    assert context_measure(z, y) == 0.0


def test_far_miss_scores_zero():
    y = np.zeros((128, 128))
    y[5:10, 5:10] = 1
    x = np.zeros_like(y)
    x[100:110, 100:110] = 1
    assert context_measure(x, y) == 0.0


def test_reverse_single_pixel():
    y = np.zeros((16, 16))
    y[6:10, 6:10] = 1
    x = np.zeros_like(y)
    x[8, 8] = 1
    k = kernel_for_mask(y, 6.0)
    r = reverse_exact(x, y, k.source)
    from contextmeasure.correlation import pixel_correlation

    assert r[7, 9] == pytest.approx(pixel_correlation((8, 8), (7, 9), k.source), rel=1e-12)


def test_reverse_exact_log_space(rng):
    y = random_mask(rng, (16, 16), 0.3)
    x = rng.random((16, 16))
    k = kernel_for_mask(y, 6.0)
    r = reverse_exact(x, y, k.source)
    from contextmeasure.correlation import _density

    xf = np.argwhere(x > 0)
    for q in np.argwhere(y > 0)[:20]:
        p = _density((xf - q).astype(float), k.source)
        logs = np.log1p(-x[xf[:, 0], xf[:, 1]] * p).sum()
        assert r[q[0], q[1]] == pytest.approx(-np.expm1(logs), abs=1e-12)


def test_reverse_sparse_regime(rng):
    y = random_mask(rng, (24, 24), 0.4)
    x = np.zeros_like(y)
    idx = rng.choice(x.size, size=5, replace=False)
    x.flat[idx] = rng.uniform(0, 0.1, size=5)
    k = kernel_for_mask(y, 6.0)
    gap = np.abs(reverse_deduction(x, y, k) - E_FACTOR * reverse_exact(x, y, k.source))
    assert gap.max() <= 1e-3


def test_reverse_masked_by_gt(rng):
    y = random_mask(rng)
    t = loop_terms(rng.random(y.shape), y)
    assert np.all(t.reverse_map[y == 0] == 0)
    assert 0 <= t.f_m <= 1 and 0 <= t.r_m <= 1


def test_errors():
    with pytest.raises(EmptyGroundTruth):
        context_measure(np.ones((4, 4)), np.zeros((4, 4)))
    with pytest.raises(DimensionMismatch):
        context_measure(np.ones((4, 4)), np.ones((4, 5)))
    with pytest.raises(ValueError):
        CmParams(alpha=0)


def test_scaling_prediction_lowers_score(rng):
    for _ in range(5):
        y = random_mask(rng, (32, 32), 0.2)
        x = np.clip(y + 0.3 * rng.random(y.shape), 0, 1)
        assert context_measure(0.5 * x, y) < context_measure(x, y)


def test_camo_collapses_for_flat_weights(rng):
    y = random_mask(rng, (32, 32), 0.25)
    x = rng.random(y.shape)
    base = context_measure(x, y, CAMO)
    assert context_measure_camo(x, y, np.zeros_like(y)) == pytest.approx(base, abs=1e-12)
    assert context_measure_camo(x, y, y.copy()) == pytest.approx(base, abs=1e-12)


def test_camo_weight_on_missed_region():
    y = np.zeros((64, 64))
    y[10:22, 10:22] = 1
    y[40:52, 40:52] = 1
    x = np.zeros_like(y)
    x[10:22, 10:22] = 1  # second blob missed
    d = np.zeros_like(y)
    d[40:52, 40:52] = 1
    assert context_measure_camo(x, y, d) < context_measure(x, y, CAMO)


def test_camo_rejects_bad_maps():
    y = disk8()
    with pytest.raises(InvalidMap):
        context_measure_camo(y, y, 1 - y)
    with pytest.raises(InvalidMap):
        context_measure_camo(y, y, 2 * y)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bounds_and_mirror(seed):
    rng = np.random.default_rng(seed)
    y = random_mask(rng, (20, 24), rng.uniform(0.05, 0.6))
    x = rng.random(y.shape) * (rng.random(y.shape) < 0.5)
    s = context_measure(x, y)
    assert 0.0 <= s <= 1.0
    assert context_measure(x[:, ::-1], y[:, ::-1]) == pytest.approx(s, abs=1e-12)
    assert context_measure(x[::-1], y[::-1]) == pytest.approx(s, abs=1e-12)
