import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextmeasure.correlation import (
    COV_EPS,
    NormalizedCovariance,
    ShapeCovariance,
    build_kernel,
    convolve,
    estimate_covariance,
    kernel_for_mask,
    normalize_covariance,
    pixel_correlation,
)
from contextmeasure.errors import EmptyForeground, KernelTooLarge
from contextmeasure.selftest import double_sum
from contextmeasure.synthetic import disk

from .conftest import random_mask


def iso(alpha=6.0):
    return normalize_covariance(ShapeCovariance(np.eye(2), np.zeros(2)), alpha)


def test_single_pixel_covariance():
    cov = estimate_covariance([[3, 4]])
    np.testing.assert_allclose(cov.sigma, COV_EPS * np.eye(2))


def test_line_covariance():
    cov = estimate_covariance([[0, c] for c in range(9)])
    assert cov.sigma[1, 1] == pytest.approx(7.5 + COV_EPS)
    assert cov.sigma[0, 0] == pytest.approx(COV_EPS)


def test_disk_covariance_isotropic():
    cov = estimate_covariance(np.argwhere(disk((64, 64), (32, 32), 10) > 0))
    assert abs(cov.sigma[0, 1]) < 1e-9
    assert cov.sigma[0, 0] == pytest.approx(cov.sigma[1, 1])


def test_empty_foreground():
    with pytest.raises(EmptyForeground):
        estimate_covariance(np.zeros((0, 2)))


def test_normalization_examples():
    np.testing.assert_allclose(iso().sigma_hat, 18 * np.eye(2))
    n = normalize_covariance(ShapeCovariance(np.diag([3.0, 1.0]), np.zeros(2)), 6)
    np.testing.assert_allclose(n.sigma_hat, np.diag([27.0, 9.0]))


def test_pixel_correlation_values():
    cov = iso()
    peak = pixel_correlation((5, 5), (5, 5), cov)
    assert peak == pytest.approx(1 / (2 * math.pi * 18), rel=1e-12)
    # Mahalanobis distance 3 along an axis: offset 3*sqrt(18)
    d = 3 * math.sqrt(18)
    assert pixel_correlation((0, 0), (d, 0), cov) == pytest.approx(peak * math.exp(-4.5), rel=1e-12)
    assert pixel_correlation((1, 2), (4, -3), cov) == pixel_correlation((4, -3), (1, 2), cov)


def test_iso_kernel():
    k = build_kernel(iso())
    assert k.weights.shape == (27, 27) and k.half_rows == 13
    assert 0.99 <= k.total <= 1.0
    np.testing.assert_array_equal(k.weights, np.rot90(k.weights))
    row = k.weights[13, 13:]
    assert np.all(np.diff(row) <= 0)


def test_kernel_clamped_down_when_sum_exceeds_one():
    # very narrow kernel: discrete sum overshoots the continuous mass
    cov = normalize_covariance(ShapeCovariance(np.diag([1.0, 1e-4]), np.zeros(2)), 1.0)
    k = build_kernel(cov)
    assert k.scale < 1.0
    assert k.total == pytest.approx(1.0, abs=1e-12)


def test_kernel_too_large():
    with pytest.raises(KernelTooLarge):
        build_kernel(iso(100.0), max_extent=10)


def test_convolve_zero_and_impulse():
    k = build_kernel(iso())
    assert not convolve(np.zeros((40, 40)), k).any()
    f = np.zeros((41, 41))
    f[20, 20] = 1
    out = convolve(f, k)
    np.testing.assert_allclose(out[7:34, 7:34], k.weights, atol=1e-15)
    assert np.abs(out).sum() == pytest.approx(k.total)


def test_convolve_matches_double_sum(rng):
    for _ in range(3):
        y = random_mask(rng, (32, 32), 0.2)
        x = rng.random((32, 32))
        k = kernel_for_mask(y, 6.0)
        assert np.max(np.abs(convolve(x, k) - double_sum(x, k))) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(-0.9, 0.9), st.floats(1.0, 10.0))
def test_trace_normalization(a, b, rho, alpha):
    c = rho * math.sqrt(a * b)
    n = normalize_covariance(ShapeCovariance(np.array([[a, c], [c, b]]), np.zeros(2)), alpha)
    assert np.trace(n.sigma_hat) == pytest.approx(alpha**2, rel=1e-9)
    ev0, ev1 = np.linalg.eigvalsh([[a, c], [c, b]]), np.linalg.eigvalsh(n.sigma_hat)
    assert ev1[1] / ev1[0] == pytest.approx(ev0[1] / ev0[0], rel=1e-6)
    k = build_kernel(n)
    assert 0.95 <= k.total <= 1.0 + 1e-12
    np.testing.assert_array_equal(k.weights, k.weights[::-1, ::-1])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_correlation_decays_with_distance(r1, dr):
    cov = NormalizedCovariance(np.array([[20.0, 3.0], [3.0, 10.0]]), 5.477)
    u = np.array([0.6, 0.8])
    p1 = pixel_correlation((0, 0), r1 * u, cov)
    p2 = pixel_correlation((0, 0), (r1 + dr + 0.01) * u, cov)
    assert p2 < p1
