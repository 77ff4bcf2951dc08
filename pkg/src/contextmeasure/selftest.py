"""Embedded oracle fixtures run by ``contextmeasure selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .camo import degree_from_delta
from .cmeasure import E_FACTOR, reverse_deduction, reverse_exact
from .colorimetry import ciede2000
from .correlation import convolve, kernel_for_mask, pixel_correlation

# Sharma, Wu & Dalal (2005) CIEDE2000 test data: L1 a1 b1 L2 a2 b2 dE00
SHARMA_PAIRS = np.array(
    [
        [50.0000, 2.6772, -79.7751, 50.0000, 0.0000, -82.7485, 2.0425],
        [50.0000, 3.1571, -77.2803, 50.0000, 0.0000, -82.7485, 2.8615],
        [50.0000, 2.8361, -74.0200, 50.0000, 0.0000, -82.7485, 3.4412],
        [50.0000, -1.3802, -84.2814, 50.0000, 0.0000, -82.7485, 1.0000],
        [50.0000, -1.1848, -84.8006, 50.0000, 0.0000, -82.7485, 1.0000],
        [50.0000, -0.9009, -85.5211, 50.0000, 0.0000, -82.7485, 1.0000],
        [50.0000, 0.0000, 0.0000, 50.0000, -1.0000, 2.0000, 2.3669],
        [50.0000, -1.0000, 2.0000, 50.0000, 0.0000, 0.0000, 2.3669],
        [50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0009, 7.1792],
        [50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0010, 7.1792],
        [50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0011, 7.2195],
        [50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0012, 7.2195],
        [50.0000, -0.0010, 2.4900, 50.0000, 0.0009, -2.4900, 4.8045],
        [50.0000, -0.0010, 2.4900, 50.0000, 0.0010, -2.4900, 4.8045],
        [50.0000, -0.0010, 2.4900, 50.0000, 0.0011, -2.4900, 4.7461],
        [50.0000, 2.5000, 0.0000, 50.0000, 0.0000, -2.5000, 4.3065],
        [50.0000, 2.5000, 0.0000, 73.0000, 25.0000, -18.0000, 27.1492],
        [50.0000, 2.5000, 0.0000, 61.0000, -5.0000, 29.0000, 22.8977],
        [50.0000, 2.5000, 0.0000, 56.0000, -27.0000, -3.0000, 31.9030],
        [50.0000, 2.5000, 0.0000, 58.0000, 24.0000, 15.0000, 19.4535],
        [50.0000, 2.5000, 0.0000, 50.0000, 3.1736, 0.5854, 1.0000],
        [50.0000, 2.5000, 0.0000, 50.0000, 3.2972, 0.0000, 1.0000],
        [50.0000, 2.5000, 0.0000, 50.0000, 1.8634, 0.5757, 1.0000],
        [50.0000, 2.5000, 0.0000, 50.0000, 3.2592, 0.3350, 1.0000],
        [60.2574, -34.0099, 36.2677, 60.4626, -34.1751, 39.4387, 1.2644],
        [63.0109, -31.0961, -5.8663, 62.8187, -29.7946, -4.0864, 1.2630],
        [61.2901, 3.7196, -5.3901, 61.4292, 2.2480, -4.9620, 1.8731],
        [35.0831, -44.1164, 3.7933, 35.0232, -40.0716, 1.5901, 1.8645],
        [22.7233, 20.0904, -46.6940, 23.0331, 14.9730, -42.5619, 2.0373],
        [36.4612, 47.8580, 18.3852, 36.2715, 50.5065, 21.2231, 1.4146],
        [90.8027, -2.0831, 1.4410, 91.1528, -1.6435, 0.0447, 1.4441],
        [90.9257, -0.5406, -0.9208, 88.6381, -0.8985, -0.7239, 1.5381],
        [6.7747, -0.2908, -2.4247, 5.8714, -0.0985, -2.2286, 0.6377],
        [2.0776, 0.0795, -1.1350, 0.9033, -0.0636, -0.5514, 0.9082],
    ]
)


def _random_mask(rng, shape, density=0.3):
    y = np.zeros(shape)
    h, w = shape
    r0, c0 = rng.integers(0, h // 2), rng.integers(0, w // 2)
    r1, c1 = rng.integers(r0 + 2, h + 1), rng.integers(c0 + 2, w + 1)
    y[r0:r1, c0:c1] = rng.random((r1 - r0, c1 - c0)) < max(density, 0.5)
    if not y.any():
        y[r0, c0] = 1
    return y


def double_sum(field, kernel) -> np.ndarray:
    """Direct truncated sum ``sum_n field(n) P(m, n)`` over the kernel support.

    Accumulates one shifted copy of the field per offset, each weighted by
    the density evaluated on its own.
    """
    field = np.asarray(field, dtype=np.float64)
    h, w = field.shape
    e = kernel.half_rows
    out = np.zeros_like(field)
    for di in range(-e, e + 1):
        for dj in range(-e, e + 1):
            p = pixel_correlation((0, 0), (di, dj), kernel.source) * kernel.scale
            # out[i, j] += field[i + di, j + dj] wherever both are in frame
            r0, r1 = max(0, -di), min(h, h - di)
            c0, c1 = max(0, -dj), min(w, w - dj)
            if r0 < r1 and c0 < c1:
                out[r0:r1, c0:c1] += p * field[r0 + di : r1 + di, c0 + dj : c1 + dj]
    return out


def check_ciede2000() -> float:
    got = ciede2000(SHARMA_PAIRS[:, :3], SHARMA_PAIRS[:, 3:6])
    return float(np.abs(got - SHARMA_PAIRS[:, 6]).max())


def check_convolution(seed: int = 0, trials: int = 5, size: int = 32) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        y = _random_mask(rng, (size, size))
        x = rng.random((size, size))
        k = kernel_for_mask(y, 6.0)
        worst = max(worst, float(np.abs(convolve(x, k) - double_sum(x, k)).max()))
    return worst


def check_reverse(seed: int = 0, trials: int = 3, size: int = 24) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        y = _random_mask(rng, (size, size))
        x = np.where(rng.random((size, size)) < 0.01, rng.uniform(0, 0.1, (size, size)), 0.0)
        k = kernel_for_mask(y, 6.0)
        approx = reverse_deduction(x, y, k)
        exact = E_FACTOR * reverse_exact(x, y, k.source)
        worst = max(worst, float(np.abs(approx - exact).max()))
    return worst


def check_mapping() -> float:
    d = degree_from_delta([0.0, 100.0, 50.0], 8.0)
    ref = [1.0, 0.0, math.expm1(4.0) / math.expm1(8.0)]
    return float(np.abs(d - ref).max())


SUITES: dict[str, tuple[Callable[[], float], float]] = {
    "ciede2000-sharma": (check_ciede2000, 1e-4),
    "convolution-double-sum": (check_convolution, 1e-10),
    "reverse-product-vs-exp": (check_reverse, 1e-3),
    "camouflage-mapping-endpoints": (check_mapping, 1e-12),
}


def run(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, (fn, tol) in SUITES.items():
        err = fn()
        passed = err <= tol
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name:<30s} max error {err:.3e} (tolerance {tol:g})")
    return ok
