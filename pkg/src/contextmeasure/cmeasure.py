"""The Context-measure: forward inference, reverse deduction and their harmonic blend."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_binary, as_gray, check_same_shape
from .correlation import GaussianKernel, NormalizedCovariance, _density, convolve, kernel_for_mask
from .errors import EmptyGroundTruth, InvalidMap

E_FACTOR = math.e / (math.e - 1.0)


@dataclass(frozen=True)
class CmParams:
    alpha: float = 6.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")


GENERIC = CmParams(alpha=6.0, beta=1.0)
CAMO = CmParams(alpha=6.0, beta=1.2)


@dataclass(frozen=True)
class LoopTerms:
    forward_map: np.ndarray
    reverse_map: np.ndarray
    f_m: float
    r_m: float


def forward_inference(x, y, k: GaussianKernel) -> np.ndarray:
    """Per-pixel forward credit ``X * (K conv Y)``."""
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    return x * convolve(y, k)


def reverse_deduction(x, y, k: GaussianKernel) -> np.ndarray:
    """Per-GT-pixel coverage ``e/(e-1) * Y * (1 - exp(-K conv X))``."""
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    r = E_FACTOR * y * -np.expm1(-convolve(x, k))
    return np.clip(r, 0.0, 1.0)


def reverse_exact(x, y, cov: NormalizedCovariance) -> np.ndarray:
    """Unapproximated reverse term ``1 - prod_i (1 - X(p_i) P(p_i, q))`` on Y.

    Quadratic in the foreground sizes; meant as a reference for
    :func:`reverse_deduction`. The result is not rescaled by ``e/(e-1)``.
    """
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    out = np.zeros_like(y)
    xf = np.argwhere(x > 0)
    if len(xf) == 0:
        return out
    xv = x[xf[:, 0], xf[:, 1]]
    for q in np.argwhere(y > 0):
        p = _density((xf - q).astype(np.float64), cov)
        factors = np.clip(1.0 - xv * p, 0.0, 1.0)
        out[q[0], q[1]] = 1.0 - np.prod(factors)
    return out


def loop_terms(x, y, params: CmParams = GENERIC, kernel: GaussianKernel | None = None) -> LoopTerms:
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    if not y.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    k = kernel if kernel is not None else kernel_for_mask(y, params.alpha)
    fwd = forward_inference(x, y, k)
    rev = reverse_deduction(x, y, k)
    x_mass = x.sum()
    f_m = float(fwd.sum() / x_mass) if x_mass > 0 else 0.0
    r_m = float(rev.sum() / y.sum())
    return LoopTerms(fwd, rev, min(f_m, 1.0), min(r_m, 1.0))


def harmonic(f_m: float, r_m: float, beta: float) -> float:
    b2 = beta * beta
    denom = b2 * f_m + r_m
    if denom <= 0:
        return 0.0
    return float((1.0 + b2) * f_m * r_m / denom)


def context_measure(x, y, params: CmParams = GENERIC) -> float:
    """Generic Context-measure of prediction ``x`` against mask ``y``."""
    t = loop_terms(x, y, params)
    if t.f_m == 0.0:
        return 0.0
    return harmonic(t.f_m, t.r_m, params.beta)


def weighted_recall(reverse_map: np.ndarray, y: np.ndarray, d: np.ndarray) -> float:
    w = y + d
    return float((reverse_map * w).sum() / w.sum())


def context_measure_camo(x, y, d, params: CmParams = CAMO) -> float:
    """Camouflage-weighted Context-measure; ``d`` is the camouflage map of ``y``."""
    x, y = as_gray(x), as_binary(y)
    d = np.asarray(d, dtype=np.float64)
    check_same_shape(x, y, d)
    if np.any(d < 0) or np.any(d > 1):
        raise InvalidMap("camouflage map values must lie in [0, 1]")
    if np.any(d[y == 0] != 0):
        raise InvalidMap("camouflage map must be zero outside the GT foreground")
    t = loop_terms(x, y, params)
    if t.f_m == 0.0:
        return 0.0
    r_w = min(weighted_recall(t.reverse_map, y, d), 1.0)
    return harmonic(t.f_m, r_w, params.beta)
