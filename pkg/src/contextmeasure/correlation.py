"""Gaussian pixel-correlation model conditioned on the GT shape.

The GT foreground coordinates give a 2x2 covariance, which is rescaled to a
fixed trace ``alpha**2`` so the correlation reach does not depend on image
resolution. The resulting bivariate Gaussian density is discretized into a
convolution kernel truncated at three standard deviations of its major axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .errors import DegenerateCovariance, EmptyForeground, KernelTooLarge

COV_EPS = 1e-6


@dataclass(frozen=True)
class ShapeCovariance:
    sigma: np.ndarray  # 2x2, (row, col) order
    mean: np.ndarray


@dataclass(frozen=True)
class NormalizedCovariance:
    sigma_hat: np.ndarray
    alpha: float

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.sigma_hat)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.sigma_hat))


@dataclass(frozen=True)
class GaussianKernel:
    weights: np.ndarray
    half_rows: int
    half_cols: int
    source: NormalizedCovariance
    scale: float = 1.0  # < 1 when the raw discrete mass exceeded 1

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def estimate_covariance(fg) -> ShapeCovariance:
    """Sample covariance (n-1) of foreground coordinates plus ``COV_EPS * I``."""
    pts = np.asarray(fg, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        raise EmptyForeground("cannot estimate a covariance from an empty foreground")
    mean = pts.mean(axis=0)
    centered = pts - mean
    sigma = centered.T @ centered / max(n - 1, 1)
    sigma = 0.5 * (sigma + sigma.T) + COV_EPS * np.eye(2)
    return ShapeCovariance(sigma=sigma, mean=mean)


def normalize_covariance(cov: ShapeCovariance, alpha: float) -> NormalizedCovariance:
    tr = float(np.trace(cov.sigma))
    if not tr > 0:
        raise DegenerateCovariance(f"covariance trace must be positive, got {tr}")
    return NormalizedCovariance(sigma_hat=cov.sigma * (alpha**2 / tr), alpha=float(alpha))


def _density(offsets: np.ndarray, cov: NormalizedCovariance) -> np.ndarray:
    inv = cov.inverse
    quad = np.einsum("...i,ij,...j->...", offsets, inv, offsets)
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(cov.det))


def pixel_correlation(m, n, cov: NormalizedCovariance) -> float:
    """Bivariate Gaussian density of the offset ``n - m``."""
    d = np.asarray(n, dtype=np.float64) - np.asarray(m, dtype=np.float64)
    return float(_density(d, cov))


def kernel_half_extent(cov: NormalizedCovariance) -> int:
    lam = float(np.linalg.eigvalsh(cov.sigma_hat).max())
    return int(math.ceil(3.0 * math.sqrt(lam)))


def build_kernel(cov: NormalizedCovariance, max_extent: int | None = None) -> GaussianKernel:
    """Discretize the density on integer offsets within a square 3-sigma box.

    The weights are rescaled only downward, when their sum exceeds 1.
    """
    h = kernel_half_extent(cov)
    if max_extent is not None and h > max_extent:
        raise KernelTooLarge(f"kernel half extent {h} exceeds {max_extent}")
    r = np.arange(-h, h + 1, dtype=np.float64)
    offsets = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1)
    w = _density(offsets, cov)
    # exact symmetry w(d) = w(-d), independent of einsum summation order
    w = 0.5 * (w + w[::-1, ::-1])
    total = w.sum()
    scale = 1.0
    if total > 1.0:
        scale = 1.0 / total
        w = w * scale
    return GaussianKernel(weights=w, half_rows=h, half_cols=h, source=cov, scale=scale)


def kernel_for_mask(y, alpha: float) -> GaussianKernel:
    """Covariance estimate, normalization and kernel for a GT mask in one call."""
    y = np.asarray(y)
    fg = np.argwhere(y > 0)
    cov = normalize_covariance(estimate_covariance(fg), alpha)
    return build_kernel(cov, max_extent=2 * max(y.shape))


def convolve(field, kernel: GaussianKernel) -> np.ndarray:
    """Zero-padded ``same``-size convolution with a symmetric kernel.

    FFT based. Round-off is removed in two ways: the result is clipped to
    ``[0, kernel.total * max(field)]`` and set to exactly zero wherever the
    kernel box cannot reach a nonzero input pixel.
    """
    f = np.asarray(field, dtype=np.float64)
    if not f.any():
        return np.zeros_like(f)
    out = signal.oaconvolve(f, kernel.weights, mode="same")
    upper = kernel.total * float(np.abs(f).max())
    out = np.clip(out, 0.0, upper)
    size = (2 * kernel.half_rows + 1, 2 * kernel.half_cols + 1)
    reach = ndimage.maximum_filter(f != 0, size=size, mode="constant", cval=False)
    out[~reach] = 0.0
    return out
