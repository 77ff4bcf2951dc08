"""The six comparison metrics: MAE, IoU, F-beta, weighted F-beta, S-alpha, E-phi."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import as_binary, as_gray, check_same_shape
from .errors import BothEmpty, EmptyGroundTruth

_EPS = 1e-12


@dataclass(frozen=True)
class BaselineParams:
    beta_sq_f: float = 0.3
    beta_w: float = 1.0
    alpha_s: float = 0.5
    lambda_obj: float = 0.5
    dep_sigma: float = 5.0
    dep_window: int = 7
    imp_alpha: float = math.log(0.5) / 5.0

    def __post_init__(self):
        if not (self.beta_sq_f > 0 and self.beta_w > 0 and self.dep_sigma > 0):
            raise ValueError("metric weights must be positive")
        if not 0.0 <= self.alpha_s <= 1.0:
            raise ValueError("alpha_s must lie in [0, 1]")


def mae(x, y) -> float:
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    return float(np.mean(np.abs(y - x)))


def iou(x, y) -> float:
    x, y = as_binary(x, "prediction"), as_binary(y)
    check_same_shape(x, y)
    inter = float((x * y).sum())
    union = float((x + y - x * y).sum())
    if union == 0:
        raise BothEmpty("IoU undefined for two empty masks")
    return inter / union


def f_beta(x, y, beta_sq: float = 0.3) -> float:
    x, y = as_binary(x, "prediction"), as_binary(y)
    check_same_shape(x, y)
    if not y.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    tp = float((x * y).sum())
    if tp == 0:
        return 0.0
    precision = tp / float(x.sum())
    recall = tp / float(y.sum())
    return (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalized ``size x size`` Gaussian, as MATLAB's ``fspecial('gaussian')``."""
    r = (size - 1) / 2.0
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    g = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    return g / g.sum()


def f_beta_w(x, y, params: BaselineParams = BaselineParams()) -> float:
    """Weighted F-measure with error dependency and location importance."""
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    if not y.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    fg = y > 0
    err = np.abs(y - x)
    # distance and nearest foreground pixel for every background pixel
    dist, (ri, ci) = ndimage.distance_transform_edt(~fg, return_indices=True)
    # background errors are replaced by the error of their nearest GT pixel
    et = err[ri, ci]
    ea = ndimage.correlate(et, gaussian_window(params.dep_window, params.dep_sigma), mode="constant")
    min_e = np.where(fg & (ea < err), ea, err)
    importance = np.where(fg, 1.0, 2.0 - np.exp(params.imp_alpha * dist))
    ew = min_e * importance

    tp_w = float(y.sum() - ew[fg].sum())
    fp_w = float(ew[~fg].sum())
    recall = 1.0 - float(ew[fg].mean())
    precision = tp_w / (tp_w + fp_w + _EPS)
    b2 = params.beta_w**2
    return max(0.0, (1 + b2) * recall * precision / (recall + b2 * precision + _EPS))


def _object_score(values: np.ndarray, lambda_obj: float) -> float:
    if values.size == 0:
        return 0.0
    mu = float(values.mean())
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return 2.0 * mu / (mu * mu + 1.0 + 2.0 * lambda_obj * sd + _EPS)


def s_object(x: np.ndarray, y: np.ndarray, lambda_obj: float = 0.5) -> float:
    fg = y > 0
    u = float(y.mean())
    o_fg = _object_score(x[fg], lambda_obj)
    o_bg = _object_score(1.0 - x[~fg], lambda_obj)
    return u * o_fg + (1.0 - u) * o_bg


def ssim(x: np.ndarray, y: np.ndarray) -> float:
    """Single-window structural similarity of one region (0 for empty regions)."""
    n = x.size
    if n == 0:
        return 0.0
    mx, my = float(x.mean()), float(y.mean())
    if n > 1:
        vx = float(((x - mx) ** 2).sum() / (n - 1))
        vy = float(((y - my) ** 2).sum() / (n - 1))
        cxy = float(((x - mx) * (y - my)).sum() / (n - 1))
    else:
        vx = vy = cxy = 0.0
    num = 4.0 * mx * my * cxy
    den = (mx * mx + my * my) * (vx + vy)
    if num != 0:
        return num / (den + _EPS)
    if den == 0:
        return 1.0
    return 0.0


def _split_candidates(center: float) -> list[int]:
    # split line in pixel-edge coordinates; pixel i spans [i, i+1)
    edge = center + 0.5
    lo = math.floor(edge)
    if edge - lo == 0.5:
        return [lo, lo + 1]
    return [int(round(edge))]


def _region_score(x: np.ndarray, y: np.ndarray, row: int, col: int) -> float:
    total = float(y.sum())
    score = 0.0
    for rs in (slice(0, row), slice(row, None)):
        for cs in (slice(0, col), slice(col, None)):
            yq = y[rs, cs]
            if yq.size == 0:
                continue
            score += float(yq.sum()) / total * ssim(x[rs, cs], yq)
    return score


def s_region(x: np.ndarray, y: np.ndarray) -> float:
    """Quadrant SSIM split at the GT centroid, weighted by GT foreground share.

    When the centroid falls on a pixel center the split is ambiguous; the
    score is then averaged over both neighbouring split lines so that
    mirroring the inputs never changes it.
    """
    cr, cc = np.argwhere(y > 0).mean(axis=0)
    rows = _split_candidates(float(cr))
    cols = _split_candidates(float(cc))
    scores = [_region_score(x, y, r, c) for r in rows for c in cols]
    return float(np.mean(scores))


def s_measure(x, y, alpha_s: float = 0.5, lambda_obj: float = 0.5) -> float:
    """Structure measure combining object- and region-aware similarity."""
    x, y = as_gray(x), as_binary(y)
    check_same_shape(x, y)
    u = float(y.mean())
    if u == 0:
        return 1.0 - float(x.mean())
    if u == 1:
        return float(x.mean())
    score = alpha_s * s_object(x, y, lambda_obj) + (1.0 - alpha_s) * s_region(x, y)
    return min(max(score, 0.0), 1.0)


def e_measure(x, y) -> float:
    """Enhanced-alignment measure of two binary masks."""
    x, y = as_binary(x, "prediction"), as_binary(y)
    check_same_shape(x, y)
    if not y.any():
        return 1.0 - float(x.mean())
    if y.all():
        return float(x.mean())
    phi_x = x - x.mean()
    phi_y = y - y.mean()
    xi = 2.0 * phi_x * phi_y / (phi_x * phi_x + phi_y * phi_y + _EPS)
    return float(((1.0 + xi) ** 2).sum() / (4.0 * x.size))
