"""Pixel-level camouflage degree via contextual overpainting.

The object is repainted from patches of its surroundings (a ``k``-pixel
dilation band). Pixels the surroundings can reproduce well have a small
CIEDE2000 difference to the original and therefore a camouflage degree
close to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .colorimetry import as_rgb, ciede2000_clamped, rgb_to_lab
from .core import as_binary, check_same_shape, morph
from .errors import EmptyContext, EmptyCorpus, EmptyGroundTruth, NoValidPatches


@dataclass(frozen=True)
class CamoParams:
    band_width: int = 20
    patch_size: int = 7
    overlap: int = 3
    lam: float = 20.0
    gamma: float = 8.0
    eps: float = 0.0
    dense: bool = False  # stride 1 instead of patch_size - overlap
    context_excludes_object: bool = True

    def __post_init__(self):
        if self.band_width < 1:
            raise ValueError("band_width must be >= 1")
        if self.patch_size < 1 or not 0 <= self.overlap < self.patch_size:
            raise ValueError("need patch_size >= 1 and 0 <= overlap < patch_size")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")

    @property
    def stride(self) -> int:
        return 1 if self.dense else self.patch_size - self.overlap


@dataclass(frozen=True)
class Patches:
    """Descriptors (``3*N*N + 2`` columns) and the top-left anchor of each patch."""

    vectors: np.ndarray
    anchors: np.ndarray

    def __len__(self):
        return len(self.anchors)


def context_band(y, k: int) -> np.ndarray:
    """Ring of width ``k`` around the object (square element), clipped to the frame."""
    y = as_binary(y)
    if not y.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    band = morph(y, "dilate", k) * (1.0 - y)
    if not band.any():
        raise EmptyContext("object leaves no surrounding context inside the frame")
    return band


def patch_anchors(region, params: CamoParams, exclude=None) -> np.ndarray:
    """Top-left corners on the stride grid whose patch center lies in ``region``.

    With ``exclude`` given, patches touching any excluded pixel are dropped.
    """
    region = np.asarray(region) > 0
    h, w = region.shape
    n, s = params.patch_size, params.stride
    rows = np.arange(0, h - n + 1, s)
    cols = np.arange(0, w - n + 1, s)
    if len(rows) == 0 or len(cols) == 0:
        return np.empty((0, 2), dtype=np.int64)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    anchors = np.column_stack([rr.ravel(), cc.ravel()])
    c = n // 2
    keep = region[anchors[:, 0] + c, anchors[:, 1] + c]
    if exclude is not None:
        # box sum of the excluded mask over each N x N window
        ex = np.pad(np.asarray(exclude) > 0, ((1, 0), (1, 0))).astype(np.int64)
        sat = ex.cumsum(0).cumsum(1)
        r0, c0 = anchors[:, 0], anchors[:, 1]
        hits = sat[r0 + n, c0 + n] - sat[r0, c0 + n] - sat[r0 + n, c0] + sat[r0, c0]
        keep &= hits == 0
    return anchors[keep]


def _standardize(coords: np.ndarray) -> np.ndarray:
    mu = coords.mean(axis=0)
    sd = coords.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (coords - mu) / sd


def extract_patches(lab, region, params: CamoParams, exclude=None) -> Patches:
    """Flattened Lab patches plus z-scored anchor coordinates scaled by ``lam``."""
    lab = np.asarray(lab, dtype=np.float64)
    anchors = patch_anchors(region, params, exclude)
    if len(anchors) == 0:
        raise NoValidPatches("region admits no full patch")
    n = params.patch_size
    windows = np.lib.stride_tricks.sliding_window_view(lab, (n, n), axis=(0, 1))
    colors = windows[anchors[:, 0], anchors[:, 1]].reshape(len(anchors), -1)
    coords = params.lam * _standardize(anchors.astype(np.float64))
    return Patches(vectors=np.hstack([colors, coords]), anchors=anchors)


def nn_match(queries, corpus, eps: float = 0.0, chunk: int = 1024) -> np.ndarray:
    """Index of the nearest corpus row (Euclidean) for each query row.

    ``eps == 0`` is an exact scan with ties going to the lowest corpus index;
    ``eps > 0`` uses a k-d tree whose answers are within ``(1 + eps)`` of the
    true nearest distance.
    """
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    c = np.atleast_2d(np.asarray(corpus, dtype=np.float64))
    if c.shape[0] == 0 or c.size == 0:
        raise EmptyCorpus("nearest-neighbor corpus is empty")
    if q.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if eps > 0:
        _, idx = cKDTree(c).query(q, k=1, eps=eps)
        return np.asarray(idx, dtype=np.int64)

    out = np.empty(len(q), dtype=np.int64)
    c_sq = np.einsum("ij,ij->i", c, c)
    for start in range(0, len(q), chunk):
        qb = q[start : start + chunk]
        d2 = c_sq[None, :] - 2.0 * qb @ c.T + np.einsum("ij,ij->i", qb, qb)[:, None]
        # the expansion is only a filter; candidates near the minimum are re-scored exactly
        lo = d2.min(axis=1, keepdims=True)
        slack = 1e-9 * (np.abs(lo) + c_sq.max() + 1.0)
        for i, row in enumerate(d2):
            cand = np.flatnonzero(row <= lo[i, 0] + slack[i, 0])
            diff = c[cand] - qb[i]
            exact = np.einsum("ij,ij->i", diff, diff)
            out[start + i] = cand[np.argmin(exact)]
    return out


def overpaint(lab, y, query_anchors, source_anchors, patch_size: int):
    """Repaint object pixels with the average of their matched context patches.

    Returns the repainted Lab image and the mask of object pixels that were
    covered by at least one patch. Uncovered pixels keep their original value.
    """
    lab = np.asarray(lab, dtype=np.float64)
    y = as_binary(y) > 0
    h, w = y.shape
    n = patch_size
    acc = np.zeros((h, w, 3))
    lo = np.full((h, w, 3), np.inf)
    hi = np.full((h, w, 3), -np.inf)
    count = np.zeros((h, w))
    for (r, c), (sr, sc) in zip(np.asarray(query_anchors), np.asarray(source_anchors)):
        src = lab[sr : sr + n, sc : sc + n]
        acc[r : r + n, c : c + n] += src
        count[r : r + n, c : c + n] += 1
        np.minimum(lo[r : r + n, c : c + n], src, out=lo[r : r + n, c : c + n])
        np.maximum(hi[r : r + n, c : c + n], src, out=hi[r : r + n, c : c + n])
    covered = (count > 0) & y
    mean = np.divide(acc, count[..., None], out=np.zeros_like(acc), where=count[..., None] > 0)
    # identical contributions reproduce their value exactly
    mean = np.where(lo == hi, lo, mean)
    out = lab.copy()
    out[covered] = mean[covered]
    return out, covered


def degree_from_delta(delta, gamma: float = 8.0) -> np.ndarray:
    """Map a color difference in [0, 100] to a camouflage degree in [0, 1]."""
    delta = np.clip(np.asarray(delta, dtype=np.float64), 0.0, 100.0)
    return np.expm1(gamma * (1.0 - delta / 100.0)) / np.expm1(gamma)


def camouflage_map(r, i, y, gamma: float = 8.0, covered=None) -> np.ndarray:
    """Camouflage degree of every object pixel; zero elsewhere.

    If ``covered`` is given, object pixels outside it take the color
    difference of their nearest covered pixel.
    """
    r = np.asarray(r, dtype=np.float64)
    i = np.asarray(i, dtype=np.float64)
    y = as_binary(y)
    check_same_shape(r, i, y)
    delta = ciede2000_clamped(r, i)
    obj = y > 0
    if covered is not None:
        covered = np.asarray(covered, dtype=bool) & obj
        if covered.any() and not covered[obj].all():
            _, (ri, ci) = ndimage.distance_transform_edt(~covered, return_indices=True)
            delta = delta[ri, ci]
    d = degree_from_delta(delta, gamma)
    return np.where(obj, d, 0.0)


@dataclass(frozen=True)
class CamoResult:
    degree: np.ndarray
    repainted: np.ndarray  # Lab
    covered: np.ndarray


def _crop_window(y: np.ndarray, params: CamoParams) -> tuple[slice, slice]:
    """Object bounding box grown by the band and a patch, aligned to the stride grid."""
    rows, cols = np.nonzero(y)
    margin = params.band_width + params.patch_size
    s = params.stride
    r0 = max(int(rows.min()) - margin, 0) // s * s
    c0 = max(int(cols.min()) - margin, 0) // s * s
    r1 = min(int(rows.max()) + margin + 1, y.shape[0])
    c1 = min(int(cols.max()) + margin + 1, y.shape[1])
    return slice(r0, r1), slice(c0, c1)


def quantify_detailed(img, y, params: CamoParams = CamoParams()) -> CamoResult:
    img = as_rgb(img)
    y = as_binary(y)
    check_same_shape(img, y)
    if not y.any():
        raise EmptyGroundTruth("ground truth has no foreground pixels")
    # everything below only depends on pixels near the object
    win = _crop_window(y, params)
    yc = y[win]
    lab = rgb_to_lab(img[win])
    band = context_band(yc, params.band_width)
    obj = extract_patches(lab, yc, params)
    exclude = yc if params.context_excludes_object else None
    ctx = extract_patches(lab, band, params, exclude=exclude)
    idx = nn_match(obj.vectors, ctx.vectors, eps=params.eps)
    repainted, covered = overpaint(lab, yc, obj.anchors, ctx.anchors[idx], params.patch_size)
    d = camouflage_map(repainted, lab, yc, params.gamma, covered=covered)

    full_lab = rgb_to_lab(img)
    full_lab[win] = repainted
    full_cov = np.zeros(y.shape, dtype=bool)
    full_cov[win] = covered
    full_d = np.zeros(y.shape)
    full_d[win] = d
    return CamoResult(degree=full_d, repainted=full_lab, covered=full_cov)


def quantify(img, y, params: CamoParams = CamoParams()) -> np.ndarray:
    """Camouflage map of object ``y`` in RGB image ``img``."""
    return quantify_detailed(img, y, params).degree
