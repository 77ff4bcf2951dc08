"""Raster conventions shared by every metric.

Maps are plain 2-D numpy arrays. A gray map (the prediction, FM) holds
float64 values in [0, 1]; a binary mask (the ground truth, GT) holds 0/1.
Pixel coordinates are ``(row, col)`` integer pairs.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, InvalidMap

#: floor of the adaptive threshold, keeps an all-zero map from matching everything
THRESHOLD_EPS = 1e-9


def as_gray(x, name: str = "fm") -> np.ndarray:
    """Validate a prediction map and return it as a float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidMap(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMap(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidMap(f"{name} values must lie in [0, 1]")
    return arr


def as_binary(y, name: str = "gt") -> np.ndarray:
    """Validate a mask and return it as a float64 array of 0.0/1.0."""
    arr = np.asarray(y)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidMap(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.float64)
    vals = np.asarray(arr, dtype=np.float64)
    if not np.all((vals == 0.0) | (vals == 1.0)):
        raise InvalidMap(f"{name} must only contain 0 and 1")
    return vals


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape[:2] for a in arrays}
    if len(shapes) != 1:
        raise DimensionMismatch(f"shape mismatch: {sorted(shapes)}")


def adaptive_threshold(x: np.ndarray) -> float:
    """Twice the mean value, clipped just below 1."""
    return min(2.0 * float(np.mean(x)), 1.0 - THRESHOLD_EPS)


def binarize_adaptive(x) -> np.ndarray:
    """Binarize a prediction map at ``max(min(2*mean, 1-eps), eps)``."""
    x = as_gray(x)
    tau = max(adaptive_threshold(x), THRESHOLD_EPS)
    return (x >= tau).astype(np.float64)


def foreground_pixels(y) -> np.ndarray:
    """Coordinates of the set pixels as an ``(n, 2)`` int array, row-major order."""
    return np.argwhere(np.asarray(y) > 0)


def square_element(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def morph(y, op: Literal["erode", "dilate"], radius: int = 1) -> np.ndarray:
    """Binary erosion/dilation with a full square element; outside the frame is background."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    mask = as_binary(y)
    size = 2 * radius + 1
    # a square element is separable, so max/min filters give the same result
    if op == "dilate":
        return ndimage.maximum_filter(mask, size=size, mode="constant", cval=0.0)
    if op == "erode":
        return ndimage.minimum_filter(mask, size=size, mode="constant", cval=0.0)
    raise ValueError(f"unknown morphology op {op!r}")
