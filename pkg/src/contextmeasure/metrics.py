"""Named metric registry used by the batch runner and the meta-study protocols.

Every metric takes ``(fm, gt, image)`` and returns its native score. Binary
metrics binarize the prediction adaptively. ``Metric.similarity`` flips
error-type scores (MAE) so that higher always means better.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import baselines
from .camo import CamoParams, quantify
from .cmeasure import CmParams, context_measure, context_measure_camo
from .core import as_binary, as_gray, binarize_adaptive
from .errors import EmptyContext, MissingImage, NoValidPatches


@dataclass(frozen=True)
class Metric:
    name: str
    func: Callable[[np.ndarray, np.ndarray, "np.ndarray | None"], float]
    higher_is_better: bool = True
    needs_image: bool = False

    def __call__(self, fm, gt, image=None) -> float:
        if self.needs_image and image is None:
            raise MissingImage(f"metric {self.name!r} needs the RGB image")
        return float(self.func(fm, gt, image))

    def similarity(self, fm, gt, image=None) -> float:
        s = self(fm, gt, image)
        return s if self.higher_is_better else -s


def _digest(*arrays) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str((a.shape, a.dtype.str)).encode())
        h.update(a.tobytes())
    return h.digest()


@dataclass
class CamoCache:
    """Thread-safe memo of camouflage maps keyed by (image, GT) content."""

    params: CamoParams = field(default_factory=CamoParams)
    maxsize: int = 256
    _store: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def get(self, image, gt) -> np.ndarray:
        key = _digest(image, gt)
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            return hit
        try:
            d = quantify(image, gt, self.params)
        except (EmptyContext, NoValidPatches):
            # camouflage cannot be quantified: fall back to unweighted recall
            d = np.zeros(np.shape(gt), dtype=np.float64)
        d.setflags(write=False)
        with self._lock:
            if len(self._store) >= self.maxsize:
                self._store.pop(next(iter(self._store)))
            self._store[key] = d
        return d


def build_registry(
    cm: CmParams = CmParams(6.0, 1.0),
    cm_camo: CmParams = CmParams(6.0, 1.2),
    camo: CamoParams = CamoParams(),
    base: baselines.BaselineParams = baselines.BaselineParams(),
) -> dict[str, Metric]:
    cache = CamoCache(camo)

    def _cm_w(fm, gt, image):
        gt = as_binary(gt)
        return context_measure_camo(fm, gt, cache.get(image, gt), cm_camo)

    metrics = [
        Metric("mae", lambda fm, gt, _: baselines.mae(fm, gt), higher_is_better=False),
        Metric("iou", lambda fm, gt, _: baselines.iou(binarize_adaptive(fm), gt)),
        Metric("fbeta", lambda fm, gt, _: baselines.f_beta(binarize_adaptive(fm), gt, base.beta_sq_f)),
        Metric("fbeta_w", lambda fm, gt, _: baselines.f_beta_w(fm, gt, base)),
        Metric("s_alpha", lambda fm, gt, _: baselines.s_measure(fm, gt, base.alpha_s, base.lambda_obj)),
        Metric("e_phi", lambda fm, gt, _: baselines.e_measure(binarize_adaptive(fm), gt)),
        Metric("cm", lambda fm, gt, _: context_measure(fm, gt, cm)),
        Metric("cm_w", _cm_w, needs_image=True),
    ]
    return {m.name: m for m in metrics}


METRIC_NAMES = ("mae", "iou", "fbeta", "fbeta_w", "s_alpha", "e_phi", "cm", "cm_w")


def f1_quality(fm, gt) -> float:
    """F1 of the adaptively binarized prediction, used to filter meta-study samples."""
    return baselines.f_beta(binarize_adaptive(as_gray(fm)), gt, beta_sq=1.0)
