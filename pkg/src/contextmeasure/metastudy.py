"""Meta-measures: protocols that score the evaluation metrics themselves.

MM1  agreement with human rankings (mean theta = 1 - Spearman rho)
MM2  GT switch: does a deranged pseudo-GT ever beat the correct GT?
MM3  noise: does a lightly noised prediction ever beat the original?
MM4  boundary: mean score change after eroding or dilating the GT
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from scipy import stats

from .core import as_binary, as_gray, morph
from .errors import (
    DegenerateRanks,
    EmptyCandidateRegion,
    LengthMismatch,
    MissingImage,
    TooFewQualifiedSamples,
)
from .metrics import Metric, f1_quality

log = logging.getLogger(__name__)

F1_MIN = 0.6
NOISE_FRACTION = 0.01
NOISE_SIGMA = 0.2

CandidateMode = Literal["background", "background_low"]


@dataclass(frozen=True)
class SamplePair:
    id: str
    fm: np.ndarray
    gt: np.ndarray
    image: np.ndarray | None = None


@dataclass(frozen=True)
class RankedGroup:
    id: str
    gt: np.ndarray
    fms: tuple
    human_rank: tuple  # 1 = best
    image: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.fms)
        if sorted(self.human_rank) != list(range(1, n + 1)):
            raise ValueError(f"group {self.id}: human_rank must be a permutation of 1..{n}")


@dataclass(frozen=True)
class MetaResult:
    metric: str
    protocol: str
    statistic: float
    sample_count: int
    seed: int | None = None
    excluded: int = 0


def _pmap(fn: Callable, items: Sequence, workers: int = 1) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- MM1 ------------------------------------------------------------------


def scores_to_ranks(scores: Iterable[float]) -> np.ndarray:
    """Rank 1 for the highest score; tied scores share their average rank."""
    return stats.rankdata(-np.asarray(list(scores), dtype=np.float64), method="average")


def spearman_theta(metric_ranks, human_ranks) -> float:
    """``1 - rho`` where rho is Pearson correlation of (average-tied) ranks."""
    a = np.asarray(metric_ranks, dtype=np.float64)
    b = np.asarray(human_ranks, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"rank lists differ in length: {a.shape} vs {b.shape}")
    if len(a) < 2:
        raise LengthMismatch("need at least two ranked items")
    # re-rank so arbitrary scores and tied ranks are handled alike
    a = stats.rankdata(a, method="average")
    b = stats.rankdata(b, method="average")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise DegenerateRanks("cannot correlate a constant ranking")
    a = a - a.mean()
    b = b - b.mean()
    rho = float((a * b).sum() / np.sqrt((a * a).sum() * (b * b).sum()))
    return 1.0 - min(max(rho, -1.0), 1.0)


def mm1_run(groups: Sequence[RankedGroup], metric: Metric, workers: int = 1) -> MetaResult:
    if metric.needs_image and any(g.image is None for g in groups):
        raise MissingImage(f"metric {metric.name!r} needs an image for every group")

    def one(g: RankedGroup):
        scores = [metric.similarity(fm, g.gt, g.image) for fm in g.fms]
        try:
            return spearman_theta(scores_to_ranks(scores), g.human_rank)
        except DegenerateRanks:
            log.info("group %s: %s produced tied ranks, excluded", g.id, metric.name)
            return None

    thetas = _pmap(one, list(groups), workers)
    kept = [t for t in thetas if t is not None]
    stat = float(np.mean(kept)) if kept else float("nan")
    return MetaResult(metric.name, "mm1", stat, len(kept), None, len(thetas) - len(kept))


# --- MM2 ------------------------------------------------------------------


def derangement(n: int, seed) -> np.ndarray:
    """Uniform random permutation without fixed points (0-based)."""
    if n < 2:
        raise ValueError("a derangement needs n >= 2")
    rng = np.random.default_rng(seed)
    ident = np.arange(n)
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == ident):
            return perm


def resize_nearest(mask: np.ndarray, shape: tuple) -> np.ndarray:
    """Nearest-neighbour resize using pixel-center mapping; keeps values binary."""
    mask = np.asarray(mask)
    h, w = mask.shape
    th, tw = shape
    rows = np.minimum(((np.arange(th) + 0.5) * h / th).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(tw) + 0.5) * w / tw).astype(np.int64), w - 1)
    return mask[np.ix_(rows, cols)]


def qualified(pairs: Sequence[SamplePair], f1_min: float = F1_MIN) -> list[SamplePair]:
    return [p for p in pairs if f1_quality(p.fm, p.gt) >= f1_min]


def _check_images(pairs, metric: Metric):
    if metric.needs_image and any(p.image is None for p in pairs):
        raise MissingImage(f"metric {metric.name!r} needs an image for every sample")


def mm2_run(pairs: Sequence[SamplePair], metric: Metric, seed: int, workers: int = 1) -> MetaResult:
    good = qualified(pairs)
    if len(good) < 2:
        raise TooFewQualifiedSamples(f"{len(good)} samples pass the F1 >= {F1_MIN} filter")
    _check_images(good, metric)
    perm = derangement(len(good), seed)

    def one(i: int) -> bool:
        p = good[i]
        pseudo = resize_nearest(as_binary(good[perm[i]].gt), p.fm.shape)
        if not pseudo.any():
            return False
        true_s = metric.similarity(p.fm, p.gt, p.image)
        pseudo_s = metric.similarity(p.fm, pseudo, p.image)
        return pseudo_s > true_s

    errors = _pmap(one, range(len(good)), workers)
    return MetaResult(metric.name, "mm2", float(np.mean(errors)), len(good), seed, len(pairs) - len(good))


# --- MM3 ------------------------------------------------------------------


def noise_candidates(fm, gt, mode: CandidateMode = "background") -> np.ndarray:
    gt = as_binary(gt)
    cand = gt == 0
    if mode == "background_low":
        cand &= as_gray(fm) < 0.1
    elif mode != "background":
        raise ValueError(f"unknown candidate mode {mode!r}")
    return cand


def inject_noise(fm, gt, seed, mode: CandidateMode = "background") -> np.ndarray:
    """Add truncated Gaussian noise to 1% of the image's pixels.

    The pixels are drawn without replacement from the GT background.
    Negative noise draws leave their pixel unchanged; results are capped at 1.
    """
    fm = as_gray(fm)
    cand = np.flatnonzero(noise_candidates(fm, gt, mode))
    if cand.size == 0:
        raise EmptyCandidateRegion("no candidate pixels for noise injection")
    rng = np.random.default_rng(seed)
    count = min(int(np.floor(NOISE_FRACTION * fm.size)), cand.size)
    picked = rng.choice(cand, size=count, replace=False)
    eps = rng.normal(0.0, NOISE_SIGMA, size=count)
    out = fm.copy().ravel()
    out[picked] = np.minimum(out[picked] + np.maximum(eps, 0.0), 1.0)
    return out.reshape(fm.shape)


def mm3_run(
    pairs: Sequence[SamplePair],
    metric: Metric,
    seed: int,
    mode: CandidateMode = "background",
    workers: int = 1,
) -> MetaResult:
    good = qualified(pairs)
    if len(good) < 2:
        raise TooFewQualifiedSamples(f"{len(good)} samples pass the F1 >= {F1_MIN} filter")
    _check_images(good, metric)
    seeds = np.random.SeedSequence(seed).spawn(len(good))

    def one(i: int) -> bool:
        p = good[i]
        noisy = inject_noise(p.fm, p.gt, seeds[i], mode)
        return metric.similarity(noisy, p.gt, p.image) > metric.similarity(p.fm, p.gt, p.image)

    errors = _pmap(one, range(len(good)), workers)
    return MetaResult(metric.name, "mm3", float(np.mean(errors)), len(good), seed, len(pairs) - len(good))


# --- MM4 ------------------------------------------------------------------


def mm4_run(
    pairs: Sequence[SamplePair],
    metric: Metric,
    op: Literal["erode", "dilate"],
    radius: int = 1,
    workers: int = 1,
) -> MetaResult:
    _check_images(pairs, metric)

    def one(p: SamplePair):
        gt = as_binary(p.gt)
        moved = morph(gt, op, radius)
        if not moved.any():
            return None
        if np.array_equal(moved, gt):
            return 0.0
        return abs(metric(p.fm, moved, p.image) - metric(p.fm, gt, p.image))

    deltas = _pmap(one, list(pairs), workers)
    kept = [d for d in deltas if d is not None]
    stat = float(np.mean(kept)) if kept else float("nan")
    return MetaResult(metric.name, f"mm4-{op}", stat, len(kept), None, len(deltas) - len(kept))
