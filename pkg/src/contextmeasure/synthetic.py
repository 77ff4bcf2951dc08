"""Seeded synthetic masks, predictions and scenes for self-tests and meta-study fixtures."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .metastudy import RankedGroup, SamplePair


def disk(shape, center, radius) -> np.ndarray:
    rr, cc = np.mgrid[: shape[0], : shape[1]]
    return (((rr - center[0]) ** 2 + (cc - center[1]) ** 2) <= radius**2).astype(np.float64)


def blob(rng: np.random.Generator, shape, center, radius, lobes: int = 3) -> np.ndarray:
    """A disk with a few overlapping lobes, so shapes are not all isotropic."""
    m = disk(shape, center, radius)
    for _ in range(lobes):
        ang = rng.uniform(0, 2 * np.pi)
        off = radius * rng.uniform(0.3, 0.7)
        c = (center[0] + off * np.sin(ang), center[1] + off * np.cos(ang))
        m = np.maximum(m, disk(shape, c, radius * rng.uniform(0.4, 0.7)))
    return m


def soft_prediction(gt, rng: np.random.Generator, blur: float = 1.0, shift: int = 0) -> np.ndarray:
    """A plausible non-binary prediction: shifted, blurred GT with mild amplitude jitter."""
    g = np.asarray(gt, dtype=np.float64)
    if shift:
        g = ndimage.shift(g, rng.integers(-shift, shift + 1, size=2), order=0, mode="constant")
    fm = ndimage.gaussian_filter(g, blur) * rng.uniform(0.85, 1.0)
    fm[fm < 1e-2] = 0.0
    return np.clip(fm, 0.0, 1.0)


def scene(gt, rng: np.random.Generator, contrast: float = 60.0) -> np.ndarray:
    """RGB image: textured background with an object whose color differs by ``contrast``."""
    h, w = np.shape(gt)
    base = rng.uniform(60, 190, size=3)
    img = base + rng.normal(0, 6, size=(h, w, 3))
    tint = rng.normal(0, 1, size=3)
    tint = contrast * tint / np.linalg.norm(tint)
    img = img + np.asarray(gt, dtype=np.float64)[..., None] * tint
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def gt_switch_pairs(n: int = 200, seed: int = 0, grid: int = 16, cell: int = 16) -> list[SamplePair]:
    """Pairs whose GT blobs occupy distinct grid cells of a shared canvas."""
    if n > grid * grid:
        raise ValueError("not enough grid cells for distinct blobs")
    rng = np.random.default_rng(seed)
    shape = (grid * cell, grid * cell)
    cells = rng.permutation(grid * grid)[:n]
    pairs = []
    for i, k in enumerate(cells):
        r, c = divmod(int(k), grid)
        center = (r * cell + cell / 2 + rng.uniform(-1, 1), c * cell + cell / 2 + rng.uniform(-1, 1))
        gt = blob(rng, shape, center, rng.uniform(3.5, 5.0), lobes=2)
        fm = soft_prediction(gt, rng, blur=0.4)
        pairs.append(SamplePair(f"s{i:03d}", fm, gt, scene(gt, rng)))
    return pairs


def quality_pairs(n: int = 100, seed: int = 0, size: int = 64) -> list[SamplePair]:
    """High-quality (F1 >= 0.6) single-object pairs with images."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        center = rng.uniform(size * 0.35, size * 0.65, size=2)
        gt = blob(rng, (size, size), center, rng.uniform(size * 0.12, size * 0.2))
        fm = soft_prediction(gt, rng, blur=rng.uniform(0.6, 1.5), shift=1)
        pairs.append(SamplePair(f"q{i:03d}", fm, gt, scene(gt, rng, rng.uniform(10, 80))))
    return pairs


def disk_pairs(n: int = 10, seed: int = 0, size: int = 64, radius: float = 16.0) -> list[SamplePair]:
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        center = rng.uniform(size / 2 - 4, size / 2 + 4, size=2)
        gt = disk((size, size), center, radius)
        pairs.append(SamplePair(f"d{i:02d}", gt.copy(), gt, scene(gt, rng)))
    return pairs


def thin_pairs(n: int = 10, seed: int = 0, size: int = 64) -> list[SamplePair]:
    """Bars and rings three to four pixels wide, with FM equal to GT."""
    rng = np.random.default_rng(seed)
    pairs = []
    rr, cc = np.mgrid[:size, :size]
    for i in range(n):
        width = int(rng.integers(3, 5))
        if i % 2 == 0:
            r0 = int(rng.integers(size // 4, 3 * size // 4))
            c0, c1 = sorted(rng.integers(4, size - 4, size=2))
            c1 = max(c1, c0 + size // 3)
            gt = ((rr >= r0) & (rr < r0 + width) & (cc >= c0) & (cc < c1)).astype(np.float64)
            if i % 4 == 2:
                gt = gt.T.copy()
        else:
            center = rng.uniform(size / 2 - 3, size / 2 + 3, size=2)
            rad = rng.uniform(size * 0.2, size * 0.35)
            d = np.hypot(rr - center[0], cc - center[1])
            gt = ((d >= rad) & (d < rad + width)).astype(np.float64)
        pairs.append(SamplePair(f"t{i:02d}", gt.copy(), gt, scene(gt, rng)))
    return pairs


def corruption_series(gt, rng: np.random.Generator, steps=(0.05, 0.15, 0.3)) -> list[np.ndarray]:
    """Nested corruptions of a binary GT: each step flips a superset of the previous pixels.

    Flips are drawn from a band around the object so IoU strictly decreases.
    """
    gt = np.asarray(gt, dtype=np.float64)
    ring = ndimage.binary_dilation(gt > 0, iterations=6)
    pool = rng.permutation(np.flatnonzero(ring))
    n_fg = int(gt.sum())
    out = []
    for s in steps:
        k = max(1, int(round(s * n_fg)))
        fm = gt.copy().ravel()
        fm[pool[:k]] = 1.0 - fm[pool[:k]]
        out.append(fm.reshape(gt.shape))
    return out


def ranked_groups(n: int = 50, seed: int = 0, size: int = 64) -> list[RankedGroup]:
    """Groups of three FMs ordered by construction (rank 1 = least corrupted), shuffled."""
    rng = np.random.default_rng(seed)
    groups = []
    for i in range(n):
        center = rng.uniform(size * 0.35, size * 0.65, size=2)
        gt = blob(rng, (size, size), center, rng.uniform(size * 0.12, size * 0.2))
        fms = corruption_series(gt, rng)
        order = rng.permutation(3)
        groups.append(
            RankedGroup(
                id=f"g{i:03d}",
                gt=gt,
                fms=tuple(fms[j] for j in order),
                human_rank=tuple(int(j) + 1 for j in order),
                image=scene(gt, rng),
            )
        )
    return groups


def _save_png(path, arr, bits: int = 8) -> None:
    from PIL import Image

    if arr.ndim == 3:
        Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(path)
        return
    scale = 65535.0 if bits == 16 else 255.0
    dtype = np.uint16 if bits == 16 else np.uint8
    Image.fromarray(np.round(np.clip(arr, 0, 1) * scale).astype(dtype)).save(path)


def write_corpus(out_dir, items, name: str = "manifest.jsonl"):
    """Dump SamplePairs or RankedGroups as PNGs plus a manifest; returns the manifest path.

    FMs go out as 16-bit PNG so soft values survive the round trip.
    """
    from pathlib import Path

    from .fileio import write_manifest

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for it in items:
        rec = {"id": it.id, "gt": f"{it.id}_gt.png"}
        _save_png(out / rec["gt"], it.gt)
        fms = it.fms if isinstance(it, RankedGroup) else (it.fm,)
        rec["fms"] = []
        for k, fm in enumerate(fms):
            rel = f"{it.id}_fm{k}.png"
            _save_png(out / rel, fm, bits=16)
            rec["fms"].append(rel)
        if it.image is not None:
            rec["image"] = f"{it.id}_img.png"
            _save_png(out / rec["image"], it.image)
        if isinstance(it, RankedGroup):
            rec["human_rank"] = list(it.human_rank)
        lines.append(rec)
    path = out / name
    write_manifest(path, lines)
    return path
