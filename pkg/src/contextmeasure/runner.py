"""Batch commands behind the CLI: eval, camo-map and meta."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import metastudy
from .camo import quantify
from .errors import ContextMeasureError, MissingImage, TooFewQualifiedSamples
from .fileio import (
    RunConfig,
    format_percent,
    load_binary,
    load_gray,
    load_rgb,
    save_degree_png,
    save_preview_png,
)
from .metrics import build_registry

log = logging.getLogger(__name__)

PROTOCOLS = ("mm1", "mm2", "mm3", "mm4-erode", "mm4-dilate")


def _pool_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def registry_for(cfg: RunConfig):
    reg = build_registry(cfg.cm, cfg.cm_camo, cfg.camo, cfg.base)
    return {name: reg[name] for name in cfg.metrics}


def cmd_eval(records, cfg: RunConfig) -> list[dict]:
    """One row per (record, fm, metric); failures land in the ``error`` column."""
    metrics = registry_for(cfg)

    def one(rec) -> list[dict]:
        rows = []
        try:
            gt = load_binary(rec.gt)
            image = load_rgb(rec.image) if rec.image else None
        except (OSError, ContextMeasureError) as exc:
            return [
                {"id": rec.id, "fm": k, "metric": name, "score": None, "error": f"{type(exc).__name__}: {exc}"}
                for k in range(len(rec.fms))
                for name in metrics
            ]
        for k, path in enumerate(rec.fms):
            try:
                fm = load_gray(path)
            except (OSError, ContextMeasureError) as exc:
                fm, fm_err = None, f"{type(exc).__name__}: {exc}"
            for name, metric in metrics.items():
                row = {"id": rec.id, "fm": k, "metric": name, "score": None, "error": None}
                if fm is None:
                    row["error"] = fm_err
                else:
                    try:
                        row["score"] = metric(fm, gt, image)
                    except (ContextMeasureError, ValueError) as exc:
                        row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
        return rows

    chunks = _pool_map(one, list(records), cfg.threads)
    rows = [r for chunk in chunks for r in chunk]
    order = {name: i for i, name in enumerate(metrics)}
    rows.sort(key=lambda r: (r["id"], r["fm"], order[r["metric"]]))
    return rows


def cmd_camo_map(records, cfg: RunConfig, out_dir) -> list[dict]:
    """Write ``<id>_camo.png`` (16-bit D) and ``<id>_camo_preview.png`` per record."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = cfg.camo

    def one(rec) -> dict:
        row = {"id": rec.id, "degree_png": None, "preview_png": None, "error": None}
        try:
            if rec.image is None:
                raise MissingImage("record has no image")
            d = quantify(load_rgb(rec.image), load_binary(rec.gt), params)
            raw, preview = out_dir / f"{rec.id}_camo.png", out_dir / f"{rec.id}_camo_preview.png"
            save_degree_png(raw, d)
            save_preview_png(preview, d)
            row["degree_png"], row["preview_png"] = raw.name, preview.name
        except (OSError, ContextMeasureError, ValueError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    rows = _pool_map(one, list(records), cfg.threads)
    return sorted(rows, key=lambda r: r["id"])


def load_pairs(records) -> list[metastudy.SamplePair]:
    pairs = []
    for rec in records:
        gt = load_binary(rec.gt)
        image = load_rgb(rec.image) if rec.image else None
        for k, path in enumerate(rec.fms):
            fm = load_gray(path)
            pid = rec.id if len(rec.fms) == 1 else f"{rec.id}#{k}"
            pairs.append(metastudy.SamplePair(pid, fm, gt, image))
    return pairs


def load_groups(records) -> list[metastudy.RankedGroup]:
    groups = []
    for rec in records:
        if rec.human_rank is None:
            continue
        groups.append(
            metastudy.RankedGroup(
                id=rec.id,
                gt=load_binary(rec.gt),
                fms=tuple(load_gray(p) for p in rec.fms),
                human_rank=rec.human_rank,
                image=load_rgb(rec.image) if rec.image else None,
            )
        )
    return groups


def run_protocol(protocol: str, metric, *, pairs=None, groups=None, cfg: RunConfig) -> metastudy.MetaResult:
    if protocol == "mm1":
        return metastudy.mm1_run(groups, metric, workers=cfg.threads)
    if protocol == "mm2":
        return metastudy.mm2_run(pairs, metric, cfg.seed, workers=cfg.threads)
    if protocol == "mm3":
        return metastudy.mm3_run(pairs, metric, cfg.seed, mode=cfg.mm3_mode, workers=cfg.threads)
    op = protocol.split("-", 1)[1]
    return metastudy.mm4_run(pairs, metric, op, radius=cfg.mm4_radius, workers=cfg.threads)


def meta_rows(protocol: str, cfg: RunConfig, *, pairs=None, groups=None) -> list[dict]:
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if protocol in ("mm2", "mm3") and cfg.seed is None:
        raise ValueError(f"{protocol} requires a seed")
    if protocol == "mm1" and not groups:
        raise TooFewQualifiedSamples("mm1 needs records with human_rank")
    rows = []
    for name, metric in registry_for(cfg).items():
        res = run_protocol(protocol, metric, pairs=pairs, groups=groups, cfg=cfg)
        rows.append(
            {
                "metric": res.metric,
                "protocol": res.protocol,
                "statistic": format_percent(res.statistic),
                "value": None if np.isnan(res.statistic) else res.statistic,
                "sample_count": res.sample_count,
                "excluded": res.excluded,
                "seed": res.seed,
            }
        )
    return rows


def cmd_meta(records, cfg: RunConfig, protocol: str) -> list[dict]:
    """One row per configured metric with the protocol statistic."""
    if protocol == "mm1":
        return meta_rows(protocol, cfg, groups=load_groups(records))
    return meta_rows(protocol, cfg, pairs=load_pairs(records))
