"""Image loading/saving, the JSON-lines manifest, run configuration and report writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .baselines import BaselineParams
from .camo import CamoParams
from .cmeasure import CmParams
from .errors import DecodeError, ManifestError
from .metrics import METRIC_NAMES

# ---------------------------------------------------------------- images


def _open(path) -> Image.Image:
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc
    return img


def _gray_array(img: Image.Image) -> np.ndarray:
    if img.mode.startswith("I;16") or img.mode == "I":
        return np.asarray(img, dtype=np.float64) / 65535.0
    if img.mode == "F":
        raise DecodeError("floating-point images are not supported")
    if img.mode not in ("L", "1"):
        img = img.convert("L")
    return np.asarray(img.convert("L"), dtype=np.float64) / 255.0


def load_gray(path) -> np.ndarray:
    """Prediction map in [0, 1]; RGB input is reduced to luminance."""
    return np.clip(_gray_array(_open(path)), 0.0, 1.0)


def load_binary(path) -> np.ndarray:
    """Ground-truth mask: 1 where the scaled value is at least 0.5 (8-bit >= 128)."""
    return (_gray_array(_open(path)) >= 0.5).astype(np.float64)


def load_rgb(path) -> np.ndarray:
    return np.asarray(_open(path).convert("RGB"), dtype=np.uint8)


def save_degree_png(path, d: np.ndarray) -> None:
    """Camouflage map as a 16-bit grayscale PNG, ``round(D * 65535)``."""
    q = np.round(np.clip(d, 0.0, 1.0) * 65535.0).astype(np.uint16)
    Image.fromarray(q).save(path)


def load_degree_png(path) -> np.ndarray:
    return np.asarray(_open(path), dtype=np.float64) / 65535.0


# blue -> cyan -> green -> yellow -> red
_RAMP = np.array(
    [[0, 0, 255], [0, 255, 255], [0, 255, 0], [255, 255, 0], [255, 0, 0]],
    dtype=np.float64,
)


def colorize(d: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] onto the fixed blue-to-red ramp (red = most camouflaged)."""
    t = np.clip(np.asarray(d, dtype=np.float64), 0.0, 1.0) * (len(_RAMP) - 1)
    lo = np.minimum(np.floor(t).astype(int), len(_RAMP) - 2)
    frac = (t - lo)[..., None]
    rgb = _RAMP[lo] * (1.0 - frac) + _RAMP[lo + 1] * frac
    return np.round(rgb).astype(np.uint8)


def save_preview_png(path, d: np.ndarray) -> None:
    Image.fromarray(colorize(d)).save(path)


# ---------------------------------------------------------------- manifest


@dataclass(frozen=True)
class Record:
    id: str
    gt: Path
    fms: tuple[Path, ...]
    image: Path | None = None
    human_rank: tuple[int, ...] | None = None


def _parse_record(obj: dict, base: Path, lineno: int) -> Record:
    where = f"manifest line {lineno}"
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: expected a JSON object")
    try:
        rid = str(obj["id"])
        gt = obj["gt"]
        fms = obj["fms"]
    except KeyError as exc:
        raise ManifestError(f"{where}: missing field {exc}") from None
    if isinstance(fms, str):
        fms = [fms]
    if not fms:
        raise ManifestError(f"{where}: at least one fm path is required")
    rank = obj.get("human_rank")
    if rank is not None:
        rank = tuple(int(r) for r in rank)
        if len(rank) != len(fms) or sorted(rank) != list(range(1, len(fms) + 1)):
            raise ManifestError(f"{where}: human_rank must be a permutation matching the fm count")
    image = obj.get("image")
    return Record(
        id=rid,
        gt=base / gt,
        fms=tuple(base / p for p in fms),
        image=base / image if image else None,
        human_rank=rank,
    )


def read_manifest(path) -> list[Record]:
    """One JSON object per line; relative paths resolve against the manifest's folder."""
    path = Path(path)
    base = path.parent
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"manifest line {lineno}: {exc}") from None
            rec = _parse_record(obj, base, lineno)
            if rec.id in seen:
                raise ManifestError(f"manifest line {lineno}: duplicate id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    return records


def write_manifest(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    metrics: tuple[str, ...] = METRIC_NAMES
    alpha: float = 6.0
    beta: float = 1.0
    beta_camo: float = 1.2
    gamma: float = 8.0
    lam: float = 20.0
    band_width: int = 20
    patch_size: int = 7
    overlap: int = 3
    eps: float = 0.0
    dense: bool = False
    beta_sq_f: float = 0.3
    beta_w: float = 1.0
    alpha_s: float = 0.5
    lambda_obj: float = 0.5
    seed: int | None = None
    format: str = "csv"
    threads: int = 1
    mm3_mode: str = "background"
    mm4_radius: int = 1
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if isinstance(self.metrics, str):
            self.metrics = tuple(m.strip() for m in self.metrics.split(",") if m.strip())
        unknown = set(self.metrics) - set(METRIC_NAMES)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.mm3_mode not in ("background", "background_low"):
            raise ValueError("mm3_mode must be background or background_low")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def cm(self) -> CmParams:
        return CmParams(self.alpha, self.beta)

    @property
    def cm_camo(self) -> CmParams:
        return CmParams(self.alpha, self.beta_camo)

    @property
    def camo(self) -> CamoParams:
        return CamoParams(
            band_width=self.band_width,
            patch_size=self.patch_size,
            overlap=self.overlap,
            lam=self.lam,
            gamma=self.gamma,
            eps=self.eps,
            dense=self.dense,
        )

    @property
    def base(self) -> BaselineParams:
        return BaselineParams(
            beta_sq_f=self.beta_sq_f, beta_w=self.beta_w, alpha_s=self.alpha_s, lambda_obj=self.lambda_obj
        )

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls) if f.name != "extra"}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(known[key].default, raw)
        return cls(**kwargs)


def _coerce(default, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if default is None:
        return None if raw.lower() in ("", "none") else int(raw)
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            values[k.strip()] = v.strip()
    return values


def config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("extra")
    d["metrics"] = list(cfg.metrics)
    return d


# ---------------------------------------------------------------- reports

EVAL_FIELDS = ("id", "fm", "metric", "score", "error")
META_FIELDS = ("metric", "protocol", "statistic", "value", "sample_count", "excluded", "seed")


def format_score(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def format_percent(x: float) -> str:
    """Percentage with two decimals (half-up); tiny values render as ``≤0.01%``."""
    if x is None or math.isnan(x):
        return "n/a"
    pct = Decimal(repr(float(x))) * 100
    if pct <= Decimal("0.01"):
        return "≤0.01%"
    return f"{pct.quantize(Decimal('0.01'), rounding=ROUND_HALF_UP)}%"


def render_rows(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: r.get(c) for c in columns} for r in rows], indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: "" if r.get(c) is None else r.get(c) for c in columns})
    return buf.getvalue()


def parse_report(text: str, fmt: str) -> list[dict]:
    """Read a report back as rows of strings (``None`` for empty cells)."""
    if fmt == "json":
        rows = json.loads(text)
        return [{k: (None if v is None else str(v)) for k, v in r.items()} for r in rows]
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: (v if v != "" else None) for k, v in r.items()} for r in rows]
