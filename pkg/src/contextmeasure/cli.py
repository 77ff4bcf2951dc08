"""Command line interface: ``contextmeasure {eval,camo-map,meta,selftest}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import runner, selftest
from .errors import ContextMeasureError
from .fileio import (
    EVAL_FIELDS,
    META_FIELDS,
    RunConfig,
    read_config_file,
    read_manifest,
    render_rows,
)

# flags that mirror RunConfig fields
_FLAGS = {
    "metrics": str,
    "alpha": float,
    "beta": float,
    "beta_camo": float,
    "gamma": float,
    "lam": float,
    "band_width": int,
    "patch_size": int,
    "overlap": int,
    "eps": float,
    "beta_sq_f": float,
    "beta_w": float,
    "alpha_s": float,
    "lambda_obj": float,
    "seed": int,
    "format": str,
    "threads": int,
    "mm3_mode": str,
    "mm4_radius": int,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("manifest", type=Path, help="JSON-lines manifest")
    p.add_argument("--config", type=Path, help="flat key=value config file")
    p.add_argument("-o", "--output", type=Path, help="report path (default: stdout)")
    for name, typ in _FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    p.add_argument("--dense", dest="dense", action="store_true", default=None, help="stride-1 patch grid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contextmeasure", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score every fm of every record")
    _add_common(p)

    p = sub.add_parser("camo-map", help="write camouflage-degree maps")
    _add_common(p)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("meta", help="run a meta-measure protocol")
    _add_common(p)
    p.add_argument("--protocol", required=True, choices=runner.PROTOCOLS)

    sub.add_parser("selftest", help="run the embedded oracle fixtures")
    return parser


def resolve_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig.from_mapping(values)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "selftest":
        return 0 if selftest.run() else 1

    try:
        cfg = resolve_config(args)
        records = read_manifest(args.manifest)
        if args.command == "eval":
            rows = runner.cmd_eval(records, cfg)
            _emit(render_rows(rows, EVAL_FIELDS, cfg.format), args.output)
            return 1 if any(r["error"] for r in rows) else 0
        if args.command == "camo-map":
            rows = runner.cmd_camo_map(records, cfg, args.out_dir)
            cols = ("id", "degree_png", "preview_png", "error")
            _emit(render_rows(rows, cols, cfg.format), args.output)
            return 1 if any(r["error"] for r in rows) else 0
        rows = runner.cmd_meta(records, cfg, args.protocol)
        _emit(render_rows(rows, META_FIELDS, cfg.format), args.output)
        return 0
    except (ContextMeasureError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
