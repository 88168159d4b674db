"""Command-line entry points: batch detection and phantom generation.

Exit codes: 0 all inputs processed cleanly, 1 at least one per-file error,
2 configuration or usage error.
"""

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .image import GrayImage, write_pgm
from .phantom import KINDS, generate_phantom
from .pipeline import (
    EMIT_CHOICES,
    RULE_KEYS,
    BatchError,
    PipelineConfig,
    run_batch,
)

_INT_KEYS = ("dwt_levels", "tau_split", "tau_merge", "min_block", "r_max", "min_region_pixels")
_FLOAT_KEYS = ("d_min", "d_max")
_BOOL_KEYS = ("dwt_first",)
_INT_RULES = ("min_area", "max_area")


def parse_config_file(path) -> dict:
    """Read a flat key=value config file into typed override values."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        values[key] = _parse_config_value(key, value, f"{path}:{lineno}")
    return values


def _parse_config_value(key: str, value: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if key == "threshold":
            return "auto" if value == "auto" else int(value)
        if key == "emit":
            return tuple(part.strip() for part in value.split(",") if part.strip())
        if key == "output_dir":
            return Path(value)
        if key in RULE_KEYS:
            return int(value) if key in _INT_RULES else float(value)
    except ValueError:
        raise ConfigError(f"{where}: bad value {value!r} for {key}") from None
    raise ConfigError(f"{where}: unknown key {key!r}")


def build_config(file_values: dict, cli_values: dict) -> PipelineConfig:
    """Defaults, then config-file values, then CLI flag overrides."""
    cfg = PipelineConfig()
    merged = dict(file_values)
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    rule_overrides = {k: merged.pop(k) for k in list(merged) if k in RULE_KEYS}
    known = {f.name for f in fields(PipelineConfig)}
    for key in merged:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    cfg = replace(cfg, rule_overrides=rule_overrides, **merged)
    cfg.validate()
    return cfg


def _threshold_arg(value: str):
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"threshold must be 'auto' or an integer, got {value!r}"
        ) from None


def _emit_arg(value: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in value.split(",") if part.strip())
    for name in names:
        if name not in EMIT_CHOICES:
            raise argparse.ArgumentTypeError(f"unknown artifact {name!r}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mammocad",
        description="Tumor-candidate detection in mammogram PGM images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser("detect", help="run the detection pipeline on PGM files")
    detect.add_argument("inputs", nargs="+", help="input PGM files")
    detect.add_argument("--config", help="flat key=value config file")
    detect.add_argument("--dwt-levels", type=int, dest="dwt_levels")
    detect.add_argument(
        "--dwt-first",
        action=argparse.BooleanOptionalAction,
        dest="dwt_first",
        default=None,
        help="downsample before negation (default) or after",
    )
    detect.add_argument("--threshold", type=_threshold_arg, help="'auto' or a gray level")
    detect.add_argument("--tau-split", type=int, dest="tau_split")
    detect.add_argument("--tau-merge", type=int, dest="tau_merge")
    detect.add_argument("--d-min", type=float, dest="d_min")
    detect.add_argument("--d-max", type=float, dest="d_max")
    detect.add_argument("--out", dest="output_dir", type=Path, default=Path("out"))
    detect.add_argument(
        "--emit",
        type=_emit_arg,
        help=f"comma list of artifacts: {','.join(EMIT_CHOICES)}",
    )

    phantom = sub.add_parser("phantom", help="generate a synthetic test image")
    phantom.add_argument("--kind", required=True, choices=KINDS)
    phantom.add_argument("--seed", type=int, default=1)
    phantom.add_argument("--size", type=int, default=1024)
    phantom.add_argument("--out", type=Path, default=Path("."))
    return parser


def _cmd_detect(args) -> int:
    file_values = parse_config_file(args.config) if args.config else {}
    cli_values = {
        "dwt_levels": args.dwt_levels,
        "dwt_first": args.dwt_first,
        "threshold": args.threshold,
        "tau_split": args.tau_split,
        "tau_merge": args.tau_merge,
        "d_min": args.d_min,
        "d_max": args.d_max,
        "output_dir": args.output_dir,
        "emit": args.emit,
    }
    cfg = build_config(file_values, cli_values)
    results = run_batch(args.inputs, cfg)
    failed = 0
    for result in results:
        if isinstance(result, BatchError):
            failed += 1
            print(f"{result.source}: ERROR: {result.error}", file=sys.stderr)
        else:
            tumors = sum(1 for d in result.detections if d.label == "tumor")
            print(
                f"{result.source}: {result.region_count_pre_gate} region(s), "
                f"{result.region_count_post_gate} past gate, {tumors} tumor"
            )
    return 1 if failed else 0


def _cmd_phantom(args) -> int:
    img, truth = generate_phantom(args.kind, args.seed, args.size)
    args.out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.kind}_{args.seed}"
    image_path = args.out / f"{stem}.pgm"
    truth_path = args.out / f"{stem}_truth.pgm"
    write_pgm(img, image_path)
    write_pgm(GrayImage(np.where(truth, 255, 0).astype(np.uint8)), truth_path)
    print(f"{image_path}\n{truth_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "detect":
            return _cmd_detect(args)
        return _cmd_phantom(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
