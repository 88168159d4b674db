"""Pipeline orchestration: config, stage sequencing, artifacts, reports.

Stage order is fixed: downsample (optional) -> negate -> threshold ->
segment -> fractal gate -> features -> classify. Every run of the same
config on the same input produces byte-identical artifacts apart from the
timing values embedded in the JSON report.
"""

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .classify import Detection, RuleSet, classify, default_rules
from .errors import ConfigError, MammoCadError, PipelineStageError
from .features import compute_features, gradient_map
from .fractal import blanket_dimension, roughness_gate
from .image import GrayImage, haar_downsample, negate, read_pgm, write_pgm
from .segment import extract_regions, overlay_boundaries, segment_image, write_region_map_pgm
from .threshold import apply_threshold, histogram, mask_to_image, otsu_threshold

EMIT_CHOICES = ("inverted", "mask", "labels", "overlay", "features", "report")
RULE_KEYS = (
    "min_area",
    "max_area",
    "min_compactness",
    "min_boundary_gradient",
    "min_intensity_diff",
)
CSV_HEADER = "id,area,cmp,mwg,mg,var,edv,diff,D,label"


@dataclass
class PipelineConfig:
    """All knobs for one pipeline run; defaults reproduce the standard run."""

    dwt_levels: int = 3
    dwt_first: bool = True
    threshold: int | str = "auto"
    tau_split: int = 10
    tau_merge: int = 10
    min_block: int = 1
    r_max: int = 8
    d_min: float = 2.4
    d_max: float = 2.75
    min_region_pixels: int = 8
    rules: RuleSet | None = None
    rule_overrides: dict = field(default_factory=dict)
    output_dir: Path | None = None
    emit: tuple[str, ...] = ("report", "features")

    def validate(self) -> None:
        if self.dwt_levels < 0:
            raise ConfigError("dwt_levels must be >= 0")
        if self.threshold != "auto" and not (
            isinstance(self.threshold, int) and 0 <= self.threshold <= 255
        ):
            raise ConfigError("threshold must be 'auto' or an integer in [0, 255]")
        if self.tau_split < 0 or self.tau_merge < 0:
            raise ConfigError("tau_split and tau_merge must be >= 0")
        if self.min_block < 1:
            raise ConfigError("min_block must be >= 1")
        if self.r_max < 2:
            raise ConfigError("r_max must be >= 2")
        if not self.d_min < self.d_max:
            raise ConfigError("d_min must be < d_max")
        if self.min_region_pixels < 2:
            raise ConfigError("min_region_pixels must be >= 2")
        for name in self.emit:
            if name not in EMIT_CHOICES:
                raise ConfigError(f"unknown emit artifact {name!r}")
        for key in self.rule_overrides:
            if key not in RULE_KEYS:
                raise ConfigError(f"unknown rule {key!r}")


@dataclass
class DetectionReport:
    """Per-image result: counts, detections, and per-stage milliseconds."""

    source: str
    image_size: list[int]  # [width, height] of the working image
    threshold_used: int
    region_count_pre_gate: int
    region_count_post_gate: int
    detections: list[Detection]
    timings: dict[str, float]


@dataclass
class BatchError:
    """Per-file failure record; the batch keeps going."""

    source: str
    error: str


def resolve_rules(cfg: PipelineConfig, working_pixels: int) -> RuleSet:
    """The rule set actually applied: explicit rules, or scaled defaults."""
    if cfg.rules is not None:
        return cfg.rules
    rules = default_rules(working_pixels, cfg.d_min, cfg.d_max)
    if cfg.rule_overrides:
        rules = replace(rules, **cfg.rule_overrides)
    return rules


def run_pipeline(
    img: GrayImage, cfg: PipelineConfig, source: str = "<memory>"
) -> DetectionReport:
    """Run all stages on one image, emitting artifacts per cfg.emit."""
    cfg.validate()
    timings: dict[str, float] = {}

    def stage(name, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except MammoCadError as exc:
            raise PipelineStageError(name, exc) from exc
        timings[name] = (time.perf_counter() - start) * 1000.0
        return result

    working = img
    if cfg.dwt_first and cfg.dwt_levels:
        working = stage("downsample", lambda: haar_downsample(img, cfg.dwt_levels))
    inverted = stage("negate", lambda: negate(working))
    if not cfg.dwt_first and cfg.dwt_levels:
        inverted = stage("downsample", lambda: haar_downsample(inverted, cfg.dwt_levels))

    def _threshold():
        t = (
            otsu_threshold(histogram(inverted))
            if cfg.threshold == "auto"
            else cfg.threshold
        )
        return apply_threshold(inverted, t)

    mask = stage("threshold", _threshold)
    region_map = stage(
        "segment",
        lambda: segment_image(inverted, mask, cfg.tau_split, cfg.tau_merge, cfg.min_block),
    )
    regions = extract_regions(region_map, inverted)

    def _fractal():
        fits = {}
        floor = max(cfg.min_region_pixels, 2)
        for region in regions:
            if region.area >= floor:
                fits[region.id] = blanket_dimension(inverted, region, cfg.r_max)
        return fits

    fits = stage("fractal", _fractal)
    gated_ids = roughness_gate(fits, cfg.d_min, cfg.d_max)

    def _features():
        if not gated_ids:
            return {}
        grad = gradient_map(inverted)
        by_id = {region.id: region for region in regions}
        return {
            rid: compute_features(by_id[rid], inverted, grad) for rid in gated_ids
        }

    vectors = stage("features", _features)

    def _classify():
        rules = resolve_rules(cfg, inverted.width * inverted.height)
        return [
            replace(
                classify(rid, vectors[rid], fits[rid].dimension, rules),
                fit=fits[rid],
            )
            for rid in gated_ids
        ]

    detections = stage("classify", _classify)

    report = DetectionReport(
        source=source,
        image_size=[inverted.width, inverted.height],
        threshold_used=mask.threshold_used,
        region_count_pre_gate=region_map.region_count,
        region_count_post_gate=len(detections),
        detections=detections,
        timings=timings,
    )

    if cfg.output_dir is not None and cfg.emit:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(source).stem if source != "<memory>" else "image"
        if "inverted" in cfg.emit:
            write_pgm(inverted, out / f"{stem}_inverted.pgm")
        if "mask" in cfg.emit:
            write_pgm(mask_to_image(mask), out / f"{stem}_mask.pgm")
        if "labels" in cfg.emit:
            write_region_map_pgm(region_map, out / f"{stem}_labels.pgm")
        if "overlay" in cfg.emit:
            # Boundaries read best on the working source image, i.e. the
            # inverted image negated back.
            write_pgm(
                overlay_boundaries(negate(inverted), regions),
                out / f"{stem}_overlay.pgm",
            )
        if "features" in cfg.emit:
            (out / f"{stem}_features.csv").write_text(
                features_csv(report), encoding="utf-8"
            )
        if "report" in cfg.emit:
            (out / f"{stem}_report.json").write_text(
                report_json(report), encoding="utf-8"
            )
    return report


def run_batch(paths, cfg: PipelineConfig) -> list[DetectionReport | BatchError]:
    """Run the pipeline over many files; per-file errors become entries."""
    results: list[DetectionReport | BatchError] = []
    for path in paths:
        try:
            img = read_pgm(path)
            results.append(run_pipeline(img, cfg, source=str(path)))
        except MammoCadError as exc:
            results.append(BatchError(str(path), str(exc)))
    return results


def report_to_dict(report: DetectionReport) -> dict:
    """JSON-ready dict with keys matching the report fields."""
    return {
        "source": report.source,
        "image_size": list(report.image_size),
        "threshold_used": report.threshold_used,
        "region_count_pre_gate": report.region_count_pre_gate,
        "region_count_post_gate": report.region_count_post_gate,
        "detections": [
            {
                "region_id": det.region_id,
                "features": det.features.as_dict(),
                "dimension": det.dimension,
                "label": det.label,
                "failed_rules": list(det.failed_rules),
                "fit": None
                if det.fit is None
                else {
                    "scales": list(det.fit.scales),
                    "areas": list(det.fit.areas),
                    "dimension": det.fit.dimension,
                    "intercept": det.fit.intercept,
                    "residual": det.fit.residual,
                },
            }
            for det in sorted(report.detections, key=lambda d: d.region_id)
        ],
        "timings": dict(report.timings),
    }


def report_json(report: DetectionReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def features_csv(report: DetectionReport) -> str:
    """Feature table, one row per detection, sorted by region id."""
    lines = [CSV_HEADER]
    for det in sorted(report.detections, key=lambda d: d.region_id):
        f = det.features
        lines.append(
            ",".join(
                [
                    str(det.region_id),
                    str(f.area),
                    repr(f.compactness),
                    repr(f.mean_gradient),
                    repr(f.boundary_gradient),
                    repr(f.gray_std),
                    repr(f.edge_distance_variance),
                    repr(f.intensity_diff),
                    repr(det.dimension),
                    det.label,
                ]
            )
        )
    return "\n".join(lines) + "\n"
