"""Fractal roughness estimation per region.

The blanket estimator grows an upper surface u and a lower surface b around
the gray-level surface, one unit per radius step, taking dilation/erosion
over 4-neighbors restricted to the region's own pixels. The volume between
the surfaces at radius r gives a surface-area estimate A(r) = V(r)/(2r), and
the roughness D follows from the log-log law  log A(r) = (2 - D) log r + k'.
A flat surface has D = 2; rougher surfaces push D toward 3. A differential
box-counting estimator over the region's bounding box serves as an
independent cross-check.
"""

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateFit, RegionTooSmall
from .image import GrayImage
from .segment import Region


@dataclass
class BlanketFit:
    """Blanket record: scales r, areas A(r), fitted D, intercept, residual."""

    scales: list[int]
    areas: list[float]
    dimension: float
    intercept: float
    residual: float


def blanket_areas(
    img: GrayImage, region: Region, r_max: int = 8
) -> tuple[list[int], list[float]]:
    """Surface-area estimates A(r) for r = 1..r_max over one region.

    u and b start at the pixel values; each step sets
    u_r = max(u_{r-1} + 1, 4-neighbor max of u_{r-1}) and b_r symmetrically
    with min and -1. Neighbors outside the region (or image) are ignored, so
    the blanket is intrinsic to the region and background cannot bias it.
    """
    if len(region.pixels) < 2:
        raise RegionTooSmall(f"region {region.id} has {len(region.pixels)} pixel(s)")
    if r_max < 2:
        raise ValueError("r_max must be >= 2")
    x0, y0, w, h = region.bbox
    mask = np.zeros((h, w), dtype=bool)
    surf = np.zeros((h, w), dtype=np.float64)
    for x, y in region.pixels:
        mask[y - y0, x - x0] = True
        surf[y - y0, x - x0] = img.pixels[y, x]

    upper = surf.copy()
    lower = surf.copy()
    scales, areas = [], []
    for r in range(1, r_max + 1):
        upper = np.where(mask, np.maximum(upper + 1, _shift_extreme(upper, mask, "max")), upper)
        lower = np.where(mask, np.minimum(lower - 1, _shift_extreme(lower, mask, "min")), lower)
        volume = float((upper - lower)[mask].sum())
        scales.append(r)
        areas.append(volume / (2 * r))
    return scales, areas


def _shift_extreme(arr: np.ndarray, mask: np.ndarray, mode: str) -> np.ndarray:
    """Per-cell max (or min) over in-mask 4-neighbors; +-inf where none."""
    fill = -np.inf if mode == "max" else np.inf
    masked = np.where(mask, arr, fill)
    padded = np.pad(masked, 1, constant_values=fill)
    shifts = (
        padded[:-2, 1:-1],
        padded[2:, 1:-1],
        padded[1:-1, :-2],
        padded[1:-1, 2:],
    )
    reduce = np.maximum.reduce if mode == "max" else np.minimum.reduce
    return reduce(shifts)


def fit_dimension(scales: Sequence[int], areas: Sequence[float]) -> BlanketFit:
    """Least-squares line of log A(r) on log r; D is 2 minus the slope."""
    if len(scales) != len(areas) or len(scales) < 2:
        raise ValueError("need matching scales/areas with at least 2 points")
    if any(a <= 0 for a in areas):
        raise ValueError("areas must be positive")
    if len(set(scales)) == 1:
        raise DegenerateFit("all scales equal")
    x = np.log(np.asarray(scales, dtype=np.float64))
    y = np.log(np.asarray(areas, dtype=np.float64))
    x_mean = x.mean()
    y_mean = y.mean()
    slope = float(((x - x_mean) * (y - y_mean)).sum() / ((x - x_mean) ** 2).sum())
    intercept = float(y_mean - slope * x_mean)
    residual = float(((y - (slope * x + intercept)) ** 2).sum())
    return BlanketFit(list(scales), [float(a) for a in areas], 2.0 - slope, intercept, residual)


def blanket_dimension(img: GrayImage, region: Region, r_max: int = 8) -> BlanketFit:
    """Blanket areas plus the log-log fit in one call."""
    scales, areas = blanket_areas(img, region, r_max)
    return fit_dimension(scales, areas)


def box_count_dimension(img: GrayImage, region: Region) -> float:
    """Differential box-counting roughness over the region's bounding box.

    For each grid side s (powers of two up to half the short bbox side) the
    box height is h = s * 256 / M with M the short side; every s x s cell
    contributes ceil(max/h) - floor(min/h) + 1 boxes. D is the slope of
    log N(s) against log(1/s).
    """
    x0, y0, w, h = region.bbox
    short = min(w, h)
    if short < 8:
        raise RegionTooSmall(f"bounding box {w}x{h} below 8x8")
    window = img.pixels[y0 : y0 + h, x0 : x0 + w].astype(np.float64)

    sizes = []
    s = 2
    while s <= short // 2:
        sizes.append(s)
        s *= 2
    counts = []
    for s in sizes:
        box_h = s * 256.0 / short
        total = 0
        for cy in range(0, h, s):
            for cx in range(0, w, s):
                cell = window[cy : cy + s, cx : cx + s]
                total += int(
                    math.ceil(cell.max() / box_h) - math.floor(cell.min() / box_h) + 1
                )
        counts.append(total)
    x = np.log(1.0 / np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(counts, dtype=np.float64))
    x_mean = x.mean()
    slope = ((x - x_mean) * (y - y.mean())).sum() / ((x - x_mean) ** 2).sum()
    return float(slope)


def roughness_gate(
    fits: Mapping[int, BlanketFit], d_min: float, d_max: float
) -> list[int]:
    """Ids of regions whose fitted D lies in [d_min, d_max], in id order.

    Regions outside the band (too smooth or too rough) are discarded.
    """
    if not d_min < d_max:
        raise ValueError("d_min must be < d_max")
    return [rid for rid, fit in fits.items() if d_min <= fit.dimension <= d_max]
