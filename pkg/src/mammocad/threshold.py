"""Histogram computation and adaptive (Otsu) threshold selection."""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyHistogram
from .image import GrayImage

BINS = 256


@dataclass
class Histogram:
    """Per-gray-level pixel counts; ``counts`` has one bin per level."""

    counts: np.ndarray
    total: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (BINS,):
            raise ValueError(f"counts must have {BINS} bins")
        if int(self.counts.sum()) != self.total:
            raise ValueError("total does not match sum of counts")


@dataclass
class BinaryMask:
    """Foreground/background partition; foreground is strictly > threshold."""

    bits: np.ndarray
    threshold_used: int

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2:
            raise ValueError("bits must be 2-D")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(self.bits.sum())


def histogram(img: GrayImage) -> Histogram:
    """Count pixels per gray level."""
    counts = np.bincount(img.pixels.ravel(), minlength=BINS)
    return Histogram(counts, int(counts.sum()))


def otsu_threshold(hist: Histogram) -> int:
    """Pick the threshold maximizing between-class variance.

    Returns the smallest t in [0, 254] maximizing
    sigma_B^2(t) = w0 * w1 * (mu0 - mu1)^2, where class 0 holds pixels <= t.
    A constant image yields that constant value. The score comparison runs
    in exact integer arithmetic, so ties and near-ties are unambiguous:
    dropping the constant 1/total^2, sigma_B^2(t) is proportional to
    (S0*c1 - S1*c0)^2 / (c0*c1) with c the class counts and S the class
    gray-value sums.
    """
    counts = [int(c) for c in hist.counts]
    total = hist.total
    if total == 0:
        raise EmptyHistogram("histogram has no pixels")

    occupied = [v for v, c in enumerate(counts) if c > 0]
    if len(occupied) == 1:
        return occupied[0]

    total_sum = sum(v * c for v, c in enumerate(counts))
    best_t = 0
    best_num = 0  # score numerator (S0*c1 - S1*c0)^2
    best_den = 1  # score denominator c0*c1
    c0 = 0
    s0 = 0
    for t in range(255):
        c0 += counts[t]
        s0 += t * counts[t]
        c1 = total - c0
        if c0 == 0 or c1 == 0:
            continue  # score 0, never beats best_num >= 0 strictly
        num = (s0 * c1 - (total_sum - s0) * c0) ** 2
        den = c0 * c1
        if num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t
    return best_t


def apply_threshold(img: GrayImage, t: int) -> BinaryMask:
    """Build the foreground mask of pixels strictly greater than ``t``."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {t}")
    return BinaryMask(img.pixels > t, t)


def mask_to_image(mask: BinaryMask) -> GrayImage:
    """Render a mask as an image: foreground 255, background 0."""
    return GrayImage(np.where(mask.bits, 255, 0).astype(np.uint8))
