"""8-bit grayscale images: PGM I/O, negation, Haar-pyramid downsampling.

Pixel coordinates are (x, y) with x the column and y the row; arrays are
stored row-major, so ``pixels[y, x]``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvalidPixelValue,
    IoFailure,
    MalformedHeader,
    NotDivisible,
    TruncatedData,
    UnsupportedMaxval,
)

LEVELS = 256  # gray-level count; pixel values live in [0, LEVELS - 1]

_WHITESPACE = b" \t\r\n\v\f"


@dataclass(eq=False)
class GrayImage:
    """Rectangular grid of 8-bit gray levels.

    ``pixels`` is a 2-D uint8 array of shape (height, width). Instances are
    treated as immutable values throughout the pipeline.
    """

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def levels(self) -> int:
        return LEVELS

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token and the offset just past it.

    Skips whitespace and '#'-to-end-of-line comments.
    """
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in (b"#",):
            eol = data.find(b"\n", pos)
            pos = n if eol < 0 else eol + 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise MalformedHeader("unexpected end of file in header")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _parse_dim(token: bytes, name: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise MalformedHeader(f"non-numeric {name}: {token!r}") from None
    if value < 1:
        raise MalformedHeader(f"{name} must be >= 1, got {value}")
    return value


def read_pgm(path) -> GrayImage:
    """Read a P2 (ASCII) or P5 (binary) PGM file with maxval <= 255."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    magic, pos = _next_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported magic {magic!r}; want P2 or P5")
    width_tok, pos = _next_token(data, pos)
    height_tok, pos = _next_token(data, pos)
    maxval_tok, pos = _next_token(data, pos)
    width = _parse_dim(width_tok, "width")
    height = _parse_dim(height_tok, "height")
    maxval = _parse_dim(maxval_tok, "maxval")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} > 255")

    count = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the maxval from the raster.
        if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
            raise MalformedHeader("missing whitespace after maxval")
        raw = data[pos + 1 : pos + 1 + count]
        if len(raw) < count:
            raise TruncatedData(f"expected {count} bytes, found {len(raw)}")
        flat = np.frombuffer(raw, dtype=np.uint8)
    else:
        values = []
        while len(values) < count:
            try:
                token, pos = _next_token(data, pos)
            except MalformedHeader:
                raise TruncatedData(
                    f"expected {count} samples, found {len(values)}"
                ) from None
            try:
                value = int(token)
            except ValueError:
                raise InvalidPixelValue(f"non-numeric sample {token!r}") from None
            if not 0 <= value <= maxval:
                raise InvalidPixelValue(f"sample {value} outside [0, {maxval}]")
            values.append(value)
        flat = np.array(values, dtype=np.uint8)
    return GrayImage(flat.reshape(height, width))


def write_pgm(img: GrayImage, path, mode: str = "binary") -> None:
    """Write ``img`` as PGM; ``mode`` is "ascii" (P2) or "binary" (P5).

    Written files carry maxval 255 and round-trip bit-exactly through
    :func:`read_pgm`.
    """
    if mode not in ("ascii", "binary"):
        raise ValueError(f"mode must be 'ascii' or 'binary', got {mode!r}")
    header = f"{'P2' if mode == 'ascii' else 'P5'}\n{img.width} {img.height}\n255\n"
    if mode == "binary":
        payload = header.encode("ascii") + img.pixels.tobytes()
    else:
        flat = img.pixels.ravel()
        # PNM convention: keep text lines short.
        lines = [
            " ".join(str(v) for v in flat[i : i + 17]) for i in range(0, len(flat), 17)
        ]
        payload = (header + "\n".join(lines) + "\n").encode("ascii")
    try:
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def negate(img: GrayImage) -> GrayImage:
    """Gray-level complement: every output pixel is 255 minus the input."""
    return GrayImage(255 - img.pixels)


def haar_downsample(img: GrayImage, levels: int) -> GrayImage:
    """Reduce the image by averaging disjoint 2x2 blocks, ``levels`` times.

    Each level replaces a 2x2 block {a, b, c, d} with round((a+b+c+d)/4),
    half rounded up; this is the low-pass pyramid apex, so a 1024x1024 input
    at levels=3 comes out 128x128. levels=0 returns the image unchanged.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    factor = 1 << levels
    if img.width % factor or img.height % factor:
        raise NotDivisible(
            f"{img.width}x{img.height} not divisible by 2^{levels}"
        )
    a = img.pixels.astype(np.uint32)
    for _ in range(levels):
        s = a[0::2, 0::2] + a[0::2, 1::2] + a[1::2, 0::2] + a[1::2, 1::2]
        a = (s + 2) >> 2
    return GrayImage(a.astype(np.uint8))
