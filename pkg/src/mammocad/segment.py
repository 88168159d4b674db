"""Split-and-merge segmentation of the thresholded foreground.

The quadtree split recursively quarters blocks whose foreground pixel values
spread more than ``tau_split``; the merge pass then fuses 4-adjacent regions
whose mean gray values differ by at most ``tau_merge`` until nothing changes.
Background pixels never join a region. Regions are 8-connected internally;
adjacency between regions (for merging and boundaries) is 4-connected, which
avoids checkerboard fusion.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure
from .image import GrayImage
from .threshold import BinaryMask

Block = tuple[int, int, int, int]  # (x, y, width, height)

_N4 = ((0, -1), (0, 1), (-1, 0), (1, 0))
_N8 = _N4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass
class RegionMap:
    """Labeled partition: 0 is background, 1..region_count are regions."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int32)
        if self.labels.ndim != 2:
            raise ValueError("labels must be 2-D")
        present = np.unique(self.labels)
        present = present[present > 0]
        if self.region_count != len(present) or (
            len(present) and present[-1] != self.region_count
        ):
            raise ValueError("region ids must be dense 1..region_count")

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass
class Region:
    """One segmented region with its geometry.

    ``pixels`` and ``boundary`` are raster-ordered (x, y) lists; boundary
    pixels have at least one 4-neighbor outside the region or lie on the
    image border. ``bbox`` is (x, y, width, height) of the smallest
    enclosing rectangle; ``centroid`` is the mean pixel coordinate.
    """

    id: int
    pixels: list[tuple[int, int]]
    boundary: list[tuple[int, int]]
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]

    @property
    def area(self) -> int:
        return len(self.pixels)


def split(
    img: GrayImage, mask: BinaryMask, tau_split: int = 10, min_block: int = 1
) -> list[Block]:
    """Quadtree-split the image into blocks homogeneous on the foreground.

    A block splits into (ceil/floor) quadrants while the max-min spread of
    its foreground pixel values exceeds ``tau_split`` and its longer side
    exceeds ``min_block``. Blocks with no foreground never split. The
    returned leaves tile the image in depth-first NW, NE, SW, SE order.
    """
    if (img.height, img.width) != (mask.height, mask.width):
        raise ValueError("image and mask dimensions differ")
    if tau_split < 0:
        raise ValueError("tau_split must be >= 0")
    if min_block < 1:
        raise ValueError("min_block must be >= 1")
    px = img.pixels
    bits = mask.bits
    leaves: list[Block] = []

    def _descend(x: int, y: int, w: int, h: int) -> None:
        block_bits = bits[y : y + h, x : x + w]
        if max(w, h) > min_block and block_bits.any():
            vals = px[y : y + h, x : x + w][block_bits]
            if int(vals.max()) - int(vals.min()) > tau_split:
                hl = h - h // 2
                wl = w - w // 2
                for cy, ch in ((y, hl), (y + hl, h - hl)):
                    for cx, cw in ((x, wl), (x + wl, w - wl)):
                        if cw > 0 and ch > 0:
                            _descend(cx, cy, cw, ch)
                return
        leaves.append((x, y, w, h))

    _descend(0, 0, img.width, img.height)
    return leaves


def _seed_regions(bits: np.ndarray, blocks: list[Block], labels: np.ndarray):
    """Label the 8-connected foreground components of every block.

    Blocks are visited in raster order of their top-left corner and
    components in raster order of their seed pixel, so the initial ids are
    deterministic. Returns {id: [(x, y), ...]}.
    """
    height, width = bits.shape
    pixels_of: dict[int, list[tuple[int, int]]] = {}
    next_id = 1
    for x0, y0, w, h in sorted(blocks, key=lambda b: (b[1], b[0])):
        for sy in range(y0, y0 + h):
            for sx in range(x0, x0 + w):
                if not bits[sy, sx] or labels[sy, sx]:
                    continue
                rid = next_id
                next_id += 1
                stack = [(sx, sy)]
                labels[sy, sx] = rid
                member = []
                while stack:
                    cx, cy = stack.pop()
                    member.append((cx, cy))
                    for dx, dy in _N8:
                        nx, ny = cx + dx, cy + dy
                        if (
                            x0 <= nx < x0 + w
                            and y0 <= ny < y0 + h
                            and bits[ny, nx]
                            and not labels[ny, nx]
                        ):
                            labels[ny, nx] = rid
                            stack.append((nx, ny))
                pixels_of[rid] = member
    return pixels_of


def merge(
    img: GrayImage, mask: BinaryMask, blocks: list[Block], tau_merge: int = 10
) -> RegionMap:
    """Fuse 4-adjacent block regions with similar means until stable.

    Starting regions are the 8-connected foreground components of each leaf
    block. Regions are scanned by ascending id; a scanned region absorbs any
    4-adjacent region whose mean gray value is within ``tau_merge`` of its
    own, and passes repeat until one completes with no merge, so at return
    no adjacent pair is within ``tau_merge``. Ids are then relabeled densely
    in raster order of each region's first pixel.
    """
    if (img.height, img.width) != (mask.height, mask.width):
        raise ValueError("image and mask dimensions differ")
    _check_partition(blocks, img.width, img.height)
    px = img.pixels
    bits = mask.bits
    labels = np.zeros(bits.shape, dtype=np.int32)
    pixels_of = _seed_regions(bits, blocks, labels)
    gray_sum = {
        rid: sum(int(px[y, x]) for x, y in members)
        for rid, members in pixels_of.items()
    }

    height, width = bits.shape

    def neighbors_of(rid: int) -> list[int]:
        seen = set()
        for x, y in pixels_of[rid]:
            for dx, dy in _N4:
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height:
                    other = int(labels[ny, nx])
                    if other and other != rid:
                        seen.add(other)
        return sorted(seen)

    while True:
        merged_any = False
        for rid in sorted(pixels_of):
            if rid not in pixels_of:
                continue  # absorbed earlier in this pass
            while True:
                mean = gray_sum[rid] / len(pixels_of[rid])
                target = None
                for other in neighbors_of(rid):
                    if abs(mean - gray_sum[other] / len(pixels_of[other])) <= tau_merge:
                        target = other
                        break
                if target is None:
                    break
                for x, y in pixels_of[target]:
                    labels[y, x] = rid
                pixels_of[rid].extend(pixels_of[target])
                gray_sum[rid] += gray_sum[target]
                del pixels_of[target], gray_sum[target]
                merged_any = True
        if not merged_any:
            break

    order = sorted(pixels_of, key=lambda rid: min((y, x) for x, y in pixels_of[rid]))
    final = np.zeros_like(labels)
    for new_id, rid in enumerate(order, start=1):
        for x, y in pixels_of[rid]:
            final[y, x] = new_id
    return RegionMap(final, len(order))


def _check_partition(blocks: list[Block], width: int, height: int) -> None:
    cover = np.zeros((height, width), dtype=np.int32)
    for x, y, w, h in blocks:
        if x < 0 or y < 0 or x + w > width or y + h > height or w < 1 or h < 1:
            raise ValueError(f"block {(x, y, w, h)} outside image")
        cover[y : y + h, x : x + w] += 1
    if not (cover == 1).all():
        raise ValueError("blocks do not partition the image")


def segment_image(
    img: GrayImage,
    mask: BinaryMask,
    tau_split: int = 10,
    tau_merge: int = 10,
    min_block: int = 1,
) -> RegionMap:
    """Run split then merge with one call."""
    return merge(img, mask, split(img, mask, tau_split, min_block), tau_merge)


def extract_regions(region_map: RegionMap, img: GrayImage | None = None) -> list[Region]:
    """Build one :class:`Region` per label id, ascending."""
    labels = region_map.labels
    height, width = labels.shape
    if img is not None and (img.height, img.width) != (height, width):
        raise ValueError("image and region map dimensions differ")
    pixels_of: dict[int, list[tuple[int, int]]] = {
        rid: [] for rid in range(1, region_map.region_count + 1)
    }
    for y, x in np.argwhere(labels > 0):
        pixels_of[int(labels[y, x])].append((int(x), int(y)))

    regions = []
    for rid in range(1, region_map.region_count + 1):
        members = pixels_of[rid]
        boundary = []
        for x, y in members:
            on_border = x == 0 or y == 0 or x == width - 1 or y == height - 1
            if on_border or any(
                labels[y + dy, x + dx] != rid for dx, dy in _N4
            ):
                boundary.append((x, y))
        xs = [x for x, _ in members]
        ys = [y for _, y in members]
        x0, y0 = min(xs), min(ys)
        bbox = (x0, y0, max(xs) - x0 + 1, max(ys) - y0 + 1)
        centroid = (sum(xs) / len(xs), sum(ys) / len(ys))
        regions.append(Region(rid, members, boundary, bbox, centroid))
    return regions


def write_region_map_pgm(region_map: RegionMap, path) -> None:
    """Dump a label map as P5 with maxval = region_count for inspection.

    Uses two-byte big-endian samples when more than 255 regions exist.
    """
    maxval = max(region_map.region_count, 1)
    if maxval > 65535:
        raise ValueError("too many regions for PGM export")
    header = f"P5\n{region_map.width} {region_map.height}\n{maxval}\n".encode("ascii")
    if maxval < 256:
        raster = region_map.labels.astype(np.uint8).tobytes()
    else:
        raster = region_map.labels.astype(">u2").tobytes()
    try:
        Path(path).write_bytes(header + raster)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def overlay_boundaries(img: GrayImage, regions: list[Region]) -> GrayImage:
    """Paint region boundary pixels at 255 over a copy of the image."""
    out = img.pixels.copy()
    for region in regions:
        for x, y in region.boundary:
            out[y, x] = 255
    return GrayImage(out)
