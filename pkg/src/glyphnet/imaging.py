"""Raster primitives for the pre-processing phase.

Images are plain 2-D numpy arrays indexed ``[row, col]``:

* gray images are ``uint8`` intensities, 0 = ink, 255 = paper;
* binary images are ``uint8`` arrays of 0/1, 1 = ink.

Every function returns a fresh array and never mutates its argument.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import EmptyImage

DEFAULT_THRESHOLD = 128
STANDARD_SIDE = 50


class BoundingBox(NamedTuple):
    """Inclusive pixel box: columns x0..x1, rows y0..y1."""

    x0: int
    y0: int
    x1: int
    y1: int


def as_gray(pixels) -> np.ndarray:
    img = np.asarray(pixels)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {img.shape}")
    if img.dtype != np.uint8:
        if np.any(img < 0) or np.any(img > 255):
            raise ValueError("gray intensities must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def as_binary(bits) -> np.ndarray:
    img = np.asarray(bits)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"binary image must be a non-empty 2-D array, got shape {img.shape}")
    if img.dtype == np.bool_:
        return img.astype(np.uint8)
    if not np.all((img == 0) | (img == 1)):
        raise ValueError("binary image may only contain 0 and 1")
    return img.astype(np.uint8, copy=False)


def binarize(img, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Ink wherever intensity is strictly below ``threshold``."""
    return (as_gray(img) < threshold).astype(np.uint8)


def _neighbour_count(bits: np.ndarray) -> np.ndarray:
    """Number of set 8-neighbours of every pixel; outside the image counts as 0."""
    p = np.pad(bits, 1).astype(np.int16)
    h, w = bits.shape
    total = np.zeros((h, w), dtype=np.int16)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            if dy == 1 and dx == 1:
                continue
            total += p[dy:dy + h, dx:dx + w]
    return total


def clean(img) -> np.ndarray:
    """Despeckle and fill pinholes in a single simultaneous pass."""
    bits = as_binary(img)
    n = _neighbour_count(bits)
    out = bits.copy()
    out[(bits == 1) & (n == 0)] = 0
    out[(bits == 0) & (n == 8)] = 1
    return out


def _zs_neighbours(p: np.ndarray, h: int, w: int):
    # P2..P9 clockwise from north, on an image padded by one pixel
    return (
        p[0:h, 1:w + 1],      # P2  N
        p[0:h, 2:w + 2],      # P3  NE
        p[1:h + 1, 2:w + 2],  # P4  E
        p[2:h + 2, 2:w + 2],  # P5  SE
        p[2:h + 2, 1:w + 1],  # P6  S
        p[2:h + 2, 0:w],      # P7  SW
        p[1:h + 1, 0:w],      # P8  W
        p[0:h, 0:w],          # P9  NW
    )


def _zs_subpass(bits: np.ndarray, first: bool) -> np.ndarray:
    h, w = bits.shape
    p = np.pad(bits, 1)
    n = _zs_neighbours(p, h, w)
    count = sum(x.astype(np.int16) for x in n)
    ring = n + (n[0],)
    transitions = sum(((a == 0) & (b == 1)).astype(np.int16) for a, b in zip(ring, ring[1:]))
    p2, _, p4, _, p6, _, p8, _ = n
    if first:
        c3 = (p2 & p4 & p6) == 0
        c4 = (p4 & p6 & p8) == 0
    else:
        c3 = (p2 & p4 & p8) == 0
        c4 = (p2 & p6 & p8) == 0
    return (bits == 1) & (count >= 2) & (count <= 6) & (transitions == 1) & c3 & c4


def thin(img) -> np.ndarray:
    """Zhang-Suen skeleton, iterated until a full iteration deletes nothing."""
    bits = as_binary(img).copy()
    while True:
        changed = False
        for first in (True, False):
            kill = _zs_subpass(bits, first)
            if kill.any():
                bits[kill] = 0
                changed = True
        if not changed:
            return bits


def crop_to_content(img) -> tuple[np.ndarray, BoundingBox]:
    bits = as_binary(img)
    rows = np.flatnonzero(bits.any(axis=1))
    if rows.size == 0:
        raise EmptyImage("image has no foreground pixels")
    cols = np.flatnonzero(bits.any(axis=0))
    box = BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))
    return bits[box.y0:box.y1 + 1, box.x0:box.x1 + 1].copy(), box


def scale_to_standard(img, side: int = STANDARD_SIDE) -> np.ndarray:
    """Nearest-neighbour resample to ``side`` x ``side``, each axis independently."""
    if side < 1:
        raise ValueError("side must be >= 1")
    bits = as_binary(img)
    h, w = bits.shape
    rows = (np.arange(side) * h) // side
    cols = (np.arange(side) * w) // side
    return bits[np.ix_(rows, cols)].copy()
