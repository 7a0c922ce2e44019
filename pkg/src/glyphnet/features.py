"""Grid segmentation and digitization: skeleton image -> 25 input bits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import imaging
from .errors import CellCountMismatch, ConfigError, IndivisibleSize


@dataclass(frozen=True)
class GridSpec:
    rows: int = 5
    cols: int = 5
    min_pixels: int = 1

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("grid needs at least one row and one column")
        if self.min_pixels < 1:
            raise ConfigError("min_pixels must be >= 1")

    @property
    def size(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class PipelineConfig:
    threshold: int = imaging.DEFAULT_THRESHOLD
    standard_side: int = imaging.STANDARD_SIDE
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if not 0 <= self.threshold <= 255:
            raise ConfigError("threshold must be within 0..255")
        if self.standard_side < 1:
            raise ConfigError("standard_side must be >= 1")
        if self.standard_side % self.grid.rows or self.standard_side % self.grid.cols:
            raise ConfigError(
                f"standard side {self.standard_side} is not divisible by a "
                f"{self.grid.rows}x{self.grid.cols} grid"
            )


def segment(img, grid: GridSpec = GridSpec()) -> list[np.ndarray]:
    """Split a square image into ``grid.rows * grid.cols`` cells, row-major."""
    bits = imaging.as_binary(img)
    h, w = bits.shape
    if h != w:
        raise IndivisibleSize(f"image must be square, got {w}x{h}")
    if h % grid.rows or w % grid.cols:
        raise IndivisibleSize(f"side {h} is not divisible by a {grid.rows}x{grid.cols} grid")
    ch, cw = h // grid.rows, w // grid.cols
    return [
        bits[r * ch:(r + 1) * ch, c * cw:(c + 1) * cw]
        for r in range(grid.rows)
        for c in range(grid.cols)
    ]


def digitize(cells, grid: GridSpec = GridSpec()) -> np.ndarray:
    """One bit per cell: set when the cell holds at least ``min_pixels`` ink pixels."""
    cells = list(cells)
    if len(cells) != grid.size:
        raise CellCountMismatch(f"expected {grid.size} cells, got {len(cells)}")
    return np.array([int(np.count_nonzero(c) >= grid.min_pixels) for c in cells], dtype=np.uint8)


def skeleton(img, config: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """The standardized skeleton that gets segmented: binarize, clean, crop, scale, thin."""
    bits = imaging.clean(imaging.binarize(img, config.threshold))
    cropped, _ = imaging.crop_to_content(bits)
    return imaging.thin(imaging.scale_to_standard(cropped, config.standard_side))


def extract_features(img, config: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """Gray character image -> feature bits. Raises EmptyImage for a blank page."""
    return digitize(segment(skeleton(img, config), config.grid), config.grid)


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)
