"""Seeded synthetic handwriting corpus.

Each sample is an embedded 50x50 reference glyph pushed through a random
affine warp (rotation, shear, per-axis scale, translation), stroke dilation
and salt-and-pepper noise, then encoded as a gray image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from . import persistence
from .errors import ConfigError, UnknownLetter
from .persistence import LETTERS
from .rng import SplitMix64, mix

INK, PAPER = 0, 255


@dataclass(frozen=True)
class PerturbationParams:
    rotation_max: float = 10.0  # degrees
    shear_max: float = 0.15
    scale_jitter: float = 0.10
    translate_max: float = 3.0  # pixels
    dilation_steps: int = 1
    pixel_noise_rate: float = 0.01

    def __post_init__(self):
        for name in ("rotation_max", "shear_max", "scale_jitter", "translate_max"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be a finite value >= 0")
        if self.scale_jitter >= 1:
            raise ConfigError("scale_jitter must be < 1")
        if not 0 <= self.dilation_steps <= 2:
            raise ConfigError("dilation_steps must be 0, 1 or 2")
        if not 0 <= self.pixel_noise_rate < 1:
            raise ConfigError("pixel_noise_rate must lie in [0, 1)")


NO_PERTURBATION = PerturbationParams(0.0, 0.0, 0.0, 0.0, 0, 0.0)


@dataclass(frozen=True)
class CorpusSpec:
    train_per_letter: int = 20
    test_per_letter: int = 5
    seed: int = 42
    params: PerturbationParams = field(default_factory=PerturbationParams)

    def __post_init__(self):
        if self.train_per_letter < 1:
            raise ConfigError("train_per_letter must be >= 1")
        if self.test_per_letter < 0:
            raise ConfigError("test_per_letter must be >= 0")


@dataclass(frozen=True, eq=False)
class Sample:
    image: np.ndarray  # gray, uint8
    label: str
    split: str  # "train" or "test"
    index: int

    @property
    def relative_path(self) -> str:
        return persistence.sample_path(self.label, self.split, self.index)


@dataclass(frozen=True, eq=False)
class Corpus:
    samples: tuple[Sample, ...]

    def manifest(self) -> list[persistence.ManifestRow]:
        return [persistence.ManifestRow(s.relative_path, s.label, s.split) for s in self.samples]

    def split(self, which: str) -> list[Sample]:
        return [s for s in self.samples if s.split == which]


@lru_cache(maxsize=None)
def _template(letter: str) -> np.ndarray:
    text = resources.files("glyphnet").joinpath("glyphs").joinpath(f"{letter}.txt").read_text()
    bits = persistence.parse_glyph_text(text)
    bits.setflags(write=False)
    return bits


def reference_glyph(letter: str) -> np.ndarray:
    """Embedded 50x50 binary template for a lowercase letter."""
    if not isinstance(letter, str) or len(letter) != 1 or letter not in LETTERS:
        raise UnknownLetter(f"no template for {letter!r}; expected a-z")
    return _template(letter).copy()


def _dilate(bits: np.ndarray) -> np.ndarray:
    h, w = bits.shape
    p = np.pad(bits, 1)
    out = np.zeros_like(bits)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out |= p[dy:dy + h, dx:dx + w]
    return out


def perturb(template, params: PerturbationParams, rng: SplitMix64) -> np.ndarray:
    """One synthetic handwriting sample of ``template`` as a gray image."""
    bits = np.asarray(template, dtype=np.uint8)
    h, w = bits.shape

    theta = math.radians(rng.uniform(-params.rotation_max, params.rotation_max))
    shear = rng.uniform(-params.shear_max, params.shear_max)
    sx = rng.uniform(1.0 - params.scale_jitter, 1.0 + params.scale_jitter)
    sy = rng.uniform(1.0 - params.scale_jitter, 1.0 + params.scale_jitter)
    tx = rng.uniform(-params.translate_max, params.translate_max)
    ty = rng.uniform(-params.translate_max, params.translate_max)

    # forward map about the centre: rotation @ shear @ scale
    c, s = math.cos(theta), math.sin(theta)
    a11, a12 = c * sx, (c * shear - s) * sy
    a21, a22 = s * sx, (s * shear + c) * sy
    det = a11 * a22 - a12 * a21
    i11, i12, i21, i22 = a22 / det, -a12 / det, -a21 / det, a11 / det

    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    dx = xs - cx - tx
    dy = ys - cy - ty
    src_x = np.floor(i11 * dx + i12 * dy + cx + 0.5).astype(np.int64)
    src_y = np.floor(i21 * dx + i22 * dy + cy + 0.5).astype(np.int64)
    inside = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    warped = np.zeros_like(bits)
    warped[inside] = bits[src_y[inside], src_x[inside]]

    for _ in range(params.dilation_steps):
        warped = _dilate(warped)

    flips = (rng.units(h * w) < params.pixel_noise_rate).reshape(h, w)
    warped = warped ^ flips.astype(np.uint8)
    return np.where(warped == 1, INK, PAPER).astype(np.uint8)


def letter_samples(letter_index: int, spec: CorpusSpec) -> list[Sample]:
    """Train then test samples of one letter from that letter's own stream."""
    letter = LETTERS[letter_index]
    rng = SplitMix64(mix(spec.seed, letter_index))
    template = _template(letter)
    out = []
    for split, count in (("train", spec.train_per_letter), ("test", spec.test_per_letter)):
        for i in range(count):
            out.append(Sample(perturb(template, spec.params, rng), letter, split, i))
    return out


def generate_corpus(spec: CorpusSpec = CorpusSpec()) -> Corpus:
    samples = []
    for i in range(len(LETTERS)):
        samples.extend(letter_samples(i, spec))
    return Corpus(tuple(samples))
