"""Seeded synthetic images with exact ground-truth masks."""

from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .errors import InvalidSpec


@dataclass(frozen=True)
class Disc:
    row: float
    col: float
    radius: float
    intensity: float


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by its top-left pixel and its size."""

    row: int
    col: int
    height: int
    width: int
    intensity: float


Shape = Union[Disc, Rect]


@dataclass(frozen=True)
class SynthSpec:
    width: int
    height: int
    shapes: List[Shape] = field(default_factory=list)
    background: float = 0.2
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise InvalidSpec(f"image size must be positive, got {self.width}x{self.height}")
        if not 0.0 <= self.background <= 1.0:
            raise InvalidSpec(f"background intensity {self.background} outside [0, 1]")
        if not self.noise_sigma >= 0:
            raise InvalidSpec(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.rng_seed < 0:
            raise InvalidSpec("rng_seed must be non-negative")
        for shape in self.shapes:
            if not isinstance(shape, (Disc, Rect)):
                raise InvalidSpec(f"unknown shape {shape!r}")
            if not 0.0 <= shape.intensity <= 1.0:
                raise InvalidSpec(f"{shape}: intensity outside [0, 1]")
            if isinstance(shape, Disc):
                if shape.radius <= 0:
                    raise InvalidSpec(f"{shape}: radius must be positive")
                if not (0 <= shape.row < self.height and 0 <= shape.col < self.width):
                    raise InvalidSpec(f"{shape}: centre lies outside the image")
            else:
                if shape.height < 1 or shape.width < 1:
                    raise InvalidSpec(f"{shape}: size must be positive")
                if (shape.row < 0 or shape.col < 0 or shape.row + shape.height > self.height
                        or shape.col + shape.width > self.width):
                    raise InvalidSpec(f"{shape}: rectangle exceeds the image")


def generate_synthetic(spec):
    """Render ``spec``; returns ``(image, mask)`` with image values in [0, 1].

    Shapes are painted in order (later shapes overwrite earlier ones), then
    Gaussian noise drawn from ``numpy.random.default_rng(rng_seed)`` is added
    and the result is clipped to [0, 1].
    """
    spec.validate()
    image = np.full((spec.height, spec.width), float(spec.background))
    mask = np.zeros((spec.height, spec.width), dtype=np.uint8)
    rows, cols = np.mgrid[:spec.height, :spec.width]
    for shape in spec.shapes:
        if isinstance(shape, Disc):
            inside = (rows - shape.row) ** 2 + (cols - shape.col) ** 2 <= shape.radius ** 2
        else:
            inside = np.zeros_like(mask, dtype=bool)
            inside[shape.row:shape.row + shape.height, shape.col:shape.col + shape.width] = True
        image[inside] = shape.intensity
        mask[inside] = 1
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.rng_seed)
        image = np.clip(image + rng.normal(0.0, spec.noise_sigma, image.shape), 0.0, 1.0)
    return image, mask


def blob_spec(seed, size=64, contrast=0.6, noise_sigma=0.1, background=0.2):
    """Standard benchmark: 2 to 4 bright discs on a dark background."""
    rng = np.random.default_rng([seed, 1])
    margin = 12 * size / 64
    shapes = []
    for _ in range(int(rng.integers(2, 5))):
        row, col = rng.uniform(margin, size - margin, 2)
        radius = rng.uniform(5, 10) * size / 64
        shapes.append(Disc(float(row), float(col), float(radius), background + contrast))
    return SynthSpec(size, size, shapes, background, noise_sigma, seed)


def defect_spec(seed=7, size=96):
    """Low-contrast surface with a few bright defects.

    The background sits right at the manual levels swept by ``sweep-s``
    (sink level 0.3), so small changes in the source level move large
    parts of the background across the decision boundary.
    """
    rng = np.random.default_rng([seed, 2])
    shapes = []
    for _ in range(6):
        row, col = rng.uniform(8, size - 8, 2)
        shapes.append(Disc(float(row), float(col), float(rng.uniform(3, 8)), 0.75))
    return SynthSpec(size, size, shapes, 0.28, 0.06, seed)


def two_region_spec(seed, size=64, noise_sigma=0.1):
    """Dark left half, bright right half."""
    half = size // 2
    return SynthSpec(size, size, [Rect(0, half, size, size - half, 0.8)], 0.2, noise_sigma, seed)


PRESETS = {"blobs": blob_spec, "defect": defect_spec, "two-region": two_region_spec}
