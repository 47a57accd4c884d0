"""Synthetic scenes for desk-scale refinement experiments.

A scene is a ground-truth depth map, a guidance image whose edges are (or
deliberately are not) colocated with the depth discontinuities, and a
degraded input depth that mimics a blurry upstream estimate: blurred ground
truth plus Gaussian noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    CountExceedsValidPixels,
    DepthMap,
    DimensionMismatch,
    Image,
    OutOfRangeValue,
    SparseDepthMap,
)


class SceneLayout(enum.Enum):
    TWO_PLANE = "two-plane"
    STAIRCASE = "staircase"
    SLANTED = "slanted"


@dataclass(frozen=True)
class SceneSpec:
    height: int = 96
    width: int = 128
    layout: SceneLayout = SceneLayout.TWO_PLANE
    depth_min: float = 1.0
    depth_max: float = 3.0
    edge_aligned: bool = True
    noise_sigma: float = 0.1
    blur_radius: int = 2

    def __post_init__(self):
        if self.height < 16 or self.width < 16:
            raise DimensionMismatch("scenes must be at least 16x16")
        if self.depth_min <= 0.0:
            raise OutOfRangeValue("depth_min must be positive")
        if self.depth_max < self.depth_min:
            raise OutOfRangeValue("depth_max must be >= depth_min")
        if self.noise_sigma < 0.0:
            raise OutOfRangeValue("noise_sigma must be >= 0")
        if self.blur_radius < 0:
            raise OutOfRangeValue("blur_radius must be >= 0")


@dataclass(frozen=True)
class Scene:
    ground_truth: DepthMap
    image: Image
    degraded: DepthMap


def box_blur(values: np.ndarray, radius: int) -> np.ndarray:
    """Edge-clamped mean filter over a (2r+1)^2 window."""
    if radius == 0:
        return np.array(values, dtype=np.float64, copy=True)
    h, w = values.shape
    pad = np.pad(values, radius, mode="edge")
    acc = np.zeros((h, w))
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            acc += pad[radius + a : radius + a + h, radius + b : radius + b + w]
    return acc / float((2 * radius + 1) ** 2)


def _misalign(split: int, width: int) -> int:
    return min(width - 2, split + max(2, width // 16))


def _layout_maps(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    h, w = spec.height, spec.width
    lo, hi = spec.depth_min, spec.depth_max
    depth = np.empty((h, w))
    image = np.empty((h, w))

    if spec.layout is SceneLayout.TWO_PLANE:
        split = w // 2
        depth[:, :split] = lo
        depth[:, split:] = hi
        img_split = split if spec.edge_aligned else _misalign(split, w)
        image[:, :img_split] = 0.3
        image[:, img_split:] = 0.7

    elif spec.layout is SceneLayout.STAIRCASE:
        steps = 4
        levels = np.linspace(lo, hi, steps)
        shades = np.linspace(0.2, 0.8, steps)
        bounds = [w * s // steps for s in range(steps + 1)]
        for s in range(steps):
            depth[:, bounds[s] : bounds[s + 1]] = levels[s]
        if spec.edge_aligned:
            img_bounds = bounds
        else:
            img_bounds = [0] + [_misalign(b, w) for b in bounds[1:-1]] + [w]
        for s in range(steps):
            image[:, img_bounds[s] : img_bounds[s + 1]] = shades[s]

    elif spec.layout is SceneLayout.SLANTED:
        jj = np.linspace(0.0, 1.0, w)[None, :]
        ii = np.linspace(0.0, 1.0, h)[:, None]
        depth[:] = lo + (hi - lo) * (0.7 * jj + 0.3 * ii)
        image[:] = 0.15 + 0.7 * jj

    else:  # pragma: no cover
        raise OutOfRangeValue(f"unknown layout {spec.layout}")

    return depth, image


def generate_scene(spec: SceneSpec, seed: int = 0) -> Scene:
    """Deterministic scene generation: same spec and seed, same arrays."""
    depth, image = _layout_maps(spec)
    rng = np.random.default_rng(seed)
    degraded = box_blur(depth, spec.blur_radius) + rng.normal(0.0, spec.noise_sigma, size=depth.shape)
    return Scene(
        ground_truth=DepthMap(depth),
        image=Image(image),
        degraded=DepthMap(degraded),
    )


def sample_sparse(depth: DepthMap, count: int, seed: int = 0) -> SparseDepthMap:
    """Draw `count` distinct anchor pixels uniformly from depth > 0 pixels."""
    if count < 1:
        raise OutOfRangeValue("count must be >= 1")
    valid_rows, valid_cols = np.nonzero(depth.values > 0.0)
    if count > len(valid_rows):
        raise CountExceedsValidPixels(
            f"requested {count} samples but only {len(valid_rows)} pixels have depth > 0"
        )
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(valid_rows), size=count, replace=False)
    pick.sort()
    rows = valid_rows[pick]
    cols = valid_cols[pick]
    return SparseDepthMap(
        height=depth.height,
        width=depth.width,
        rows=rows,
        cols=cols,
        depths=depth.values[rows, cols],
    )
