"""Shared domain types, grid indexing, and input validation.

All grids are dense float64 numpy arrays in row-major (i, j) = (row, col)
layout. Vectorized forms used by the dense operator module are column-first:
pixel (i, j) maps to flat index i + j * height. Every type here is an
immutable value object once constructed and safe to share across workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class ValidationError(Exception):
    """An input violates a documented contract."""


class DimensionMismatch(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class OutOfRangeValue(ValidationError):
    pass


class GridTooLarge(ValidationError):
    pass


class GridTooSmall(ValidationError):
    pass


class EmptyValidSet(ValidationError):
    pass


class NonPositiveGroundTruth(ValidationError):
    pass


class CountExceedsValidPixels(ValidationError):
    pass


class BoundaryPolicy(enum.Enum):
    """How kernel taps that fall outside the grid behave.

    ZERO_PAD: out-of-bounds neighbors contribute value 0 (affinity
    generators also assign them zero raw weight, so no mass is lost).
    CLAMP_TO_EDGE: out-of-bounds taps are redirected to the nearest
    in-bounds pixel.
    """

    ZERO_PAD = "zero"
    CLAMP_TO_EDGE = "clamp"


def _as_readonly_f64(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


def linear_index(row: int, col: int, height: int) -> int:
    """Column-first flat index of pixel (row, col): row + col * height."""
    return row + col * height


@dataclass(frozen=True)
class DepthMap:
    """Dense 2D grid of depth values in meters."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_readonly_f64(self.values, "depth map")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"depth map must be 2D and non-empty, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Image:
    """Guidance image with values in [0, 1]; grayscale (h, w) or color (h, w, 3)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_readonly_f64(self.values, "image")
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise DimensionMismatch(f"image must be (h, w) or (h, w, 3), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch("image must be non-empty")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise OutOfRangeValue("image values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.values.ndim == 2 else 3


@dataclass(frozen=True)
class SparseDepthMap:
    """Sparse trusted depth anchors: (row, col, depth) with depth > 0.

    A pixel is anchored iff it appears here; the implied mask is
    m[i, j] = 1 exactly at the stored coordinates.
    """

    height: int
    width: int
    rows: np.ndarray
    cols: np.ndarray
    depths: np.ndarray

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DimensionMismatch("sparse map dimensions must be positive")
        rows = np.asarray(self.rows, dtype=np.int64).copy()
        cols = np.asarray(self.cols, dtype=np.int64).copy()
        depths = np.asarray(self.depths, dtype=np.float64).copy()
        if not (rows.ndim == cols.ndim == depths.ndim == 1):
            raise DimensionMismatch("sparse entries must be 1D arrays")
        if not (len(rows) == len(cols) == len(depths)):
            raise DimensionMismatch("sparse entry arrays must have equal length")
        if len(rows):
            if rows.min() < 0 or rows.max() >= self.height or cols.min() < 0 or cols.max() >= self.width:
                raise OutOfRangeValue("sparse coordinate out of bounds")
            if not np.all(np.isfinite(depths)):
                raise NonFiniteValue("sparse depth contains NaN or Inf")
            if depths.min() <= 0.0:
                raise OutOfRangeValue("sparse depths must be strictly positive")
            flat = rows * self.width + cols
            if len(np.unique(flat)) != len(flat):
                raise ValidationError("duplicate sparse coordinates")
        for name, arr in (("rows", rows), ("cols", cols), ("depths", depths)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_entries(cls, height: int, width: int, entries) -> "SparseDepthMap":
        entries = list(entries)
        rows = np.array([e[0] for e in entries], dtype=np.int64)
        cols = np.array([e[1] for e in entries], dtype=np.int64)
        depths = np.array([e[2] for e in entries], dtype=np.float64)
        return cls(height, width, rows, cols, depths)

    @classmethod
    def empty(cls, height: int, width: int) -> "SparseDepthMap":
        return cls.from_entries(height, width, [])

    def __len__(self) -> int:
        return len(self.rows)

    def mask(self) -> np.ndarray:
        """Boolean (h, w) array, True at anchored pixels."""
        m = np.zeros((self.height, self.width), dtype=bool)
        m[self.rows, self.cols] = True
        return m

    def write_into(self, values: np.ndarray) -> np.ndarray:
        """Return a copy of `values` with anchor depths written in."""
        out = np.array(values, dtype=np.float64, copy=True)
        out[self.rows, self.cols] = self.depths
        return out

    def entries(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.depths.tolist()))


@dataclass(frozen=True)
class PropagationConfig:
    """Settings for an N-step propagation run.

    iterations = 0 returns the input unchanged. early_stop_tol, when set,
    terminates the run once the max absolute per-pixel change drops below
    it (off by default: fixed iteration count is the reference protocol).
    """

    kernel_size: int = 3
    iterations: int = 24
    boundary_policy: BoundaryPolicy = BoundaryPolicy.ZERO_PAD
    record_trace: bool = False
    early_stop_tol: float | None = field(default=None)

    def __post_init__(self):
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise OutOfRangeValue(f"kernel_size must be an odd integer >= 3, got {self.kernel_size}")
        if self.iterations < 0:
            raise OutOfRangeValue(f"iterations must be >= 0, got {self.iterations}")
        if self.early_stop_tol is not None and self.early_stop_tol <= 0:
            raise OutOfRangeValue("early_stop_tol must be positive when set")


def validate_pair(depth: DepthMap, image: Image) -> None:
    """Check that a depth map and its guidance image agree on dimensions."""
    if (depth.height, depth.width) != (image.height, image.width):
        raise DimensionMismatch(
            f"depth is {depth.height}x{depth.width} but image is {image.height}x{image.width}"
        )


def require_same_shape(a_shape: tuple[int, int], b_shape: tuple[int, int], what: str) -> None:
    if tuple(a_shape) != tuple(b_shape):
        raise DimensionMismatch(f"{what}: {a_shape} vs {b_shape}")
