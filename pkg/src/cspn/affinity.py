"""Per-pixel affinity kernels and their normalization into propagation weights.

A kernel field stores, for every pixel (i, j), a k x k block of weights
indexed by offsets (a, b) in [-(k-1)/2, (k-1)/2]^2 at array position
[i, j, a + r, b + r]. The weight at offset (a, b) applies to the neighbor
(i - a, j - b); the center entry (a = b = 0) of a raw field is ignored and
derived during normalization so that every pixel's weights sum to one.

The generators here are designed (image-driven) affinities standing in for
a learned affinity branch: a nonnegative color-similarity kernel and a
signed variant that turns negative across strong edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BoundaryPolicy,
    DimensionMismatch,
    Image,
    NonFiniteValue,
    OutOfRangeValue,
)

DEFAULT_SIGMA_COLOR = 0.1


def _check_kernel_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
        raise DimensionMismatch(f"{name} must have shape (h, w, k, k), got {arr.shape}")
    k = arr.shape[2]
    if k < 3 or k % 2 == 0:
        raise OutOfRangeValue(f"kernel size must be an odd integer >= 3, got {k}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RawKernelField:
    """Unnormalized affinities; center entries are carried but ignored."""

    raw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "raw", _check_kernel_array(self.raw, "raw kernel field"))

    @property
    def height(self) -> int:
        return self.raw.shape[0]

    @property
    def width(self) -> int:
        return self.raw.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.raw.shape[2]


@dataclass(frozen=True)
class NormalizedKernelField:
    """Propagation weights: off-center sum of |w| <= 1, total sum = 1 per pixel.

    `degenerate` marks pixels whose raw off-center weights were all zero and
    which therefore fell back to the identity kernel (center 1, rest 0).
    """

    weights: np.ndarray
    degenerate: np.ndarray

    def __post_init__(self):
        weights = _check_kernel_array(self.weights, "normalized kernel field")
        degenerate = np.array(self.degenerate, dtype=bool, copy=True)
        if degenerate.shape != weights.shape[:2]:
            raise DimensionMismatch("degenerate mask shape must match the pixel grid")
        r = weights.shape[2] // 2
        off = np.abs(weights).sum(axis=(2, 3)) - np.abs(weights[:, :, r, r])
        if off.max(initial=0.0) > 1.0 + 1e-9:
            raise OutOfRangeValue("off-center absolute weights exceed 1 at some pixel")
        total = weights.sum(axis=(2, 3))
        if np.abs(total - 1.0).max(initial=0.0) > 1e-9:
            raise OutOfRangeValue("kernel weights do not sum to 1 at some pixel")
        degenerate.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "degenerate", degenerate)

    @property
    def height(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weights.shape[2]

    def off_center_sum(self) -> np.ndarray:
        """Per-pixel sum of off-center weights (the diffusion amount at each pixel)."""
        r = self.kernel_size // 2
        return self.weights.sum(axis=(2, 3)) - self.weights[:, :, r, r]


def normalize_kernels(raw: RawKernelField) -> NormalizedKernelField:
    """Normalize raw affinities into stable propagation weights.

    Each off-center weight is the raw value divided by the per-pixel sum of
    absolute raw off-center values; the center weight is then defined as one
    minus the sum of the normalized off-center weights. Pixels whose raw
    off-center entries are all zero cannot be normalized and fall back to
    the identity kernel; they are reported via the `degenerate` mask.
    """
    k = raw.kernel_size
    r = k // 2
    off = np.array(raw.raw, copy=True)
    off[:, :, r, r] = 0.0
    denom = np.abs(off).sum(axis=(2, 3))
    degenerate = denom == 0.0
    safe = np.where(degenerate, 1.0, denom)
    weights = off / safe[:, :, None, None]
    weights[:, :, r, r] = 1.0 - weights.sum(axis=(2, 3))
    if degenerate.any():
        weights[degenerate] = 0.0
        weights[degenerate, r, r] = 1.0
    return NormalizedKernelField(weights=weights, degenerate=degenerate)


def identity_kernels(height: int, width: int, kernel_size: int = 3) -> NormalizedKernelField:
    """Field under which one propagation step is the identity map."""
    r = kernel_size // 2
    weights = np.zeros((height, width, kernel_size, kernel_size))
    weights[:, :, r, r] = 1.0
    return NormalizedKernelField(weights=weights, degenerate=np.ones((height, width), dtype=bool))


def _offset_color_dist2(image_values: np.ndarray, a: int, b: int, r: int) -> np.ndarray:
    """Squared color distance between each pixel and its (i-a, j-b) neighbor, edge-clamped."""
    if image_values.ndim == 2:
        pad = np.pad(image_values, r, mode="edge")
        shifted = pad[r - a : r - a + image_values.shape[0], r - b : r - b + image_values.shape[1]]
        return (image_values - shifted) ** 2
    pad = np.pad(image_values, ((r, r), (r, r), (0, 0)), mode="edge")
    shifted = pad[r - a : r - a + image_values.shape[0], r - b : r - b + image_values.shape[1], :]
    return ((image_values - shifted) ** 2).sum(axis=2)


def _in_bounds_mask(height: int, width: int, a: int, b: int) -> np.ndarray:
    """True where the neighbor (i-a, j-b) lies inside the grid."""
    mask = np.zeros((height, width), dtype=bool)
    mask[max(0, a) : height + min(0, a), max(0, b) : width + min(0, b)] = True
    return mask


def designed_affinity(
    image: Image,
    kernel_size: int,
    sigma_color: float = DEFAULT_SIGMA_COLOR,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> RawKernelField:
    """Nonnegative color-similarity affinity: exp(-||dX||^2 / (2 sigma^2)).

    Under ZERO_PAD, taps reaching outside the image get raw affinity 0 (the
    pixel simply has a smaller neighborhood there); under CLAMP_TO_EDGE they
    are evaluated against the nearest in-bounds pixel.
    """
    if sigma_color <= 0:
        raise OutOfRangeValue("sigma_color must be positive")
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise OutOfRangeValue("kernel_size must be an odd integer >= 3")
    h, w = image.height, image.width
    r = kernel_size // 2
    raw = np.zeros((h, w, kernel_size, kernel_size))
    inv = 1.0 / (2.0 * sigma_color * sigma_color)
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if a == 0 and b == 0:
                continue
            sim = np.exp(-_offset_color_dist2(image.values, a, b, r) * inv)
            if boundary is BoundaryPolicy.ZERO_PAD:
                sim = np.where(_in_bounds_mask(h, w, a, b), sim, 0.0)
            raw[:, :, a + r, b + r] = sim
    return RawKernelField(raw=raw)


def signed_affinity(
    image: Image,
    kernel_size: int,
    edge_gain: float = 1.0,
    sigma_color: float = DEFAULT_SIGMA_COLOR,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> RawKernelField:
    """Affinity that is positive in smooth regions and negative across edges.

    Maps color similarity s in (0, 1] to s - edge_gain * (1 - s): close
    colors give +1, strong edges approach -edge_gain. Exists to exercise the
    signed-weight regime the normalization permits.
    """
    if sigma_color <= 0:
        raise OutOfRangeValue("sigma_color must be positive")
    if kernel_size < 3 or kernel_size % 2 == 0:
        raise OutOfRangeValue("kernel_size must be an odd integer >= 3")
    h, w = image.height, image.width
    r = kernel_size // 2
    raw = np.zeros((h, w, kernel_size, kernel_size))
    inv = 1.0 / (2.0 * sigma_color * sigma_color)
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            if a == 0 and b == 0:
                continue
            sim = np.exp(-_offset_color_dist2(image.values, a, b, r) * inv)
            val = sim - edge_gain * (1.0 - sim)
            if boundary is BoundaryPolicy.ZERO_PAD:
                val = np.where(_in_bounds_mask(h, w, a, b), val, 0.0)
            raw[:, :, a + r, b + r] = val
    return RawKernelField(raw=raw)


def random_raw_field(
    height: int,
    width: int,
    kernel_size: int,
    rng: np.random.Generator,
    signed: bool = False,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> RawKernelField:
    """Random raw field consistent with the given boundary policy.

    Used by the randomized engine-vs-oracle equivalence suite and the
    benchmark harness. Under ZERO_PAD, out-of-bounds taps get raw weight 0
    so that normalized fields conserve constants exactly.
    """
    shape = (height, width, kernel_size, kernel_size)
    if signed:
        raw = rng.uniform(-1.0, 1.0, size=shape)
    else:
        raw = rng.uniform(0.05, 1.0, size=shape)
    r = kernel_size // 2
    raw[:, :, r, r] = 0.0
    if boundary is BoundaryPolicy.ZERO_PAD:
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                raw[:, :, a + r, b + r] *= _in_bounds_mask(height, width, a, b)
    return RawKernelField(raw=raw)
