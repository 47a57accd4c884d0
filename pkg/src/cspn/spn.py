"""Serial scan-line propagation baseline.

Each directional pass sweeps the grid one scan line at a time; a pixel
combines its own input value with three adjacent, already-updated pixels of
the previous line. Within a line pixels are independent, but lines are
strictly sequential, so a single pass can carry information across the whole
grid in the scan direction. That unbounded single-pass reach is the
structural contrast with the convolutional engine, whose step radius is
bounded by the kernel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .affinity import DEFAULT_SIGMA_COLOR, _in_bounds_mask, _offset_color_dist2
from .core import (
    DepthMap,
    DimensionMismatch,
    Image,
    NonFiniteValue,
    OutOfRangeValue,
    SparseDepthMap,
    require_same_shape,
)


class Direction(enum.Enum):
    LEFT_TO_RIGHT = "left-to-right"
    RIGHT_TO_LEFT = "right-to-left"
    TOP_TO_BOTTOM = "top-to-bottom"
    BOTTOM_TO_TOP = "bottom-to-top"


PASS_ORDER = (
    Direction.LEFT_TO_RIGHT,
    Direction.RIGHT_TO_LEFT,
    Direction.TOP_TO_BOTTOM,
    Direction.BOTTOM_TO_TOP,
)

# neighbor offsets (di, dj) of the three previous-line pixels, per direction,
# in weight-slot order 0, 1, 2
_NEIGHBOR_OFFSETS = {
    Direction.LEFT_TO_RIGHT: ((-1, -1), (0, -1), (1, -1)),
    Direction.RIGHT_TO_LEFT: ((-1, 1), (0, 1), (1, 1)),
    Direction.TOP_TO_BOTTOM: ((-1, -1), (-1, 0), (-1, 1)),
    Direction.BOTTOM_TO_TOP: ((1, -1), (1, 0), (1, 1)),
}


def _check_weights(arr, name: str) -> np.ndarray:
    w = np.array(arr, dtype=np.float64, order="C", copy=True)
    if w.ndim != 3 or w.shape[2] != 3:
        raise DimensionMismatch(f"{name} must have shape (h, w, 3), got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    if np.abs(w).sum(axis=2).max(initial=0.0) > 1.0 + 1e-9:
        raise OutOfRangeValue(f"{name}: absolute weights exceed 1 at some pixel")
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class DirectionalKernelField:
    """Three signed weights per pixel for each of the four scan directions."""

    left_to_right: np.ndarray
    right_to_left: np.ndarray
    top_to_bottom: np.ndarray
    bottom_to_top: np.ndarray

    def __post_init__(self):
        shapes = set()
        for name in ("left_to_right", "right_to_left", "top_to_bottom", "bottom_to_top"):
            w = _check_weights(getattr(self, name), name)
            object.__setattr__(self, name, w)
            shapes.add(w.shape)
        if len(shapes) != 1:
            raise DimensionMismatch("all directional weight arrays must share one shape")

    @property
    def height(self) -> int:
        return self.left_to_right.shape[0]

    @property
    def width(self) -> int:
        return self.left_to_right.shape[1]

    def for_direction(self, direction: Direction) -> np.ndarray:
        return {
            Direction.LEFT_TO_RIGHT: self.left_to_right,
            Direction.RIGHT_TO_LEFT: self.right_to_left,
            Direction.TOP_TO_BOTTOM: self.top_to_bottom,
            Direction.BOTTOM_TO_TOP: self.bottom_to_top,
        }[direction]


def directional_affinity(
    image: Image,
    sigma_color: float = DEFAULT_SIGMA_COLOR,
    strength: float = 0.8,
) -> DirectionalKernelField:
    """Directional weights from the same color-similarity measure as the
    convolutional generator, restricted to the three previous-line neighbors
    and renormalized per direction to an absolute sum of `strength`.

    Out-of-bounds neighbors get weight 0; the first scan line of each
    direction ends up with all-zero weights and is copied unchanged.
    """
    if sigma_color <= 0:
        raise OutOfRangeValue("sigma_color must be positive")
    if not 0.0 < strength <= 1.0:
        raise OutOfRangeValue("strength must lie in (0, 1]")
    h, w = image.height, image.width
    inv = 1.0 / (2.0 * sigma_color * sigma_color)
    fields = {}
    for direction, offsets in _NEIGHBOR_OFFSETS.items():
        raw = np.zeros((h, w, 3))
        for slot, (di, dj) in enumerate(offsets):
            sim = np.exp(-_offset_color_dist2(image.values, -di, -dj, 1) * inv)
            raw[:, :, slot] = np.where(_in_bounds_mask(h, w, -di, -dj), sim, 0.0)
        total = np.abs(raw).sum(axis=2)
        scale = np.where(total > 0.0, strength / np.where(total > 0.0, total, 1.0), 0.0)
        fields[direction] = raw * scale[:, :, None]
    return DirectionalKernelField(
        left_to_right=fields[Direction.LEFT_TO_RIGHT],
        right_to_left=fields[Direction.RIGHT_TO_LEFT],
        top_to_bottom=fields[Direction.TOP_TO_BOTTOM],
        bottom_to_top=fields[Direction.BOTTOM_TO_TOP],
    )


def _sweep_down(values: np.ndarray, w3: np.ndarray) -> np.ndarray:
    """Top-to-bottom sweep core; row i reads the already-updated row i - 1."""
    h, n = values.shape
    out = np.empty_like(values)
    out[0] = values[0]
    self_w = 1.0 - w3.sum(axis=2)
    left = np.empty(n)
    right = np.empty(n)
    for i in range(1, h):
        prev = out[i - 1]
        left[0] = 0.0
        left[1:] = prev[:-1]
        right[-1] = 0.0
        right[:-1] = prev[1:]
        out[i] = (
            self_w[i] * values[i]
            + w3[i, :, 0] * left
            + w3[i, :, 1] * prev
            + w3[i, :, 2] * right
        )
    return out


def pass_values(values: np.ndarray, w3: np.ndarray, direction: Direction) -> np.ndarray:
    """One directional pass on a bare (h, w) array."""
    if direction is Direction.TOP_TO_BOTTOM:
        return _sweep_down(values, w3)
    if direction is Direction.BOTTOM_TO_TOP:
        return _sweep_down(values[::-1], w3[::-1])[::-1].copy()
    if direction is Direction.LEFT_TO_RIGHT:
        return np.ascontiguousarray(_sweep_down(values.T, w3.transpose(1, 0, 2)).T)
    # right-to-left: mirror the columns, sweep left-to-right, mirror back
    flipped = _sweep_down(values[:, ::-1].T, w3[:, ::-1].transpose(1, 0, 2)).T[:, ::-1]
    return np.ascontiguousarray(flipped)


def spn_pass(state: DepthMap, weights: DirectionalKernelField, direction: Direction) -> DepthMap:
    """Sequential scan in one direction; the first scan line is copied unchanged."""
    require_same_shape(state.shape, (weights.height, weights.width), "state vs directional weights")
    return DepthMap(pass_values(state.values, weights.for_direction(direction), direction))


def _merge_max_magnitude(results: list[np.ndarray]) -> np.ndarray:
    """Pick, per pixel, the largest-magnitude value; earlier passes win ties."""
    acc = results[0].copy()
    for cand in results[1:]:
        take = np.abs(cand) > np.abs(acc)
        acc[take] = cand[take]
    return acc


def spn_refine(
    state: DepthMap,
    weights: DirectionalKernelField,
    sparse: SparseDepthMap | None = None,
) -> DepthMap:
    """Four directional passes merged by max-magnitude selection.

    When anchors are present they are written into the input state, rewritten
    after each pass, and therefore survive the merge exactly.
    """
    require_same_shape(state.shape, (weights.height, weights.width), "state vs directional weights")
    base = state.values
    anchored = sparse is not None and len(sparse) > 0
    if sparse is not None:
        require_same_shape(state.shape, (sparse.height, sparse.width), "state vs sparse map")
        if anchored:
            base = sparse.write_into(base)
    results = []
    for direction in PASS_ORDER:
        res = pass_values(base, weights.for_direction(direction), direction)
        if anchored:
            res[sparse.rows, sparse.cols] = sparse.depths
        results.append(res)
    return DepthMap(_merge_max_magnitude(results))
