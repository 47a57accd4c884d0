"""Depth evaluation metrics and gradient-smoothness measurements.

All ratio fractions are stored in [0, 1]; the CLI layer formats them as
percentages for display.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DepthMap,
    DimensionMismatch,
    EmptyValidSet,
    GridTooSmall,
    NonPositiveGroundTruth,
    OutOfRangeValue,
    SparseDepthMap,
    require_same_shape,
)

DELTA_THRESHOLDS = (1.02, 1.05, 1.10, 1.25, 1.25**2, 1.25**3)
DEFAULT_HIST_BINS = 50


@dataclass(frozen=True)
class EvalReport:
    """RMSE (meters), Abs Rel, and threshold-correctness fractions."""

    rmse: float
    abs_rel: float
    delta: dict[float, float]

    def kv_lines(self) -> list[str]:
        lines = [f"rmse {self.rmse!r}", f"abs_rel {self.abs_rel!r}"]
        for t, frac in self.delta.items():
            lines.append(f"delta_{t:g} {frac!r}")
        return lines

    def pretty_lines(self) -> list[str]:
        lines = [f"RMSE     {self.rmse:.6f} m", f"Abs Rel  {self.abs_rel:.6f}"]
        for t, frac in self.delta.items():
            lines.append(f"d<{t:<8g} {100.0 * frac:.2f}%")
        return lines


def evaluate(pred: DepthMap, gt: DepthMap, valid_mask: np.ndarray | None = None) -> EvalReport:
    """Score a prediction against ground truth over the valid pixels.

    rmse = sqrt(mean((d* - d)^2)); abs_rel = mean(|d* - d| / d*); each
    delta fraction counts pixels with max(d*/d, d/d*) strictly below its
    threshold. Ground truth must be positive on the valid set; nonpositive
    predictions are not an error but count as incorrect for every threshold
    (their ratio is undefined).
    """
    require_same_shape(pred.shape, gt.shape, "pred vs gt")
    if valid_mask is None:
        valid_mask = np.ones(gt.shape, dtype=bool)
    else:
        valid_mask = np.asarray(valid_mask, dtype=bool)
        require_same_shape(pred.shape, valid_mask.shape, "pred vs valid mask")
    n = int(valid_mask.sum())
    if n == 0:
        raise EmptyValidSet("no valid pixels to evaluate")
    g = gt.values[valid_mask]
    p = pred.values[valid_mask]
    if g.min() <= 0.0:
        raise NonPositiveGroundTruth("ground truth must be > 0 on the valid set")

    diff = g - p
    rmse = float(np.sqrt(np.mean(diff * diff)))
    abs_rel = float(np.mean(np.abs(diff) / g))

    pos = p > 0.0
    ratio = np.full(n, np.inf)
    ratio[pos] = np.maximum(g[pos] / p[pos], p[pos] / g[pos])
    delta = {t: float(np.count_nonzero(ratio < t) / n) for t in DELTA_THRESHOLDS}
    return EvalReport(rmse=rmse, abs_rel=abs_rel, delta=delta)


@dataclass(frozen=True)
class ErrorHistogram:
    """Histogram of nonnegative error samples plus their mean."""

    bin_edges: np.ndarray
    counts: np.ndarray
    mean: float

    def __post_init__(self):
        edges = np.array(self.bin_edges, dtype=np.float64, copy=True)
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if edges.ndim != 1 or counts.ndim != 1 or len(edges) != len(counts) + 1:
            raise DimensionMismatch("need len(bin_edges) == len(counts) + 1")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv_lines(self, header: bool = True) -> list[str]:
        lines = ["bin_lo,bin_hi,count"] if header else []
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            lines.append(f"{lo!r},{hi!r},{int(c)}")
        return lines


def histogram_of(errors: np.ndarray, bins: int = DEFAULT_HIST_BINS) -> ErrorHistogram:
    """Uniform-bin histogram over [0, max error]; degenerate inputs get [0, 1]."""
    if bins < 1:
        raise OutOfRangeValue("bins must be >= 1")
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if errors.size == 0:
        return ErrorHistogram(np.linspace(0.0, 1.0, bins + 1), np.zeros(bins, dtype=np.int64), 0.0)
    hi = float(errors.max())
    if hi <= 0.0:
        hi = 1.0
    counts, edges = np.histogram(errors, bins=bins, range=(0.0, hi))
    return ErrorHistogram(edges, counts, float(errors.mean()))


def sobel_x(depth: DepthMap) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal Sobel gradient and its validity mask (borders invalid).

    Uses the standard 3x3 stencil with column weights (-1, 0, +1) scaled by
    row weights (1, 2, 1); a ramp d(i, j) = j yields gradient 8.
    """
    if depth.height < 3 or depth.width < 3:
        raise GridTooSmall("sobel gradient needs at least a 3x3 grid")
    d = depth.values
    grad = np.zeros_like(d)
    grad[1:-1, 1:-1] = (d[:-2, 2:] + 2.0 * d[1:-1, 2:] + d[2:, 2:]) - (
        d[:-2, :-2] + 2.0 * d[1:-1, :-2] + d[2:, :-2]
    )
    valid = np.zeros(d.shape, dtype=bool)
    valid[1:-1, 1:-1] = True
    return grad, valid


def gradient_error_hist(
    pred: DepthMap,
    gt: DepthMap,
    sparse: SparseDepthMap,
    bins: int = DEFAULT_HIST_BINS,
) -> ErrorHistogram:
    """Histogram of |horizontal-gradient error| sampled at anchor pixels.

    Anchors whose 3x3 neighborhood leaves the grid are skipped; the total
    count equals the number of interior anchors.
    """
    require_same_shape(pred.shape, gt.shape, "pred vs gt")
    require_same_shape(pred.shape, (sparse.height, sparse.width), "pred vs sparse map")
    grad_pred, valid = sobel_x(pred)
    grad_gt, _ = sobel_x(gt)
    keep = valid[sparse.rows, sparse.cols]
    rows = sparse.rows[keep]
    cols = sparse.cols[keep]
    errors = np.abs(grad_pred[rows, cols] - grad_gt[rows, cols])
    return histogram_of(errors, bins)
