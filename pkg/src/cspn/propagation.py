"""Convolutional spatial propagation: parallel per-pixel diffusion steps.

One step updates every pixel simultaneously to the kernel-weighted sum of
its k x k neighborhood (two buffers: all pixels read the t-state and write
the t+1-state; in-place updating would silently become a sequential solver).
The anchored variants additionally overwrite trusted sparse depths after
each step, so anchor pixels carry their measured values exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import NormalizedKernelField
from .core import (
    BoundaryPolicy,
    DepthMap,
    DimensionMismatch,
    PropagationConfig,
    SparseDepthMap,
    require_same_shape,
)


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    state: DepthMap
    max_change: float


@dataclass(frozen=True)
class PropagationTrace:
    """Optional per-iteration snapshots, including the t = 0 input state."""

    entries: tuple[TraceEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def max_changes(self) -> list[float]:
        return [e.max_change for e in self.entries]


_PAD_MODE = {BoundaryPolicy.ZERO_PAD: "constant", BoundaryPolicy.CLAMP_TO_EDGE: "edge"}


def step_values(
    values: np.ndarray,
    kernels: NormalizedKernelField,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> np.ndarray:
    """One propagation step on a bare (h, w) array.

    The reduction over offsets is row-major over (a, b) for every pixel,
    which pins the floating-point accumulation order regardless of any
    data-parallel execution of the per-pixel work.
    """
    h, w = values.shape
    if (kernels.height, kernels.width) != (h, w):
        raise DimensionMismatch(
            f"kernel field is {kernels.height}x{kernels.width} but state is {h}x{w}"
        )
    k = kernels.kernel_size
    r = k // 2
    padded = np.pad(values, r, mode=_PAD_MODE[boundary])
    out = np.zeros_like(values)
    weights = kernels.weights
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            # neighbor (i - a, j - b) of pixel (i, j)
            out += weights[:, :, a + r, b + r] * padded[r - a : r - a + h, r - b : r - b + w]
    return out


def cspn_step(
    state: DepthMap,
    kernels: NormalizedKernelField,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> DepthMap:
    """Apply one parallel propagation step; the input state is not modified."""
    return DepthMap(step_values(state.values, kernels, boundary))


def cspn_step_anchored(
    state: DepthMap,
    kernels: NormalizedKernelField,
    sparse: SparseDepthMap,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> DepthMap:
    """One propagation step followed by rewriting anchored pixels.

    Equivalent to the plain step when the sparse set is empty. The step
    itself reads the pre-replacement state; replacement happens after.
    """
    require_same_shape(state.shape, (sparse.height, sparse.width), "state vs sparse map")
    out = step_values(state.values, kernels, boundary)
    out[sparse.rows, sparse.cols] = sparse.depths
    return DepthMap(out)


def _run(
    initial: DepthMap,
    kernels: NormalizedKernelField,
    config: PropagationConfig,
    sparse: SparseDepthMap | None,
) -> tuple[DepthMap, PropagationTrace | None]:
    if kernels.kernel_size != config.kernel_size:
        raise DimensionMismatch(
            f"config kernel_size {config.kernel_size} != field kernel size {kernels.kernel_size}"
        )
    state = np.array(initial.values, copy=True)
    if sparse is not None:
        # anchors are written in before the first step so their information
        # diffuses from t = 0
        state[sparse.rows, sparse.cols] = sparse.depths

    entries: list[TraceEntry] = []
    if config.record_trace:
        entries.append(TraceEntry(0, DepthMap(state), 0.0))

    for t in range(1, config.iterations + 1):
        new = step_values(state, kernels, config.boundary_policy)
        if sparse is not None:
            new[sparse.rows, sparse.cols] = sparse.depths
        change = float(np.abs(new - state).max()) if state.size else 0.0
        state = new
        if config.record_trace:
            entries.append(TraceEntry(t, DepthMap(state), change))
        if config.early_stop_tol is not None and change < config.early_stop_tol:
            break

    trace = PropagationTrace(tuple(entries)) if config.record_trace else None
    return DepthMap(state), trace


def cspn_run(
    initial: DepthMap,
    kernels: NormalizedKernelField,
    config: PropagationConfig,
) -> tuple[DepthMap, PropagationTrace | None]:
    """Run exactly `config.iterations` propagation steps.

    Returns the final state and, when `config.record_trace` is set, a trace
    whose length is the number of performed iterations plus one.
    """
    require_same_shape(initial.shape, (kernels.height, kernels.width), "state vs kernel field")
    return _run(initial, kernels, config, sparse=None)


def cspn_run_anchored(
    initial: DepthMap,
    kernels: NormalizedKernelField,
    sparse: SparseDepthMap,
    config: PropagationConfig,
) -> tuple[DepthMap, PropagationTrace | None]:
    """Anchored run: anchors are written into the initial state and rewritten
    after every step, so the output carries them bit-exactly."""
    require_same_shape(initial.shape, (kernels.height, kernels.width), "state vs kernel field")
    require_same_shape(initial.shape, (sparse.height, sparse.width), "state vs sparse map")
    return _run(initial, kernels, config, sparse=sparse)
