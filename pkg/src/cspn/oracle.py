"""Brute-force dense-matrix form of the propagation step.

One step on a vectorized state equals multiplication by an mn x mn matrix G
whose row for pixel p holds that pixel's kernel weights at the columns of
its neighbors (column-first vectorization: pixel (i, j) -> i + j * m).
Anchoring replaces the rows of trusted pixels with unit vectors. This module
is deliberately slow and obvious; it exists as ground truth for the engine,
guarded to desk-scale grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import NormalizedKernelField, normalize_kernels, random_raw_field
from .core import (
    BoundaryPolicy,
    DepthMap,
    DimensionMismatch,
    GridTooLarge,
    OutOfRangeValue,
    SparseDepthMap,
    linear_index,
    require_same_shape,
)
from .propagation import step_values

MAX_DENSE_CELLS = 4096


def vectorize(values: np.ndarray) -> np.ndarray:
    """Column-first flattening: element (i, j) lands at index i + j * height."""
    return np.asarray(values, dtype=np.float64).ravel(order="F")


def devectorize(vec: np.ndarray, height: int, width: int) -> np.ndarray:
    return np.asarray(vec, dtype=np.float64).reshape((height, width), order="F")


@dataclass(frozen=True)
class TransformMatrix:
    """Explicit one-step operator with its per-pixel diffusion amounts."""

    height: int
    width: int
    matrix: np.ndarray
    lam: np.ndarray
    anchored_rows: frozenset[int]

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        lam = np.array(self.lam, dtype=np.float64, copy=True)
        n = self.height * self.width
        if matrix.shape != (n, n):
            raise DimensionMismatch(f"matrix must be {n}x{n}, got {matrix.shape}")
        if lam.shape != (n,):
            raise DimensionMismatch(f"lam must have length {n}")
        matrix.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "anchored_rows", frozenset(self.anchored_rows))

    @property
    def size(self) -> int:
        return self.height * self.width

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def build_G(
    kernels: NormalizedKernelField,
    boundary: BoundaryPolicy = BoundaryPolicy.ZERO_PAD,
) -> TransformMatrix:
    """Construct the dense step matrix entry by entry from the kernel field."""
    h, w = kernels.height, kernels.width
    if h * w > MAX_DENSE_CELLS:
        raise GridTooLarge(f"{h}x{w} grid exceeds the dense-oracle guard of {MAX_DENSE_CELLS} cells")
    k = kernels.kernel_size
    r = k // 2
    weights = kernels.weights
    lam = vectorize(kernels.off_center_sum())
    G = np.zeros((h * w, h * w))
    for j in range(w):
        for i in range(h):
            p = linear_index(i, j, h)
            # center weight is the derived 1 - lambda entry
            G[p, p] += weights[i, j, r, r]
            for a in range(-r, r + 1):
                for b in range(-r, r + 1):
                    if a == 0 and b == 0:
                        continue
                    ti, tj = i - a, j - b
                    if 0 <= ti < h and 0 <= tj < w:
                        G[p, linear_index(ti, tj, h)] += weights[i, j, a + r, b + r]
                    elif boundary is BoundaryPolicy.CLAMP_TO_EDGE:
                        ti = min(max(ti, 0), h - 1)
                        tj = min(max(tj, 0), w - 1)
                        G[p, linear_index(ti, tj, h)] += weights[i, j, a + r, b + r]
                    # ZERO_PAD: the tap reads a zero, contributing nothing
    return TransformMatrix(height=h, width=w, matrix=G, lam=lam, anchored_rows=frozenset())


def anchor_G(G: TransformMatrix, sparse: SparseDepthMap) -> TransformMatrix:
    """Replace each anchored pixel's row with the unit vector at itself."""
    require_same_shape((G.height, G.width), (sparse.height, sparse.width), "operator vs sparse map")
    matrix = np.array(G.matrix, copy=True)
    anchored = set(G.anchored_rows)
    for i, j in zip(sparse.rows.tolist(), sparse.cols.tolist()):
        p = linear_index(i, j, G.height)
        matrix[p, :] = 0.0
        matrix[p, p] = 1.0
        anchored.add(p)
    return TransformMatrix(
        height=G.height, width=G.width, matrix=matrix, lam=G.lam, anchored_rows=frozenset(anchored)
    )


def decompose(G: TransformMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split G = I - D + A and form the diffusion operator L = D - A.

    D is diagonal with the effective per-pixel diffusion amounts, A is the
    off-diagonal part of G. One step then satisfies H' - H = -L H.
    """
    if G.anchored_rows:
        raise ValueError("decompose expects an unanchored operator")
    diag = np.diag(G.matrix)
    D = np.diag(1.0 - diag)
    A = G.matrix - np.diag(diag)
    L = D - A
    return D, A, L


def oracle_propagate(G: TransformMatrix, state: DepthMap, steps: int) -> DepthMap:
    """Apply the dense operator `steps` times via repeated multiplication."""
    if steps < 0:
        raise OutOfRangeValue("steps must be >= 0")
    require_same_shape((G.height, G.width), state.shape, "operator vs state")
    v = vectorize(state.values)
    for _ in range(steps):
        v = G.matrix @ v
    return DepthMap(devectorize(v, G.height, G.width))


# ---------------------------------------------------------------------------
# Randomized engine-vs-oracle equivalence suite (drives the oracle-check CLI)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    trials: int
    steps: int
    tol_step: float
    tol_run: float
    max_dev_step: float
    max_dev_run: float
    max_dev_anchored_step: float
    max_dev_anchored_run: float

    @property
    def passed(self) -> bool:
        return (
            self.max_dev_step <= self.tol_step
            and self.max_dev_anchored_step <= self.tol_step
            and self.max_dev_run <= self.tol_run
            and self.max_dev_anchored_run <= self.tol_run
        )

    def lines(self) -> list[str]:
        return [
            f"trials {self.trials}",
            f"steps {self.steps}",
            f"max_dev_step {self.max_dev_step:.3e} (tol {self.tol_step:.1e})",
            f"max_dev_run {self.max_dev_run:.3e} (tol {self.tol_run:.1e})",
            f"max_dev_anchored_step {self.max_dev_anchored_step:.3e} (tol {self.tol_step:.1e})",
            f"max_dev_anchored_run {self.max_dev_anchored_run:.3e} (tol {self.tol_run:.1e})",
            f"result {'PASS' if self.passed else 'FAIL'}",
        ]


def run_equivalence_suite(
    trials: int = 200,
    max_height: int = 6,
    max_width: int = 6,
    kernel_sizes: tuple[int, ...] = (3, 5),
    steps: int = 10,
    seed: int = 0,
    tol_step: float = 1e-10,
    tol_run: float = 1e-8,
    step_fn=None,
) -> EquivalenceReport:
    """Compare the engine against dense-matrix propagation on random inputs.

    Each trial draws a random grid size, kernel size, boundary policy, a
    signed or nonnegative kernel field, a random state, and a random anchor
    set, then checks single-step and `steps`-step agreement for both the
    plain and the anchored operators. `step_fn` swaps in an alternative
    engine step (a hook for verifying that the check detects corruption).
    """
    if trials < 0:
        raise OutOfRangeValue("trials must be >= 0")
    if step_fn is None:
        step_fn = step_values
    rng = np.random.default_rng(seed)
    dev_step = dev_run = dev_a_step = dev_a_run = 0.0

    for trial in range(trials):
        m = int(rng.integers(2, max_height + 1))
        n = int(rng.integers(2, max_width + 1))
        k = int(kernel_sizes[trial % len(kernel_sizes)])
        signed = bool(trial % 2)
        boundary = BoundaryPolicy.ZERO_PAD if (trial // 2) % 2 == 0 else BoundaryPolicy.CLAMP_TO_EDGE
        kern = normalize_kernels(random_raw_field(m, n, k, rng, signed=signed, boundary=boundary))
        state = rng.normal(0.0, 2.0, size=(m, n))
        G = build_G(kern, boundary)

        engine = step_fn(state, kern, boundary)
        expect = devectorize(G.matrix @ vectorize(state), m, n)
        dev_step = max(dev_step, float(np.abs(engine - expect).max()))

        cur = state
        v = vectorize(state)
        for _ in range(steps):
            cur = step_fn(cur, kern, boundary)
            v = G.matrix @ v
        dev_run = max(dev_run, float(np.abs(cur - devectorize(v, m, n)).max()))

        n_anchor = int(rng.integers(1, m * n + 1))
        flat = rng.choice(m * n, size=n_anchor, replace=False)
        sparse = SparseDepthMap(
            height=m,
            width=n,
            rows=flat // n,
            cols=flat % n,
            depths=rng.uniform(0.5, 5.0, size=n_anchor),
        )
        GA = anchor_G(G, sparse)
        anchored_state = sparse.write_into(state)

        engine = step_fn(anchored_state, kern, boundary)
        engine[sparse.rows, sparse.cols] = sparse.depths
        expect = devectorize(GA.matrix @ vectorize(anchored_state), m, n)
        dev_a_step = max(dev_a_step, float(np.abs(engine - expect).max()))

        cur = anchored_state
        v = vectorize(anchored_state)
        for _ in range(steps):
            cur = step_fn(cur, kern, boundary)
            cur[sparse.rows, sparse.cols] = sparse.depths
            v = GA.matrix @ v
        dev_a_run = max(dev_a_run, float(np.abs(cur - devectorize(v, m, n)).max()))

    return EquivalenceReport(
        trials=trials,
        steps=steps,
        tol_step=tol_step,
        tol_run=tol_run,
        max_dev_step=dev_step,
        max_dev_run=dev_run,
        max_dev_anchored_step=dev_a_step,
        max_dev_anchored_run=dev_a_run,
    )
