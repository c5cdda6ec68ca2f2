"""Uniform grids and shift-polynomial stencil operators.

Every finite difference scheme in this package is assembled from
StencilOperator values: finite lists of (offset, coefficient) taps acting
on fields sampled on a uniform grid.  Keeping the operators symbolic (as
taps, not loops) lets each scheme be written down exactly as its defining
operator expression and makes composition/adjoint algebra trivial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GridSpec1D",
    "GridSpec2D",
    "StencilOperator",
    "identity_op",
    "make_shift",
    "make_dm",
    "make_mum",
    "make_dmc",
    "compose",
    "apply_periodic",
    "apply_op",
    "assemble_matrix",
    "assemble_matrix_nonperiodic",
]

_TAP_TOL = 0.0  # keep exact zeros out of tap lists


@dataclass(frozen=True)
class GridSpec1D:
    """Uniform 1D grid on [a, b] with n_cells cells.

    Periodic grids identify node n_cells with node 0, so fields carry
    n_cells values.  Prescribed-boundary grids carry n_cells + 1 values
    (both endpoints present).
    """

    a: float
    b: float
    n_cells: int
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_cells <= 0:
            raise ValueError("n_cells must be positive")
        if self.b <= self.a:
            raise ValueError("need b > a")
        if self.boundary not in ("periodic", "prescribed"):
            raise ValueError(f"unknown boundary kind {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells if self.boundary == "periodic" else self.n_cells + 1

    def nodes(self) -> np.ndarray:
        return self.a + self.dx * np.arange(self.n_nodes)


@dataclass(frozen=True)
class GridSpec2D:
    """Tensor grid; fields are stored as arrays of shape (ny_nodes, nx_nodes).

    The flattened ordering is C order on that shape, i.e. lexicographic with
    the x index fastest.
    """

    x_grid: GridSpec1D
    y_grid: GridSpec1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.y_grid.n_nodes, self.x_grid.n_nodes)


@dataclass(frozen=True)
class StencilOperator:
    """Linear operator (Op f)[i] = sum_k coeff_k * f[i + offset_k]."""

    taps: tuple[tuple[int, float], ...]

    @staticmethod
    def from_dict(d: dict[int, float]) -> "StencilOperator":
        items = tuple(sorted((int(k), float(v)) for k, v in d.items() if v != _TAP_TOL))
        return StencilOperator(items)

    def as_dict(self) -> dict[int, float]:
        return dict(self.taps)

    @property
    def min_offset(self) -> int:
        return min(k for k, _ in self.taps) if self.taps else 0

    @property
    def max_offset(self) -> int:
        return max(k for k, _ in self.taps) if self.taps else 0

    def coeff_sum(self) -> float:
        return float(sum(c for _, c in self.taps))

    def adjoint(self) -> "StencilOperator":
        """Transpose w.r.t. the periodic inner product: offsets flip sign."""
        return StencilOperator.from_dict({-k: c for k, c in self.taps})

    def scale(self, s: float) -> "StencilOperator":
        return StencilOperator.from_dict({k: s * c for k, c in self.taps})

    def __add__(self, other: "StencilOperator") -> "StencilOperator":
        d = self.as_dict()
        for k, c in other.taps:
            d[k] = d.get(k, 0.0) + c
        return StencilOperator.from_dict(d)

    def __sub__(self, other: "StencilOperator") -> "StencilOperator":
        return self + other.scale(-1.0)

    def __mul__(self, other):
        """Composition (self after other); scalars scale."""
        if isinstance(other, StencilOperator):
            return compose(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "StencilOperator":
        if n < 0:
            raise ValueError("negative operator powers are not supported")
        out = identity_op()
        for _ in range(n):
            out = compose(out, self)
        return out


def identity_op() -> StencilOperator:
    return StencilOperator(((0, 1.0),))


def make_shift(k: int) -> StencilOperator:
    """S^k: (S^k f)[i] = f[i + k]."""
    return StencilOperator(((int(k), 1.0),))


def make_dm(dx: float) -> StencilOperator:
    """Forward difference (S - I)/dx."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    return StencilOperator(((0, -1.0 / dx), (1, 1.0 / dx)))


def make_mum() -> StencilOperator:
    """Forward average (S + I)/2."""
    return StencilOperator(((0, 0.5), (1, 0.5)))


def make_dmc(dx: float) -> StencilOperator:
    """Centered difference (S - S^-1)/(2 dx)."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    return StencilOperator(((-1, -0.5 / dx), (1, 0.5 / dx)))


def compose(a: StencilOperator, b: StencilOperator) -> StencilOperator:
    """Taps of a∘b: offsets add, coefficients multiply-and-accumulate."""
    d: dict[int, float] = {}
    for ka, ca in a.taps:
        for kb, cb in b.taps:
            k = ka + kb
            d[k] = d.get(k, 0.0) + ca * cb
    return StencilOperator.from_dict(d)


def apply_periodic(op: StencilOperator, f: np.ndarray, axis: int = -1) -> np.ndarray:
    """Apply with modular index wraparound along `axis`."""
    out = np.zeros_like(f, dtype=float)
    for k, c in op.taps:
        out += c * np.roll(f, -k, axis=axis)
    return out


def apply_op(op: StencilOperator, f: np.ndarray, grid: GridSpec1D | None = None,
             axis: str | None = None, ghost: tuple[np.ndarray, np.ndarray] | None = None
             ) -> np.ndarray:
    """Apply a stencil operator to a field.

    Periodic grids wrap indices.  Prescribed-boundary grids require `ghost`
    = (left, right) arrays wide enough for the tap span; the output has the
    same length as `f`.

    For 2D fields, `axis` selects "x" (last array axis) or "y" (first).
    """
    if f.ndim == 2:
        ax = {"x": -1, "y": 0, None: -1}[axis]
        if grid is not None and grid.boundary == "prescribed" and ghost is None:
            raise ValueError("prescribed-boundary grid needs ghost data")
        return apply_periodic(op, f, axis=ax)
    if grid is None or grid.boundary == "periodic":
        return apply_periodic(op, f)
    # prescribed boundary: use explicit ghost bands
    if ghost is None:
        raise ValueError("prescribed-boundary grid needs ghost data")
    left, right = ghost
    need_l, need_r = max(0, -op.min_offset), max(0, op.max_offset)
    if len(left) < need_l or len(right) < need_r:
        raise ValueError(
            f"ghost bands too narrow: need {need_l} left / {need_r} right taps"
        )
    fpad = np.concatenate([left[len(left) - need_l:] if need_l else left[:0], f,
                           right[:need_r]])
    out = np.zeros_like(f, dtype=float)
    for k, c in op.taps:
        out += c * fpad[need_l + k: need_l + k + len(f)]
    return out


def assemble_matrix(op: StencilOperator, grid: GridSpec1D | int) -> sp.csr_matrix:
    """Sparse matrix with periodic corners: row i holds coeff at (i+offset) mod n."""
    n = grid if isinstance(grid, int) else grid.n_nodes
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for k, c in op.taps:
        rows.append(idx)
        cols.append((idx + k) % n)
        vals.append(np.full(n, c))
    if not rows:
        return sp.csr_matrix((n, n))
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return m.tocsr()


def assemble_matrix_nonperiodic(op: StencilOperator, n: int) -> sp.csr_matrix:
    """Band placement without wraparound; out-of-range taps are dropped.

    Rows whose full stencil stays in range reproduce apply_op exactly; edge
    rows are only meaningful when the caller masks them out (Dirichlet use).
    """
    rows, cols, vals = [], [], []
    for k, c in op.taps:
        i = np.arange(max(0, -k), min(n, n - k))
        rows.append(i)
        cols.append(i + k)
        vals.append(np.full(len(i), c))
    if not rows:
        return sp.csr_matrix((n, n))
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return m.tocsr()
