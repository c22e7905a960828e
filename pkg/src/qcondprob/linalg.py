"""Dense complex linear algebra on labeled tensor-product spaces.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. A
:class:`FactorLayout` names the tensor factors of a space so that partial
traces and embeddings can be requested by label rather than by axis number.
Factor ordering follows the usual Kronecker convention: the first factor is
the most significant digit of the flat index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonSquare,
    NotFinite,
    NotHermitian,
    NotIsometry,
    NotPositive,
    UnknownLabel,
)

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "FactorLayout",
    "as_matrix",
    "dagger",
    "kron",
    "trace",
    "partial_trace",
    "embed",
    "hermitian_sqrt",
    "complete_to_unitary",
    "approx_eq",
    "is_hermitian",
    "hermitian_residual",
    "min_eigenvalue",
    "max_abs",
    "op_norm",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used by every predicate in the package."""

    eq_abs: float = 1e-12
    eq_rel: float = 1e-9
    psd_floor: float = -1e-9

    def __post_init__(self):
        if not self.eq_abs > 0 or not self.eq_rel > 0:
            raise ValueError("eq_abs and eq_rel must be positive")
        if self.psd_floor > 0:
            raise ValueError("psd_floor must be <= 0")

    def bound(self, *mats: np.ndarray) -> float:
        """Admissible entrywise deviation given the operands' scale."""
        scale = max((float(np.linalg.norm(m)) for m in mats), default=0.0)
        return self.eq_abs + self.eq_rel * scale


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class FactorLayout:
    """Ordered, labeled tensor factors ``(label, dim)``."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lbl), int(d)) for lbl, d in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [lbl for lbl, _ in factors]
        if not factors:
            raise ValueError("a layout needs at least one factor")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in {labels}")
        if any(d < 1 for _, d in factors):
            raise ValueError("factor dimensions must be >= 1")

    @classmethod
    def of(cls, **dims: int) -> "FactorLayout":
        """``FactorLayout.of(A=2, B=3)``; keyword order is factor order."""
        return cls(tuple(dims.items()))

    @classmethod
    def single(cls, dim: int, label: str = "S") -> "FactorLayout":
        return cls(((label, dim),))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown factor label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def subset(self, labels: Iterable[str]) -> "FactorLayout":
        """Layout restricted to ``labels``, kept in this layout's order."""
        wanted = set(labels)
        for lbl in wanted:
            self.index(lbl)
        return FactorLayout(tuple(f for f in self.factors if f[0] in wanted))

    def concat(self, other: "FactorLayout") -> "FactorLayout":
        return FactorLayout(self.factors + other.factors)

    def __str__(self) -> str:
        return "⊗".join(f"{lbl}[{d}]" for lbl, d in self.factors)


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotFinite("matrix contains NaN or Inf")
    if square and arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"matrix of shape {arr.shape} is not square")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def kron(a, b) -> np.ndarray:
    """Kronecker product: block ``(J, K)`` of the result is ``a[J, K] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def trace(m) -> complex:
    m = as_matrix(m, square=True)
    return complex(np.trace(m))


def _check_layout(m: np.ndarray, layout: FactorLayout) -> None:
    if m.shape != (layout.total_dim, layout.total_dim):
        raise DimensionMismatch(
            f"matrix shape {m.shape} does not match layout {layout} (dim {layout.total_dim})"
        )


def partial_trace(m, layout: FactorLayout, traced_labels: Iterable[str]):
    """Trace out the factors named in ``traced_labels``.

    Returns ``(reduced_matrix, reduced_layout)``. Tracing every factor gives a
    1x1 matrix holding the full trace, with a placeholder layout ``("1", 1)``.
    """
    m = as_matrix(m, square=True)
    _check_layout(m, layout)
    traced = set(traced_labels)
    for lbl in traced:
        layout.index(lbl)
    if not traced:
        return m.copy(), layout

    n = len(layout.factors)
    dims = layout.dims
    tensor = m.reshape(dims + dims)
    # row axis i gets subscript i; column axis i gets n + i, or i when traced
    row_sub = list(range(n))
    col_sub = [i if layout.labels[i] in traced else n + i for i in range(n)]
    kept = [i for i in range(n) if layout.labels[i] not in traced]
    out_sub = kept + [n + i for i in kept]
    reduced = np.einsum(tensor, row_sub + col_sub, out_sub)

    if not kept:
        return np.asarray(reduced, dtype=complex).reshape(1, 1), FactorLayout((("1", 1),))
    kept_layout = FactorLayout(tuple(layout.factors[i] for i in kept))
    d = kept_layout.total_dim
    return reduced.reshape(d, d), kept_layout


def embed(op, op_labels: Sequence[str], layout: FactorLayout) -> np.ndarray:
    """Extend ``op`` (acting on ``op_labels`` in that order) by identities.

    ``op_labels`` need not be contiguous nor in layout order; the factor
    permutation is applied as an explicit axis bijection.
    """
    op = as_matrix(op, square=True)
    op_labels = list(op_labels)
    if len(set(op_labels)) != len(op_labels):
        raise ValueError(f"duplicate labels in {op_labels}")
    positions = [layout.index(lbl) for lbl in op_labels]
    op_dims = tuple(layout.dims[p] for p in positions)
    if op.shape[0] != int(np.prod(op_dims)):
        raise DimensionMismatch(
            f"operator of dim {op.shape[0]} cannot act on {op_labels} with dims {op_dims}"
        )
    rest = [i for i in range(len(layout.factors)) if i not in positions]
    rest_dim = int(np.prod([layout.dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(rest_dim, dtype=complex))

    # axes of ``full`` are in the order positions + rest; send each back home
    source_order = positions + rest
    src_dims = tuple(layout.dims[i] for i in source_order)
    n = len(source_order)
    tensor = full.reshape(src_dims + src_dims)
    axis_of = {target: src for src, target in enumerate(source_order)}
    perm = [axis_of[t] for t in range(n)] + [n + axis_of[t] for t in range(n)]
    D = layout.total_dim
    return np.ascontiguousarray(tensor.transpose(perm)).reshape(D, D)


def max_abs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def op_norm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def hermitian_residual(m) -> float:
    m = as_matrix(m, square=True)
    return max_abs(m - dagger(m))


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    m = as_matrix(m, square=True)
    return hermitian_residual(m) <= tol.bound(m)


def min_eigenvalue(m) -> float:
    m = as_matrix(m, square=True)
    return float(np.linalg.eigvalsh(0.5 * (m + dagger(m)))[0])


def hermitian_sqrt(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Positive square root of a Hermitian PSD matrix.

    Eigenvalues in ``[psd_floor, 0)`` are treated as round-off and clamped.
    """
    m = as_matrix(m, square=True)
    if not is_hermitian(m, tol):
        raise NotHermitian(f"hermitian residual {hermitian_residual(m):.3e}")
    h = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(h)
    if w[0] < tol.psd_floor:
        raise NotPositive(f"minimum eigenvalue {w[0]:.3e} below floor {tol.psd_floor:.1e}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)
    return 0.5 * (root + dagger(root))


def complete_to_unitary(iso, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Append orthonormal columns to an isometry to make it square unitary.

    The first ``iso.shape[1]`` columns of the result are ``iso`` exactly.
    """
    iso = as_matrix(iso)
    rows, cols = iso.shape
    if rows < cols:
        raise NotIsometry(f"isometry needs rows >= cols, got {iso.shape}")
    gram = dagger(iso) @ iso
    eye = np.eye(cols, dtype=complex)
    if max_abs(gram - eye) > tol.bound(gram, eye):
        raise NotIsometry(f"iso^† iso deviates from identity by {max_abs(gram - eye):.3e}")
    if rows == cols:
        return iso.copy()
    # rows of vh beyond the rank of iso^† span the orthogonal complement
    _, _, vh = np.linalg.svd(dagger(iso), full_matrices=True)
    complement = dagger(vh[cols:])
    return np.hstack([iso, complement])


def approx_eq(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Entrywise closeness with an absolute floor and a Frobenius-relative term."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return max_abs(a - b) <= tol.bound(a, b)
