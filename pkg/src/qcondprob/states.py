"""Density operators, unitaries, and the trace rule.

Probabilities are generated as ``Tr[U ρ U† M(X)]``; with a prior over an
ensemble of states this becomes the joint measure ``Pr(ρ_i) Tr[U ρ_i U† M(X)]``
of quantum decision theory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NegativeProbability,
    NotHermitian,
    NotNormalized,
    NotPositive,
    NotUnitary,
    SpaceMismatch,
    ZeroProbabilityCondition,
)
from .linalg import (
    DEFAULT_TOL,
    FactorLayout,
    Tolerance,
    as_matrix,
    dagger,
    hermitian_residual,
    kron,
    max_abs,
    min_eigenvalue,
)
from .outcomes import Event, OutcomeSpace
from .povm import OperatorValuedMeasure, event_operator

__all__ = [
    "DensityOperator",
    "UnitaryOperator",
    "StateEnsemble",
    "ProbabilityTable",
    "evolve",
    "expectation",
    "as_probability",
    "trace_rule",
    "probability_table",
    "decision_joint",
    "conditional_on_state",
]


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def _layout_for(matrix: np.ndarray, layout: FactorLayout | None) -> FactorLayout:
    if layout is None:
        return FactorLayout.single(matrix.shape[0])
    if matrix.shape[0] != layout.total_dim:
        raise DimensionMismatch(f"matrix dim {matrix.shape[0]} does not match layout {layout}")
    return layout


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive, unit-trace matrix on a labeled space."""

    matrix: np.ndarray
    layout: FactorLayout

    def __init__(self, matrix, layout: FactorLayout | None = None, tol: Tolerance = DEFAULT_TOL):
        m = as_matrix(matrix, square=True)
        layout = _layout_for(m, layout)
        if hermitian_residual(m) > tol.bound(m):
            raise NotHermitian(f"density matrix hermitian residual {hermitian_residual(m):.3e}")
        m = 0.5 * (m + dagger(m))
        low = min_eigenvalue(m)
        if low < tol.psd_floor:
            raise NotPositive(f"density matrix has eigenvalue {low:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol.eq_abs + tol.eq_rel:
            raise NotNormalized(f"density matrix trace {tr!r} != 1")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "layout", layout)

    @classmethod
    def from_ket(cls, ket, layout: FactorLayout | None = None) -> "DensityOperator":
        v = np.asarray(ket, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), layout)

    @classmethod
    def maximally_mixed(cls, layout: FactorLayout | int) -> "DensityOperator":
        if isinstance(layout, int):
            layout = FactorLayout.single(layout)
        d = layout.total_dim
        return cls(np.eye(d, dtype=complex) / d, layout)

    @classmethod
    def normalized(cls, matrix, layout: FactorLayout | None = None, tol: Tolerance = DEFAULT_TOL) -> "DensityOperator":
        """Divide a positive matrix by its trace."""
        m = as_matrix(matrix, square=True)
        tr = np.trace(m).real
        if tr <= tol.eq_abs:
            raise ZeroProbabilityCondition(f"cannot normalize operator with trace {tr:.3e}")
        return cls(m / tr, layout, tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(kron(self.matrix, other.matrix), self.layout.concat(other.layout))

    def relabel(self, layout: FactorLayout) -> "DensityOperator":
        return DensityOperator(self.matrix, layout)

    def __repr__(self) -> str:
        return f"DensityOperator({self.layout})"


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: np.ndarray
    layout: FactorLayout

    def __init__(self, matrix, layout: FactorLayout | None = None, tol: Tolerance = DEFAULT_TOL):
        m = as_matrix(matrix, square=True)
        layout = _layout_for(m, layout)
        eye = np.eye(m.shape[0], dtype=complex)
        gram = dagger(m) @ m
        if max_abs(gram - eye) > tol.bound(gram, eye):
            raise NotUnitary(f"U†U deviates from identity by {max_abs(gram - eye):.3e}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "layout", layout)

    @classmethod
    def identity(cls, layout: FactorLayout | int) -> "UnitaryOperator":
        if isinstance(layout, int):
            layout = FactorLayout.single(layout)
        return cls(np.eye(layout.total_dim, dtype=complex), layout)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"UnitaryOperator({self.layout})"


@dataclass(frozen=True)
class StateEnsemble:
    """Prior-weighted states over one shared layout."""

    entries: tuple[tuple[float, DensityOperator], ...]

    def __init__(self, entries: Sequence[tuple[float, DensityOperator]], tol: Tolerance = DEFAULT_TOL):
        entries = tuple((float(p), s) for p, s in entries)
        if not entries:
            raise ValueError("an ensemble needs at least one state")
        if any(p < 0 for p, _ in entries):
            raise NegativeProbability("priors must be non-negative")
        total = sum(p for p, _ in entries)
        if abs(total - 1.0) > tol.eq_abs + tol.eq_rel:
            raise NotNormalized(f"priors sum to {total!r}")
        layout = entries[0][1].layout
        if any(s.layout != layout for _, s in entries):
            raise DimensionMismatch("ensemble states must share one layout")
        object.__setattr__(self, "entries", entries)

    @property
    def layout(self) -> FactorLayout:
        return self.entries[0][1].layout

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> tuple[float, DensityOperator]:
        if not 0 <= i < len(self.entries):
            raise IndexOutOfRange(f"ensemble index {i} outside 0..{len(self.entries) - 1}")
        return self.entries[i]


@dataclass(frozen=True)
class ProbabilityTable:
    space: OutcomeSpace
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.space.atoms:
            raise DimensionMismatch("one value per atom required")

    def __getitem__(self, j: int) -> float:
        return self.values[j]

    def of(self, x: Event) -> float:
        if x.space != self.space:
            raise SpaceMismatch(f"event on {x.space.label!r}, table on {self.space.label!r}")
        return float(sum(self.values[j] for j in x))

    @property
    def total(self) -> float:
        return float(sum(self.values))


def evolve(rho: DensityOperator, u: UnitaryOperator) -> DensityOperator:
    if rho.layout.total_dim != u.layout.total_dim:
        raise DimensionMismatch(f"state on {rho.layout}, unitary on {u.layout}")
    return DensityOperator(u.matrix @ rho.matrix @ dagger(u.matrix), rho.layout)


def expectation(rho, op) -> complex:
    """``Tr[ρ A]`` without forming the product."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {op.shape}")
    return complex(np.sum(rho * op.T))


def as_probability(value: complex, tol: Tolerance = DEFAULT_TOL) -> float:
    """Take the real part, reject values outside ``[0, 1]`` beyond tolerance, clamp."""
    p = float(np.real(value))
    slack = tol.eq_abs + tol.eq_rel
    if p < -slack or p > 1.0 + slack:
        raise NegativeProbability(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def _check_measure(rho: DensityOperator, m: OperatorValuedMeasure) -> None:
    if m.dim != rho.dim:
        raise DimensionMismatch(f"measure of dim {m.dim} on state of dim {rho.dim}")


def trace_rule(
    rho: DensityOperator,
    u: UnitaryOperator | None,
    m: OperatorValuedMeasure,
    x: Event,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """``Tr[U ρ U† M(X)]``. ``u=None`` means the identity."""
    _check_measure(rho, m)
    if x.space != m.space:
        raise SpaceMismatch(f"event on {x.space.label!r}, measure on {m.space.label!r}")
    state = rho if u is None else evolve(rho, u)
    return as_probability(expectation(state.matrix, event_operator(m, x)), tol)


def probability_table(rho: DensityOperator, u: UnitaryOperator | None, m: OperatorValuedMeasure, tol: Tolerance = DEFAULT_TOL) -> ProbabilityTable:
    return ProbabilityTable(m.space, tuple(trace_rule(rho, u, m, m.space.atom(j), tol) for j in range(m.space.atoms)))


def decision_joint(ensemble: StateEnsemble, u: UnitaryOperator | None, m: OperatorValuedMeasure, i: int, x: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Pr(ρ_i, X) = Pr(ρ_i) Tr[U ρ_i U† M(X)]``."""
    prior, state = ensemble[i]
    return prior * trace_rule(state, u, m, x, tol)


def conditional_on_state(ensemble: StateEnsemble, u: UnitaryOperator | None, m: OperatorValuedMeasure, i: int, x: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Pr(X | ρ_i) = Pr(ρ_i, X) / Pr(ρ_i)``."""
    prior, _ = ensemble[i]
    if prior <= tol.eq_abs:
        raise ZeroProbabilityCondition(f"state {i} has prior {prior!r}")
    return decision_joint(ensemble, u, m, i, x, tol) / prior
