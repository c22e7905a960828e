"""Finite-dimensional Neumark dilation of POVMs.

For a POVM with ``n`` atoms on ``C^d`` the isometry
``V|ψ⟩ = Σ_j √M_j|ψ⟩ ⊗ |j⟩`` maps ``C^d`` into ``C^(d·n)``. Completing ``V``
to a unitary ``W`` (first ``d`` columns equal to ``V``) and pulling back the
ancilla projections, ``E⁺(j) = W† (1_d ⊗ |j⟩⟨j|) W``, gives a projection-valued
measure on ``C^D`` (``D = n·d``) whose compression to the first ``d``
coordinates is ``M``. The base space is therefore always the span of the
first ``d`` standard basis vectors and ``Q = diag(1_d, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, HeterogeneousFamily, InvalidPovm, SpaceMismatch
from .linalg import (
    DEFAULT_TOL,
    FactorLayout,
    Tolerance,
    complete_to_unitary,
    dagger,
    hermitian_sqrt,
    max_abs,
    op_norm,
)
from .outcomes import Event, all_events
from .povm import OperatorValuedMeasure, event_operator, validate
from .states import DensityOperator, expectation

__all__ = [
    "NeumarkDilation",
    "FamilyMember",
    "FamilyDilation",
    "projection_onto_base",
    "lift_operator",
    "restrict",
    "dilate",
    "lift_state",
    "verify_lifting",
    "restriction_residual",
    "dilate_family",
    "obstacle_report",
    "tensor_restriction",
]


def projection_onto_base(base_dim: int, extended_dim: int) -> np.ndarray:
    q = np.zeros((extended_dim, extended_dim), dtype=complex)
    q[:base_dim, :base_dim] = np.eye(base_dim)
    q.setflags(write=False)
    return q


def lift_operator(a, extended_dim: int) -> np.ndarray:
    """``A ⊕ 0``: ``a`` in the top-left block of a zero ``D×D`` matrix."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    if a.shape != (d, d) or d > extended_dim:
        raise DimensionMismatch(f"cannot lift shape {a.shape} into dimension {extended_dim}")
    out = np.zeros((extended_dim, extended_dim), dtype=complex)
    out[:d, :d] = a
    return out


def restrict(op_plus, base_dim: int) -> np.ndarray:
    """``(C⁺)_H``: the block of ``op_plus`` acting on the first ``base_dim`` coordinates."""
    return np.array(np.asarray(op_plus)[:base_dim, :base_dim])


@dataclass(frozen=True, eq=False)
class NeumarkDilation:
    base_dim: int
    extended_dim: int
    extended_pvm: OperatorValuedMeasure
    q_projection: np.ndarray
    unitary: np.ndarray
    canonical_embedding: bool = True

    def compress(self, x: Event) -> np.ndarray:
        """``(Q E⁺(X) Q)_H``."""
        q = self.q_projection
        return restrict(q @ event_operator(self.extended_pvm, x) @ q, self.base_dim)


def _ancilla_projection(d: int, n: int, j: int) -> np.ndarray:
    p = np.zeros((n, n), dtype=complex)
    p[j, j] = 1.0
    return np.kron(np.eye(d, dtype=complex), p)


def _isometry(m: OperatorValuedMeasure, tol: Tolerance) -> np.ndarray:
    d, n = m.dim, len(m.atoms)
    v = np.zeros((d * n, d), dtype=complex)
    for j, atom in enumerate(m.atoms):
        ket = np.zeros((n, 1), dtype=complex)
        ket[j, 0] = 1.0
        v += np.kron(hermitian_sqrt(atom, tol), ket)
    return v


def _pvm(atoms: Sequence[np.ndarray], m: OperatorValuedMeasure, tol: Tolerance) -> OperatorValuedMeasure:
    pvm = OperatorValuedMeasure(atoms, m.space, tol)
    if not pvm.is_projective:
        raise InvalidPovm("dilated measure is not projective", validate(atoms, tol, require_projective=True))
    return pvm


def dilate(m: OperatorValuedMeasure, tol: Tolerance = DEFAULT_TOL) -> NeumarkDilation:
    """Dilate ``m`` to a projection-valued measure on ``D = n·d`` dimensions."""
    if not isinstance(m, OperatorValuedMeasure):
        raise InvalidPovm("dilate expects a validated OperatorValuedMeasure")
    d, n = m.dim, len(m.atoms)
    w = complete_to_unitary(_isometry(m, tol), tol)
    wd = dagger(w)
    atoms = []
    for j in range(n):
        e = wd @ _ancilla_projection(d, n, j) @ w
        atoms.append(0.5 * (e + dagger(e)))
    w.setflags(write=False)
    return NeumarkDilation(d, d * n, _pvm(atoms, m, tol), projection_onto_base(d, d * n), w)


def lift_state(rho: DensityOperator, dil: NeumarkDilation) -> DensityOperator:
    """``ρ ⊕ 0`` on the extended space."""
    if rho.dim != dil.base_dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs dilation base dim {dil.base_dim}")
    return DensityOperator(lift_operator(rho.matrix, dil.extended_dim), FactorLayout.single(dil.extended_dim, "H+"))


def _check_pair(m: OperatorValuedMeasure, pvm: OperatorValuedMeasure, base_dim: int) -> None:
    if m.dim != base_dim:
        raise DimensionMismatch(f"POVM dim {m.dim} vs dilation base dim {base_dim}")
    if len(m.atoms) != len(pvm.atoms):
        raise DimensionMismatch(f"POVM has {len(m.atoms)} atoms, dilation {len(pvm.atoms)}")


def verify_lifting(rho: DensityOperator, m: OperatorValuedMeasure, dil, tol: Tolerance = DEFAULT_TOL) -> float:
    """``max_j |Tr[ρ M(j)] - Tr⁺[(ρ ⊕ 0) E⁺(j)]|``.

    ``dil`` may be a :class:`NeumarkDilation` or a :class:`FamilyMember`.
    """
    pvm = dil.extended_pvm
    base_dim = dil.base_dim
    _check_pair(m, pvm, base_dim)
    if rho.dim != base_dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs dilation base dim {base_dim}")
    lifted = lift_operator(rho.matrix, pvm.dim)
    return max(
        abs(expectation(rho.matrix, a) - expectation(lifted, e))
        for a, e in zip(m.atoms, pvm.atoms)
    )


def restriction_residual(m: OperatorValuedMeasure, dil, events: Sequence[Event] | None = None) -> float:
    """Largest entrywise gap between ``(Q E⁺(X) Q)_H`` and ``M(X)``.

    Checks every event when the outcome space is small (``n ≤ 10``), else
    the atoms only (enough by additivity).
    """
    pvm = dil.extended_pvm
    q = dil.q_projection
    _check_pair(m, pvm, dil.base_dim)
    if events is None:
        events = all_events(m.space) if m.space.atoms <= 10 else [m.space.atom(j) for j in range(m.space.atoms)]
    worst = 0.0
    for x in events:
        lhs = restrict(q @ event_operator(pvm, x) @ q, dil.base_dim)
        worst = max(worst, max_abs(lhs - event_operator(m, x)))
    return worst


@dataclass(frozen=True, eq=False)
class FamilyMember:
    index: int
    measure: OperatorValuedMeasure
    extended_pvm: OperatorValuedMeasure
    rotation: np.ndarray
    base_dim: int
    q_projection: np.ndarray

    def transported_state(self, rho: DensityOperator) -> np.ndarray:
        """``U⁺_β (ρ ⊕ 0) U⁺_β†``: the state carried onto the reference dilation's copy of H."""
        u = self.rotation
        return u @ lift_operator(rho.matrix, u.shape[0]) @ dagger(u)


@dataclass(frozen=True, eq=False)
class FamilyDilation:
    """One extended space and one ``Q`` serving a whole family of POVMs."""

    base_dim: int
    extended_dim: int
    shared_q: np.ndarray
    reference_pvm: OperatorValuedMeasure
    members: tuple[FamilyMember, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> FamilyMember:
        return self.members[i]


def dilate_family(ms: Sequence[OperatorValuedMeasure], tol: Tolerance = DEFAULT_TOL) -> FamilyDilation:
    """Dilate every member, then rotate each onto member 0's embedding.

    Member 0 is the reference: with ``W_β`` the completion unitary of member
    ``β``, ``U⁺_β = W_0† W_β`` and ``E⁺_β(X) = U⁺_β† E⁺_0(X) U⁺_β``, so all
    members share ``Q = diag(1_d, 0)``.
    """
    ms = list(ms)
    if not ms:
        raise HeterogeneousFamily("empty family")
    d, n = ms[0].dim, len(ms[0].atoms)
    for k, m in enumerate(ms):
        if m.dim != d or len(m.atoms) != n:
            raise HeterogeneousFamily(
                f"member {k} has dim {m.dim} and {len(m.atoms)} atoms; member 0 has dim {d} and {n} atoms"
            )
    dils = [dilate(m, tol) for m in ms]
    ref = dils[0]
    w0d = dagger(ref.unitary)
    q = projection_onto_base(d, d * n)
    members = []
    for k, (m, dil) in enumerate(zip(ms, dils)):
        u = w0d @ dil.unitary
        ud = dagger(u)
        atoms = []
        for e in ref.extended_pvm.atoms:
            a = ud @ e @ u
            atoms.append(0.5 * (a + dagger(a)))
        u.setflags(write=False)
        members.append(FamilyMember(k, m, _pvm(atoms, m, tol), u, d, q))
    return FamilyDilation(d, d * n, q, ref.extended_pvm, tuple(members))


def obstacle_report(m: OperatorValuedMeasure, dil: NeumarkDilation, x: Event, y: Event):
    """Compare ``[Q E⁺(X) E⁺(Y) Q]_H`` with ``M(X) M(Y)``.

    Returns ``(lhs, rhs, residual)`` with the residual in spectral norm.
    """
    _check_pair(m, dil.extended_pvm, dil.base_dim)
    for ev in (x, y):
        if ev.space != m.space:
            raise SpaceMismatch(f"event on {ev.space.label!r}, measure on {m.space.label!r}")
    q = dil.q_projection
    ex = event_operator(dil.extended_pvm, x)
    ey = event_operator(dil.extended_pvm, y)
    lhs = restrict(q @ ex @ ey @ q, dil.base_dim)
    rhs = event_operator(m, x) @ event_operator(m, y)
    return lhs, rhs, op_norm(lhs - rhs)


def tensor_restriction(op, extended_dims: tuple[int, int], base_dims: tuple[int, int]) -> np.ndarray:
    """Restrict an operator on ``H⁺_A ⊗ H⁺_B`` to ``H_A ⊗ H_B``.

    Each base space is the leading coordinate block of its extended factor,
    so the subspace is selected by slicing the reshaped index tensor.
    """
    DA, DB = extended_dims
    dA, dB = base_dims
    op = np.asarray(op, dtype=complex)
    if op.shape != (DA * DB, DA * DB):
        raise DimensionMismatch(f"operator shape {op.shape} vs extended dims {extended_dims}")
    t = op.reshape(DA, DB, DA, DB)[:dA, :dB, :dA, :dB]
    return np.ascontiguousarray(t).reshape(dA * dB, dA * dB)
