"""Positive operator-valued measures on finite outcome spaces.

An :class:`OperatorValuedMeasure` stores one positive atom per outcome.
Projectivity is never taken on trust: the validator inspects the atoms and
sets ``kind`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidPovm, NotProjective, SpaceMismatch
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    dagger,
    hermitian_residual,
    kron,
    max_abs,
    min_eigenvalue,
    op_norm,
)
from .outcomes import Event, OutcomeSpace, intersect

__all__ = [
    "GENERAL",
    "PROJECTIVE",
    "Violation",
    "ValidationReport",
    "OperatorValuedMeasure",
    "validate",
    "event_operator",
    "tensor_povm",
    "product_obstacle_residual",
    "computational_pvm",
    "fourier_pvm",
    "trine_povm",
    "rotated_trine_povm",
    "bb84_povm",
    "trivial_povm",
]

GENERAL = "general"
PROJECTIVE = "projective"


@dataclass(frozen=True)
class Violation:
    axiom: str
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    """Outcome of checking POVM axioms against a set of atoms.

    ``projective`` says whether the atoms also pass the idempotence and
    orthogonality checks; it is informative unless projectivity was
    required, in which case failures appear in ``violations``.
    """

    dim: int
    atoms: int
    violations: list[Violation] = field(default_factory=list)
    projective: bool = False
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            kind = PROJECTIVE if self.projective else GENERAL
            return f"valid {kind} POVM: {self.atoms} atoms on dim {self.dim}"
        parts = [f"{v.axiom} (residual {v.residual:.3e}){': ' + v.detail if v.detail else ''}" for v in self.violations]
        return "invalid POVM: " + "; ".join(parts)


def _atom_list(atoms) -> list[np.ndarray]:
    if isinstance(atoms, OperatorValuedMeasure):
        return list(atoms.atoms)
    mats = [as_matrix(a, square=True) for a in atoms]
    if not mats:
        raise InvalidPovm("a POVM needs at least one atom")
    return mats


def validate(atoms, tol: Tolerance = DEFAULT_TOL, require_projective: bool = False) -> ValidationReport:
    """Check positivity, Hermiticity and completeness; measure projectivity.

    ``atoms`` may be an :class:`OperatorValuedMeasure` or a sequence of
    matrices. Never raises on axiom failures: they are listed in the report.
    """
    mats = _atom_list(atoms)
    d = mats[0].shape[0]
    report = ValidationReport(dim=d, atoms=len(mats))
    if any(m.shape != (d, d) for m in mats):
        report.violations.append(Violation("shape", float("inf"), "atoms have differing dimensions"))
        return report

    herm = max(hermitian_residual(m) for m in mats)
    report.residuals["hermitian"] = herm
    if herm > tol.bound(*mats):
        report.violations.append(Violation("self-adjoint", herm))

    low = min(min_eigenvalue(m) for m in mats)
    report.residuals["min_eigenvalue"] = low
    if low < tol.psd_floor:
        report.violations.append(Violation("non-negative", -low, f"min eigenvalue {low:.3e}"))

    total = sum(mats)
    eye = np.eye(d, dtype=complex)
    comp = max_abs(total - eye)
    report.residuals["completeness"] = comp
    if comp > tol.bound(total, eye):
        report.violations.append(Violation("completeness", comp, "atoms do not sum to identity"))

    idem = max(max_abs(m @ m - m) for m in mats)
    orth = 0.0
    for i, a in enumerate(mats):
        for b in mats[i + 1:]:
            orth = max(orth, max_abs(a @ b))
    report.residuals["idempotence"] = idem
    report.residuals["orthogonality"] = orth
    bound = tol.bound(*mats)
    report.projective = report.ok and idem <= bound and orth <= bound
    if require_projective:
        if idem > bound:
            report.violations.append(Violation("idempotence", idem))
        if orth > bound:
            report.violations.append(Violation("orthogonality", orth))
    return report


class OperatorValuedMeasure:
    """A validated POVM: ``space.atoms`` positive atoms on a ``dim``-dimensional space."""

    __slots__ = ("space", "atoms", "dim", "kind", "report")

    def __init__(
        self,
        atoms: Sequence,
        space: OutcomeSpace | None = None,
        tol: Tolerance = DEFAULT_TOL,
        label: str = "Ω",
    ):
        mats = _atom_list(atoms)
        if space is None:
            space = OutcomeSpace(label, len(mats))
        if space.atoms != len(mats):
            raise SpaceMismatch(f"space {space.label!r} has {space.atoms} atoms but {len(mats)} operators given")
        report = validate(mats, tol)
        if not report.ok:
            raise InvalidPovm(report.summary(), report)
        frozen = []
        for m in mats:
            m = 0.5 * (m + dagger(m))
            m.setflags(write=False)
            frozen.append(m)
        self.space = space
        self.atoms = tuple(frozen)
        self.dim = report.dim
        self.kind = PROJECTIVE if report.projective else GENERAL
        self.report = report

    @property
    def is_projective(self) -> bool:
        return self.kind == PROJECTIVE

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        return f"OperatorValuedMeasure({self.kind}, {len(self.atoms)} atoms, dim={self.dim}, space={self.space.label!r})"

    def __call__(self, x: Event) -> np.ndarray:
        return event_operator(self, x)

    def require_projective(self) -> "OperatorValuedMeasure":
        if not self.is_projective:
            raise NotProjective(f"{self!r} is not projective")
        return self

    def full(self) -> Event:
        return self.space.full()


def event_operator(m: OperatorValuedMeasure, x: Event) -> np.ndarray:
    """``M(X) = Σ_{j∈X} M(j)``; the empty event gives the zero matrix."""
    if x.space != m.space:
        raise SpaceMismatch(f"event on {x.space.label!r}, measure on {m.space.label!r}")
    out = np.zeros((m.dim, m.dim), dtype=complex)
    for j in x:
        out += m.atoms[j]
    return out


def tensor_povm(ma: OperatorValuedMeasure, mb: OperatorValuedMeasure, tol: Tolerance = DEFAULT_TOL) -> OperatorValuedMeasure:
    """Atom ``(i, j)`` is ``ma.atoms[i] ⊗ mb.atoms[j]`` on the row-major product space."""
    space = OutcomeSpace.product(ma.space, mb.space)
    atoms = [kron(a, b) for a in ma.atoms for b in mb.atoms]
    return OperatorValuedMeasure(atoms, space, tol)


def product_obstacle_residual(m: OperatorValuedMeasure, x: Event, y: Event) -> float:
    """Spectral norm of ``M(X∩Y) - M(X)M(Y)``; zero for projective measures."""
    lhs = event_operator(m, intersect(x, y))
    rhs = event_operator(m, x) @ event_operator(m, y)
    return op_norm(lhs - rhs)


# -- named constructors -----------------------------------------------------

def computational_pvm(d: int, label: str = "Z") -> OperatorValuedMeasure:
    atoms = []
    for j in range(d):
        p = np.zeros((d, d), dtype=complex)
        p[j, j] = 1.0
        atoms.append(p)
    return OperatorValuedMeasure(atoms, OutcomeSpace(label, d))


def fourier_pvm(d: int, label: str = "F") -> OperatorValuedMeasure:
    k = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    atoms = [np.outer(f[:, j], f[:, j].conj()) for j in range(d)]
    return OperatorValuedMeasure(atoms, OutcomeSpace(label, d))


def trine_kets(angle: float = 0.0) -> list[np.ndarray]:
    """Three real qubit kets 120° apart in the plane, rotated by ``angle`` radians."""
    return [np.array([np.cos(angle + 2 * np.pi * k / 3), np.sin(angle + 2 * np.pi * k / 3)], dtype=complex) for k in range(3)]


def rotated_trine_povm(angle: float, label: str = "T") -> OperatorValuedMeasure:
    atoms = [(2.0 / 3.0) * np.outer(v, v.conj()) for v in trine_kets(angle)]
    return OperatorValuedMeasure(atoms, OutcomeSpace(label, 3))


def trine_povm(label: str = "T") -> OperatorValuedMeasure:
    """Qubit trine: ``(2/3)|ψ_k⟩⟨ψ_k|`` with ``|ψ_0⟩ = |0⟩``."""
    return rotated_trine_povm(0.0, label)


def bb84_povm(label: str = "BB84") -> OperatorValuedMeasure:
    """Equal-weight mixture of the Z and X basis PVMs: atoms ``|0⟩,|1⟩,|+⟩,|−⟩`` over 2."""
    s = 1 / np.sqrt(2)
    kets = [np.array([1, 0]), np.array([0, 1]), np.array([s, s]), np.array([s, -s])]
    atoms = [0.5 * np.outer(v, v).astype(complex) for v in kets]
    return OperatorValuedMeasure(atoms, OutcomeSpace(label, 4, ("0", "1", "+", "-")))


def trivial_povm(d: int, label: str = "1") -> OperatorValuedMeasure:
    """Single-outcome measure ``{I}``."""
    return OperatorValuedMeasure([np.eye(d, dtype=complex)], OutcomeSpace(label, 1))
