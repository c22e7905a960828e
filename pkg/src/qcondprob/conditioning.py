"""Conditional density operators.

Four constructions are provided:

``condition_pvm``
    ``E(Y) ρ E(Y) / Tr[ρ E(Y)]`` for a single projection-valued measure.
``condition_rect_full``
    The same sandwich, but with ``1 ⊗ E_B(Y)`` on a composite space; the
    result still lives on the full space.
``condition_rect_reduced``
    ``Tr_B{ρ [1 ⊗ M_B(Y)]} / Tr{ρ [1 ⊗ M_B(Y)]}``, a reduced operator on the
    remaining factors. Valid for arbitrary POVMs ``M_B``.
``reduced_operator_forms``
    The competing operator-level expressions for the reduced conditional
    state, exposed so their agreement can be measured.

The conditioning factor is named by label, so conditioning on the A side is
the same call with ``factor="A"``. None of this models a dynamical collapse:
the operators only reproduce conditional probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SpaceMismatch, ZeroProbabilityCondition
from .linalg import DEFAULT_TOL, Tolerance, dagger, embed, hermitian_sqrt, partial_trace
from .outcomes import Event
from .povm import OperatorValuedMeasure, event_operator
from .states import DensityOperator, as_probability, expectation

__all__ = [
    "ConditionedState",
    "conditional_probability_pvm",
    "condition_pvm",
    "condition_rect_full",
    "condition_rect_reduced",
    "reduced_operator_forms",
    "conditional_probability_rect",
    "probability_from_conditioned",
]


@dataclass(frozen=True)
class ConditionedState:
    operator: DensityOperator
    conditioning_event: Event
    normalizer: float

    def __post_init__(self):
        if not self.normalizer > 0:
            raise ZeroProbabilityCondition("normalizer must be positive")


def _check_event(m: OperatorValuedMeasure, x: Event) -> None:
    if x.space != m.space:
        raise SpaceMismatch(f"event on {x.space.label!r}, measure on {m.space.label!r}")


def _normalizer(value: complex, tol: Tolerance, what: str) -> float:
    p = as_probability(value, tol)
    if p <= tol.eq_abs:
        raise ZeroProbabilityCondition(f"cannot condition on {what}: probability {p:.3e}")
    return p


def conditional_probability_pvm(rho: DensityOperator, e: OperatorValuedMeasure, x: Event, y: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Tr[ρ E(X) E(Y)] / Tr[ρ E(Y)]`` for a projection-valued ``e``."""
    e.require_projective()
    _check_event(e, x)
    _check_event(e, y)
    if e.dim != rho.dim:
        raise DimensionMismatch(f"measure dim {e.dim} vs state dim {rho.dim}")
    ey = event_operator(e, y)
    den = _normalizer(expectation(rho.matrix, ey), tol, repr(y))
    num = expectation(rho.matrix, event_operator(e, x) @ ey)
    return as_probability(num.real / den, tol)


def condition_pvm(rho: DensityOperator, e: OperatorValuedMeasure, y: Event, tol: Tolerance = DEFAULT_TOL) -> ConditionedState:
    e.require_projective()
    _check_event(e, y)
    if e.dim != rho.dim:
        raise DimensionMismatch(f"measure dim {e.dim} vs state dim {rho.dim}")
    ey = event_operator(e, y)
    den = _normalizer(expectation(rho.matrix, ey), tol, repr(y))
    return ConditionedState(DensityOperator(ey @ rho.matrix @ ey / den, rho.layout, tol), y, den)


def _local(rho: DensityOperator, m: OperatorValuedMeasure, factor: str | None) -> str:
    if factor is None:
        factor = rho.layout.labels[-1]
    if len(rho.layout.factors) < 2:
        raise DimensionMismatch("rectangle conditioning needs a composite layout")
    if rho.layout.dim_of(factor) != m.dim:
        raise DimensionMismatch(f"measure dim {m.dim} does not fit factor {factor!r} of {rho.layout}")
    return factor


def condition_rect_full(
    rho: DensityOperator,
    mb: OperatorValuedMeasure,
    y: Event,
    factor: str | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> ConditionedState:
    """Condition on an event of the measure acting on ``factor``; keep the full space.

    For projective ``mb`` this is ``[1⊗E(Y)] ρ [1⊗E(Y)]`` over its trace.
    For a general POVM the sandwich uses ``√M(Y)`` so that the result stays
    unit-trace and still reproduces every ``Pr(X_A | Y)``.
    """
    factor = _local(rho, mb, factor)
    _check_event(mb, y)
    my = event_operator(mb, y)
    den = _normalizer(expectation(rho.matrix, embed(my, [factor], rho.layout)), tol, repr(y))
    side = my if mb.is_projective else hermitian_sqrt(my, tol)
    s = embed(side, [factor], rho.layout)
    return ConditionedState(DensityOperator(s @ rho.matrix @ s / den, rho.layout, tol), y, den)


def condition_rect_reduced(
    rho: DensityOperator,
    mb: OperatorValuedMeasure,
    y: Event,
    factor: str | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> ConditionedState:
    """``Tr_factor{ρ [1 ⊗ M(Y)]}`` normalized; lives on the remaining factors."""
    factor = _local(rho, mb, factor)
    _check_event(mb, y)
    full = embed(event_operator(mb, y), [factor], rho.layout)
    den = _normalizer(expectation(rho.matrix, full), tol, repr(y))
    reduced, layout = partial_trace(rho.matrix @ full, rho.layout, [factor])
    reduced = 0.5 * (reduced + dagger(reduced))
    return ConditionedState(DensityOperator(reduced / den, layout, tol), y, den)


def reduced_operator_forms(
    rho: DensityOperator,
    mb: OperatorValuedMeasure,
    y: Event,
    factor: str | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> dict[str, np.ndarray]:
    """Candidate reduced conditional operators, all divided by ``Tr{ρ [1⊗M(Y)]}``.

    Keys: ``"one_sided"`` (``Tr_B{ρ [1⊗M]}``), ``"sandwich"``
    (``Tr_B{[1⊗M] ρ [1⊗M]}``) and ``"sqrt_sandwich"``
    (``Tr_B{[1⊗√M] ρ [1⊗√M]}``). For projective measures all three coincide;
    otherwise ``sandwich`` generally differs and is not unit-trace.
    """
    factor = _local(rho, mb, factor)
    _check_event(mb, y)
    my = event_operator(mb, y)
    full = embed(my, [factor], rho.layout)
    root = embed(hermitian_sqrt(my, tol), [factor], rho.layout)
    den = _normalizer(expectation(rho.matrix, full), tol, repr(y))
    forms = {
        "one_sided": rho.matrix @ full,
        "sandwich": full @ rho.matrix @ full,
        "sqrt_sandwich": root @ rho.matrix @ root,
    }
    return {k: partial_trace(v, rho.layout, [factor])[0] / den for k, v in forms.items()}


def conditional_probability_rect(
    rho: DensityOperator,
    ma: OperatorValuedMeasure,
    x: Event,
    mb: OperatorValuedMeasure,
    y: Event,
    factor_a: str | None = None,
    factor_b: str | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """``Tr[(M_A(X) ⊗ M_B(Y)) ρ] / Tr[ρ (1 ⊗ M_B(Y))]`` computed on the full space."""
    labels = rho.layout.labels
    factor_a = labels[0] if factor_a is None else factor_a
    factor_b = labels[-1] if factor_b is None else factor_b
    _check_event(ma, x)
    _check_event(mb, y)
    mbf = embed(event_operator(mb, y), [factor_b], rho.layout)
    maf = embed(event_operator(ma, x), [factor_a], rho.layout)
    den = _normalizer(expectation(rho.matrix, mbf), tol, repr(y))
    return as_probability(expectation(rho.matrix, maf @ mbf).real / den, tol)


def probability_from_conditioned(cond: ConditionedState, ma: OperatorValuedMeasure, x: Event, factor: str | None = None, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Tr[ρ|_Y M_A(X)]``, embedding ``M_A`` on ``factor`` when the state is composite."""
    _check_event(ma, x)
    state = cond.operator
    op = event_operator(ma, x)
    if op.shape != state.matrix.shape:
        if factor is None:
            raise DimensionMismatch("name the factor the measure acts on")
        op = embed(op, [factor], state.layout)
    return as_probability(expectation(state.matrix, op), tol)
