"""Transmitted-state and entangled-state BB84 under individual attacks.

Entangled-state BB84 lives on ``H_E ⊗ H_B ⊗ H_A``: Eve's probe ``ρ_E``, the
shared state ``ρ_BA``, an attack ``U_EB`` acting as the identity on Alice's
factor, and one POVM per party. Transmitted-state BB84 replaces Alice's
factor by priors ``ζ_i`` over four states ``ρ_B(i)`` sent to Bob.

:func:`derive_transmitted` builds the transmitted model with
``ζ_i = Tr_B[Tr_A(M_A(Z_i) ρ_BA)]`` and ``ρ_B(i)`` the matching conditional
Bob state; :func:`equivalence_report` compares both models' joint tables.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotNormalized, SpaceMismatch, ZeroProbabilityCondition
from .linalg import DEFAULT_TOL, FactorLayout, Tolerance, dagger, embed, kron, partial_trace
from .outcomes import Event
from .povm import OperatorValuedMeasure, event_operator
from .states import DensityOperator, UnitaryOperator, as_probability, expectation

__all__ = [
    "KEY_EVENTS",
    "EntangledScenario",
    "TransmittedScenario",
    "EquivalenceReport",
    "entangled_joint",
    "alice_reduced_operator",
    "alice_marginal",
    "conditional_bob_state",
    "conditional_joint",
    "derive_transmitted",
    "transmitted_joint",
    "equivalence_report",
]

KEY_EVENTS = 4
E, B, A = "E", "B", "A"


def _check_event(m: OperatorValuedMeasure, x: Event, who: str) -> None:
    if x.space != m.space:
        raise SpaceMismatch(f"{who} event on {x.space.label!r}, measure on {m.space.label!r}")


@dataclass(frozen=True)
class EntangledScenario:
    eve_probe: DensityOperator
    alice_state: DensityOperator
    attack: UnitaryOperator
    eve_measure: OperatorValuedMeasure
    bob_measure: OperatorValuedMeasure
    alice_measure: OperatorValuedMeasure
    alice_key_events: tuple[Event, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice_key_events", tuple(self.alice_key_events))
        d_e = self.eve_probe.dim
        d_b, d_a = self.bob_measure.dim, self.alice_measure.dim
        if self.eve_measure.dim != d_e:
            raise DimensionMismatch(f"Eve's measure dim {self.eve_measure.dim} vs probe dim {d_e}")
        if self.alice_state.dim != d_b * d_a:
            raise DimensionMismatch(f"ρ_BA dim {self.alice_state.dim} vs d_B·d_A = {d_b * d_a}")
        if self.attack.dim != d_e * d_b:
            raise DimensionMismatch(f"attack dim {self.attack.dim} vs d_E·d_B = {d_e * d_b}")
        if len(self.alice_key_events) != KEY_EVENTS:
            raise DimensionMismatch(f"need {KEY_EVENTS} key events, got {len(self.alice_key_events)}")
        seen: set[int] = set()
        for z in self.alice_key_events:
            _check_event(self.alice_measure, z, "Alice")
            if seen & set(z.members):
                raise SpaceMismatch("Alice's key events must be pairwise disjoint")
            seen |= set(z.members)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.eve_probe.dim, self.bob_measure.dim, self.alice_measure.dim

    @property
    def layout(self) -> FactorLayout:
        d_e, d_b, d_a = self.dims
        return FactorLayout(((E, d_e), (B, d_b), (A, d_a)))

    @property
    def ba_layout(self) -> FactorLayout:
        _, d_b, d_a = self.dims
        return FactorLayout(((B, d_b), (A, d_a)))


@dataclass(frozen=True)
class TransmittedScenario:
    priors: tuple[float, ...]
    bob_states: tuple[DensityOperator, ...]
    eve_probe: DensityOperator
    attack: UnitaryOperator
    eve_measure: OperatorValuedMeasure
    bob_measure: OperatorValuedMeasure
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        priors = tuple(float(p) for p in self.priors)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "bob_states", tuple(self.bob_states))
        if len(priors) != len(self.bob_states):
            raise DimensionMismatch("one prior per Bob state required")
        if any(p < 0 for p in priors):
            raise NotNormalized("priors must be non-negative")
        if sum(priors) > 1.0 + self.tol.eq_abs + self.tol.eq_rel:
            raise NotNormalized(f"priors sum to {sum(priors)!r} > 1")
        d_b = self.bob_measure.dim
        if any(s.dim != d_b for s in self.bob_states):
            raise DimensionMismatch("Bob states must match Bob's measure dimension")
        if self.attack.dim != self.eve_probe.dim * d_b:
            raise DimensionMismatch("attack must act on H_E ⊗ H_B")

    @property
    def prior_deficit(self) -> float:
        """``1 - Σ ζ_i``: probability mass of Alice outcomes outside the key events."""
        return 1.0 - sum(self.priors)


def entangled_joint(s: EntangledScenario, x_e: Event, y_b: Event, z_a: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Tr_EBA[M_E(X) M_B(Y) M_A(Z) U_EB (ρ_E ⊗ ρ_BA) U_EB†]`` on the triple space."""
    _check_event(s.eve_measure, x_e, "Eve")
    _check_event(s.bob_measure, y_b, "Bob")
    _check_event(s.alice_measure, z_a, "Alice")
    layout = s.layout
    u = embed(s.attack.matrix, [E, B], layout)
    state = u @ kron(s.eve_probe.matrix, s.alice_state.matrix) @ dagger(u)
    effect = kron(kron(event_operator(s.eve_measure, x_e), event_operator(s.bob_measure, y_b)), event_operator(s.alice_measure, z_a))
    return as_probability(expectation(state, effect), tol)


def alice_reduced_operator(s: EntangledScenario, z_a: Event) -> np.ndarray:
    """``Tr_A[M_A(Z) ρ_BA]``, an unnormalized operator on ``H_B``."""
    _check_event(s.alice_measure, z_a, "Alice")
    ma = embed(event_operator(s.alice_measure, z_a), [A], s.ba_layout)
    reduced, _ = partial_trace(ma @ s.alice_state.matrix, s.ba_layout, [A])
    return 0.5 * (reduced + dagger(reduced))


def alice_marginal(s: EntangledScenario, z_a: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Pr(Z) = Tr_B[Tr_A(M_A(Z) ρ_BA)]``; independent of Eve and Bob."""
    return as_probability(np.trace(alice_reduced_operator(s, z_a)), tol)


def conditional_bob_state(s: EntangledScenario, z_a: Event, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    """``ρ_B|Z = Tr_A[M_A(Z) ρ_BA] / Pr(Z)``."""
    reduced = alice_reduced_operator(s, z_a)
    p = as_probability(np.trace(reduced), tol)
    if p <= tol.eq_abs:
        raise ZeroProbabilityCondition(f"Alice event {list(z_a.members)} has probability {p:.3e}")
    return DensityOperator(reduced / p, s.ba_layout.subset([B]), tol)


def conditional_joint(s: EntangledScenario, x_e: Event, y_b: Event, z_a: Event, tol: Tolerance = DEFAULT_TOL) -> float:
    """``Pr(X, Y | Z) = Tr_EB[M_E(X) M_B(Y) U_EB (ρ_E ⊗ ρ_B|Z) U_EB†]``."""
    _check_event(s.eve_measure, x_e, "Eve")
    _check_event(s.bob_measure, y_b, "Bob")
    return _eb_probability(s.eve_probe, conditional_bob_state(s, z_a, tol), s.attack, s.eve_measure, s.bob_measure, x_e, y_b, tol)


def _eb_probability(rho_e, rho_b, attack, m_e, m_b, x_e, y_b, tol) -> float:
    u = attack.matrix
    state = u @ kron(rho_e.matrix, rho_b.matrix) @ dagger(u)
    effect = kron(event_operator(m_e, x_e), event_operator(m_b, y_b))
    return as_probability(expectation(state, effect), tol)


def derive_transmitted(s: EntangledScenario, tol: Tolerance = DEFAULT_TOL) -> TransmittedScenario:
    priors, states = [], []
    for i, z in enumerate(s.alice_key_events):
        p = alice_marginal(s, z, tol)
        if p <= tol.eq_abs:
            raise ZeroProbabilityCondition(f"Alice key event {i} ({list(z.members)}) has probability {p:.3e}")
        priors.append(p)
        states.append(conditional_bob_state(s, z, tol))
    return TransmittedScenario(tuple(priors), tuple(states), s.eve_probe, s.attack, s.eve_measure, s.bob_measure, tol)


def transmitted_joint(t: TransmittedScenario, x_e: Event, y_b: Event, i: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """``ζ_i Tr_EB[M_E(X) M_B(Y) U_EB (ρ_E ⊗ ρ_B(i)) U_EB†]``."""
    if not 0 <= i < len(t.priors):
        raise IndexOutOfRange(f"state index {i} outside 0..{len(t.priors) - 1}")
    _check_event(t.eve_measure, x_e, "Eve")
    _check_event(t.bob_measure, y_b, "Bob")
    if t.priors[i] == 0.0:
        return 0.0
    return t.priors[i] * _eb_probability(t.eve_probe, t.bob_states[i], t.attack, t.eve_measure, t.bob_measure, x_e, y_b, tol)


@dataclass
class EquivalenceReport:
    max_residual: float
    prior_deficit: float
    rows: list[tuple[int, int, int, float, float, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x_e", "y_b", "i", "entangled", "transmitted", "diff"])
        for x, y, i, ent, tr, diff in self.rows:
            w.writerow([x, y, i, repr(ent), repr(tr), repr(diff)])
        return buf.getvalue()


def equivalence_report(
    s: EntangledScenario,
    tol: Tolerance = DEFAULT_TOL,
    transmitted: TransmittedScenario | None = None,
) -> EquivalenceReport:
    """Compare the entangled and transmitted joint tables atom by atom.

    ``transmitted`` defaults to :func:`derive_transmitted`; pass a modified
    model to check that discrepancies are detected.
    """
    t = derive_transmitted(s, tol) if transmitted is None else transmitted
    rows = []
    worst = 0.0
    for xe in range(s.eve_measure.space.atoms):
        x = s.eve_measure.space.atom(xe)
        for yb in range(s.bob_measure.space.atoms):
            y = s.bob_measure.space.atom(yb)
            for i, z in enumerate(s.alice_key_events):
                ent = entangled_joint(s, x, y, z, tol)
                tr = transmitted_joint(t, x, y, i, tol)
                diff = abs(ent - tr)
                worst = max(worst, diff)
                rows.append((xe, yb, i, ent, tr, diff))
    return EquivalenceReport(worst, t.prior_deficit, rows)
