"""Particle/probe chains: successive interactions, one measurement per probe.

A particle ``ρ_0`` meets probes ``ρ_1, ρ_2, ...`` in order; each meeting is a
unitary ``U_0j`` on ``H_0 ⊗ H_j`` and each probe is then measured with its
own POVM ``M_j``. Joint probabilities fold the scaled conditional operator

    σ ← Tr_j[M_j(X_j) U_0j (σ ⊗ ρ_j) U_0j†]

starting from ``σ = ρ_0``; the trace of the final ``σ`` is the joint
probability. :func:`chain_joint_bruteforce` evaluates the same quantity on
the full tensor product as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    LengthMismatch,
    NotPositive,
    OrderViolation,
    SpaceMismatch,
    ZeroProbabilityCondition,
)
from .linalg import DEFAULT_TOL, FactorLayout, Tolerance, dagger, embed, kron, min_eigenvalue, partial_trace
from .outcomes import Event
from .povm import OperatorValuedMeasure, event_operator
from .states import DensityOperator, UnitaryOperator, as_probability, expectation

__all__ = [
    "ProbeStep",
    "ChainScenario",
    "ScaledConditional",
    "chain_step",
    "chain_fold",
    "chain_joint",
    "chain_conditional",
    "chain_joint_bruteforce",
]

PARTICLE = "0"


@dataclass(frozen=True)
class ProbeStep:
    probe_state: DensityOperator
    interaction: UnitaryOperator
    measure: OperatorValuedMeasure

    def __post_init__(self):
        dj = self.probe_state.dim
        if self.measure.dim != dj:
            raise DimensionMismatch(f"probe measure dim {self.measure.dim} vs probe dim {dj}")
        if self.interaction.dim % dj:
            raise DimensionMismatch(f"interaction dim {self.interaction.dim} is not a multiple of probe dim {dj}")

    @property
    def particle_dim(self) -> int:
        return self.interaction.dim // self.probe_state.dim


@dataclass(frozen=True)
class ChainScenario:
    particle: DensityOperator
    steps: tuple[ProbeStep, ...]

    def __init__(self, particle: DensityOperator, steps: Sequence[ProbeStep]):
        steps = tuple(steps)
        for k, s in enumerate(steps):
            if s.particle_dim != particle.dim:
                raise DimensionMismatch(f"step {k} interaction assumes particle dim {s.particle_dim}, particle has {particle.dim}")
        object.__setattr__(self, "particle", particle)
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return len(self.steps)

    def full_events(self) -> list[Event]:
        return [s.measure.space.full() for s in self.steps]


@dataclass(frozen=True, eq=False)
class ScaledConditional:
    """Unnormalized conditional operator on the particle; ``weight`` is its trace."""

    matrix: np.ndarray
    weight: float

    @classmethod
    def initial(cls, particle: DensityOperator) -> "ScaledConditional":
        return cls(np.array(particle.matrix), 1.0)

    def normalized(self, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
        if self.weight <= tol.eq_abs:
            raise ZeroProbabilityCondition(f"scaled conditional has weight {self.weight:.3e}")
        return DensityOperator(self.matrix / self.weight, tol=tol)


def chain_step(sigma: ScaledConditional, step: ProbeStep, x: Event, tol: Tolerance = DEFAULT_TOL) -> ScaledConditional:
    """``Tr_probe[M(X) U (σ ⊗ ρ_probe) U†]``."""
    d0 = sigma.matrix.shape[0]
    if step.particle_dim != d0:
        raise DimensionMismatch(f"step expects particle dim {step.particle_dim}, got {d0}")
    if x.space != step.measure.space:
        raise SpaceMismatch(f"event on {x.space.label!r}, probe measure on {step.measure.space.label!r}")
    layout = FactorLayout(((PARTICLE, d0), ("probe", step.probe_state.dim)))
    u = step.interaction.matrix
    joint = u @ kron(sigma.matrix, step.probe_state.matrix) @ dagger(u)
    mx = embed(event_operator(step.measure, x), ["probe"], layout)
    out, _ = partial_trace(mx @ joint, layout, ["probe"])
    out = 0.5 * (out + dagger(out))
    weight = float(np.trace(out).real)
    if min_eigenvalue(out) < tol.psd_floor:
        raise NotPositive(f"scaled conditional lost positivity: {min_eigenvalue(out):.3e}")
    if weight > sigma.weight + tol.eq_abs + tol.eq_rel * sigma.weight:
        raise NotPositive(f"weight grew from {sigma.weight!r} to {weight!r}")
    return ScaledConditional(out, max(weight, 0.0))


def _check_events(scn: ChainScenario, events: Sequence[Event]) -> None:
    if len(events) != len(scn.steps):
        raise LengthMismatch(f"{len(events)} events for {len(scn.steps)} probes")


def chain_fold(scn: ChainScenario, events: Sequence[Event], tol: Tolerance = DEFAULT_TOL) -> list[ScaledConditional]:
    """Every intermediate ``σ``, starting with ``ρ_0`` itself."""
    _check_events(scn, events)
    out = [ScaledConditional.initial(scn.particle)]
    for step, x in zip(scn.steps, events):
        out.append(chain_step(out[-1], step, x, tol))
    return out


def chain_joint(scn: ChainScenario, events: Sequence[Event], tol: Tolerance = DEFAULT_TOL) -> float:
    """``Pr(X_1, ..., X_k)`` by folding :func:`chain_step`."""
    return as_probability(chain_fold(scn, events, tol)[-1].weight, tol)


def chain_conditional(
    scn: ChainScenario,
    given: Sequence[tuple[int, Event]],
    query: tuple[int, Event],
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """``Pr(X_q | X_g1, X_g2, ...)`` through the normalized conditional particle state.

    Steps before the query that are not conditioned on are summed over
    (their full event is used).
    """
    q_idx, q_event = query
    k = len(scn.steps)
    if not 0 <= q_idx < k:
        raise IndexOutOfRange(f"query step {q_idx} outside 0..{k - 1}")
    fixed: dict[int, Event] = {}
    for idx, ev in given:
        if not 0 <= idx < k:
            raise IndexOutOfRange(f"given step {idx} outside 0..{k - 1}")
        if idx >= q_idx:
            raise OrderViolation(f"given step {idx} does not precede query step {q_idx}")
        if idx in fixed:
            raise OrderViolation(f"step {idx} conditioned twice")
        fixed[idx] = ev
    sigma = ScaledConditional.initial(scn.particle)
    for j in range(q_idx):
        step = scn.steps[j]
        sigma = chain_step(sigma, step, fixed.get(j, step.measure.space.full()), tol)
    rho = sigma.normalized(tol)
    after = chain_step(ScaledConditional(np.array(rho.matrix), 1.0), scn.steps[q_idx], q_event, tol)
    return as_probability(after.weight, tol)


def chain_joint_bruteforce(scn: ChainScenario, events: Sequence[Event], tol: Tolerance = DEFAULT_TOL) -> float:
    """Joint probability on the full space ``H_0 ⊗ H_1 ⊗ ... ⊗ H_k``.

    Each ``U_0j`` is embedded on factors ``(0, j)`` and applied in order;
    one global trace against ``1 ⊗ M_1(X_1) ⊗ ... ⊗ M_k(X_k)`` finishes.
    """
    _check_events(scn, events)
    labels = [PARTICLE] + [str(j + 1) for j in range(len(scn.steps))]
    dims = [scn.particle.dim] + [s.probe_state.dim for s in scn.steps]
    layout = FactorLayout(tuple(zip(labels, dims)))
    state = scn.particle.matrix
    for s in scn.steps:
        state = np.kron(state, s.probe_state.matrix)
    for j, s in enumerate(scn.steps):
        u = embed(s.interaction.matrix, [PARTICLE, labels[j + 1]], layout)
        state = u @ state @ dagger(u)
    effect = np.eye(scn.particle.dim, dtype=complex)
    for s, x in zip(scn.steps, events):
        if x.space != s.measure.space:
            raise SpaceMismatch(f"event on {x.space.label!r}, probe measure on {s.measure.space.label!r}")
        effect = np.kron(effect, event_operator(s.measure, x))
    return as_probability(expectation(state, effect), tol)
