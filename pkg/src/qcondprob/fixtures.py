"""Named states, operators and scenarios shared by tests, CLI and the property registry."""

from __future__ import annotations

import numpy as np

from .bb84 import EntangledScenario
from .linalg import FactorLayout
from .povm import OperatorValuedMeasure, bb84_povm, computational_pvm, rotated_trine_povm
from .probes import ChainScenario, ProbeStep
from .sampling import random_density_matrix, random_povm_atoms, random_unitary
from .states import DensityOperator, UnitaryOperator

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)

TRINE_FAMILY_DEGREES = (0.0, 10.0, 20.0)


def bell_state(labels: tuple[str, str] = ("A", "B")) -> DensityOperator:
    """``|Φ⁺⟩⟨Φ⁺|`` on two qubits."""
    return DensityOperator.from_ket(PHI_PLUS, FactorLayout(((labels[0], 2), (labels[1], 2))))


def trine_family() -> list[OperatorValuedMeasure]:
    return [rotated_trine_povm(np.deg2rad(a)) for a in TRINE_FAMILY_DEGREES]


def bell_bb84_scenario(
    eve_dim: int = 2,
    attack: np.ndarray | None = None,
    eve_probe: np.ndarray | None = None,
) -> EntangledScenario:
    """Entangled BB84 with ``ρ_BA = |Φ⁺⟩⟨Φ⁺|`` and BB84 mixtures for Alice and Bob.

    Eve measures her probe in the computational basis. With no attack given
    she does nothing (identity on ``H_E ⊗ H_B``) and holds ``|0⟩``.
    """
    rho_e = np.zeros((eve_dim, eve_dim), dtype=complex)
    rho_e[0, 0] = 1.0
    if eve_probe is not None:
        rho_e = eve_probe
    u = np.eye(2 * eve_dim, dtype=complex) if attack is None else attack
    m_a = bb84_povm("A")
    return EntangledScenario(
        eve_probe=DensityOperator(rho_e, FactorLayout.single(eve_dim, "E")),
        alice_state=bell_state(("B", "A")),
        attack=UnitaryOperator(u, FactorLayout.of(E=eve_dim, B=2)),
        eve_measure=computational_pvm(eve_dim, "XE"),
        bob_measure=bb84_povm("YB"),
        alice_measure=m_a,
        alice_key_events=tuple(m_a.space.atom(i) for i in range(4)),
    )


def random_attack_scenario(gen: np.random.Generator, eve_dim: int = 2) -> EntangledScenario:
    """Bell fixture with a Haar-random attack and a random mixed Eve probe."""
    return bell_bb84_scenario(
        eve_dim,
        attack=random_unitary(gen, 2 * eve_dim),
        eve_probe=random_density_matrix(gen, eve_dim),
    )


def random_chain_scenario(gen: np.random.Generator, k: int, d: int = 2, n_outcomes: int = 2) -> ChainScenario:
    """``k`` probes, every space of dimension ``d``, random POVMs with ``n_outcomes`` atoms."""
    particle = DensityOperator(random_density_matrix(gen, d))
    steps = []
    for _ in range(k):
        steps.append(
            ProbeStep(
                DensityOperator(random_density_matrix(gen, d)),
                UnitaryOperator(random_unitary(gen, d * d)),
                OperatorValuedMeasure(random_povm_atoms(gen, d, n_outcomes)),
            )
        )
    return ChainScenario(particle, steps)


def cnot_chain_scenario() -> ChainScenario:
    """Particle ``|+⟩`` copied by CNOT onto a ``|0⟩`` probe, probe read in Z."""
    return ChainScenario(
        DensityOperator.from_ket(KET_PLUS),
        [ProbeStep(DensityOperator.from_ket(KET0), UnitaryOperator(CNOT), computational_pvm(2, "P1"))],
    )
