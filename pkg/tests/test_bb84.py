import dataclasses

import numpy as np
import pytest

from qcondprob.bb84 import (
    EntangledScenario,
    TransmittedScenario,
    alice_marginal,
    conditional_bob_state,
    conditional_joint,
    derive_transmitted,
    entangled_joint,
    equivalence_report,
    transmitted_joint,
)
from qcondprob.errors import DimensionMismatch, IndexOutOfRange, NotNormalized, SpaceMismatch, ZeroProbabilityCondition
from qcondprob.fixtures import KET0, KET1, KET_MINUS, KET_PLUS, bell_bb84_scenario, bell_state, random_attack_scenario
from qcondprob.linalg import FactorLayout, kron
from qcondprob.povm import OperatorValuedMeasure, bb84_povm, computational_pvm
from qcondprob.sampling import random_density_matrix, random_unitary, rng
from qcondprob.states import DensityOperator, UnitaryOperator, trace_rule

BA = FactorLayout.of(B=2, A=2)


def _scenario(alice_state, alice_measure=None, key_events=None, attack=None, eve_dim=2, bob=None):
    ma = alice_measure or computational_pvm(2, "A")
    if key_events is None:
        key_events = [ma.space.atom(0), ma.space.atom(1), ma.space.empty(), ma.space.empty()]
    return EntangledScenario(
        eve_probe=DensityOperator.from_ket(np.eye(eve_dim)[0], FactorLayout.single(eve_dim, "E")),
        alice_state=alice_state,
        attack=UnitaryOperator(np.eye(2 * eve_dim) if attack is None else attack),
        eve_measure=computational_pvm(eve_dim, "XE"),
        bob_measure=bob or computational_pvm(2, "YB"),
        alice_measure=ma,
        alice_key_events=key_events,
    )


def test_entangled_joint_full_events_sum_to_one(gen):
    s = random_attack_scenario(gen, 4)
    assert entangled_joint(s, s.eve_measure.space.full(), s.bob_measure.space.full(), s.alice_measure.space.full()) == pytest.approx(1.0, abs=1e-12)


def test_entangled_joint_factorizes_without_attack(gen):
    rho_b, rho_a = random_density_matrix(gen, 2), random_density_matrix(gen, 2)
    s = _scenario(DensityOperator(kron(rho_b, rho_a), BA), bob=bb84_povm("YB"))
    for y in range(4):
        for z in range(2):
            yb, za = s.bob_measure.space.atom(y), s.alice_measure.space.atom(z)
            expected = (
                trace_rule(DensityOperator(rho_b), None, s.bob_measure, yb)
                * trace_rule(DensityOperator(rho_a), None, s.alice_measure, za)
            )
            assert entangled_joint(s, s.eve_measure.space.atom(0), yb, za) == pytest.approx(expected, abs=1e-13)


def test_bell_correlation_in_computational_basis():
    s = _scenario(bell_state(("B", "A")))
    xe = s.eve_measure.space.full()
    y0, z0, z1 = s.bob_measure.space.atom(0), s.alice_measure.space.atom(0), s.alice_measure.space.atom(1)
    assert entangled_joint(s, xe, y0, z0) == pytest.approx(0.5)
    assert entangled_joint(s, xe, y0, z1) == pytest.approx(0.0, abs=1e-15)


def test_alice_marginal_examples(gen):
    s = _scenario(bell_state(("B", "A")))
    assert alice_marginal(s, s.alice_measure.space.full()) == pytest.approx(1.0)
    assert alice_marginal(s, s.alice_measure.space.atom(0)) == pytest.approx(0.5)
    base = bell_bb84_scenario()
    ref = [alice_marginal(base, z) for z in base.alice_key_events]
    for _ in range(20):
        s = random_attack_scenario(gen, int(gen.choice([2, 4])))
        full = [entangled_joint(s, s.eve_measure.space.full(), s.bob_measure.space.full(), z) for z in s.alice_key_events]
        assert np.allclose(full, ref, atol=1e-12, rtol=0)


def test_conditional_bob_state_examples(gen):
    s = _scenario(bell_state(("B", "A")))
    assert np.allclose(conditional_bob_state(s, s.alice_measure.space.atom(0)).matrix, np.diag([1, 0]), atol=1e-15)
    rho_b = random_density_matrix(gen, 2)
    prod = _scenario(DensityOperator(kron(rho_b, random_density_matrix(gen, 2)), BA))
    assert np.allclose(conditional_bob_state(prod, prod.alice_measure.space.atom(1)).matrix, rho_b, atol=1e-12)
    mixed = _scenario(DensityOperator.maximally_mixed(BA))
    assert np.allclose(conditional_bob_state(mixed, mixed.alice_measure.space.atom(0)).matrix, np.eye(2) / 2, atol=1e-15)
    with pytest.raises(ZeroProbabilityCondition):
        conditional_bob_state(s, s.alice_measure.space.empty())


def test_derive_transmitted_on_bell_fixture():
    t = derive_transmitted(bell_bb84_scenario())
    assert np.allclose(t.priors, 0.25, atol=1e-9)
    assert t.prior_deficit == pytest.approx(0.0, abs=1e-12)
    # real Bell state: the conjugation is trivial and Bob receives Alice's outcome state
    for rho, ket in zip(t.bob_states, (KET0, KET1, KET_PLUS, KET_MINUS)):
        assert np.allclose(rho.matrix, np.outer(ket, ket.conj()), atol=1e-14)


def test_derive_transmitted_names_zero_prior():
    atoms = list(bb84_povm("A").atoms)
    # zero atom: merge |-><-|/2 into the |+><+|/2 slot so the X outcome pair still sums correctly
    ma = OperatorValuedMeasure([atoms[0], atoms[1], atoms[2] + atoms[3], np.zeros((2, 2))])
    s = _scenario(bell_state(("B", "A")), ma, [ma.space.atom(i) for i in range(4)])
    with pytest.raises(ZeroProbabilityCondition, match="key event 3"):
        derive_transmitted(s)


def test_transmitted_joint_examples(gen):
    base = random_attack_scenario(gen, 2)
    t = derive_transmitted(base)
    zeroed = dataclasses.replace(t, priors=(0.0,) + t.priors[1:])
    x, y = t.eve_measure.space.atom(0), t.bob_measure.space.atom(1)
    assert transmitted_joint(zeroed, x, y, 0) == 0.0
    for i in range(4):
        assert transmitted_joint(t, t.eve_measure.space.full(), t.bob_measure.space.full(), i) == pytest.approx(t.priors[i], abs=1e-12)
    total = sum(
        transmitted_joint(t, t.eve_measure.space.atom(a), t.bob_measure.space.atom(b), i)
        for a in range(2) for b in range(4) for i in range(4)
    )
    assert total == pytest.approx(sum(t.priors), abs=1e-12)
    with pytest.raises(IndexOutOfRange):
        transmitted_joint(t, x, y, 4)


def test_transmitted_priors_may_have_deficit():
    rho = DensityOperator.from_ket(KET0)
    t = TransmittedScenario(
        (0.2, 0.2, 0.2, 0.2), (rho,) * 4, rho, UnitaryOperator.identity(4), computational_pvm(2), computational_pvm(2)
    )
    assert t.prior_deficit == pytest.approx(0.2)
    with pytest.raises(NotNormalized):
        dataclasses.replace(t, priors=(0.5, 0.5, 0.5, 0.0))


def test_equivalence_on_trivial_and_random_attacks(gen):
    assert equivalence_report(bell_bb84_scenario()).max_residual < 1e-9
    for k in range(20):
        s = random_attack_scenario(gen, (2, 4)[k % 2])
        assert equivalence_report(s).max_residual < 1e-9


def test_equivalence_detects_corrupted_prior(gen):
    s = random_attack_scenario(gen, 2)
    t = derive_transmitted(s)
    bad = dataclasses.replace(t, priors=(t.priors[0] - 0.01,) + t.priors[1:])
    assert equivalence_report(s, transmitted=bad).max_residual >= 0.001


def test_chain_rule_through_conditional_state(gen):
    s = random_attack_scenario(gen, 4)
    for z in s.alice_key_events:
        for xe in range(4):
            x = s.eve_measure.space.atom(xe)
            y = s.bob_measure.space.event([0, 2])
            assert entangled_joint(s, x, y, z) == pytest.approx(conditional_joint(s, x, y, z) * alice_marginal(s, z), abs=1e-12)


def test_report_csv_is_stable():
    rep = equivalence_report(bell_bb84_scenario())
    text = rep.to_csv()
    assert text.splitlines()[0] == "x_e,y_b,i,entangled,transmitted,diff"
    assert len(text.splitlines()) == 1 + 2 * 4 * 4
    assert text == equivalence_report(bell_bb84_scenario()).to_csv()


def test_scenario_validation():
    ma = bb84_povm("A")
    with pytest.raises(DimensionMismatch):
        _scenario(bell_state(("B", "A")), ma, [ma.space.atom(0)])
    with pytest.raises(SpaceMismatch):
        _scenario(bell_state(("B", "A")), ma, [ma.space.atom(0), ma.space.event([0, 1]), ma.space.atom(2), ma.space.atom(3)])
    with pytest.raises(DimensionMismatch):
        _scenario(DensityOperator.maximally_mixed(8), ma, [ma.space.atom(i) for i in range(4)])
    with pytest.raises(DimensionMismatch):
        _scenario(bell_state(("B", "A")), attack=random_unitary(rng(1), 6))
