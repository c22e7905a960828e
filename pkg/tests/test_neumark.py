from types import SimpleNamespace

import numpy as np
import pytest

from qcondprob.errors import DimensionMismatch, HeterogeneousFamily, InvalidPovm
from qcondprob.fixtures import trine_family
from qcondprob.linalg import kron, max_abs, op_norm
from qcondprob.neumark import (
    dilate,
    dilate_family,
    lift_operator,
    lift_state,
    obstacle_report,
    projection_onto_base,
    restriction_residual,
    tensor_restriction,
    verify_lifting,
)
from qcondprob.outcomes import all_events
from qcondprob.povm import OperatorValuedMeasure, bb84_povm, computational_pvm, trine_povm, trivial_povm
from qcondprob.sampling import random_density_matrix, random_povm_atoms
from qcondprob.states import DensityOperator


def _states(gen, d, n):
    return [DensityOperator(random_density_matrix(gen, d)) for _ in range(n)]


def test_q_projection_invariants():
    q = projection_onto_base(2, 6)
    assert np.array_equal(q, q.conj().T)
    assert np.array_equal(q @ q, q)
    assert np.trace(q) == 2
    with pytest.raises(ValueError):
        q[0, 0] = 0


def test_dilate_computational_pvm():
    z = computational_pvm(2)
    dil = dilate(z)
    assert dil.extended_dim == 4
    assert dil.extended_pvm.is_projective
    assert restriction_residual(z, dil) < 1e-12


def test_dilate_trine(gen):
    t = trine_povm()
    dil = dilate(t)
    assert dil.extended_dim == 6
    assert restriction_residual(t, dil) < 1e-9
    assert max(verify_lifting(rho, t, dil) for rho in _states(gen, 2, 50)) < 1e-9


def test_dilate_single_atom_is_trivial():
    m = trivial_povm(3)
    dil = dilate(m)
    assert dil.extended_dim == 3
    assert np.allclose(dil.extended_pvm.atoms[0], np.eye(3), atol=1e-14)


def test_dilate_requires_validated_measure():
    with pytest.raises(InvalidPovm):
        dilate([np.eye(2)])


def test_lift_state_examples(gen):
    dil = dilate(trine_povm())
    lifted = lift_state(DensityOperator.maximally_mixed(2), dil)
    assert np.array_equal(lifted.matrix, np.diag([0.5, 0.5, 0, 0, 0, 0]).astype(complex))
    rho = DensityOperator(random_density_matrix(gen, 2))
    lr = lift_state(rho, dil).matrix
    assert abs(np.trace(lr) - 1) < 1e-14
    q = dil.q_projection
    assert np.array_equal(q @ lr @ q, lr)
    with pytest.raises(DimensionMismatch):
        lift_state(DensityOperator.maximally_mixed(3), dil)


def test_verify_lifting_trivial_for_projective(gen):
    z = computational_pvm(3)
    dil = dilate(z)
    assert max(verify_lifting(rho, z, dil) for rho in _states(gen, 3, 10)) < 1e-12


def test_verify_lifting_detects_corrupted_dilation(gen):
    t = trine_povm()
    dil = dilate(t)
    rho = DensityOperator(random_density_matrix(gen, 2))
    probs = [np.trace(rho.matrix @ a).real for a in t.atoms]
    j = int(np.argmax(probs))
    atoms = list(dil.extended_pvm.atoms)
    atoms[j] = np.zeros_like(atoms[j])
    broken = SimpleNamespace(extended_pvm=SimpleNamespace(atoms=atoms, dim=dil.extended_dim), base_dim=2)
    assert verify_lifting(rho, t, broken) == pytest.approx(max(probs), abs=1e-12)


def test_family_of_one_matches_dilate():
    t = trine_povm()
    fam = dilate_family([t])
    single = dilate(t)
    assert np.allclose(fam[0].rotation, np.eye(6), atol=1e-14)
    for a, b in zip(fam[0].extended_pvm.atoms, single.extended_pvm.atoms):
        assert np.allclose(a, b, atol=1e-14)


def test_rotated_trine_family_shares_q(gen):
    ms = trine_family()
    fam = dilate_family(ms)
    assert len(fam) == 3
    for member, m in zip(fam.members, ms):
        assert member.q_projection is fam.shared_q
        assert np.array_equal(member.q_projection, projection_onto_base(2, 6))
        assert restriction_residual(m, member) < 1e-9
        assert max(verify_lifting(rho, m, member) for rho in _states(gen, 2, 20)) < 1e-9
        u = member.rotation
        for e_ref, e_beta in zip(fam.reference_pvm.atoms, member.extended_pvm.atoms):
            assert max_abs(e_beta - u.conj().T @ e_ref @ u) < 1e-12


def test_family_transport_reproduces_probabilities(gen):
    ms = trine_family()
    fam = dilate_family(ms)
    rho = DensityOperator(random_density_matrix(gen, 2))
    for member, m in zip(fam.members, ms):
        moved = member.transported_state(rho)
        for a, e_ref in zip(m.atoms, fam.reference_pvm.atoms):
            assert np.trace(moved @ e_ref).real == pytest.approx(np.trace(rho.matrix @ a).real, abs=1e-12)


def test_heterogeneous_family_rejected():
    with pytest.raises(HeterogeneousFamily):
        dilate_family([trine_povm(), bb84_povm()])
    with pytest.raises(HeterogeneousFamily):
        dilate_family([])


def test_obstacle_examples():
    z = computational_pvm(2)
    _, _, res = obstacle_report(z, dilate(z), z.space.atom(0), z.space.atom(1))
    assert res < 1e-13
    t = trine_povm()
    dil = dilate(t)
    lhs, rhs, res = obstacle_report(t, dil, t.space.atom(0), t.space.atom(1))
    assert max_abs(lhs) < 1e-13
    assert op_norm(rhs) == pytest.approx(2 / 9, abs=1e-13)
    assert res == pytest.approx(2 / 9, abs=1e-9)
    for x in all_events(t.space):
        assert obstacle_report(t, dil, x, t.space.full())[2] < 1e-12


def test_tensor_restriction_diagram(gen):
    for _ in range(10):
        ma = OperatorValuedMeasure(random_povm_atoms(gen, 2, 3))
        mb = OperatorValuedMeasure(random_povm_atoms(gen, 2, 2))
        da, db = dilate(ma), dilate(mb)
        qq = kron(da.q_projection, db.q_projection)
        for x in all_events(ma.space):
            for y in all_events(mb.space):
                ext = qq @ kron(da.extended_pvm(x), db.extended_pvm(y)) @ qq
                got = tensor_restriction(ext, (6, 4), (2, 2))
                assert max_abs(got - kron(ma(x), mb(y))) < 1e-9


def test_tensor_restriction_shape_check():
    with pytest.raises(DimensionMismatch):
        tensor_restriction(np.eye(5), (2, 3), (1, 1))


def test_lift_operator_rejects_oversized():
    with pytest.raises(DimensionMismatch):
        lift_operator(np.eye(4), 3)
