import pytest

from qcondprob.properties import REGISTRY, VERIFIED, WITNESS, order_witness, run_entry


def test_every_entry_is_well_formed():
    for e in REGISTRY.values():
        assert e.status in (VERIFIED, WITNESS)
        assert e.statement and e.generator
        assert e.tolerance > 0


def test_witness_entries():
    witnesses = {e.id for e in REGISTRY.values() if e.status == WITNESS}
    assert witnesses == {"povm-product-obstacle", "ptrace-order-witness"}


def test_order_witness_values():
    residual, parts = order_witness()
    # Tr_B[(R⊗S)(R'⊗S')] = RR' Tr(SS') = |0><0|, reversed order gives R'R Tr(S'S) = |1><1|
    assert residual == 1.0
    assert parts["lhs"].tolist() == [[1, 0], [0, 0]]
    assert parts["rhs"].tolist() == [[0, 0], [0, 1]]


def test_ptrace_local_commutation_on_3x2_dims():
    # the entry draws dims from {2,3}; 100 samples cover the 3x2 case many times over
    res = run_entry(REGISTRY["ptrace-local-commutation"], seed=5, samples=100)
    assert res.passed and res.residual < 1e-10


def test_obstacle_entry_above_floor():
    res = run_entry(REGISTRY["povm-product-obstacle"])
    assert res.residual >= 0.1 and res.passed


def test_entry_seeding_is_deterministic():
    e = REGISTRY["cyclic-trace"]
    assert run_entry(e, seed=9).residual == run_entry(e, seed=9).residual


def test_failure_is_reported_not_raised():
    e = REGISTRY["cyclic-trace"]
    strict = type(e)(e.id, e.statement, e.generator, 0.0, e.status, e.check, e.samples)
    assert not run_entry(strict).passed


@pytest.mark.parametrize("seed", [1, 2])
def test_run_all_other_seeds(seed):
    from qcondprob.properties import run_all

    assert all(r.passed for r in run_all(seed))
