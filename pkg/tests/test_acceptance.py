"""Acceptance gate: one marked group per criterion; the conftest prints a per-criterion summary line."""

import subprocess
import sys

import numpy as np
import pytest

from qcondprob import bb84, bundled, conditioning, neumark, probes
from qcondprob.cli import main
from qcondprob.fixtures import bell_bb84_scenario, random_attack_scenario, random_chain_scenario, trine_family
from qcondprob.linalg import FactorLayout, embed, kron, max_abs, partial_trace
from qcondprob.outcomes import all_events, intersect, product_event
from qcondprob.povm import OperatorValuedMeasure, computational_pvm, tensor_povm, trine_povm
from qcondprob.properties import REGISTRY, WITNESS, run_all, run_entry
from qcondprob.sampling import ginibre, random_density_matrix, random_povm_atoms, random_pvm_atoms, rng
from qcondprob.states import DensityOperator, probability_table

# -- criterion 1 --------------------------------------------------------------------

LEMMA_SUITE = [
    "ptrace-local-commutation",
    "ptrace-local-hermitian",
    "ptrace-left-factor",
    "ptrace-right-factor",
    "ptrace-full-trace-pairing",
    "ptrace-swap-commutation",
    "symmetrized-conditional",
    "triple-space-reduction",
]


@pytest.mark.criterion(1)
@pytest.mark.parametrize("entry_id", LEMMA_SUITE)
def test_lemma_suite(entry_id):
    res = run_entry(REGISTRY[entry_id], seed=2026, samples=100)
    assert res.samples >= 100
    assert res.residual < 1e-10, res.line()


@pytest.mark.criterion(1)
def test_local_commutation_on_3x2():
    gen = rng(32)
    lay = FactorLayout.of(A=3, B=2)
    worst = 0.0
    for _ in range(100):
        m = ginibre(gen, 6)
        s = embed(ginibre(gen, 2), ["B"], lay)
        worst = max(worst, max_abs(partial_trace(m @ s, lay, ["B"])[0] - partial_trace(s @ m, lay, ["B"])[0]))
    assert worst < 1e-10


@pytest.mark.criterion(1)
def test_order_witness_exceeds_floor():
    res = run_entry(REGISTRY["ptrace-order-witness"], seed=2026)
    assert res.residual > 0.01


# -- criterion 2 --------------------------------------------------------------------

def _kolmogorov_residual(rho, e):
    table = probability_table(rho, None, e)
    worst = 0.0
    for y in all_events(e.space):
        if table.of(y) <= 1e-12:
            continue
        for x in all_events(e.space):
            ratio = table.of(intersect(x, y)) / table.of(y)
            worst = max(worst, abs(conditioning.conditional_probability_pvm(rho, e, x, y) - ratio))
            cond = conditioning.condition_pvm(rho, e, y)
            worst = max(worst, abs(np.trace(cond.operator.matrix @ e(x)).real - ratio))
    return worst


@pytest.mark.criterion(2)
def test_pvm_conditioning_all_event_pairs():
    gen = rng(4)
    measures = [computational_pvm(4)] + [OperatorValuedMeasure(random_pvm_atoms(gen, 4)) for _ in range(3)]
    worst = 0.0
    for e in measures:
        for _ in range(3):
            worst = max(worst, _kolmogorov_residual(DensityOperator(random_density_matrix(gen, 4)), e))
    assert worst < 1e-9


@pytest.mark.criterion(2)
def test_full_and_reduced_conditional_states_agree():
    gen = rng(5)
    worst = 0.0
    for da, db in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        for _ in range(5):
            rho = DensityOperator(random_density_matrix(gen, da * db), FactorLayout.of(A=da, B=db))
            ea = OperatorValuedMeasure(random_pvm_atoms(gen, da))
            eb = OperatorValuedMeasure(random_pvm_atoms(gen, db))
            for y in all_events(eb.space):
                if y.is_empty:
                    continue
                c1 = conditioning.condition_rect_full(rho, eb, y, "B")
                c2 = conditioning.condition_rect_reduced(rho, eb, y, "B")
                for x in all_events(ea.space):
                    p1 = conditioning.probability_from_conditioned(c1, ea, x, "A")
                    p2 = conditioning.probability_from_conditioned(c2, ea, x)
                    worst = max(worst, abs(p1 - p2))
    assert worst < 1e-9


# -- criterion 3 --------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_lifting_on_random_povms():
    gen = rng(6)
    worst, count = 0.0, 0
    for _ in range(50):
        d, n = int(gen.integers(2, 5)), int(gen.integers(2, 6))
        m = OperatorValuedMeasure(random_povm_atoms(gen, d, n))
        dil = neumark.dilate(m)
        for _ in range(10):
            worst = max(worst, neumark.verify_lifting(DensityOperator(random_density_matrix(gen, d)), m, dil))
            count += 1
    assert count >= 500
    assert worst < 1e-9


@pytest.mark.criterion(3)
def test_trine_obstacle_is_two_ninths():
    t = trine_povm()
    _, _, res = neumark.obstacle_report(t, neumark.dilate(t), t.space.atom(0), t.space.atom(1))
    assert abs(res - 2 / 9) < 1e-9


@pytest.mark.criterion(3)
def test_family_shares_bit_identical_q():
    gen = rng(7)
    ms = trine_family()
    fam = neumark.dilate_family(ms)
    qs = [m.q_projection for m in fam.members]
    assert all(q is fam.shared_q for q in qs)
    assert all(np.array_equal(q, qs[0]) for q in qs)
    for member, m in zip(fam.members, ms):
        for _ in range(10):
            assert neumark.verify_lifting(DensityOperator(random_density_matrix(gen, 2)), m, member) < 1e-9


# -- criterion 4 --------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_tensor_povm_rectangle_and_restriction():
    gen = rng(8)
    worst = 0.0
    for _ in range(20):
        ma = OperatorValuedMeasure(random_povm_atoms(gen, 2, int(gen.integers(2, 4))), None)
        mb = OperatorValuedMeasure(random_povm_atoms(gen, 2, int(gen.integers(2, 4))), None)
        t = tensor_povm(ma, mb)
        da, db = neumark.dilate(ma), neumark.dilate(mb)
        qq = kron(da.q_projection, db.q_projection)
        for x in all_events(ma.space):
            for y in all_events(mb.space):
                rect = intersect(product_event(x, mb.space.full(), t.space), product_event(ma.space.full(), y, t.space))
                assert rect == product_event(x, y, t.space)
                target = kron(ma(x), mb(y))
                worst = max(worst, max_abs(t(rect) - target))
                ext = qq @ kron(da.extended_pvm(x), db.extended_pvm(y)) @ qq
                restricted = neumark.tensor_restriction(ext, (da.extended_dim, db.extended_dim), (2, 2))
                worst = max(worst, max_abs(restricted - target))
    assert worst < 1e-9


# -- criterion 5 --------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_probe_chain_oracle(k):
    gen = rng(100 + k)
    worst = 0.0
    for _ in range(100):
        scn = random_chain_scenario(gen, k)
        ev = [s.measure.space.event(np.flatnonzero(gen.random(2) < 0.5)) for s in scn.steps]
        joint = probes.chain_joint(scn, ev)
        worst = max(worst, abs(joint - probes.chain_joint_bruteforce(scn, ev)))
        last = scn.steps[-1].measure.space
        head = ev[:-1] + [last.full()]
        split = sum(probes.chain_joint(scn, ev[:-1] + [last.atom(j)]) for j in range(last.atoms))
        p_head = probes.chain_joint(scn, head)
        worst = max(worst, abs(split - p_head))
        if p_head > 1e-9:
            cond = probes.chain_conditional(scn, list(enumerate(ev[:-1])), (k - 1, ev[-1]))
            worst = max(worst, abs(cond * p_head - joint))
    assert worst < 1e-9


# -- criterion 6 --------------------------------------------------------------------

@pytest.mark.criterion(6)
def test_bb84_equivalence_bell_and_random_attacks():
    gen = rng(9)
    scenarios = [bell_bb84_scenario()] + [random_attack_scenario(gen, (2, 4)[i % 2]) for i in range(20)]
    assert max(bb84.equivalence_report(s).max_residual for s in scenarios) < 1e-9


@pytest.mark.criterion(6)
def test_alice_marginal_attack_invariance():
    gen = rng(10)
    ref = bell_bb84_scenario()
    ref_marg = [bb84.alice_marginal(ref, z) for z in ref.alice_key_events]
    worst = 0.0
    for i in range(20):
        s = random_attack_scenario(gen, (2, 4)[i % 2])
        for z, p in zip(s.alice_key_events, ref_marg):
            full = bb84.entangled_joint(s, s.eve_measure.space.full(), s.bob_measure.space.full(), z)
            worst = max(worst, abs(full - p))
    assert worst < 1e-12


@pytest.mark.criterion(6)
def test_bell_priors_are_one_quarter():
    t = bb84.derive_transmitted(bell_bb84_scenario())
    assert all(abs(z - 0.25) < 1e-9 for z in t.priors)


# -- criterion 7 --------------------------------------------------------------------

CLI_CASES = [
    (["validate", "trine_povm_check.json"], 0),
    (["validate", "bad_completeness.json"], 1),
    (["validate", bundled.MALFORMED], 2),
    (["validate", "bell_bb84.json"], 0),
    (["validate", "bell_conditioning.json"], 0),
    (["condition", "bell_conditioning.json"], 0),
    (["neumark", "trine_neumark.json"], 0),
    (["probe-chain", "cnot_probe_chain.json"], 0),
    (["probe-chain", "cnot_probe_chain_events.json"], 0),
    (["bb84-equiv", "bell_bb84.json"], 0),
    (["bb84-equiv", "trine_neumark.json"], 1),
    (["condition", bundled.MALFORMED], 2),
]


@pytest.mark.criterion(7)
@pytest.mark.parametrize("args, code", CLI_CASES)
def test_cli_exit_codes(args, code):
    cmd, name = args
    assert main([cmd, str(bundled.path(name))]) == code


@pytest.mark.criterion(7)
def test_cli_missing_file_exit_code(tmp_path):
    assert main(["bb84-equiv", str(tmp_path / "missing.json")]) == 2


@pytest.mark.criterion(7)
def test_cli_csv_byte_identical_across_processes(tmp_path):
    outs = []
    for tag in ("first", "second"):
        out = tmp_path / f"{tag}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "qcondprob.cli", "bb84-equiv", str(bundled.path("bell_bb84.json")), "--seed", "42", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


# -- criterion 8 --------------------------------------------------------------------

REQUIRED_IDS = {
    # measure-theoretic and PVM conditioning
    "conditional-probability-ratio",
    "trace-rule-measure",
    "decision-joint-measure",
    "pvm-joint-conditional",
    "pvm-conditional-state",
    "pvm-reverse-conditional-state",
    "pvm-product-law",
    "tensor-pvm-rectangle",
    "rect-conditional-probability",
    "full-space-conditional-state",
    "reduced-conditional-state",
    "reduced-sandwich-equals-one-sided",
    # dilation
    "compression-is-povm",
    "lift-fixed-by-projection",
    "compression-block-form",
    "lift-multiplicative",
    "lift-preserves-trace",
    "lifted-trace-pairing",
    "lifted-trace-rule",
    "lifting-diagram-commutes",
    "povm-product-obstacle",
    "tensor-compression-factorizes",
    "tensor-povm-diagram",
    "povm-reduced-conditional-state",
    "family-shared-projection",
    "family-tensor-diagram",
    # probe chains
    "probe-scaled-conditional",
    "two-probe-chain",
    "three-probe-chain",
    # BB84
    "transmitted-joint",
    "entangled-joint",
    "alice-marginal-attack-free",
    "entangled-conditional-joint",
    "conditional-bob-state",
    "entangled-transmitted-equivalence",
    # partial-trace algebra
    "cyclic-trace",
    "partial-trace-composition",
    "ptrace-local-commutation",
    "ptrace-local-hermitian",
    "ptrace-left-factor",
    "ptrace-right-factor",
    "ptrace-full-trace-pairing",
    "ptrace-swap-commutation",
    "symmetrized-conditional",
    "ptrace-order-witness",
    "triple-space-reduction",
}


@pytest.mark.criterion(8)
def test_registry_covers_every_identity():
    missing = REQUIRED_IDS - set(REGISTRY)
    assert not missing, f"registry lacks {sorted(missing)}"


@pytest.mark.criterion(8)
def test_run_all_reports_and_passes_every_entry():
    results = run_all(seed=0)
    reported = {r.id for r in results}
    assert REQUIRED_IDS <= reported
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)
    for r in results:
        if REGISTRY[r.id].status == WITNESS:
            assert r.residual > r.tolerance
