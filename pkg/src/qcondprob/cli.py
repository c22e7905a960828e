"""Command-line runner for scenario files.

Exit codes: 0 when every check passes, 1 for validation or analytic
failures (including a scenario of the wrong kind), 2 for unreadable or
malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bb84, conditioning, neumark, probes, properties
from .errors import KindMismatch, ParseError, QCondError, ValidationFailure
from .linalg import DEFAULT_TOL, FactorLayout, Tolerance
from .outcomes import all_events
from .povm import computational_pvm, validate
from .sampling import random_density_matrix, random_unitary, rng
from .serialize import (
    Scenario,
    decode_density,
    decode_event,
    decode_matrix,
    decode_povm,
    decode_povm_atoms,
    load_scenario,
)
from .states import DensityOperator, UnitaryOperator

__all__ = ["RunReport", "Table", "Check", "main", "build_parser", "cmd_validate", "cmd_run", "DEFAULT_RESIDUAL_TOL"]

DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_SEED = 0

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

SUBCOMMAND_KIND = {
    "condition": "conditioning",
    "neumark": "neumark",
    "probe-chain": "probe_chain",
    "bb84-equiv": "bb84",
}


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)


@dataclass
class Check:
    """A residual compared against a bound; ``informative`` checks never fail."""

    name: str
    value: float
    bound: float
    informative: bool = False

    @property
    def passed(self) -> bool:
        return self.informative or self.value < self.bound


@dataclass
class RunReport:
    kind: str
    digest: str
    tolerances: dict[str, float]
    tables: list[Table] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and all(c.passed for c in self.checks)

    def _records(self):
        yield "meta", "kind", "value", self.kind
        yield "meta", "input_sha256", "value", self.digest
        yield "meta", "pass", "value", str(self.passed).lower()
        for k, v in self.tolerances.items():
            yield "tolerance", k, "value", repr(v)
        for i, msg in enumerate(self.violations):
            yield "violation", str(i), "message", msg
        for c in self.checks:
            yield "check", c.name, "value", repr(c.value)
            yield "check", c.name, "bound", "info" if c.informative else repr(c.bound)
            yield "check", c.name, "pass", str(c.passed).lower()
        for t in self.tables:
            for row in t.rows:
                key = str(row[0])
                for col, val in zip(t.columns[1:], row[1:]):
                    yield t.name, key, col, repr(val) if isinstance(val, float) else str(val)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "key", "field", "value"])
        w.writerows(self._records())
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "kind": self.kind,
            "input_sha256": self.digest,
            "pass": self.passed,
            "tolerances": self.tolerances,
            "violations": self.violations,
            "checks": [
                {"name": c.name, "value": c.value, "bound": None if c.informative else c.bound, "pass": c.passed}
                for c in self.checks
            ],
            "tables": [{"name": t.name, "columns": t.columns, "rows": t.rows} for t in self.tables],
        }
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        lines = [f"{self.kind}: {'PASS' if self.passed else 'FAIL'}  (input sha256 {self.digest[:16]}…)"]
        lines.append("tolerances: " + ", ".join(f"{k}={v:g}" for k, v in self.tolerances.items()))
        for msg in self.violations:
            lines.append(f"  violation: {msg}")
        for c in self.checks:
            bound = "reported" if c.informative else f"< {c.bound:g}"
            lines.append(f"  {c.name:<32} {c.value:.6e}  {bound}  {'ok' if c.passed else 'FAIL'}")
        for t in self.tables:
            lines.append(f"  [{t.name}]")
            lines.append("    " + "  ".join(f"{c:>14}" for c in t.columns))
            for row in t.rows:
                cells = [f"{v:>14.10g}" if isinstance(v, float) else f"{v!s:>14}" for v in row]
                lines.append("    " + "  ".join(cells))
        return "\n".join(lines)


# -- scenario builders ------------------------------------------------------------

def _event_label(x) -> str:
    return "{" + ",".join(str(i) for i in x.members) + "}"


def _build_conditioning(p: dict, tol: Tolerance):
    rho = decode_density(p["state"], tol)
    if len(rho.layout.factors) != 2:
        raise ValidationFailure(f"conditioning state needs a two-factor layout, got {rho.layout}")
    ma, mb = decode_povm(p["measure_a"], tol), decode_povm(p["measure_b"], tol)
    fa, fb = rho.layout.labels
    for m, f in ((ma, fa), (mb, fb)):
        if rho.layout.dim_of(f) != m.dim:
            raise ValidationFailure(f"measure dim {m.dim} does not fit factor {f!r} of dim {rho.layout.dim_of(f)}")
    return rho, ma, mb, decode_event(p["condition"], mb.space)


def _build_neumark(p: dict, tol: Tolerance):
    m = decode_povm(p["povm"], tol)
    states = [decode_density(s, tol) for s in p.get("states", [])]
    obstacle = None
    if "obstacle" in p:
        obstacle = decode_event(p["obstacle"]["x"], m.space), decode_event(p["obstacle"]["y"], m.space)
    return m, states, obstacle


def _build_chain(p: dict, tol: Tolerance):
    particle = decode_density(p["particle"], tol)
    steps = [
        probes.ProbeStep(decode_density(s["probe"], tol), UnitaryOperator(decode_matrix(s["interaction"]), tol=tol), decode_povm(s["measure"], tol))
        for s in p["steps"]
    ]
    scn = probes.ChainScenario(particle, steps)
    if "events" in p:
        if len(p["events"]) != len(steps):
            raise ValidationFailure(f"{len(p['events'])} events for {len(steps)} probes")
        events = [decode_event(e, s.measure.space) for e, s in zip(p["events"], steps)]
    else:
        events = scn.full_events()
    return scn, events


def _build_bb84(p: dict, tol: Tolerance) -> bb84.EntangledScenario:
    eve = decode_density(p["eve_probe"], tol)
    alice = decode_density(p["alice_state"], tol)
    ma = decode_povm(p["alice_measure"], tol)
    mb = decode_povm(p["bob_measure"], tol)
    me = decode_povm(p["eve_measure"], tol)
    alice = DensityOperator(alice.matrix, FactorLayout.of(B=mb.dim, A=ma.dim) if alice.dim == mb.dim * ma.dim else None, tol)
    return bb84.EntangledScenario(
        eve_probe=DensityOperator(eve.matrix, FactorLayout.single(eve.dim, "E"), tol),
        alice_state=alice,
        attack=UnitaryOperator(decode_matrix(p["attack"]), tol=tol),
        eve_measure=me,
        bob_measure=mb,
        alice_measure=ma,
        alice_key_events=tuple(decode_event(z, ma.space) for z in p["key_events"]),
    )


BUILDERS: dict[str, Callable] = {
    "conditioning": _build_conditioning,
    "neumark": _build_neumark,
    "probe_chain": _build_chain,
    "bb84": _build_bb84,
}


# -- analyses -------------------------------------------------------------------------

def _run_conditioning(p, tol, bound, seed, report: RunReport):
    rho, ma, mb, y = _build_conditioning(p, tol)
    fa, fb = rho.layout.labels
    full = conditioning.condition_rect_full(rho, mb, y, fb, tol)
    reduced = conditioning.condition_rect_reduced(rho, mb, y, fb, tol)
    table = Table("conditional", ["event_a", "ratio", "full_space", "reduced"])
    worst = 0.0
    for x in all_events(ma.space):
        ratio = conditioning.conditional_probability_rect(rho, ma, x, mb, y, fa, fb, tol)
        p1 = conditioning.probability_from_conditioned(full, ma, x, fa, tol)
        p2 = conditioning.probability_from_conditioned(reduced, ma, x, None, tol)
        worst = max(worst, abs(p1 - ratio), abs(p2 - ratio))
        table.rows.append([_event_label(x), ratio, p1, p2])
    report.tables.append(table)
    report.checks.append(Check("normalizer", full.normalizer, 0.0, informative=True))
    report.checks.append(Check("conditional_residual", worst, bound))


def _run_neumark(p, tol, bound, seed, report: RunReport):
    m, states, obstacle = _build_neumark(p, tol)
    dil = neumark.dilate(m, tol)
    gen = rng(seed)
    states = states + [DensityOperator(random_density_matrix(gen, m.dim), tol=tol) for _ in range(p.get("random_states", 0))]
    lifting = max((neumark.verify_lifting(rho, m, dil, tol) for rho in states), default=0.0)
    report.checks.append(Check("restriction_residual", neumark.restriction_residual(m, dil), bound))
    report.checks.append(Check("lifting_residual", lifting, bound))
    if obstacle is not None:
        _, _, res = neumark.obstacle_report(m, dil, *obstacle)
        report.checks.append(Check("obstacle_residual", res, 0.0, informative=True))
    report.tables.append(Table("dilation", ["quantity", "value"], [["base_dim", dil.base_dim], ["extended_dim", dil.extended_dim], ["states_checked", len(states)]]))


def _run_chain(p, tol, bound, seed, report: RunReport):
    scn, events = _build_chain(p, tol)
    joint = probes.chain_joint(scn, events, tol)
    brute = probes.chain_joint_bruteforce(scn, events, tol)
    report.tables.append(Table("joint", ["events", "fold", "full_space"], [[" ".join(_event_label(x) for x in events), joint, brute]]))
    report.checks.append(Check("fold_vs_full_space", abs(joint - brute), bound))


def _run_bb84(p, tol, bound, seed, report: RunReport):
    base = _build_bb84(p, tol)
    scenarios = [("given", base)]
    sweep = p.get("random_attacks")
    if sweep:
        gen = rng(seed)
        for k in range(sweep["count"]):
            de = int(sweep["eve_dims"][k % len(sweep["eve_dims"])])
            d_b = base.bob_measure.dim
            scenarios.append((
                f"random_{k}_dE{de}",
                bb84.EntangledScenario(
                    eve_probe=DensityOperator(random_density_matrix(gen, de), FactorLayout.single(de, "E"), tol),
                    alice_state=base.alice_state,
                    attack=UnitaryOperator(random_unitary(gen, de * d_b), tol=tol),
                    eve_measure=computational_pvm(de, base.eve_measure.space.label),
                    bob_measure=base.bob_measure,
                    alice_measure=base.alice_measure,
                    alice_key_events=base.alice_key_events,
                ),
            ))
    summary = Table("equivalence", ["scenario", "max_residual", "prior_deficit"])
    marginal = Table("alice_marginal", ["key_event", "zeta"])
    base_zeta = [bb84.alice_marginal(base, z, tol) for z in base.alice_key_events]
    for i, z in enumerate(base_zeta):
        marginal.rows.append([str(i), z])
    worst = drift = 0.0
    for name, s in scenarios:
        rep = bb84.equivalence_report(s, tol)
        worst = max(worst, rep.max_residual)
        summary.rows.append([name, rep.max_residual, rep.prior_deficit])
        for i, z in enumerate(s.alice_key_events):
            full = bb84.entangled_joint(s, s.eve_measure.space.full(), s.bob_measure.space.full(), z, tol)
            drift = max(drift, abs(full - base_zeta[i]))
        if name == "given":
            joint = Table("joint_given", ["x_e/y_b/i", "entangled", "transmitted", "diff"])
            joint.rows = [[f"{x}/{y}/{i}", ent, tr, diff] for x, y, i, ent, tr, diff in rep.rows]
    report.tables.extend([marginal, summary, joint])
    report.checks.append(Check("equivalence_residual", worst, bound))
    report.checks.append(Check("alice_marginal_drift", drift, min(bound, 1e-12)))


ANALYSES = {
    "conditioning": _run_conditioning,
    "neumark": _run_neumark,
    "probe_chain": _run_chain,
    "bb84": _run_bb84,
}


def _tolerances(tol: Tolerance, bound: float, seed: int) -> dict[str, float]:
    return {"eq_abs": tol.eq_abs, "eq_rel": tol.eq_rel, "psd_floor": tol.psd_floor, "residual": bound, "seed": seed}


def _validate_objects(scn: Scenario, tol: Tolerance) -> list[str]:
    out = []
    if scn.kind == "povm_check":
        require = bool(scn.payload.get("require_projective", False))
        for k, obj in enumerate(scn.payload["povms"]):
            space, atoms = decode_povm_atoms(obj)
            rep = validate(atoms, tol, require_projective=require)
            out.extend(f"povm {k} ({space.label}): {v.axiom} residual {v.residual:.3e}{' ' + v.detail if v.detail else ''}" for v in rep.violations)
        return out
    try:
        BUILDERS[scn.kind](scn.payload, tol)
    except ParseError:
        raise
    except QCondError as exc:
        report = getattr(exc, "report", None)
        if report is not None and report.violations:
            out.extend(f"{v.axiom} residual {v.residual:.3e}{' ' + v.detail if v.detail else ''}" for v in report.violations)
        else:
            out.append(f"{type(exc).__name__}: {exc}")
    return out


def cmd_validate(
    path,
    tol: Tolerance = DEFAULT_TOL,
    bound: float = DEFAULT_RESIDUAL_TOL,
    seed: int = DEFAULT_SEED,
    strict: bool = False,
) -> RunReport:
    """Schema and invariant validation of every object in the file.

    Raises :class:`ParseError` for unreadable or malformed files. Invariant
    failures are collected in ``violations``; with ``strict`` they raise
    :class:`ValidationFailure` instead.
    """
    scn = load_scenario(path)
    report = RunReport(scn.kind, scn.digest, _tolerances(tol, bound, seed))
    report.violations.extend(_validate_objects(scn, tol))
    if strict and report.violations:
        raise ValidationFailure("; ".join(report.violations))
    return report


def cmd_run(path, subcommand: str, tol: Tolerance = DEFAULT_TOL, bound: float = DEFAULT_RESIDUAL_TOL, seed: int = DEFAULT_SEED) -> RunReport:
    """Run one analysis. Raises :class:`KindMismatch` if the file is of another kind."""
    scn = load_scenario(path)
    want = SUBCOMMAND_KIND[subcommand]
    if scn.kind != want:
        raise KindMismatch(f"{subcommand} needs a {want!r} scenario, file is {scn.kind!r}")
    report = RunReport(scn.kind, scn.digest, _tolerances(tol, bound, seed))
    ANALYSES[want](scn.payload, tol, bound, seed, report)
    return report


def cmd_properties(seed: int = DEFAULT_SEED, bound: float | None = None) -> RunReport:
    results = properties.run_all(seed)
    report = RunReport("properties", "", {"seed": seed})
    table = Table("properties", ["id", "status", "residual", "tolerance", "samples", "pass"])
    for r in results:
        table.rows.append([r.id, r.status, r.residual, r.tolerance, r.samples, str(r.passed).lower()])
        if not r.passed:
            report.violations.append(f"{r.id}: residual {r.residual:.3e} vs {r.tolerance:g} ({r.status})")
    report.tables.append(table)
    return report


# -- entry point ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write the machine-readable report here")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="format of --out (default: csv)")
    common.add_argument("--tol", type=float, help=f"residual bound and validation tolerance (default residual {DEFAULT_RESIDUAL_TOL:g})")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for the PCG64 generator used by random sweeps")

    parser = argparse.ArgumentParser(prog="qcondprob", description="Quantum conditional probability scenario runner.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check schema and physical invariants").add_argument("path")
    for name, kind in SUBCOMMAND_KIND.items():
        sub.add_parser(name, parents=[common], help=f"run a {kind} scenario").add_argument("path")
    sub.add_parser("properties", parents=[common], help="run the property registry")
    return parser


def _tolerance_from(args) -> tuple[Tolerance, float]:
    if args.tol is None:
        return DEFAULT_TOL, DEFAULT_RESIDUAL_TOL
    if not np.isfinite(args.tol) or args.tol <= 0:
        raise ParseError(f"--tol must be a positive number, got {args.tol!r}")
    return Tolerance(eq_abs=args.tol, eq_rel=DEFAULT_TOL.eq_rel, psd_floor=-args.tol), args.tol


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol, bound = _tolerance_from(args)
        if args.command == "validate":
            report = cmd_validate(args.path, tol, bound, args.seed)
        elif args.command == "properties":
            report = cmd_properties(args.seed)
        else:
            report = cmd_run(args.path, args.command, tol, bound, args.seed)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QCondError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(report.render())
    if args.out is not None:
        text = report.to_json() if args.format == "json" else report.to_csv()
        try:
            args.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_INPUT
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
