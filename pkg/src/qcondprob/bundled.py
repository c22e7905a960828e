"""Scenario files shipped in ``qcondprob/data``.

:func:`render_all` regenerates them from the fixtures module, so the files on
disk can be checked for drift (``python3 -m qcondprob.bundled`` rewrites them).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from . import fixtures
from .povm import computational_pvm, trine_povm
from .serialize import dump_scenario, encode_density, encode_event, encode_matrix, encode_povm
from .states import DensityOperator

__all__ = ["FILES", "MALFORMED", "path", "render_all", "write_all"]

MALFORMED = "malformed.json"


def _trine_check() -> str:
    return dump_scenario("povm_check", {"povms": [encode_povm(trine_povm())]})


def _bad_completeness() -> str:
    eye = np.eye(2, dtype=complex)
    return dump_scenario(
        "povm_check",
        {"povms": [{"space": {"label": "Ω"}, "dim": 2, "atoms": [encode_matrix(eye), encode_matrix(eye)]}]},
    )


def _bell_conditioning() -> str:
    return dump_scenario(
        "conditioning",
        {
            "state": encode_density(fixtures.bell_state()),
            "measure_a": encode_povm(computational_pvm(2, "A")),
            "measure_b": encode_povm(computational_pvm(2, "B")),
            "condition": [0],
        },
    )


def _trine_neumark() -> str:
    t = trine_povm()
    return dump_scenario(
        "neumark",
        {
            "povm": encode_povm(t),
            "states": [
                encode_density(DensityOperator.from_ket(fixtures.KET0)),
                encode_density(DensityOperator.maximally_mixed(2)),
            ],
            "random_states": 10,
            "obstacle": {"x": encode_event(t.space.atom(0)), "y": encode_event(t.space.atom(1))},
        },
    )


def _chain_payload(events=None) -> dict:
    scn = fixtures.cnot_chain_scenario()
    payload = {
        "particle": encode_density(scn.particle),
        "steps": [
            {"probe": encode_density(s.probe_state), "interaction": encode_matrix(s.interaction.matrix), "measure": encode_povm(s.measure)}
            for s in scn.steps
        ],
    }
    if events is not None:
        payload["events"] = events
    return payload


def _bb84_bell() -> str:
    s = fixtures.bell_bb84_scenario()
    return dump_scenario(
        "bb84",
        {
            "eve_probe": encode_density(s.eve_probe),
            "alice_state": encode_density(s.alice_state),
            "attack": encode_matrix(s.attack.matrix),
            "eve_measure": encode_povm(s.eve_measure),
            "bob_measure": encode_povm(s.bob_measure),
            "alice_measure": encode_povm(s.alice_measure),
            "key_events": [encode_event(z) for z in s.alice_key_events],
            "random_attacks": {"count": 20, "eve_dims": [2, 4]},
        },
    )


FILES = {
    "trine_povm_check.json": _trine_check,
    "bad_completeness.json": _bad_completeness,
    "bell_conditioning.json": _bell_conditioning,
    "trine_neumark.json": _trine_neumark,
    "cnot_probe_chain.json": lambda: dump_scenario("probe_chain", _chain_payload()),
    "cnot_probe_chain_events.json": lambda: dump_scenario("probe_chain", _chain_payload([[1]])),
    "bell_bb84.json": _bb84_bell,
    MALFORMED: lambda: '{"version": "1", "kind": "povm_check", "payload": \n',
}


def path(name: str) -> Path:
    """Filesystem path of a bundled scenario file."""
    if name not in FILES:
        raise KeyError(f"no bundled scenario {name!r}; known: {sorted(FILES)}")
    return Path(str(resources.files("qcondprob").joinpath("data", name)))


def render_all() -> dict[str, str]:
    return {name: build() for name, build in FILES.items()}


def write_all(directory: Path | None = None) -> list[Path]:
    directory = Path(str(resources.files("qcondprob").joinpath("data"))) if directory is None else Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, text in render_all().items():
        target = directory / name
        target.write_text(text, encoding="utf-8")
        out.append(target)
    return out


if __name__ == "__main__":
    for p in write_all():
        print(p)
