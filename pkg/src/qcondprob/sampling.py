"""Seeded random matrices, states, unitaries and POVMs for tests and sweeps.

All samplers take a ``numpy.random.Generator``; callers build one with
:func:`rng` (PCG64, 64-bit seed) so sweeps are reproducible from a seed.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger

__all__ = [
    "rng",
    "ginibre",
    "random_psd",
    "random_density_matrix",
    "random_ket",
    "random_unitary",
    "random_isometry",
    "random_povm_atoms",
    "random_pvm_atoms",
    "random_hermitian",
]


def rng(seed: int | None = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def ginibre(gen: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))) / np.sqrt(2)


def random_hermitian(gen: np.random.Generator, d: int) -> np.ndarray:
    g = ginibre(gen, d)
    return 0.5 * (g + dagger(g))


def random_psd(gen: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = ginibre(gen, d, d if rank is None else rank)
    return g @ dagger(g)


def random_density_matrix(gen: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    p = random_psd(gen, d, rank)
    p = p / np.trace(p).real
    return 0.5 * (p + dagger(p))


def random_ket(gen: np.random.Generator, d: int) -> np.ndarray:
    v = ginibre(gen, d, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_unitary(gen: np.random.Generator, d: int) -> np.ndarray:
    """Haar unitary: QR of a Ginibre matrix with the phases of R's diagonal removed."""
    q, r = np.linalg.qr(ginibre(gen, d))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_isometry(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, _ = np.linalg.qr(ginibre(gen, rows, cols))
    return q


def _inv_sqrt(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (p + dagger(p)))
    return (v / np.sqrt(w)) @ dagger(v)


def random_povm_atoms(gen: np.random.Generator, d: int, n: int, rank: int | None = None) -> list[np.ndarray]:
    """``n`` PSD atoms summing to the identity: ``S^{-1/2} G_j S^{-1/2}``."""
    gs = [random_psd(gen, d, rank) for _ in range(n)]
    s_inv = _inv_sqrt(sum(gs))
    atoms = []
    for g in gs:
        a = s_inv @ g @ s_inv
        atoms.append(0.5 * (a + dagger(a)))
    return atoms


def random_pvm_atoms(gen: np.random.Generator, d: int, n: int | None = None) -> list[np.ndarray]:
    """Rank-one projections onto the columns of a random unitary.

    With ``n < d`` the remaining basis vectors are merged into the last atom.
    """
    n = d if n is None else n
    if not 1 <= n <= d:
        raise ValueError("need 1 <= n <= d")
    u = random_unitary(gen, d)
    cols = [u[:, [k]] for k in range(d)]
    atoms = [c @ dagger(c) for c in cols[: n - 1]]
    tail = np.hstack(cols[n - 1:])
    atoms.append(tail @ dagger(tail))
    return atoms
