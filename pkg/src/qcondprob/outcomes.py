"""Finite outcome spaces and their events.

Every measure space here is a finite index set ``{0, ..., n-1}``. A product
space orders its atoms row-major: atom ``(i, j)`` has index ``i * n_B + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _cartesian
from typing import Iterable, Iterator

from .errors import IndexOutOfRange, SpaceMismatch

__all__ = ["OutcomeSpace", "Event", "intersect", "union", "complement", "product_event", "all_events"]


@dataclass(frozen=True)
class OutcomeSpace:
    label: str
    atoms: int
    atom_names: tuple[str, ...] | None = None
    factors: tuple["OutcomeSpace", ...] = ()

    def __post_init__(self):
        if int(self.atoms) < 1:
            raise ValueError("an outcome space needs at least one atom")
        object.__setattr__(self, "atoms", int(self.atoms))
        if self.atom_names is not None:
            names = tuple(str(n) for n in self.atom_names)
            if len(names) != self.atoms:
                raise ValueError(f"{len(names)} names for {self.atoms} atoms")
            if len(set(names)) != len(names):
                raise ValueError("atom names must be unique")
            object.__setattr__(self, "atom_names", names)

    @classmethod
    def product(cls, a: "OutcomeSpace", b: "OutcomeSpace") -> "OutcomeSpace":
        names = None
        if a.atom_names is not None and b.atom_names is not None:
            names = tuple(f"{x},{y}" for x, y in _cartesian(a.atom_names, b.atom_names))
        return cls(f"{a.label}x{b.label}", a.atoms * b.atoms, names, (a, b))

    def full(self) -> "Event":
        return Event(self, range(self.atoms))

    def empty(self) -> "Event":
        return Event(self, ())

    def event(self, members: Iterable[int]) -> "Event":
        return Event(self, members)

    def atom(self, j: int) -> "Event":
        return Event(self, (j,))

    def pair_index(self, i: int, j: int) -> int:
        if len(self.factors) != 2:
            raise SpaceMismatch(f"{self.label} is not a product space")
        a, b = self.factors
        if not (0 <= i < a.atoms and 0 <= j < b.atoms):
            raise IndexOutOfRange(f"atom ({i}, {j}) outside {a.atoms}x{b.atoms}")
        return i * b.atoms + j


@dataclass(frozen=True)
class Event:
    """A subset of an outcome space, stored as a sorted tuple of atom indices."""

    space: OutcomeSpace
    members: tuple[int, ...]

    def __init__(self, space: OutcomeSpace, members: Iterable[int]):
        ms = tuple(sorted({int(j) for j in members}))
        if ms and (ms[0] < 0 or ms[-1] >= space.atoms):
            raise IndexOutOfRange(f"event {list(ms)} outside space {space.label!r} of {space.atoms} atoms")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "members", ms)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, j) -> bool:
        return j in self.members

    @property
    def is_empty(self) -> bool:
        return not self.members

    @property
    def is_full(self) -> bool:
        return len(self.members) == self.space.atoms

    def __and__(self, other: "Event") -> "Event":
        return intersect(self, other)

    def __or__(self, other: "Event") -> "Event":
        return union(self, other)

    def __invert__(self) -> "Event":
        return complement(self)

    def __repr__(self) -> str:
        return f"Event({self.space.label}, {list(self.members)})"


def _same_space(x: Event, y: Event) -> None:
    if x.space != y.space:
        raise SpaceMismatch(f"events live on different spaces: {x.space.label!r} vs {y.space.label!r}")


def intersect(x: Event, y: Event) -> Event:
    _same_space(x, y)
    return Event(x.space, set(x.members) & set(y.members))


def union(x: Event, y: Event) -> Event:
    _same_space(x, y)
    return Event(x.space, set(x.members) | set(y.members))


def complement(x: Event) -> Event:
    return Event(x.space, set(range(x.space.atoms)) - set(x.members))


def product_event(x: Event, y: Event, space: OutcomeSpace | None = None) -> Event:
    """The rectangle ``x × y`` on the product of the two event spaces.

    If ``space`` is given it must be the declared product of ``x.space`` and
    ``y.space``.
    """
    expected = OutcomeSpace.product(x.space, y.space)
    if space is None:
        space = expected
    elif space.factors != (x.space, y.space):
        raise SpaceMismatch(f"{space.label!r} is not the product of {x.space.label!r} and {y.space.label!r}")
    nb = y.space.atoms
    return Event(space, (i * nb + j for i in x for j in y))


def all_events(space: OutcomeSpace) -> list[Event]:
    """Every subset of ``space``, in binary-counter order (``2**n`` events)."""
    n = space.atoms
    return [Event(space, (j for j in range(n) if mask >> j & 1)) for mask in range(1 << n)]
