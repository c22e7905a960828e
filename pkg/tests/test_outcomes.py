import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcondprob.errors import IndexOutOfRange, SpaceMismatch
from qcondprob.outcomes import Event, OutcomeSpace, all_events, complement, intersect, product_event, union

OMEGA = OutcomeSpace("Ω", 4)


def test_intersect_examples():
    assert intersect(OMEGA.event([0, 1]), OMEGA.event([1, 2])) == OMEGA.event([1])
    x = OMEGA.event([0, 3])
    assert intersect(x, OMEGA.full()) == x
    assert intersect(x, OMEGA.empty()).is_empty


def test_events_on_different_spaces_do_not_mix():
    other = OutcomeSpace("Ω'", 4)
    with pytest.raises(SpaceMismatch):
        intersect(OMEGA.full(), other.full())


def test_event_rejects_out_of_range():
    with pytest.raises(IndexOutOfRange):
        OMEGA.event([4])


def test_product_event_examples():
    a, b = OutcomeSpace("A", 2), OutcomeSpace("B", 2)
    ab = OutcomeSpace.product(a, b)
    assert product_event(a.atom(0), b.atom(1), ab).members == (1,)
    assert product_event(a.full(), b.full(), ab).is_full
    lhs = intersect(product_event(a.event([0, 1]), b.atom(0), ab), product_event(a.atom(0), b.event([0, 1]), ab))
    assert lhs == product_event(a.atom(0), b.atom(0), ab)


def test_product_event_checks_declared_space():
    a, b = OutcomeSpace("A", 2), OutcomeSpace("B", 3)
    with pytest.raises(SpaceMismatch):
        product_event(a.full(), b.full(), OutcomeSpace.product(b, a))


def test_all_events_enumerates_power_set():
    events = all_events(OutcomeSpace("S", 3))
    assert len(events) == 8 and len(set(events)) == 8


def test_product_names_are_row_major():
    a = OutcomeSpace("A", 2, ("0", "1"))
    b = OutcomeSpace("B", 2, ("+", "-"))
    assert OutcomeSpace.product(a, b).atom_names == ("0,+", "0,-", "1,+", "1,-")


def _events(n):
    space = OutcomeSpace("Ω", n)
    return st.sets(st.integers(0, n - 1)).map(lambda s: Event(space, s))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(_events(n), _events(n), _events(n))))
def test_boolean_algebra_laws(xyz):
    x, y, z = xyz
    assert (x & x) == x and (x | x) == x
    assert (x & y) == (y & x) and (x | y) == (y | x)
    assert (x & (x | y)) == x and (x | (x & y)) == x
    assert (x & (y | z)) == ((x & y) | (x & z))
    assert ~(x | y) == (~x & ~y)
    assert complement(complement(x)) == x
    assert union(x, complement(x)).is_full and intersect(x, complement(x)).is_empty


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_rectangle_identity(na, nb, data):
    a, b = OutcomeSpace("A", na), OutcomeSpace("B", nb)
    ab = OutcomeSpace.product(a, b)
    x = Event(a, data.draw(st.sets(st.integers(0, na - 1))))
    y = Event(b, data.draw(st.sets(st.integers(0, nb - 1))))
    assert intersect(product_event(x, b.full(), ab), product_event(a.full(), y, ab)) == product_event(x, y, ab)
