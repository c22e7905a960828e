import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcondprob import bundled
from qcondprob.errors import InvalidPovm, NotPositive, ParseError
from qcondprob.fixtures import bell_state
from qcondprob.neumark import dilate
from qcondprob.povm import bb84_povm, trine_povm
from qcondprob.serialize import (
    decode_density,
    decode_event,
    decode_matrix,
    decode_povm,
    encode_density,
    encode_dilation,
    encode_event,
    encode_matrix,
    encode_povm,
    parse_scenario,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60, deadline=None)
@given(re=arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite), data=st.data())
def test_matrix_round_trip_is_bit_exact(re, data):
    im = data.draw(arrays(np.float64, re.shape, elements=finite))
    m = re + 1j * im
    text = json.dumps(encode_matrix(m))
    back = decode_matrix(json.loads(text))
    assert back.shape == m.shape
    assert np.array_equal(back.view(np.float64), m.view(np.float64))


def test_matrix_layout_is_row_major():
    obj = encode_matrix(np.array([[1, 2j], [3, 4]]))
    assert obj["data"] == [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]


def test_matrix_dimension_mismatch_is_parse_error():
    with pytest.raises(ParseError, match="2x2"):
        decode_matrix({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ParseError):
        decode_matrix({"rows": 1, "cols": 1, "data": [[1]]})


def test_density_and_povm_round_trip():
    rho = bell_state()
    back = decode_density(json.loads(json.dumps(encode_density(rho))))
    assert back.layout == rho.layout and np.array_equal(back.matrix, rho.matrix)
    m = bb84_povm("B")
    m2 = decode_povm(json.loads(json.dumps(encode_povm(m))))
    assert m2.space == m.space
    assert all(np.array_equal(a, b) for a, b in zip(m.atoms, m2.atoms))


def test_decoded_objects_are_revalidated():
    bad = encode_density(bell_state())
    bad["matrix"]["data"][0] = [-1.0, 0.0]
    with pytest.raises(NotPositive):
        decode_density(bad)
    obj = encode_povm(trine_povm())
    obj["atoms"] = obj["atoms"][:2]
    with pytest.raises(InvalidPovm):
        decode_povm(obj)


def test_events_round_trip_and_range_check():
    space = bb84_povm().space
    x = space.event([0, 3])
    assert decode_event(encode_event(x), space) == x
    with pytest.raises(ParseError):
        decode_event([4], space)


def test_dilation_export():
    dil = dilate(trine_povm())
    obj = encode_dilation(dil)
    assert obj["D"] == 6 and len(obj["atoms"]) == 3
    assert np.array_equal(decode_matrix(obj["Q"]), dil.q_projection)


@pytest.mark.parametrize(
    "raw, match",
    [
        ("{", "not valid JSON"),
        ('{"version": "2", "kind": "bb84", "payload": {}}', "version"),
        ('{"version": "1", "kind": "teleport", "payload": {}}', "kind"),
        ('{"version": "1", "kind": "neumark", "payload": {}}', "povm"),
    ],
)
def test_envelope_errors(raw, match):
    with pytest.raises(ParseError, match=match):
        parse_scenario(raw)


def test_bundled_files_are_current():
    for name, text in bundled.render_all().items():
        assert bundled.path(name).read_text(encoding="utf-8") == text, name


def test_digest_is_sha256_of_bytes():
    import hashlib

    raw = bundled.path("trine_povm_check.json").read_bytes()
    assert parse_scenario(raw).digest == hashlib.sha256(raw).hexdigest()
