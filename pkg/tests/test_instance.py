import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rentmatch.instance import (Instance, InstanceError, dumps_instance, gen_integrality_gap, gen_random,
                                gen_upper_triangular, load_instance, loads_instance, single_edge)


def test_minimal_document():
    inst = loads_instance('{"num_offline": 1, "duration": 1, "arrivals": [[0]]}')
    assert inst.num_online == 1 and inst.edges == [(0, 0)]


def test_gap_instance_shape():
    inst = gen_integrality_gap()
    assert (inst.num_offline, inst.num_online, inst.duration) == (3, 4, 3)
    assert sorted(inst.edges) == sorted([(0, 0), (0, 1), (1, 1), (1, 3), (2, 0), (2, 2), (2, 3)])


@pytest.mark.parametrize("doc, where", [
    ({"num_offline": 2, "duration": 1, "arrivals": [[0], [0, 0]]}, "arrivals[1][1]: duplicate"),
    ({"num_offline": 2, "duration": 1, "arrivals": [[2]]}, "arrivals[0][0]"),
    ({"num_offline": 2, "duration": 0, "arrivals": []}, "duration"),
    ({"num_offline": 2, "arrivals": []}, "missing field 'duration'"),
])
def test_validation_errors_carry_location(doc, where):
    with pytest.raises(InstanceError, match=where.replace("[", r"\[").replace("]", r"\]")):
        loads_instance(json.dumps(doc))


def test_parse_error_location():
    with pytest.raises(InstanceError, match="line 1 column"):
        loads_instance("{not json")


def test_load_from_path_and_stdin(tmp_path, monkeypatch):
    text = dumps_instance(gen_integrality_gap())
    path = tmp_path / "g.json"
    path.write_text(text)
    assert load_instance(str(path)) == gen_integrality_gap()
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    assert load_instance("-") == gen_integrality_gap()


def test_gen_random_extremes_and_determinism():
    full = gen_random(3, 5, 1.0, 2, 7)
    assert full.num_edges == 15
    assert all(nb == () for nb in gen_random(3, 5, 0.0, 2, 7).arrivals)
    assert gen_random(4, 10, 0.5, 3, 42) == gen_random(4, 10, 0.5, 3, 42)
    with pytest.raises(InstanceError):
        gen_random(3, 5, 1.5, 2, 0)
    with pytest.raises(InstanceError):
        gen_random(3, 5, 0.5, 0, 0)


def test_upper_triangular():
    assert gen_upper_triangular(2, 2).arrivals == ((0, 1), (1,))
    assert gen_upper_triangular(1, 1) == single_edge()
    with pytest.raises(InstanceError):
        gen_upper_triangular(0, 1)


def test_reversed_and_empty_rounds():
    inst = Instance.build(2, 2, [[1], [], [0, 1]])
    assert inst.reversed().arrivals == ((0, 1), (), (1,))


instances = st.integers(1, 5).flatmap(lambda n: st.builds(
    Instance.build,
    st.just(n),
    st.integers(1, 6),
    st.lists(st.sets(st.integers(0, n - 1)).map(sorted), max_size=12),
))


@settings(max_examples=200, deadline=None)
@given(instances)
def test_round_trip(inst):
    assert loads_instance(dumps_instance(inst)) == inst


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 6), st.integers(0, 15), st.floats(0, 1), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_generator_outputs_validate(v, u, p, d, seed):
    inst = gen_random(v, u, p, d, seed)
    assert loads_instance(dumps_instance(inst)) == inst
