from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resonator.errors import (
    BadCyclicOrder,
    Disconnected,
    GraphError,
    NonPositiveLength,
    NonPositiveScale,
    NotTrivalent,
)
from resonator.graph_core import (
    directed_coding,
    graph_from_edges,
    load_graph,
    parse_length,
    random_trivalent_graph,
    scale_graph,
    theta_graph,
    trace_faces,
    validate_graph,
)

HALF = Fraction(1, 2)


def test_parse_length_exact_and_float():
    assert parse_length("3/4") == Fraction(3, 4)
    assert parse_length(2) == Fraction(2)
    assert isinstance(parse_length(0.3), float)


def test_theta_is_valid():
    g = theta_graph("1/2", "1/2", "1/2")
    assert g.k == 3
    assert g.exact
    assert g.lengths == (HALF, HALF, HALF)


def test_zero_length_rejected():
    with pytest.raises(NonPositiveLength):
        theta_graph("1/2", 0, "1/2")


def test_four_valent_rejected():
    # figure eight: one vertex with two loops
    raw = {"edges": [{"id": 1, "u": 0, "v": 0, "length": 1}, {"id": 2, "u": 0, "v": 0, "length": 1}]}
    with pytest.raises(NotTrivalent):
        validate_graph(raw)


def test_disconnected_rejected():
    raw = {"edges": [
        {"id": 1, "u": 0, "v": 1, "length": 1}, {"id": 2, "u": 0, "v": 1, "length": 1},
        {"id": 3, "u": 0, "v": 1, "length": 1}, {"id": 4, "u": 2, "v": 3, "length": 1},
        {"id": 5, "u": 2, "v": 3, "length": 1}, {"id": 6, "u": 2, "v": 3, "length": 1},
    ]}
    with pytest.raises(Disconnected):
        validate_graph(raw)


def test_bad_cyclic_order():
    raw = {"edges": [{"id": i, "u": 0, "v": 1, "length": 1} for i in (1, 2, 3)],
           "cyclic_order": {"0": [1, 2, 2], "1": [-1, -2, -3]}}
    with pytest.raises(BadCyclicOrder):
        validate_graph(raw)


def test_malformed_json():
    with pytest.raises(GraphError):
        validate_graph("{not json")


def test_load_graph_roundtrip(tmp_path):
    g = theta_graph(1, 3, 1)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g.to_dict()))
    h = load_graph(path)
    assert h.lengths == g.lengths
    assert h.cyclic_order == g.cyclic_order


def test_theta_faces_symmetric():
    rep = trace_faces(theta_graph("1/2", "1/2", "1/2"))
    assert rep.n_faces == 3
    assert rep.genus == 0
    assert sorted(rep.boundary_lengths) == [1, 1, 1]


def test_theta_faces_asymmetric():
    rep = trace_faces(theta_graph(6, 4, 2))
    assert sorted(rep.boundary_lengths) == [6, 8, 10]


def test_nonplanar_theta_has_genus_one():
    g = graph_from_edges([(0, 1, 1), (0, 1, 1), (0, 1, 1)], {0: [1, 2, 3], 1: [-1, -2, -3]})
    rep = trace_faces(g)
    assert (rep.genus, rep.n_faces) == (1, 1)
    assert rep.boundary_lengths == (6,)


def test_directed_coding_theta():
    c = directed_coding(theta_graph(1, 3, 1))
    assert c.size == 6
    assert np.all(c.A.sum(axis=1) == 2)
    assert np.trace(c.A) == 0
    # the reverse of a symbol never follows it
    for i in range(6):
        assert c.A[i, c.reverse(i)] == 0


def test_directed_coding_support_matches_example_matrix():
    # zero pattern of the transfer matrix for theta(1,3,1): rows list allowed successors
    c = directed_coding(theta_graph(1, 3, 1))
    expected = np.array([
        [0, 0, 0, 0, 1, 1],
        [0, 0, 0, 1, 0, 1],
        [0, 0, 0, 1, 1, 0],
        [0, 1, 1, 0, 0, 0],
        [1, 0, 1, 0, 0, 0],
        [1, 1, 0, 0, 0, 0],
    ])
    assert np.array_equal(c.A, expected)


def test_scale_examples():
    g = theta_graph("1/2", "1/2", "1/2")
    assert scale_graph(g, 8).lengths == (4, 4, 4)
    assert scale_graph(g, 1).lengths == g.lengths
    assert scale_graph(scale_graph(g, 2), HALF).lengths == g.lengths
    with pytest.raises(NonPositiveScale):
        scale_graph(g, 0)


def test_random_graph_is_trivalent():
    g = random_trivalent_graph(4, np.random.default_rng(1))
    assert g.k == 6
    assert all(len(hs) == 3 for hs in g.cyclic_order.values())


graph_seeds = st.tuples(st.sampled_from([2, 4, 6]), st.integers(0, 10**6))


@pytest.mark.property
@given(graph_seeds)
def test_faces_partition_directed_edges(params):
    n, seed = params
    g = random_trivalent_graph(n, np.random.default_rng(seed))
    rep = trace_faces(g)
    visited = [h for f in rep.faces for h in f.half_edges]
    assert sorted(visited) == sorted([e.id for e in g.edges] + [-e.id for e in g.edges])
    V, E = len(g.vertices), g.k
    assert V - E + rep.n_faces == 2 - 2 * rep.genus
    assert rep.genus >= 0


@pytest.mark.property
@given(graph_seeds, st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=12))
def test_scaling_faces_and_coding(params, alpha):
    n, seed = params
    g = random_trivalent_graph(n, np.random.default_rng(seed))
    h = scale_graph(g, alpha)
    assert [alpha * x for x in trace_faces(g).boundary_lengths] == list(trace_faces(h).boundary_lengths)
    assert np.array_equal(directed_coding(g).A, directed_coding(h).A)
