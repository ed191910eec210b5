import json
import logging

import numpy as np
import pytest

from conftest import clique, ref, true_cliques
from multimatch.graph import (
    NULL_ENTITY,
    Clique,
    ContractViolation,
    EntityRef,
    GraphError,
    Matching,
    ParseError,
    TruthSet,
    apply_threshold,
    clique_weight,
    load_graph,
    matching_to_jsonl,
    matching_weight,
    null_ref,
    pair_score,
    read_edges,
    read_matching,
    read_truth,
    validate_one_to_one,
    write_edges,
    write_truth,
)


def test_empty_stream():
    g = load_graph([])
    assert g.m == 0
    assert g.n_edges == 0


def test_example1_shape(ex1):
    assert ex1.m == 3
    assert ex1.sizes == (3, 3, 3)
    assert ex1.n_edges == 27


def test_duplicate_keeps_max(caplog):
    stats = {}
    with caplog.at_level(logging.WARNING):
        g = load_graph([("A", "x", "B", "y", 0.4), ("A", "x", "B", "y", 0.6)], stats)
    assert g.n_edges == 1
    assert g.score(EntityRef(0, 0), EntityRef(1, 0)) == 0.6
    assert stats["duplicates"] == 1
    assert "duplicate" in caplog.text


def test_duplicate_reversed_orientation():
    g = load_graph([("A", "x", "B", "y", 0.7), ("B", "y", "A", "x", 0.2)])
    assert g.n_edges == 1
    assert g.score(EntityRef(1, 0), EntityRef(0, 0)) == 0.7


@pytest.mark.parametrize("row", [
    ("A", "x", "B", "y"),
    ("A", "x", "B", "y", "abc"),
    ("A", "x", "B", "y", "nan"),
    ("A", "x", "B", "y", "inf"),
])
def test_malformed_rows(row):
    with pytest.raises(ParseError) as err:
        load_graph([("A", "p", "B", "q", 0.5), row])
    assert err.value.line == 2


def test_negative_and_same_source_rejected():
    with pytest.raises(GraphError):
        load_graph([("A", "x", "B", "y", -0.1)])
    with pytest.raises(GraphError):
        load_graph([("A", "x", "A", "y", 0.3)])


def test_pair_score(ex1):
    assert pair_score(ex1, ref(ex1, "a1"), ref(ex1, "a2")) == 0.5
    assert pair_score(ex1, ref(ex1, "a2"), ref(ex1, "a1")) == 0.5
    assert pair_score(ex1, ref(ex1, "a1"), null_ref(1)) == 0.0
    with pytest.raises(ContractViolation):
        pair_score(ex1, ref(ex1, "a1"), ref(ex1, "b1"))


def test_unlinked_pair_scores_zero():
    g = load_graph([("A", "x", "B", "y", 0.5), ("A", "z", "C", "w", 0.5)])
    assert g.score(EntityRef(0, 0), EntityRef(2, 0)) == 0.0
    assert g.score(EntityRef(0, 1), EntityRef(1, 0)) == 0.0


def test_clique_weight(ex1):
    assert clique_weight(ex1, clique(ex1, "a1", "a2", "a3")) == pytest.approx(2.5, abs=1e-12)
    assert clique_weight(ex1, clique(ex1, "c1", "c2", "c3")) == pytest.approx(3.0, abs=1e-12)
    assert clique_weight(ex1, clique(ex1, "b2")) == 0.0


def test_matching_weight(ex1):
    truth = Matching([Clique(tuple(c)) for c in true_cliques(ex1)])
    assert matching_weight(ex1, truth) == pytest.approx(8.1, abs=1e-12)
    assert matching_weight(ex1, Matching()) == 0.0
    seq = Matching([
        clique(ex1, "a1", "b2", "a3"), clique(ex1, "b1", "a2", "b3"), clique(ex1, "c1", "c2", "c3"),
    ])
    assert matching_weight(ex1, seq) == pytest.approx(6.4, abs=1e-12)


def test_validate(ex1):
    truth = Matching([Clique(tuple(c)) for c in true_cliques(ex1)])
    assert validate_one_to_one(truth) == []
    shared = Matching([clique(ex1, "a1", "a2"), clique(ex1, "a1", "b3")])
    v = validate_one_to_one(shared)
    assert len(v) == 1 and v[0].kind == "duplicate-entity" and v[0].entity == ref(ex1, "a1")
    clash = Matching([Clique((EntityRef(0, 0), EntityRef(0, 1)))])
    v = validate_one_to_one(clash)
    assert len(v) == 1 and v[0].kind == "source-clash"


def test_clique_drops_nulls():
    c = Clique((EntityRef(1, 2), null_ref(0), EntityRef(0, 1)))
    assert c.members == (EntityRef(0, 1), EntityRef(1, 2))
    assert c.slots(3) == (1, 2, NULL_ENTITY)
    assert Clique.from_slots((1, 2, NULL_ENTITY)) == c


def test_apply_threshold(ex1):
    assert apply_threshold(ex1, 0.7).n_edges == 7
    assert apply_threshold(ex1, 0).n_edges == 27
    assert apply_threshold(ex1, 1.01).n_edges == 0
    with pytest.raises(ValueError):
        apply_threshold(ex1, -0.1)


def test_threshold_keeps_equal_scores(ex1):
    assert apply_threshold(ex1, 0.6).n_edges == 7 + 7


def test_dense_is_read_only(ex1):
    d = ex1.dense(0, 1)
    assert d.shape == (3, 3)
    with pytest.raises(ValueError):
        d[0, 0] = 3.0
    np.testing.assert_array_equal(ex1.dense(1, 0), d.T)


def test_restrict(ex1):
    sub = ex1.restrict([2, 0])
    assert sub.source_names == ("3", "1")
    assert sub.score(EntityRef(0, 0), EntityRef(1, 0)) == ex1.score(EntityRef(2, 0), EntityRef(0, 0))


def test_edge_roundtrip(tmp_path, ex1):
    path = tmp_path / "edges.csv"
    write_edges(ex1, path)
    again = read_edges(path)
    assert again.source_names == ex1.source_names
    assert list(again.edges()) == list(ex1.edges())
    assert path.read_text().splitlines()[0] == "source_a,entity_a,source_b,entity_b,score"


def test_bad_header(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(ParseError):
        read_edges(path)


def test_truth_roundtrip(tmp_path, ex1):
    truth = TruthSet(
        {frozenset((ref(ex1, "a1"), ref(ex1, "a2")))},
        {frozenset((ref(ex1, "b1"), ref(ex1, "c2"))), frozenset((ref(ex1, "c1"), null_ref(2)))},
    )
    path = tmp_path / "truth.csv"
    write_truth(truth, ex1, path)
    assert "__NULL__" in path.read_text()
    assert read_truth(path, ex1) == truth


def test_truth_errors(tmp_path, ex1):
    path = tmp_path / "truth.csv"
    path.write_text("source_a,entity_a,source_b,entity_b,label\n1,a1,2,zz,1\n")
    with pytest.raises(GraphError):
        read_truth(path, ex1)
    path.write_text("source_a,entity_a,source_b,entity_b,label\n1,a1,2,__NULL__,1\n")
    with pytest.raises(GraphError):
        read_truth(path, ex1)
    path.write_text("source_a,entity_a,source_b,entity_b,label\n1,a1,2,a2,2\n")
    with pytest.raises(ParseError):
        read_truth(path, ex1)


def test_truth_overlap_rejected(ex1):
    pair = frozenset((ref(ex1, "a1"), ref(ex1, "a2")))
    with pytest.raises(GraphError):
        TruthSet({pair}, {pair})


def test_matching_jsonl_roundtrip(tmp_path, ex1):
    m = Matching([clique(ex1, "c1", "c2", "c3"), clique(ex1, "a1", "a2")])
    text = matching_to_jsonl(ex1, m)
    lines = text.splitlines()
    assert len(lines) == 2
    first = json.loads(lines[0])
    assert first["members"] == [{"source": "1", "entity": "a1"}, {"source": "2", "entity": "a2"}]
    assert first["weight"] == 0.5
    path = tmp_path / "m.jsonl"
    path.write_text(text)
    assert read_matching(path, ex1).canonical() == m.canonical()
