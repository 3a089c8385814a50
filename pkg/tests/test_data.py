import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexdp.data import (
    CategorySet,
    CountVector,
    EventLog,
    count_query,
    default_eta,
    is_irreducible,
    merge_categories,
    merge_partitions,
    read_chain_csv,
    read_merge_map,
    read_vector_csv,
    transition_counts,
    validate_chain_structure,
    write_chain_csv,
    write_vector_csv,
)
from simplexdp.errors import MappingError, ShapeError, ValidationError, ZeroCountWarning

CATS = CategorySet(("a", "b", "c"))


def test_count_query_fractions_and_default_eta():
    q = count_query(["a", "b", "a", "c"], CATS)
    np.testing.assert_array_equal(q.counts, [2, 1, 1])
    np.testing.assert_allclose(q.probs, [0.5, 0.25, 0.25])
    assert q.N == 4 and q.n == 3
    assert q.eta == 0.25
    assert q.bordered


def test_count_query_slack_eta():
    q = count_query(["a"] * 5 + ["b"] * 3 + ["c"] * 2, CATS, slack=True)
    assert q.eta == pytest.approx((4 * 2 - 1) / 40)
    assert q.eta < q.probs.min()


def test_unknown_label_names_record():
    with pytest.raises(ValidationError, match="record 2"):
        count_query(["a", "b", "z"], CATS)


def test_zero_category_warns_and_is_not_bordered():
    with pytest.warns(ZeroCountWarning):
        q = count_query(["a", "b", "a"], CATS)
    assert q.has_zero and not q.bordered


def test_pseudo_count():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        q = count_query(["a", "b", "a"], CATS, pseudo_count=True)
    np.testing.assert_array_equal(q.counts, [3, 2, 1])


def test_eta_above_smallest_fraction_rejected():
    with pytest.raises(ValidationError):
        count_query(["a", "b", "c", "c"], CATS, eta=0.3)
    with pytest.raises(ValidationError):
        CountVector([1, 1, 2], ("a", "b", "c"), 0.3)


def test_count_vector_is_immutable():
    q = count_query(["a", "b", "c"], CATS)
    with pytest.raises(ValueError):
        q.probs[0] = 1.0
    with pytest.raises(AttributeError):
        q.eta = 0.1


def test_category_set_rules():
    with pytest.raises(ValidationError):
        CategorySet(("a", "b"))
    with pytest.raises(ValidationError, match="duplicate"):
        CategorySet(("a", "b", "a"))


def test_event_log_rules():
    with pytest.raises(ValidationError):
        EventLog((("a",), ()), ("x", "y"))
    with pytest.raises(ValidationError):
        EventLog((("a",), ("b",)), ("x", "x"))
    with pytest.raises(ShapeError):
        EventLog((("a",),), ("x", "y"))


def test_transition_counts_rows_follow_category_order():
    log = EventLog((("b", "c"), ("a", "a", "c"), ("a", "b")), ("b", "a", "c"))
    with pytest.warns(ZeroCountWarning):
        tc = transition_counts(log, CATS)
    assert tc.count_matrix.tolist() == [[2, 0, 1], [0, 1, 1], [1, 1, 0]]
    np.testing.assert_allclose(tc.matrix.sum(axis=1), 1.0)
    np.testing.assert_array_equal(tc.Ns, [3, 2, 2])


def test_transition_counts_shape_errors():
    log = EventLog((("a",), ("b",)), ("a", "b"))
    with pytest.raises(ShapeError):
        transition_counts(log, CATS)
    log = EventLog((("a",), ("b",), ("c",)), ("a", "b", "x"))
    with pytest.raises(ShapeError):
        transition_counts(log, CATS)


def test_chain_structure_diagnostics():
    log = EventLog((("a", "b"), ("b", "c"), ("c", "a")), ("a", "b", "c"))
    with pytest.warns(ZeroCountWarning):
        tc = transition_counts(log, CATS)
    d = validate_chain_structure(tc)
    assert d.irreducible and not d.positive and not d.ok
    assert ("a", "c") in d.zero_entries

    reducible = np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.2, 0.3, 0.5]])
    assert not is_irreducible(reducible)
    assert is_irreducible(np.full((3, 3), 1 / 3))


def test_merge_preserves_total_and_relabels():
    log = EventLog.single(["a", "b", "c", "d", "a", "e"])
    mapping = {"a": "x", "b": "x", "c": "y", "d": "z", "e": "z"}
    merged = merge_partitions(log, mapping)
    assert merged.total == log.total
    assert sorted(merged.partitions[0]) == ["x", "x", "x", "y", "z", "z"]
    cats = merge_categories(CategorySet(("a", "b", "c", "d", "e")), mapping)
    assert cats.labels == ("x", "y", "z")


def test_merge_chain_concatenates_partitions():
    log = EventLog((("a", "b"), ("c",), ("d",), ("a",)), ("a", "b", "c", "d"))
    merged = merge_partitions(log, {"a": "x", "b": "x", "c": "y", "d": "z"})
    assert merged.partition_ids == ("x", "y", "z")
    assert merged.partition("x") == ("x", "x", "y")


def test_merge_errors():
    log = EventLog.single(["a", "b", "c"])
    with pytest.raises(MappingError, match="cover"):
        merge_partitions(log, {"a": "x", "b": "y"})
    with pytest.raises(MappingError, match="at least 3"):
        merge_partitions(log, {"a": "x", "b": "x", "c": "y"})
    # partition ids mapped only in part
    log = EventLog((("a",), ("b",), ("c",)), ("a", "b", "q"))
    with pytest.raises(MappingError, match="partition ids"):
        merge_partitions(log, {"a": "a", "b": "b", "c": "c"})


def test_vector_csv_round_trip(tmp_path):
    events = ["a", "b", "a", "c"]
    path = tmp_path / "v.csv"
    write_vector_csv(path, events)
    assert read_vector_csv(path) == events


def test_chain_csv_round_trip(tmp_path):
    log = EventLog((("b", "a"), ("a", "c"), ("c",)), ("a", "b", "c"))
    path = tmp_path / "c.csv"
    write_chain_csv(path, log)
    back, cats = read_chain_csv(path)
    assert cats.labels == ("a", "b", "c")
    assert back.partition("a") == ("b", "a")
    assert back.partition("c") == ("c",)


@pytest.mark.parametrize(
    "text, match",
    [
        ("cat\na\n", "header"),
        ("category\na,b\n", "fields"),
        ("category\n\"\"\n", "empty"),
        ("category\n\"a,b\"\n", "commas"),
        ("", "empty"),
    ],
)
def test_vector_csv_errors(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValidationError, match=match):
        read_vector_csv(path)


def test_missing_file():
    with pytest.raises(ValidationError, match="cannot read"):
        read_vector_csv("/nonexistent/file.csv")


def test_merge_map_conflict(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("old_label,new_label\na,x\na,y\n")
    with pytest.raises(MappingError):
        read_merge_map(path)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=200))
def test_count_query_properties(events):
    cats = CategorySet(tuple("abcde"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = count_query(events, cats)
    assert q.counts.sum() == len(events)
    assert abs(q.probs.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(q.probs * q.N, q.counts, atol=1e-9)
    assert q.eta == default_eta(q.counts)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=100), st.permutations("xyzxyz"))
def test_merge_never_changes_event_count(events, image):
    mapping = dict(zip("abcdef", image))
    if len(set(mapping[e] for e in events)) < 3:
        return
    merged = merge_partitions(EventLog.single(events), mapping)
    assert merged.total == len(events)
