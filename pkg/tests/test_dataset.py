import pytest
from hypothesis import given, strategies as st

from deodata import MISSING, OutcomeDistribution, Query, argmax_label, match_count
from deodata.dataset import ContractViolation, DatasetError, load_csv, parse_csv

from conftest import Y, datasets


def test_table1_shape(table1):
    assert len(table1) == 15
    assert table1.schema.names == ("A", "B", "C")
    assert table1.schema.domains == (
        frozenset({"a0", "a1", "a2"}), frozenset({"b0", "b1"}), frozenset({"c0", "c1", "c2"}))
    assert table1.outcome_domain == {"t0", "t1", "t2"}


def test_table1_rows(table1):
    assert table1[7].values == ("a1", "b0", "c2") and table1[7].outcome == "t1"
    assert table1[0].values == ("a0", "b0", "c1") and table1[0].outcome == "t1"
    assert [r.index for r in table1.rows] == list(range(15))


def test_table1_outcome_tally(table1):
    tally = {}
    for r in table1.rows:
        tally[r.outcome] = tally.get(r.outcome, 0) + 1
    assert tally == {"t0": 5, "t1": 4, "t2": 6}
    assert table1.outcome_counts() == tally


def test_load_csv_roundtrip(tmp_path, table1):
    path = tmp_path / "t1.csv"
    path.write_text(table1.to_csv(), encoding="utf-8")
    loaded = load_csv(path)
    assert loaded == table1
    assert loaded.to_csv() == table1.to_csv()


@pytest.mark.parametrize("text, fragment", [
    ("outcome,A,B\n", "empty dataset"),
    ("", "empty file"),
    ("label,A\nt0,a\n", "line 1"),
    ("outcome,A,B\nt0,a0,b0\nt1,a1\n", "line 3"),
    ("outcome,A,B\nt0,a0,\n", "line 2"),
])
def test_csv_errors(text, fragment):
    with pytest.raises(DatasetError, match=fragment):
        parse_csv(text)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv")


def test_match_count_examples(table1):
    assert match_count(table1[11], Y) == 2
    assert match_count(table1[5], Y) == 0
    assert all(match_count(r, Query.all_missing(3)) == 0 for r in table1.rows)


def test_match_count_unseen_value(table1):
    assert match_count(table1[0], Query(("a9", "b0", "c1"))) == 2


def test_match_count_length_mismatch(table1):
    with pytest.raises(ContractViolation):
        match_count(table1[0], Query(("a0", "b0")))


@pytest.mark.parametrize("counts, label", [
    ({"t0": 2, "t1": 2, "t2": 3}, "t2"),
    ({"t0": 2, "t1": 2}, "t0"),
    ({"t0": 3, "t1": 2, "t2": 1}, "t0"),
    ({"t2": 4, "t1": 4}, "t1"),
])
def test_argmax_label(counts, label):
    assert argmax_label(OutcomeDistribution(counts)) == label


def test_argmax_empty():
    with pytest.raises(ValueError, match="no outcomes to classify"):
        argmax_label(OutcomeDistribution())


def test_distribution_drops_zero_and_totals():
    d = OutcomeDistribution({"a": 0, "b": 2, "c": 1})
    assert d.counts == {"b": 2, "c": 1}
    assert d.total == 3
    assert (d + OutcomeDistribution({"a": 1})).counts == {"a": 1, "b": 2, "c": 1}
    assert OutcomeDistribution.parse(d.format()) == d


@given(datasets())
def test_self_match_is_perfect(data):
    for r in data.rows:
        assert match_count(r, Query.from_row(r)) == len(data.schema)


@given(datasets(), st.data())
def test_revealing_missing_adds_one(data, draw):
    row = draw.draw(st.sampled_from(data.rows))
    k = len(data.schema)
    mask = draw.draw(st.lists(st.booleans(), min_size=k, max_size=k))
    query = Query(MISSING if m else v for v, m in zip(row.values, mask))
    base = match_count(row, query)
    for pos in range(k):
        if mask[pos]:
            revealed = list(query.values)
            revealed[pos] = row.values[pos]
            assert match_count(row, Query(revealed)) == base + 1


@given(datasets())
def test_csv_roundtrip_property(data):
    assert parse_csv(data.to_csv()).rows == data.rows


@given(st.dictionaries(st.sampled_from(["t0", "t1", "t2", "t3"]), st.integers(1, 5), min_size=1))
def test_argmax_deterministic(counts):
    d = OutcomeDistribution(counts)
    label = argmax_label(d)
    assert label == argmax_label(OutcomeDistribution(dict(reversed(list(counts.items())))))
    assert d[label] == max(counts.values())
