import pytest

from deodata import MISSING, Dataset, build_tree, predict_standard
from deodata.harness import (ALL_PREDICTORS, Predictor, SpecError, SyntheticSpec, compare_all,
                             generate_synthetic, k_fold_accuracy, random_cases)


def test_synthetic_deterministic():
    spec = SyntheticSpec(seed=7, unseen_value_rate=0.2, missing_rate=0.2)
    a, qa = generate_synthetic(spec)
    b, qb = generate_synthetic(spec)
    assert a == b and qa == qb
    assert generate_synthetic(SyntheticSpec(seed=8))[0] != a


def test_synthetic_no_corruption_stays_in_domain():
    data, queries = generate_synthetic(SyntheticSpec(n_rows=10, n_attributes=5, values_per_attribute=4,
                                                     seed=3, n_queries=200))
    for q, label in queries:
        assert all(v in dom for v, dom in zip(q, data.schema.domains))


def test_synthetic_all_unseen_forces_root_fallback():
    data, queries = generate_synthetic(SyntheticSpec(unseen_value_rate=1.0, seed=5, n_queries=40))
    tree = build_tree(data)
    for q, _ in queries:
        assert all(v not in dom for v, dom in zip(q, data.schema.domains))
        res = predict_standard(tree, q)
        assert res.distribution == tree.outcome_counts


def test_synthetic_missing_rate_one():
    _, queries = generate_synthetic(SyntheticSpec(missing_rate=1.0, n_queries=5))
    assert all(v is MISSING for q, _ in queries for v in q)


@pytest.mark.parametrize("kwargs", [
    dict(n_rows=0), dict(missing_rate=1.5), dict(unseen_value_rate=-0.1),
    dict(values_per_attribute=1, unseen_value_rate=0.5),
    dict(unseen_value_rate=0.6, missing_rate=0.6),
])
def test_spec_validation(kwargs):
    with pytest.raises(SpecError):
        generate_synthetic(SyntheticSpec(**kwargs))


def test_loo_allnn_reproducible(table1):
    a = k_fold_accuracy(table1, 15, Predictor.ALLNN)
    b = k_fold_accuracy(table1, 15, Predictor.ALLNN)
    assert a == b
    assert len(a) == 16
    assert all(r.n_queries == 1 for r in a[:-1])
    assert 0.0 <= a[-1].accuracy <= 1.0


def test_k_out_of_range(table1):
    for k in (1, 16):
        with pytest.raises(SpecError):
            k_fold_accuracy(table1, k, Predictor.STANDARD)


@pytest.mark.parametrize("predictor", list(Predictor))
def test_pure_dataset_is_perfect(predictor):
    data = Dataset.from_records(["a", "b"], [([f"x{i % 3}", f"y{i % 2}"], "only") for i in range(9)])
    assert k_fold_accuracy(data, 3, predictor)[-1].accuracy == 1.0


def test_compare_all_table1_shape(table1):
    report = compare_all(table1, 15)
    for p in ALL_PREDICTORS:
        assert len(report.folds(p)) == 15
    summary = report.summary()
    assert set(summary) == {p.value for p in ALL_PREDICTORS}
    assert summary["hybrid"].accuracy == summary["allnn"].accuracy
    assert summary["hybrid"].mean_comparisons <= summary["allnn"].mean_comparisons
    assert 0 < report.mean_cost_ratio <= 1.0


def test_compare_all_spec_deterministic_csv():
    spec = SyntheticSpec(n_rows=40, n_attributes=4, unseen_value_rate=0.2, missing_rate=0.1, seed=11)
    a, b = compare_all(spec, 4), compare_all(spec, 4)
    assert a.to_csv() == b.to_csv()
    header = a.to_csv().splitlines()[0]
    assert header == "predictor,fold,accuracy,mean_comparisons,mean_fanouts,fast_path_fraction"
    assert set(a.summary("holdout")) == {p.value for p in ALL_PREDICTORS}
    assert a.summary("holdout")["hybrid"].accuracy == a.summary("holdout")["allnn"].accuracy
    for row in a.rows:
        assert 0.0 <= row.accuracy <= 1.0


def test_random_cases_shapes():
    cases = list(random_cases(60, seed=1))
    assert len(cases) == 60
    for c in cases:
        assert len(c.dataset) <= 30 and len(c.dataset.schema) <= 5
        assert all(len(d) <= 4 for d in c.dataset.schema.domains)
    assert [c.seed for c in cases] == [c.seed for c in random_cases(60, seed=1)]
