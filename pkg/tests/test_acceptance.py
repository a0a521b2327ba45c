"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary."""

import contextlib
import time
from collections import Counter

import pytest
from scipy.stats import entropy as scipy_entropy

from deodata import (MISSING, FixedTreeSpec, Query, SplitCriterion, build_fixed_tree, build_hybrid,
                     build_tree, entropy, gain_ratio, information_gain, predict_allnn,
                     predict_allnn_naive_cost, predict_hybrid, predict_interfering,
                     predict_standard, table1_fixture)
from deodata.cli import main
from deodata.harness import SyntheticSpec, compare_all, random_cases
from deodata.tree_eval import first_mismatch_node

from conftest import ACCEPTANCE_LINES, X, Y

N_RANDOM = 1000


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  criterion {number}: {title} ({type(exc).__name__}: {exc})")
        raise
    ACCEPTANCE_LINES.append(f"PASS  criterion {number}: {title}")


@pytest.fixture(scope="module")
def cases():
    started = time.perf_counter()
    out = []
    for case in random_cases(N_RANDOM, seed=20240817):
        htree = build_hybrid(case.dataset, case.tree)
        out.append((case, htree))
    return out, time.perf_counter() - started


def test_c1_worked_example(capsys):
    with criterion(1, "worked example on Table 1 with the B,C,A tree (exact)"):
        started = time.perf_counter()
        data = table1_fixture()
        tree = build_fixed_tree(data, FixedTreeSpec(["B", "C", "A"]))
        htree = build_hybrid(data, tree)

        std = predict_standard(tree, Y)
        assert std.distribution == {"t0": 2, "t1": 2, "t2": 3} and std.label == "t2"
        itf = predict_interfering(tree, Y)
        assert itf.distribution == {"t0": 1, "t1": 2} and itf.label == "t1"
        nn, nn_champ = predict_allnn(data, Y)
        hy, hy_champ, _ = predict_hybrid(htree, Y)
        for res, champ in ((nn, nn_champ), (hy, hy_champ)):
            assert res.distribution == {"t0": 3, "t1": 2, "t2": 1} and res.label == "t0"
            assert champ.row_indices == {2, 3, 4, 8, 11, 12}

        assert first_mismatch_node(tree, X) is None
        node = tree
        while not node.is_leaf:
            node = node.children[X[node.split_index]]
        assert node.row_indices == {2, 3, 4}
        assert predict_standard(tree, X).mismatch_count == 0
        elapsed = time.perf_counter() - started
        assert elapsed < 0.1, f"took {elapsed:.3f}s"

        assert main(["demo"]) == 0
        capsys.readouterr()


def test_c2_equivalence(cases):
    built, build_time = cases
    with criterion(2, f"hybrid == all-NN on {N_RANDOM} randomized instances (exact, < 30 s)"):
        started = time.perf_counter()
        for case, htree in built:
            ref, ref_champ = predict_allnn(case.dataset, case.query)
            res, champ, _ = predict_hybrid(htree, case.query)
            assert res.distribution == ref.distribution, case.seed
            assert champ == ref_champ, case.seed
        elapsed = time.perf_counter() - started + build_time
        assert elapsed < 30, f"took {elapsed:.1f}s"
        assert len(built) >= 1000
        # the corpus must exercise both mismatch triggers
        assert any(MISSING in c.query.values for c, _ in built)
        assert any(v is not MISSING and v not in dom
                   for c, _ in built for v, dom in zip(c.query, c.dataset.schema.domains))


def test_c3_pruning_neutrality(cases):
    with criterion(3, "pruning on/off gives identical hybrid results (exact)"):
        pruned_somewhere = False
        for case, htree in cases[0]:
            on, champ_on, cost_on = predict_hybrid(htree, case.query, prune=True)
            off, champ_off, cost_off = predict_hybrid(htree, case.query, prune=False)
            assert (on.distribution, on.label, champ_on) == (off.distribution, off.label, champ_off)
            assert cost_off.branches_pruned == 0
            pruned_somewhere |= cost_on.branches_pruned > 0
        assert pruned_somewhere


def test_c4_subset_property(cases):
    with criterion(4, "interfering <= standard fallback pointwise; equal without mismatch"):
        for case, _ in cases[0]:
            std = predict_standard(case.tree, case.query)
            itf = predict_interfering(case.tree, case.query)
            mismatch = first_mismatch_node(case.tree, case.query)
            fallback = case.tree.outcome_counts if mismatch is None else mismatch.outcome_counts
            if mismatch is not None:
                assert std.distribution == fallback
                assert itf.distribution.dominated_by(fallback), case.seed
            else:
                assert itf.distribution == std.distribution, case.seed


def test_c5_cost_soundness(cases):
    with criterion(5, "hybrid comparisons <= N*K on every query"):
        for case, htree in cases[0]:
            _, _, cost = predict_hybrid(htree, case.query)
            naive = predict_allnn_naive_cost(case.dataset, case.query).attribute_comparisons
            assert naive == len(case.dataset) * len(case.dataset.schema)
            assert cost.attribute_comparisons <= naive, case.seed
        ratios = []
        for seed in range(3):
            spec = SyntheticSpec(n_rows=120, n_attributes=6, values_per_attribute=3,
                                 unseen_value_rate=0.15, missing_rate=0.15, seed=seed, n_queries=80)
            report = compare_all(spec, 5)  # raises HarnessError on any per-query violation
            assert report.hybrid_comparisons <= report.naive_comparisons
            ratios.append(report.mean_cost_ratio)
        ACCEPTANCE_LINES.append("      bench mean hybrid/naive comparison ratios: "
                                + ", ".join(f"{r:.4f}" for r in ratios))


def test_c6_split_measure_oracle():
    with criterion(6, "entropy / gain / gain ratio match scipy oracle within 1e-9; gain root is A"):
        data = table1_fixture()
        h = lambda labels: float(scipy_entropy(list(Counter(labels).values()), base=2))
        outcomes = [r.outcome for r in data.rows]
        assert abs(entropy(data.outcome_counts()) - h(outcomes)) <= 1e-9
        gains = {}
        for pos, name in enumerate(data.schema.names):
            parts = {}
            for r in data.rows:
                parts.setdefault(r.values[pos], []).append(r.outcome)
            g = h(outcomes) - sum(len(p) / len(outcomes) * h(p) for p in parts.values())
            si = float(scipy_entropy([len(p) for p in parts.values()], base=2))
            gains[name] = information_gain(data.rows, pos)
            assert abs(gains[name] - g) <= 1e-9
            assert abs(gain_ratio(data.rows, pos) - g / si) <= 1e-9
        # published approximations, loosely
        assert abs(gains["A"] - 0.1424) < 1e-3 and abs(gains["B"] - 0.0064) < 1e-3
        assert build_tree(data, SplitCriterion.INFORMATION_GAIN).split_attribute == "A"


def test_c7_accuracy_report():
    with criterion(7, "accuracy trend report produced (non-blocking, inspected only)"):
        lines = []
        loo = compare_all(table1_fixture(), 15)
        lines.append("table1 LOO: " + ", ".join(f"{p}={r.accuracy:.3f}" for p, r in loo.summary().items()))
        for seed in range(3):
            spec = SyntheticSpec(n_rows=150, n_attributes=6, values_per_attribute=3,
                                 unseen_value_rate=0.1, missing_rate=0.1, seed=seed, n_queries=100)
            rep = compare_all(spec, 5)
            lines.append(f"synthetic seed={seed} holdout: "
                         + ", ".join(f"{p}={r.accuracy:.3f}" for p, r in rep.summary("holdout").items()))
            assert len(rep.summary()) == 4
        assert len(loo.summary()) == 4
        ACCEPTANCE_LINES.extend("      " + ln for ln in lines)
