"""Synthetic data, k-fold comparison of the four predictors, and randomized case drivers."""

from __future__ import annotations

import csv
import enum
import io
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .allnn import predict_allnn
from .dataset import MISSING, Dataset, Query
from .hybrid import build_hybrid, predict_allnn_naive_cost, predict_hybrid
from .tree import FixedTreeSpec, SplitCriterion, TreeNode, build_fixed_tree, build_tree
from .tree_eval import predict_interfering, predict_standard

LABEL_NOISE = 0.1


class SpecError(ValueError):
    pass


class HarnessError(RuntimeError):
    """An invariant the harness checks on every query did not hold."""


class Predictor(enum.Enum):
    STANDARD = "standard"
    INTERFERING = "interfering"
    ALLNN = "allnn"
    HYBRID = "hybrid"


ALL_PREDICTORS = tuple(Predictor)


@dataclass(frozen=True)
class SyntheticSpec:
    n_rows: int = 60
    n_attributes: int = 4
    values_per_attribute: int = 3
    n_outcomes: int = 3
    unseen_value_rate: float = 0.0
    missing_rate: float = 0.0
    seed: int = 0
    n_queries: int = 50

    def validate(self) -> None:
        for name in ("n_rows", "n_attributes", "values_per_attribute", "n_outcomes", "n_queries"):
            if getattr(self, name) < 1:
                raise SpecError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("unseen_value_rate", "missing_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise SpecError(f"{name} must lie in [0, 1], got {rate}")
        if self.unseen_value_rate + self.missing_rate > 1.0:
            raise SpecError("unseen_value_rate + missing_rate must not exceed 1")
        if self.unseen_value_rate > 0 and self.values_per_attribute < 2:
            raise SpecError("values_per_attribute must be >= 2 to withhold unseen values")


LabeledQuery = tuple[Query, str]


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, list[LabeledQuery]]:
    """Deterministic training set plus labeled queries.

    The outcome is a random lookup table over a random subset of up to three
    attributes, with 10% label noise. When ``unseen_value_rate > 0`` the last
    value of every attribute is withheld from training and used for the
    unseen query slots.
    """
    spec.validate()
    rng = random.Random(spec.seed)
    k, v = spec.n_attributes, spec.values_per_attribute
    names = [f"x{i}" for i in range(k)]
    values = [[f"v{j}" for j in range(v)] for _ in range(k)]
    outcomes = [f"t{j}" for j in range(spec.n_outcomes)]
    withheld = spec.unseen_value_rate > 0
    pools = [vals[:-1] if withheld else vals for vals in values]

    relevant = sorted(rng.sample(range(k), rng.randint(1, min(3, k))))
    table = {combo: rng.choice(outcomes)
             for combo in itertools.product(range(v), repeat=len(relevant))}

    def label_of(row: Sequence[str]) -> str:
        if rng.random() < LABEL_NOISE:
            return rng.choice(outcomes)
        return table[tuple(int(row[p][1:]) for p in relevant)]

    records = []
    for _ in range(spec.n_rows):
        row = [rng.choice(pool) for pool in pools]
        records.append((row, label_of(row)))
    dataset = Dataset.from_records(names, records)

    observed = [sorted(dom) for dom in dataset.schema.domains]
    queries = []
    for _ in range(spec.n_queries):
        base = [rng.choice(dom) for dom in observed]
        label = label_of(base)
        slots = []
        for pos, value in enumerate(base):
            r = rng.random()
            if r < spec.unseen_value_rate:
                slots.append(values[pos][-1])
            elif r < spec.unseen_value_rate + spec.missing_rate:
                slots.append(MISSING)
            else:
                slots.append(value)
        queries.append((Query(slots), label))
    return dataset, queries


@dataclass
class _Tally:
    n: int = 0
    correct: int = 0
    comparisons: int = 0
    fanouts: int = 0
    fast: int = 0

    def add(self, other: "_Tally") -> None:
        self.n += other.n
        self.correct += other.correct
        self.comparisons += other.comparisons
        self.fanouts += other.fanouts
        self.fast += other.fast


@dataclass(frozen=True)
class ReportRow:
    predictor: str
    fold: str
    n_queries: int
    accuracy: float
    mean_comparisons: float
    mean_fanouts: float
    fast_path_fraction: float

    @classmethod
    def from_tally(cls, predictor: Predictor, fold, t: _Tally) -> "ReportRow":
        n = max(t.n, 1)
        return cls(predictor.value, str(fold), t.n, t.correct / n, t.comparisons / n,
                   t.fanouts / n, t.fast / n)


@dataclass
class ComparisonReport:
    rows: list[ReportRow] = field(default_factory=list)
    naive_comparisons: int = 0
    hybrid_comparisons: int = 0
    # mean over queries of hybrid comparisons / (N * K)
    mean_cost_ratio: float = 0.0

    CSV_COLUMNS = ("predictor", "fold", "accuracy", "mean_comparisons", "mean_fanouts",
                   "fast_path_fraction")

    def summary(self, fold: str = "all") -> dict[str, ReportRow]:
        return {r.predictor: r for r in self.rows if r.fold == fold}

    def folds(self, predictor: Predictor) -> list[ReportRow]:
        return [r for r in self.rows if r.predictor == predictor.value and r.fold.isdigit()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.predictor, r.fold, f"{r.accuracy:.6f}", f"{r.mean_comparisons:.6f}",
                        f"{r.mean_fanouts:.6f}", f"{r.fast_path_fraction:.6f}"])
        return buf.getvalue()

    def format_table(self) -> str:
        lines = [f"{'predictor':<12} {'fold':<8} {'n':>5} {'accuracy':>9} {'comparisons':>12} "
                 f"{'fanouts':>8} {'fast':>6}"]
        for r in self.rows:
            if r.fold.isdigit():
                continue
            lines.append(f"{r.predictor:<12} {r.fold:<8} {r.n_queries:>5} {r.accuracy:>9.4f} "
                         f"{r.mean_comparisons:>12.2f} {r.mean_fanouts:>8.3f} "
                         f"{r.fast_path_fraction:>6.3f}")
        lines.append(f"hybrid/naive comparison ratio: mean per query {self.mean_cost_ratio:.4f}, "
                     f"total {self.hybrid_comparisons}/{self.naive_comparisons}")
        return "\n".join(lines)


def _train_tree(train: Dataset, criterion: SplitCriterion, fixed_order) -> TreeNode:
    if fixed_order:
        return build_fixed_tree(train, FixedTreeSpec(fixed_order))
    return build_tree(train, criterion)


class _CostLedger:
    def __init__(self):
        self.naive = 0
        self.hybrid = 0
        self.ratio_sum = 0.0
        self.count = 0


def _evaluate(train: Dataset, queries: Sequence[LabeledQuery], predictors, criterion,
              fixed_order, ledger: _CostLedger | None = None) -> dict[Predictor, _Tally]:
    tree = _train_tree(train, criterion, fixed_order)
    htree = build_hybrid(train, tree) if Predictor.HYBRID in predictors else None
    tallies = {p: _Tally() for p in predictors}
    for query, truth in queries:
        allnn_out = None
        for p in predictors:
            t = _Tally(n=1)
            if p is Predictor.STANDARD:
                res = predict_standard(tree, query)
            elif p is Predictor.INTERFERING:
                res = predict_interfering(tree, query)
            elif p is Predictor.ALLNN:
                res, champ = allnn_out = predict_allnn(train, query)
            else:
                res, champ, cost = predict_hybrid(htree, query)
                naive = predict_allnn_naive_cost(train, query).attribute_comparisons
                if cost.attribute_comparisons > naive:
                    raise HarnessError(f"hybrid used {cost.attribute_comparisons} comparisons, "
                                       f"naive all-NN needs {naive}")
                reference = allnn_out or predict_allnn(train, query)
                if (res.distribution, champ) != (reference[0].distribution, reference[1]):
                    raise HarnessError(f"hybrid diverged from all-NN on query {query.values}")
                t.fast = int(cost.fast_path_taken)
                if ledger is not None:
                    ledger.naive += naive
                    ledger.hybrid += cost.attribute_comparisons
                    ledger.ratio_sum += cost.attribute_comparisons / naive if naive else 1.0
                    ledger.count += 1
            t.correct = int(res.label == truth)
            t.comparisons = res.comparisons
            t.fanouts = res.fanout_events
            tallies[p].add(t)
    return tallies


def _fold_splits(dataset: Dataset, k: int):
    n = len(dataset)
    if not 2 <= k <= n:
        raise SpecError(f"k must satisfy 2 <= k <= {n} (number of rows), got {k}")
    for f in range(k):
        train = dataset.subset(i for i in range(n) if i % k != f)
        held = [(Query.from_row(dataset[i]), dataset[i].outcome) for i in range(f, n, k)]
        yield f, train, held


def k_fold_accuracy(dataset: Dataset, k: int, predictor: Predictor,
                    criterion: SplitCriterion = SplitCriterion.INFORMATION_GAIN,
                    fixed_order: Sequence[str] | None = None) -> list[ReportRow]:
    """Index-stride k-fold (row i goes to fold i mod k).

    Returns one row per fold followed by the pooled ``"all"`` row.
    """
    predictor = Predictor(predictor)
    pooled = _Tally()
    rows = []
    preds = (Predictor.ALLNN, predictor) if predictor is Predictor.HYBRID else (predictor,)
    for f, train, held in _fold_splits(dataset, k):
        t = _evaluate(train, held, preds, criterion, fixed_order)[predictor]
        rows.append(ReportRow.from_tally(predictor, f, t))
        pooled.add(t)
    rows.append(ReportRow.from_tally(predictor, "all", pooled))
    return rows


def compare_all(source: Dataset | SyntheticSpec, k: int,
                criterion: SplitCriterion = SplitCriterion.INFORMATION_GAIN,
                fixed_order: Sequence[str] | None = None) -> ComparisonReport:
    """Run all four predictors under k-fold, plus a holdout pass for synthetic specs.

    Hybrid results are checked against all-NN on every query, and its cost
    against the naive N*K scan; a violation raises :class:`HarnessError`.
    """
    holdout = None
    if isinstance(source, SyntheticSpec):
        dataset, holdout = generate_synthetic(source)
    else:
        dataset = source
    ledger = _CostLedger()
    per_fold = {p: [] for p in ALL_PREDICTORS}
    pooled = {p: _Tally() for p in ALL_PREDICTORS}
    for f, train, held in _fold_splits(dataset, k):
        tallies = _evaluate(train, held, ALL_PREDICTORS, criterion, fixed_order, ledger)
        for p, t in tallies.items():
            per_fold[p].append(ReportRow.from_tally(p, f, t))
            pooled[p].add(t)

    report = ComparisonReport()
    for p in ALL_PREDICTORS:
        report.rows.extend(per_fold[p])
    for p in ALL_PREDICTORS:
        report.rows.append(ReportRow.from_tally(p, "all", pooled[p]))
    if holdout:
        tallies = _evaluate(dataset, holdout, ALL_PREDICTORS, criterion, fixed_order, ledger)
        for p in ALL_PREDICTORS:
            report.rows.append(ReportRow.from_tally(p, "holdout", tallies[p]))

    cv = report.summary("all")
    if cv["hybrid"].accuracy != cv["allnn"].accuracy:
        raise HarnessError("hybrid accuracy differs from all-NN accuracy")
    report.naive_comparisons = ledger.naive
    report.hybrid_comparisons = ledger.hybrid
    report.mean_cost_ratio = ledger.ratio_sum / ledger.count if ledger.count else 0.0
    return report


@dataclass(frozen=True)
class RandomCase:
    seed: int
    dataset: Dataset
    tree: TreeNode
    query: Query
    builder: str


def random_cases(count: int, seed: int = 0, max_rows: int = 30, max_attributes: int = 5,
                 max_values: int = 4) -> Iterator[RandomCase]:
    """Small seeded (dataset, tree, query) instances for the randomized property suites.

    Trees alternate between gain, gain-ratio and random fixed-order builders;
    queries mix seen, unseen and missing values.
    """
    rng = random.Random(seed)
    for case in range(count):
        case_seed = rng.getrandbits(64)
        crng = random.Random(case_seed)
        unseen = crng.choice([0.0, 0.0, 0.2, 0.5])
        missing = crng.choice([0.0, 0.2, 0.4])
        spec = SyntheticSpec(
            n_rows=crng.randint(1, max_rows),
            n_attributes=crng.randint(1, max_attributes),
            values_per_attribute=crng.randint(2, max_values),
            n_outcomes=crng.randint(1, 4),
            unseen_value_rate=unseen,
            missing_rate=missing,
            seed=case_seed,
            n_queries=1,
        )
        dataset, labeled = generate_synthetic(spec)
        query = labeled[0][0]
        if crng.random() < 0.25:
            # a copy of a training row, possibly perturbed, exercises the fast path
            values = list(dataset[crng.randrange(len(dataset))].values)
            if crng.random() < 0.5:
                pos = crng.randrange(len(values))
                values[pos] = crng.choice([MISSING, "zz", values[pos]])
            query = Query(values)
        builder = ("gain", "gainratio", "fixed")[case % 3]
        if builder == "fixed":
            order = list(dataset.schema.names)
            crng.shuffle(order)
            tree = build_fixed_tree(dataset, FixedTreeSpec(order))
        else:
            tree = build_tree(dataset, SplitCriterion(builder))
        yield RandomCase(case_seed, dataset, tree, query, builder)
