"""Command-line entry point: ``deodata {demo,train,predict,eval,bench}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .allnn import predict_allnn
from .dataset import MISSING, ContractViolation, DatasetError, Query, load_csv, table1_fixture
from .harness import (ALL_PREDICTORS, HarnessError, Predictor, SpecError, SyntheticSpec,
                      compare_all, k_fold_accuracy)
from .hybrid import build_hybrid, predict_hybrid
from .tree import (FixedTreeSpec, SplitCriterion, TreeError, build_fixed_tree, build_tree,
                   check_tree, count_nodes, dump_tree, load_tree)
from .tree_eval import predict_interfering, predict_standard

MISSING_TOKEN = "?"
DEMO_ORDER = ("B", "C", "A")


class CliError(Exception):
    pass


def _fmt_dist(dist) -> str:
    return "{" + ", ".join(f"{k}:{v}" for k, v in dist.items()) + "}"


def _fmt_rows(indices) -> str:
    return "{" + ",".join(f"{i:02d}" for i in sorted(indices)) + "}"


# (query, predictor) -> (label, distribution, champion rows or None)
DEMO_EXPECTED = {
    ("X", "standard"): ("t0", {"t0": 2, "t2": 1}, None),
    ("X", "interfering"): ("t0", {"t0": 2, "t2": 1}, None),
    ("X", "all-NN"): ("t0", {"t0": 2, "t2": 1}, {2, 3, 4}),
    ("X", "hybrid"): ("t0", {"t0": 2, "t2": 1}, {2, 3, 4}),
    ("Y", "standard"): ("t2", {"t0": 2, "t1": 2, "t2": 3}, None),
    ("Y", "interfering"): ("t1", {"t0": 1, "t1": 2}, None),
    ("Y", "all-NN"): ("t0", {"t0": 3, "t1": 2, "t2": 1}, {2, 3, 4, 8, 11, 12}),
    ("Y", "hybrid"): ("t0", {"t0": 3, "t1": 2, "t2": 1}, {2, 3, 4, 8, 11, 12}),
}

DEMO_QUERIES = {"X": ("a0", "b0", "c2"), "Y": ("a0", "b1", "c2")}


def run_demo() -> tuple[str, list[str]]:
    """Return the demo text and a list of disagreements with the expected values."""
    data = table1_fixture()
    tree = build_fixed_tree(data, FixedTreeSpec(DEMO_ORDER))
    htree = build_hybrid(data, tree)
    out = [f"Table 1: {len(data)} rows, fixed tree order {','.join(DEMO_ORDER)}"]
    failures = []
    for name, values in DEMO_QUERIES.items():
        q = Query(values)
        out.append(f"query {name} = (A={values[0]}, B={values[1]}, C={values[2]})")
        std = predict_standard(tree, q)
        itf = predict_interfering(tree, q)
        nn, nn_champ = predict_allnn(data, q)
        hy, hy_champ, cost = predict_hybrid(htree, q)
        results = {
            "standard": (std, None, f"mismatches={std.mismatch_count}"),
            "interfering": (itf, None, f"fanouts={itf.fanout_events} leaves={itf.leaves_aggregated}"),
            "all-NN": (nn, nn_champ, f"comparisons={nn.comparisons}"),
            "hybrid": (hy, hy_champ, f"comparisons={cost.attribute_comparisons} "
                                     f"pruned={cost.branches_pruned} "
                                     f"fast_path={'yes' if cost.fast_path_taken else 'no'}"),
        }
        for pname, (res, champ, extra) in results.items():
            line = (f"  {name} {pname} -> {res.label} ({res.distribution[res.label]})  "
                    f"{_fmt_dist(res.distribution)}")
            if champ is not None:
                line += f"  champions={_fmt_rows(champ.row_indices)} best={champ.best_match_count}"
            out.append(f"{line}  {extra}")
            label, dist, champs = DEMO_EXPECTED[(name, pname)]
            got_champs = None if champ is None else set(champ.row_indices)
            if res.label != label or res.distribution != dist or got_champs != champs:
                failures.append(f"{name} {pname}: expected {label} {dist} {champs}")
    return "\n".join(out), failures


def cmd_demo(args) -> int:
    text, failures = run_demo()
    print(text)
    if failures:
        for f in failures:
            print(f"SELF-CHECK FAILED: {f}", file=sys.stderr)
        return 1
    print("self-check: all values agree with the worked example")
    return 0


def _parse_order(text: str | None):
    if not text:
        return None
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _load_data(path):
    if path is None:
        raise CliError("--data is required")
    return load_csv(path)


def _build(dataset, criterion: str, fixed_order):
    if fixed_order:
        return build_fixed_tree(dataset, FixedTreeSpec(fixed_order))
    return build_tree(dataset, SplitCriterion(criterion))


def cmd_train(args) -> int:
    dataset = _load_data(args.data)
    tree = _build(dataset, args.criterion, _parse_order(args.fixed_order))
    text = dump_tree(tree, dataset.schema.names)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    nodes, leaves = count_nodes(tree)
    root = tree.split_attribute or "(leaf)"
    print(f"trained tree: {nodes} nodes, {leaves} leaves, root splits on {root}",
          file=sys.stderr if not args.out else sys.stdout)
    return 0


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_queries(path, attribute_names) -> list[Query]:
    """Query CSV: header of attribute names (optionally led by ``outcome``), ``?`` = missing."""
    rows = [r for r in csv.reader(io.StringIO(_read(path))) if any(c.strip() for c in r)]
    if not rows:
        raise CliError(f"{path}: empty query file")
    header = [c.strip() for c in rows[0]]
    skip = 1 if header and header[0] == "outcome" else 0
    if tuple(header[skip:]) != tuple(attribute_names):
        raise CliError(f"{path}: query columns {header[skip:]} do not match model attributes "
                       f"{list(attribute_names)}")
    queries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise CliError(f"{path}, line {lineno}: expected {len(header)} fields")
        vals = [c.strip() for c in row[skip:]]
        queries.append(Query(MISSING if v == MISSING_TOKEN else v for v in vals))
    return queries


PREDICT_COLUMNS = ("query", "label", "distribution", "champions", "best_match_count",
                   "mismatch_count", "fanout_events", "leaves_aggregated", "attribute_comparisons",
                   "branches_pruned", "rows_skipped_by_pruning", "fast_path_taken")


def cmd_predict(args) -> int:
    if not args.model:
        raise CliError("--model is required")
    if not args.queries:
        raise CliError("--queries is required")
    try:
        tree, names = load_tree(_read(args.model))
    except TreeError as exc:
        raise CliError(f"{args.model}: {exc}") from exc
    predictor = Predictor(args.predictor)
    dataset = None
    if args.data or predictor in (Predictor.ALLNN, Predictor.HYBRID):
        dataset = _load_data(args.data)
        if dataset.schema.names != names:
            raise CliError(f"dataset attributes {list(dataset.schema.names)} do not match "
                           f"model attributes {list(names)}")
        check_tree(tree, dataset)
    queries = read_queries(args.queries, names)
    htree = build_hybrid(dataset, tree) if predictor is Predictor.HYBRID else None

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PREDICT_COLUMNS)
    for i, q in enumerate(queries):
        champ = cost = None
        if predictor is Predictor.STANDARD:
            res = predict_standard(tree, q)
        elif predictor is Predictor.INTERFERING:
            res = predict_interfering(tree, q)
        elif predictor is Predictor.ALLNN:
            res, champ = predict_allnn(dataset, q)
        else:
            res, champ, cost = predict_hybrid(htree, q)
        w.writerow([
            i, res.label, res.distribution.format(),
            "" if champ is None else ";".join(str(r) for r in sorted(champ.row_indices)),
            "" if champ is None else champ.best_match_count,
            res.mismatch_count, res.fanout_events, res.leaves_aggregated,
            cost.attribute_comparisons if cost else res.comparisons,
            cost.branches_pruned if cost else 0,
            cost.rows_skipped_by_pruning if cost else 0,
            int(cost.fast_path_taken) if cost else 0,
        ])
    if args.out:
        _write(args.out, buf.getvalue())
        print(f"wrote {len(queries)} predictions to {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _emit_report(report, out) -> None:
    if out:
        _write(out, report.to_csv())
    print(report.format_table())


def cmd_eval(args) -> int:
    dataset = _load_data(args.data)
    order = _parse_order(args.fixed_order)
    criterion = SplitCriterion(args.criterion)
    if args.predictor:
        rows = k_fold_accuracy(dataset, args.k, Predictor(args.predictor), criterion, order)
        for r in rows:
            print(f"{r.predictor} fold={r.fold} n={r.n_queries} accuracy={r.accuracy:.4f}")
        return 0
    _emit_report(compare_all(dataset, args.k, criterion, order), args.out)
    return 0


def cmd_bench(args) -> int:
    spec = SyntheticSpec(
        n_rows=args.rows, n_attributes=args.attributes, values_per_attribute=args.values,
        n_outcomes=args.outcomes, unseen_value_rate=args.unseen_rate,
        missing_rate=args.missing_rate, seed=args.seed, n_queries=args.queries_count,
    )
    spec.validate()
    if args.k > spec.n_rows:
        raise CliError(f"--k {args.k} exceeds the {spec.n_rows} generated rows")
    report = compare_all(spec, args.k, SplitCriterion(args.criterion), _parse_order(args.fixed_order))
    _emit_report(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deodata", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("demo", help="reproduce the Table 1 worked example and self-check it")

    def tree_flags(p):
        p.add_argument("--criterion", choices=[c.value for c in SplitCriterion], default="gain")
        p.add_argument("--fixed-order", help="comma-separated attribute order, e.g. B,C,A")

    p = sub.add_parser("train", help="build a tree from a CSV and serialize it")
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="model output path (stdout if omitted)")
    tree_flags(p)

    predictors = [x.value for x in ALL_PREDICTORS]
    p = sub.add_parser("predict", help="predict labels for a query CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="training CSV backing the model (needed for allnn/hybrid)")
    p.add_argument("--queries", required=True)
    p.add_argument("--predictor", choices=predictors, default="hybrid")
    p.add_argument("--out")

    p = sub.add_parser("eval", help="k-fold accuracy on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--predictor", choices=predictors,
                   help="evaluate one predictor only (default: compare all four)")
    p.add_argument("--out", help="report CSV path")
    tree_flags(p)

    p = sub.add_parser("bench", help="compare all predictors on a synthetic dataset")
    p.add_argument("--rows", type=int, default=200)
    p.add_argument("--attributes", type=int, default=6)
    p.add_argument("--values", type=int, default=3)
    p.add_argument("--outcomes", type=int, default=3)
    p.add_argument("--unseen-rate", type=float, default=0.1)
    p.add_argument("--missing-rate", type=float, default=0.1)
    p.add_argument("--queries", dest="queries_count", type=int, default=100,
                   help="number of generated holdout queries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", help="report CSV path")
    tree_flags(p)
    return parser


COMMANDS = {"demo": cmd_demo, "train": cmd_train, "predict": cmd_predict,
            "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, DatasetError, TreeError, ContractViolation, SpecError, HarnessError) as exc:
        print(f"deodata {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
