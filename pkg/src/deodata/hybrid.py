"""Tree-hosted all-NN.

The hybrid answers from a single leaf when the query matches it exactly, and
otherwise walks the tree depth-first while tracking the current champions
(rows with the highest match count so far). A subtree is abandoned once its
accumulated mismatches rule out reaching the champions' count, and
attributes that are constant across a node's rows are compared once for the
whole subtree instead of once per row.

Both paths return exactly what :func:`deodata.allnn.predict_allnn` returns;
only the :class:`CostCounter` differs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .allnn import ChampionSet
from .dataset import MISSING, Dataset, Query
from .tree import TreeNode, check_tree
from .tree_eval import PredictionResult


@dataclass
class CostCounter:
    attribute_comparisons: int = 0
    branches_pruned: int = 0
    rows_skipped_by_pruning: int = 0
    fast_path_taken: bool = False


@dataclass
class ChampionState:
    n_attributes: int
    best_match_count: int = -1
    rows: set[int] = field(default_factory=set)

    @property
    def mismatch_budget(self) -> int:
        return self.n_attributes - self.best_match_count

    def offer(self, row_index: int, score: int) -> None:
        if score > self.best_match_count:
            self.best_match_count = score
            self.rows = {row_index}
        elif score == self.best_match_count:
            self.rows.add(row_index)


@dataclass(frozen=True, eq=False)
class HybridTree:
    root: TreeNode
    dataset: Dataset
    # node -> {attribute position: value shared by every row under the node}
    shared_attributes: dict

    def shared_by_name(self, node: TreeNode) -> dict[str, str]:
        names = self.dataset.schema.names
        return {names[pos]: v for pos, v in sorted(self.shared_attributes[node].items())}


def build_hybrid(dataset: Dataset, tree: TreeNode) -> HybridTree:
    check_tree(tree, dataset)
    shared = {}
    k = len(dataset.schema)

    def compute(node: TreeNode) -> dict[int, str]:
        if node.is_leaf:
            rows = [dataset[i].values for i in node.row_indices]
            first = rows[0]
            common = {pos: first[pos] for pos in range(k)
                      if all(r[pos] == first[pos] for r in rows)}
        else:
            child_maps = [compute(c) for _, c in node.ordered_children()]
            common = dict(child_maps[0])
            for m in child_maps[1:]:
                common = {pos: v for pos, v in common.items() if m.get(pos) == v}
        shared[node] = common
        return common

    compute(tree)
    return HybridTree(root=tree, dataset=dataset, shared_attributes=shared)


def predict_hybrid(htree: HybridTree, query: Query, prune: bool = True,
                   trace: list | None = None) -> tuple[PredictionResult, ChampionSet, CostCounter]:
    """All-NN prediction hosted on the tree.

    ``prune=False`` disables champion-threshold abandonment (results are
    unchanged, only the cost grows). If ``trace`` is a list, the best match
    count is appended to it after every champion update.
    """
    dataset = htree.dataset
    dataset.check_query(query)
    k = len(dataset.schema)
    rows = dataset.rows
    shared = htree.shared_attributes
    cost = CostCounter()
    state = ChampionState(k)
    q = query.values

    def matches(pos: int, value: str) -> bool:
        cost.attribute_comparisons += 1
        qv = q[pos]
        return qv is not MISSING and qv == value

    def over_budget(mismatches: int) -> bool:
        return prune and mismatches > state.mismatch_budget

    def skip(node: TreeNode) -> None:
        cost.branches_pruned += 1
        cost.rows_skipped_by_pruning += len(node.row_indices)

    def finish_leaf(node: TreeNode, decided: dict[int, bool], mismatches: int) -> None:
        undecided = [pos for pos in range(k) if pos not in decided]
        for i in sorted(node.row_indices):
            values = rows[i].values
            m = mismatches
            for pos in undecided:
                if not matches(pos, values[pos]):
                    m += 1
                    if over_budget(m):
                        break
            else:
                state.offer(i, k - m)
                if trace is not None:
                    trace.append(state.best_match_count)
                continue
            cost.rows_skipped_by_pruning += 1

    def ordered_children(node: TreeNode) -> list[TreeNode]:
        qv = q[node.split_index]
        first = node.children.get(qv) if qv is not MISSING else None
        rest = [c for _, c in node.ordered_children() if c is not first]
        return [first] + rest if first is not None else rest

    # Returns True when the fast path answered and the walk must stop.
    def visit(node: TreeNode, decided: dict[int, bool], mismatches: int, on_first_path: bool) -> bool:
        if over_budget(mismatches):
            skip(node)
            return False
        decided = dict(decided)
        for pos, value in sorted(shared[node].items()):
            if pos in decided:
                continue
            ok = matches(pos, value)
            decided[pos] = ok
            if not ok:
                mismatches += 1
                if over_budget(mismatches):
                    skip(node)
                    return False
        if node.is_leaf:
            if on_first_path and mismatches == 0 and len(decided) == k:
                # every row here equals the query on all attributes
                for i in node.row_indices:
                    state.offer(i, k)
                if trace is not None:
                    trace.append(state.best_match_count)
                cost.fast_path_taken = True
                return True
            finish_leaf(node, decided, mismatches)
            return False
        first_path_child = None
        if on_first_path and mismatches == 0:
            qv = q[node.split_index]
            first_path_child = node.children.get(qv) if qv is not MISSING else None
        for child in ordered_children(node):
            if visit(child, decided, mismatches, child is first_path_child):
                return True
        return False

    visit(htree.root, {}, 0, True)
    champ = ChampionSet(state.best_match_count, state.rows)
    dist = dataset.outcome_counts(champ.row_indices)
    leaves = sum(1 for leaf in htree.root.leaves() if leaf.row_indices & champ.row_indices)
    result = PredictionResult.of(dist, leaves_aggregated=leaves,
                                 comparisons=cost.attribute_comparisons)
    return result, champ, cost


def predict_allnn_naive_cost(dataset: Dataset, query: Query) -> CostCounter:
    """Cost of the flat all-NN scan: one comparison per (row, attribute) pair."""
    dataset.check_query(query)
    cost = CostCounter()
    for row in dataset.rows:
        score = 0
        for v, qv in zip(row.values, query.values):
            cost.attribute_comparisons += 1
            score += qv is not MISSING and qv == v
    return cost

