"""Standard mismatch fallback and interfering-path evaluation of a decision tree."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import MISSING, ContractViolation, OutcomeDistribution, Query, argmax_label, merge_all
from .tree import TreeNode, subtree_outcomes


@dataclass(frozen=True)
class PredictionResult:
    distribution: OutcomeDistribution
    label: str
    mismatch_count: int = 0
    fanout_events: int = 0
    leaves_aggregated: int = 0
    # branch lookups performed while descending; one per internal node visited
    comparisons: int = 0

    @classmethod
    def of(cls, distribution: OutcomeDistribution, **diagnostics) -> "PredictionResult":
        return cls(distribution=distribution, label=argmax_label(distribution), **diagnostics)


def _branch_value(node: TreeNode, query: Query):
    idx = node.split_index
    if idx is None or idx >= len(query):
        raise ContractViolation(
            f"query with {len(query)} values cannot be evaluated at a split on "
            f"{node.split_attribute!r} (position {idx})")
    return query[idx]


def _matching_child(node: TreeNode, query: Query) -> TreeNode | None:
    value = _branch_value(node, query)
    if value is MISSING:
        return None
    return node.children.get(value)


def first_mismatch_node(tree: TreeNode, query: Query) -> TreeNode | None:
    """Node where standard descent stops for lack of a matching branch, or None."""
    node = tree
    while not node.is_leaf:
        child = _matching_child(node, query)
        if child is None:
            return node
        node = child
    return None


def predict_standard(tree: TreeNode, query: Query) -> PredictionResult:
    """Descend to a leaf; on the first mismatch predict from every outcome under that node."""
    node = tree
    comparisons = 0
    while not node.is_leaf:
        comparisons += 1
        child = _matching_child(node, query)
        if child is None:
            leaves = sum(1 for _ in node.leaves())
            return PredictionResult.of(subtree_outcomes(node), mismatch_count=1,
                                       leaves_aggregated=leaves, comparisons=comparisons)
        node = child
    return PredictionResult.of(node.outcome_counts, leaves_aggregated=1, comparisons=comparisons)


def predict_interfering(tree: TreeNode, query: Query) -> PredictionResult:
    """Like :func:`predict_standard`, but a mismatch node sends the query down every branch.

    Each parallel path keeps evaluating the remaining attributes normally and
    fans out again on its own mismatches. Reached leaves are merged by plain
    count addition.
    """
    leaves: list[OutcomeDistribution] = []
    stats = {"mismatches": 0, "comparisons": 0}

    def walk(node: TreeNode):
        if node.is_leaf:
            leaves.append(node.outcome_counts)
            return
        stats["comparisons"] += 1
        child = _matching_child(node, query)
        if child is not None:
            walk(child)
            return
        stats["mismatches"] += 1
        for _, c in node.ordered_children():
            walk(c)

    walk(tree)
    return PredictionResult.of(
        merge_all(leaves),
        mismatch_count=stats["mismatches"],
        fanout_events=stats["mismatches"],
        leaves_aggregated=len(leaves),
        comparisons=stats["comparisons"],
    )
