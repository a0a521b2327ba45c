"""Decision-tree construction and the node model shared by all tree predictors.

Every node keeps the outcome counts and training-row indices it covers, so a
tree can back both the standard evaluators and the all-NN hybrid.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .dataset import ContractViolation, Dataset, OutcomeDistribution, TrainingRow, merge_all


class TreeError(ValueError):
    pass


class SplitCriterion(enum.Enum):
    INFORMATION_GAIN = "gain"
    GAIN_RATIO = "gainratio"


@dataclass(frozen=True)
class FixedTreeSpec:
    attribute_order: tuple[str, ...]

    def __init__(self, attribute_order: Iterable[str]):
        object.__setattr__(self, "attribute_order", tuple(attribute_order))


@dataclass(frozen=True, eq=False)
class TreeNode:
    outcome_counts: OutcomeDistribution
    row_indices: frozenset[int]
    split_attribute: str | None = None
    split_index: int | None = None
    children: dict = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.split_attribute is None

    @property
    def kind(self) -> str:
        return "leaf" if self.is_leaf else "internal"

    def ordered_children(self) -> list[tuple[str, "TreeNode"]]:
        return sorted(self.children.items())

    def iter_nodes(self) -> Iterator["TreeNode"]:
        yield self
        for _, child in self.ordered_children():
            yield from child.iter_nodes()

    def leaves(self) -> Iterator["TreeNode"]:
        return (n for n in self.iter_nodes() if n.is_leaf)


def entropy(dist: OutcomeDistribution) -> float:
    n = dist.total
    if n == 0:
        return 0.0
    h = 0.0
    for _, c in dist.items():
        p = c / n
        h -= p * math.log2(p)
    return h + 0.0


def _partition(rows: Sequence[TrainingRow], pos: int) -> dict[str, list[TrainingRow]]:
    parts = defaultdict(list)
    for r in rows:
        parts[r.values[pos]].append(r)
    return parts


def _attr_position(rows: Sequence[TrainingRow], attribute, schema_names=None) -> int:
    if isinstance(attribute, int):
        return attribute
    if schema_names is None:
        raise ContractViolation("attribute given by name requires schema_names")
    return list(schema_names).index(attribute)


def information_gain(rows: Sequence[TrainingRow], attribute, schema_names=None) -> float:
    """Parent entropy minus the size-weighted entropy of the partition by ``attribute``.

    ``attribute`` is a column position, or a name when ``schema_names`` is given.
    """
    rows = list(rows)
    if not rows:
        raise ContractViolation("information_gain needs at least one row")
    pos = _attr_position(rows, attribute, schema_names)
    n = len(rows)
    parent = entropy(OutcomeDistribution.from_labels(r.outcome for r in rows))
    children = sum(
        len(part) / n * entropy(OutcomeDistribution.from_labels(r.outcome for r in part))
        for part in _partition(rows, pos).values()
    )
    return max(parent - children, 0.0)


def split_information(rows: Sequence[TrainingRow], attribute, schema_names=None) -> float:
    rows = list(rows)
    pos = _attr_position(rows, attribute, schema_names)
    sizes = Counter(r.values[pos] for r in rows)
    return entropy(OutcomeDistribution(sizes))


def gain_ratio(rows: Sequence[TrainingRow], attribute, schema_names=None) -> float:
    split_info = split_information(rows, attribute, schema_names)
    if split_info == 0.0:
        return 0.0
    return information_gain(rows, attribute, schema_names) / split_info


_MEASURES = {
    SplitCriterion.INFORMATION_GAIN: information_gain,
    SplitCriterion.GAIN_RATIO: gain_ratio,
}


def _leaf(rows: Sequence[TrainingRow]) -> TreeNode:
    return TreeNode(
        outcome_counts=OutcomeDistribution.from_labels(r.outcome for r in rows),
        row_indices=frozenset(r.index for r in rows),
    )


def _internal(attribute: str, index: int, children: dict[str, TreeNode]) -> TreeNode:
    return TreeNode(
        outcome_counts=merge_all(c.outcome_counts for c in children.values()),
        row_indices=frozenset().union(*(c.row_indices for c in children.values())),
        split_attribute=attribute,
        split_index=index,
        children=children,
    )


def _is_pure(rows: Sequence[TrainingRow]) -> bool:
    return len({r.outcome for r in rows}) <= 1


def build_tree(dataset: Dataset, criterion: SplitCriterion = SplitCriterion.INFORMATION_GAIN) -> TreeNode:
    """Greedy ID3/C4.5-style construction without pruning.

    At each node the unused attribute with the highest criterion value is
    chosen (earliest in schema order on ties). A leaf is emitted when rows are
    outcome-pure, attributes run out, or the best value is zero.
    """
    if len(dataset) == 0:
        raise TreeError("cannot build a tree from an empty dataset")
    measure = _MEASURES[SplitCriterion(criterion)]
    names = dataset.schema.names

    def grow(rows: list[TrainingRow], remaining: list[int]) -> TreeNode:
        if _is_pure(rows) or not remaining:
            return _leaf(rows)
        best_pos, best_val = None, 0.0
        for pos in remaining:
            val = measure(rows, pos)
            if val > best_val:
                best_pos, best_val = pos, val
        if best_pos is None:
            return _leaf(rows)
        rest = [p for p in remaining if p != best_pos]
        children = {v: grow(part, rest) for v, part in sorted(_partition(rows, best_pos).items())}
        return _internal(names[best_pos], best_pos, children)

    return grow(list(dataset.rows), list(range(len(names))))


def build_fixed_tree(dataset: Dataset, spec: FixedTreeSpec) -> TreeNode:
    """Split strictly in ``spec.attribute_order``.

    An attribute is skipped at a node only when it is single-valued among the
    covered rows. Leaves appear on purity or when the order is exhausted.
    """
    names = dataset.schema.names
    order = spec.attribute_order
    if sorted(order) != sorted(names):
        raise ContractViolation(f"fixed order {list(order)} is not a permutation of {list(names)}")
    if len(dataset) == 0:
        raise TreeError("cannot build a tree from an empty dataset")
    positions = [names.index(a) for a in order]

    def grow(rows: list[TrainingRow], depth: int) -> TreeNode:
        if _is_pure(rows):
            return _leaf(rows)
        while depth < len(positions):
            parts = _partition(rows, positions[depth])
            if len(parts) > 1:
                children = {v: grow(part, depth + 1) for v, part in sorted(parts.items())}
                return _internal(names[positions[depth]], positions[depth], children)
            depth += 1
        return _leaf(rows)

    return grow(list(dataset.rows), 0)


def subtree_outcomes(node: TreeNode) -> OutcomeDistribution:
    return node.outcome_counts


def count_nodes(root: TreeNode) -> tuple[int, int]:
    """Return ``(node_count, leaf_count)``."""
    nodes = leaves = 0
    for n in root.iter_nodes():
        nodes += 1
        leaves += n.is_leaf
    return nodes, leaves


def depth(root: TreeNode) -> int:
    if root.is_leaf:
        return 0
    return 1 + max(depth(c) for c in root.children.values())


# Text format, one node per line, two spaces of indent per level:
#
#   # deodata-tree v1
#   attributes<TAB>A<TAB>B<TAB>C
#   *<TAB>split=B<TAB>counts=t0:5;t1:4;t2:6
#     b0<TAB>leaf<TAB>rows=0,1<TAB>counts=t1:1;t2:1
#
# The first field is the branch value leading to the node ("*" for the root).
# Internal rows and counts are recomputed from the leaves on load and the
# stored counts are checked against them.

TREE_MAGIC = "# deodata-tree v1"


def dump_tree(root: TreeNode, attribute_names: Sequence[str]) -> str:
    out = [TREE_MAGIC, "\t".join(("attributes",) + tuple(attribute_names))]

    def emit(node: TreeNode, branch: str, level: int):
        indent = "  " * level
        counts = "counts=" + node.outcome_counts.format()
        if node.is_leaf:
            rows = "rows=" + ",".join(str(i) for i in sorted(node.row_indices))
            out.append(f"{indent}{branch}\tleaf\t{rows}\t{counts}")
        else:
            out.append(f"{indent}{branch}\tsplit={node.split_attribute}\t{counts}")
            for value, child in node.ordered_children():
                emit(child, value, level + 1)

    emit(root, "*", 0)
    return "\n".join(out) + "\n"


def load_tree(text: str) -> tuple[TreeNode, tuple[str, ...]]:
    """Parse :func:`dump_tree` output into ``(root, attribute_names)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != TREE_MAGIC:
        raise TreeError("not a deodata tree file (missing header)")
    if len(lines) < 3 or not lines[1].startswith("attributes"):
        raise TreeError("tree file lacks an attributes line")
    names = tuple(lines[1].split("\t")[1:])

    parsed = []
    for lineno, line in enumerate(lines[2:], start=3):
        stripped = line.lstrip(" ")
        indent = len(line) - len(stripped)
        if indent % 2:
            raise TreeError(f"line {lineno}: odd indentation")
        fields = stripped.split("\t")
        parsed.append((indent // 2, fields, lineno))

    pos = 0

    def parse_node(expected_level: int) -> tuple[str, TreeNode]:
        nonlocal pos
        level, fields, lineno = parsed[pos]
        if level != expected_level:
            raise TreeError(f"line {lineno}: unexpected indentation")
        pos += 1
        branch, kind = fields[0], fields[1]
        attrs = dict(f.split("=", 1) for f in fields[2:])
        stored = OutcomeDistribution.parse(attrs.get("counts", ""))
        if kind == "leaf":
            rows = frozenset(int(i) for i in attrs.get("rows", "").split(",") if i)
            if not rows:
                raise TreeError(f"line {lineno}: leaf covers no rows")
            if stored.total != len(rows):
                raise TreeError(f"line {lineno}: leaf counts disagree with its rows")
            return branch, TreeNode(outcome_counts=stored, row_indices=rows)
        if not kind.startswith("split="):
            raise TreeError(f"line {lineno}: unknown node kind {kind!r}")
        attribute = kind[len("split="):]
        if attribute not in names:
            raise TreeError(f"line {lineno}: split on unknown attribute {attribute!r}")
        children = {}
        while pos < len(parsed) and parsed[pos][0] == expected_level + 1:
            value, child = parse_node(expected_level + 1)
            children[value] = child
        if not children:
            raise TreeError(f"line {lineno}: internal node without children")
        node = _internal(attribute, names.index(attribute), children)
        if node.outcome_counts != stored:
            raise TreeError(f"line {lineno}: stored counts do not match children")
        return branch, node

    _, root = parse_node(0)
    if pos != len(parsed):
        raise TreeError(f"line {parsed[pos][2]}: trailing content after root")
    return root, names


def trees_equal(a: TreeNode, b: TreeNode) -> bool:
    if (a.split_attribute != b.split_attribute or a.split_index != b.split_index
            or a.outcome_counts != b.outcome_counts
            or a.row_indices != b.row_indices or a.children.keys() != b.children.keys()):
        return False
    return all(trees_equal(a.children[v], b.children[v]) for v in a.children)


def check_tree(root: TreeNode, dataset: Dataset) -> None:
    """Raise ContractViolation unless ``root`` partitions ``dataset`` consistently."""
    if root.row_indices != frozenset(range(len(dataset))):
        raise ContractViolation("tree root does not cover exactly the dataset rows")
    names = dataset.schema.names
    for node in root.iter_nodes():
        if node.outcome_counts != dataset.outcome_counts(node.row_indices):
            raise ContractViolation("node outcome counts disagree with dataset outcomes")
        if node.is_leaf:
            continue
        if node.split_attribute not in names:
            raise ContractViolation(f"tree splits on unknown attribute {node.split_attribute!r}")
        pos = names.index(node.split_attribute)
        if node.split_index != pos:
            raise ContractViolation(f"split index of {node.split_attribute!r} disagrees with schema")
        for value, child in node.children.items():
            if any(dataset[i].values[pos] != value for i in child.row_indices):
                raise ContractViolation(f"rows under branch {value!r} carry other values")
