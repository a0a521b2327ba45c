"""Categorical data model, CSV ingestion and the row-vs-query matching primitive."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class DatasetError(ValueError):
    """Raised when training data cannot be ingested or is inconsistent."""


class ContractViolation(ValueError):
    """Raised when arguments disagree on schema or shape."""


class _Missing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()


@dataclass(frozen=True)
class AttributeSchema:
    names: tuple[str, ...]
    domains: tuple[frozenset[str], ...]

    def __post_init__(self):
        if len(self.names) != len(self.domains):
            raise DatasetError("schema names and domains differ in length")
        if any(not n for n in self.names):
            raise DatasetError("attribute names must be nonempty")
        if len(set(self.names)) != len(self.names):
            raise DatasetError(f"duplicate attribute names in {list(self.names)}")
        for name, dom in zip(self.names, self.domains):
            if not dom:
                raise DatasetError(f"attribute {name!r} has an empty value domain")

    def __len__(self) -> int:
        return len(self.names)

    def position(self, attribute: str) -> int:
        try:
            return self.names.index(attribute)
        except ValueError:
            raise ContractViolation(f"unknown attribute {attribute!r}") from None


@dataclass(frozen=True)
class TrainingRow:
    index: int
    values: tuple[str, ...]
    outcome: str


@dataclass(frozen=True)
class Query:
    """One value per schema attribute; any entry may be ``MISSING``.

    Values need not belong to the training domain; unseen values never match.
    """

    values: tuple

    def __init__(self, values: Iterable):
        object.__setattr__(self, "values", tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @classmethod
    def from_row(cls, row: TrainingRow) -> "Query":
        return cls(row.values)

    @classmethod
    def all_missing(cls, n_attributes: int) -> "Query":
        return cls([MISSING] * n_attributes)


class OutcomeDistribution:
    """Immutable multiset of outcome labels. Zero counts are never stored."""

    __slots__ = ("_counts", "_total")

    def __init__(self, counts: Mapping[str, int] | None = None):
        cleaned = {}
        for label, n in (counts or {}).items():
            if n < 0:
                raise ValueError(f"negative count for {label!r}")
            if n:
                cleaned[label] = int(n)
        self._counts = dict(sorted(cleaned.items()))
        self._total = sum(self._counts.values())

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "OutcomeDistribution":
        return cls(Counter(labels))

    @property
    def counts(self) -> dict[str, int]:
        return dict(self._counts)

    @property
    def total(self) -> int:
        return self._total

    def __getitem__(self, label: str) -> int:
        return self._counts.get(label, 0)

    def items(self):
        return self._counts.items()

    def labels(self):
        return self._counts.keys()

    def __add__(self, other: "OutcomeDistribution") -> "OutcomeDistribution":
        merged = Counter(self._counts)
        merged.update(other._counts)
        return OutcomeDistribution(merged)

    def __eq__(self, other) -> bool:
        if isinstance(other, OutcomeDistribution):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == OutcomeDistribution(other)._counts
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._counts.items()))

    def __bool__(self) -> bool:
        return self._total > 0

    def dominated_by(self, other: "OutcomeDistribution") -> bool:
        """True when every label count here is <= the count in ``other``."""
        return all(n <= other[label] for label, n in self._counts.items())

    def format(self) -> str:
        return ";".join(f"{k}:{v}" for k, v in self._counts.items())

    @classmethod
    def parse(cls, text: str) -> "OutcomeDistribution":
        counts = {}
        for item in filter(None, text.split(";")):
            label, _, n = item.rpartition(":")
            counts[label] = int(n)
        return cls(counts)

    def __repr__(self):
        return f"OutcomeDistribution({self._counts})"


def merge_all(dists: Iterable[OutcomeDistribution]) -> OutcomeDistribution:
    total = Counter()
    for d in dists:
        total.update(d.counts)
    return OutcomeDistribution(total)


class Dataset:
    """Immutable table of categorical training rows."""

    def __init__(self, schema: AttributeSchema, rows: Sequence[TrainingRow]):
        rows = tuple(rows)
        k = len(schema)
        for pos, row in enumerate(rows):
            if row.index != pos:
                raise DatasetError(f"row index {row.index} at position {pos}; indices must be 0..N-1")
            if len(row.values) != k:
                raise DatasetError(f"row {row.index} has {len(row.values)} values, schema has {k}")
            for name, dom, v in zip(schema.names, schema.domains, row.values):
                if v not in dom:
                    raise DatasetError(f"row {row.index}: value {v!r} not in domain of {name!r}")
        self._schema = schema
        self._rows = rows
        self._outcome_domain = frozenset(r.outcome for r in rows)

    @classmethod
    def from_records(cls, attribute_names: Sequence[str], records: Iterable[tuple[Sequence[str], str]]) -> "Dataset":
        """Build a dataset from ``(values, outcome)`` pairs, inferring value domains."""
        records = [(tuple(v), o) for v, o in records]
        domains = [set() for _ in attribute_names]
        for values, _ in records:
            if len(values) != len(attribute_names):
                raise DatasetError(f"record {values!r} does not have {len(attribute_names)} values")
            for dom, v in zip(domains, values):
                dom.add(v)
        schema = AttributeSchema(tuple(attribute_names), tuple(frozenset(d) for d in domains))
        rows = [TrainingRow(i, values, outcome) for i, (values, outcome) in enumerate(records)]
        return cls(schema, rows)

    @property
    def schema(self) -> AttributeSchema:
        return self._schema

    @property
    def rows(self) -> tuple[TrainingRow, ...]:
        return self._rows

    @property
    def outcome_domain(self) -> frozenset[str]:
        return self._outcome_domain

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return self._schema.names

    def __len__(self) -> int:
        return len(self._rows)

    def __getitem__(self, index: int) -> TrainingRow:
        return self._rows[index]

    def outcome_counts(self, indices: Iterable[int] | None = None) -> OutcomeDistribution:
        if indices is None:
            return OutcomeDistribution.from_labels(r.outcome for r in self._rows)
        return OutcomeDistribution.from_labels(self._rows[i].outcome for i in indices)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        """New dataset of the selected rows, reindexed from 0 with domains re-inferred."""
        picked = [self._rows[i] for i in indices]
        return Dataset.from_records(self._schema.names, ((r.values, r.outcome) for r in picked))

    def check_query(self, query: Query) -> None:
        if len(query) != len(self._schema):
            raise ContractViolation(
                f"query has {len(query)} values, schema has {len(self._schema)} attributes")

    def to_csv(self) -> str:
        lines = [",".join(("outcome",) + self._schema.names)]
        lines.extend(",".join((r.outcome,) + r.values) for r in self._rows)
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._schema == other._schema and self._rows == other._rows

    def __repr__(self):
        return f"Dataset({len(self._rows)} rows, attributes={list(self._schema.names)})"


def parse_csv(text: str, source: str = "<string>") -> Dataset:
    lines = text.splitlines()
    # line numbers are 1-based and count the header
    numbered = [(n, line) for n, line in enumerate(lines, start=1) if line.strip()]
    if not numbered:
        raise DatasetError(f"{source}: empty file")
    header_no, header = numbered[0]
    fields = [f.strip() for f in header.split(",")]
    if len(fields) < 1 or fields[0] != "outcome" or any(not f for f in fields):
        raise DatasetError(f"{source}, line {header_no}: malformed header {header!r}; "
                           "expected 'outcome,<attr1>,...,<attrK>'")
    names = fields[1:]
    if len(set(names)) != len(names):
        raise DatasetError(f"{source}, line {header_no}: duplicate attribute names")
    records = []
    for n, line in numbered[1:]:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(fields) or any(not p for p in parts):
            raise DatasetError(f"{source}, line {n}: expected {len(fields)} nonempty fields, "
                               f"got {line!r}")
        records.append((parts[1:], parts[0]))
    if not records:
        raise DatasetError(f"{source}: empty dataset")
    return Dataset.from_records(names, records)


def load_csv(path) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_csv(text, source=str(path))


TABLE1_ATTRIBUTES = ("A", "B", "C")

# (outcome, A, B, C) as printed in the worked example, indices 00..14
TABLE1_ROWS = (
    ("t1", "a0", "b0", "c1"),
    ("t2", "a0", "b0", "c1"),
    ("t0", "a0", "b0", "c2"),
    ("t0", "a0", "b0", "c2"),
    ("t2", "a0", "b0", "c2"),
    ("t0", "a1", "b0", "c0"),
    ("t2", "a1", "b0", "c0"),
    ("t1", "a1", "b0", "c2"),
    ("t1", "a0", "b1", "c0"),
    ("t0", "a2", "b1", "c0"),
    ("t2", "a2", "b1", "c0"),
    ("t0", "a0", "b1", "c1"),
    ("t1", "a0", "b1", "c1"),
    ("t2", "a1", "b1", "c1"),
    ("t2", "a1", "b1", "c1"),
)


def table1_fixture() -> Dataset:
    return Dataset.from_records(TABLE1_ATTRIBUTES, ((r[1:], r[0]) for r in TABLE1_ROWS))


def match_count(row: TrainingRow, query: Query) -> int:
    """Number of attributes where the query is non-missing and equals the row."""
    if len(row.values) != len(query):
        raise ContractViolation(
            f"row has {len(row.values)} values but query has {len(query)}")
    return sum(1 for v, q in zip(row.values, query) if q is not MISSING and q == v)


def argmax_label(dist: OutcomeDistribution) -> str:
    """Majority label; ties go to the lexicographically smallest label."""
    if dist.total <= 0:
        raise ValueError("no outcomes to classify")
    best = max(dist.items(), key=lambda kv: kv[1])[1]
    return min(label for label, n in dist.items() if n == best)
