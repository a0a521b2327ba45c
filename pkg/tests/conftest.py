import pytest
from hypothesis import strategies as st

from deodata import MISSING, Dataset, FixedTreeSpec, Query, build_fixed_tree, table1_fixture

X = Query(("a0", "b0", "c2"))
Y = Query(("a0", "b1", "c2"))


@pytest.fixture
def table1():
    return table1_fixture()


@pytest.fixture
def fixed_tree(table1):
    return build_fixed_tree(table1, FixedTreeSpec(["B", "C", "A"]))


@st.composite
def datasets(draw, max_rows=12, max_attributes=4, max_values=3, max_outcomes=3):
    k = draw(st.integers(1, max_attributes))
    n = draw(st.integers(1, max_rows))
    value = st.integers(0, max_values - 1)
    outcome = st.integers(0, max_outcomes - 1)
    records = [
        ([f"v{draw(value)}" for _ in range(k)], f"t{draw(outcome)}")
        for _ in range(n)
    ]
    return Dataset.from_records([f"x{i}" for i in range(k)], records)


@st.composite
def queries_for(draw, dataset, max_values=3):
    k = len(dataset.schema)
    # v{max_values} never occurs in training, so it is always an unseen value
    slot = st.one_of(st.just(MISSING), st.integers(0, max_values).map(lambda j: f"v{j}"))
    return Query([draw(slot) for _ in range(k)])


# criterion lines recorded by test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
