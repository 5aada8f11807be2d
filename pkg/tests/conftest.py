import numpy as np
import pytest
from hypothesis import strategies as st

from nldistill.box import CondProbTable

from oracles import ns_vertices

_ACCEPTANCE_LINES: list[str] = []

unit_interval = st.floats(min_value=1e-6, max_value=1 - 1e-6, allow_nan=False)


@st.composite
def ns_boxes(draw):
    """Random non-signalling boxes as convex mixtures of the extremal boxes."""
    raw = draw(st.lists(st.floats(0.0, 1.0), min_size=24, max_size=24))
    w = np.array(raw) + 1e-9
    w /= w.sum()
    return CondProbTable(np.tensordot(w, ns_vertices(), axes=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
