import numpy as np
import pytest
from hypothesis import strategies as st

from simplex_projection import BarycentricPoint

ACCEPTANCE_RESULTS = []


def record(criterion, description, ok, detail=""):
    ACCEPTANCE_RESULTS.append((criterion, description, bool(ok), detail))
    assert ok, f"criterion {criterion} failed: {description} ({detail})"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, description, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}. {description} -- {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_points(rng, J, n):
    return [BarycentricPoint(w) for w in rng.dirichlet(np.ones(J), n)]


@st.composite
def compositions(draw, min_dim=3, max_dim=8, floor=1e-3):
    """Strictly positive compositions; ``floor`` keeps ratios well conditioned."""
    J = draw(st.integers(min_dim, max_dim))
    raw = draw(st.lists(st.floats(floor, 1.0), min_size=J, max_size=J))
    total = sum(raw)
    return BarycentricPoint(tuple(v / total for v in raw))
