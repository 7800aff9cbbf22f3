import numpy as np
import pytest

from ilpnom.core import SupervisionInstance, ingest_matrix


def random_instance(rng, n_items, n_reps, s_size, integer_levels=None):
    """Uniform entries; ``integer_levels`` draws from a small grid to force ties."""
    if integer_levels:
        raw = rng.integers(0, integer_levels, size=(n_items, n_reps)) / integer_levels
    else:
        raw = rng.uniform(size=(n_items, n_reps))
    s = rng.choice(n_items, size=s_size, replace=False)
    return ingest_matrix(raw), SupervisionInstance(n_items, frozenset(int(v) for v in s))


@pytest.fixture
def example_j2():
    """Two representations where each alone lets one candidate beat ``a``
    but the even mix ranks ``a`` first."""
    raw = np.array([[0.5, 0.5], [0.4, 0.9], [0.9, 0.4], [0.9, 0.9]])
    return ingest_matrix(raw, ["a", "b", "c", "d"]), SupervisionInstance(4, frozenset({0}))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
