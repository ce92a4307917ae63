import numpy as np
import pytest

from stratnet.graph import SocialGraph

# filled by test_acceptance.py; printed as a summary section after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} ({name}): {status}")


def random_simple_graph(n, m, seed):
    """Uniform G(n, m) built by rejection, independent of the library RNG."""
    rng = np.random.default_rng(seed)
    edges = set()
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.add((min(int(u), int(v)), max(int(u), int(v))))
    return SocialGraph.from_edge_list(n, edges)


@pytest.fixture
def small_random_graph():
    return random_simple_graph(50, 120, seed=11)
