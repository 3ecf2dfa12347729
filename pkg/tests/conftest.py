import numpy as np
import pytest

from surplus_consensus import Digraph, NetworkState, WeightPolicy


def closure(g):
    """Reachability matrix by Warshall's algorithm; reach[u, v] iff v reachable from u (0-based)."""
    n = g.n
    reach = np.eye(n, dtype=bool)
    for j, i in g.edges:
        reach[j - 1, i - 1] = True
    for m in range(n):
        reach |= reach[:, m:m + 1] & reach[m:m + 1, :]
    return reach


def brute_components(g):
    reach = closure(g)
    mutual = reach & reach.T
    comps = {frozenset(int(v) + 1 for v in np.flatnonzero(mutual[u])) for u in range(g.n)}
    return sorted(comps, key=min)


def brute_strongly_connected(g):
    return bool(closure(g).all())


def random_digraph(gen, n, p):
    adj = gen.random((n, n)) < p
    np.fill_diagonal(adj, False)
    return Digraph.from_in_adjacency(adj)


def random_valid_weights(gen, g):
    """Explicit weights drawn uniformly inside the admissible region for ``g``."""
    n = g.n
    inn = np.asarray(g.in_adjacency)
    out = inn.T
    eps = gen.uniform(0.02, 0.98, n)
    indeg = np.maximum(inn.sum(axis=1), 1)
    outdeg = np.maximum(out.sum(axis=1), 1)
    a = inn * gen.uniform(0.01, 1.0, (n, n)) * (0.999 / indeg)[:, None]
    b = out * gen.uniform(0.01, 1.0, (n, n)) * (0.999 * (1 - eps) / outdeg)[:, None]
    return WeightPolicy.explicit(a, b, eps)


def random_state(gen, n, surplus=True):
    x = gen.uniform(-10, 10, n)
    s = gen.uniform(0, 5, n) if surplus else np.zeros(n)
    return NetworkState(x, s)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
