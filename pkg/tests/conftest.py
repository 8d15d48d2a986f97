import os

# numba fixes its thread pool size at import; the sandbox may expose 1 CPU
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import itertools  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from dynleiden.datasets import barbell as _barbell  # noqa: E402
from dynleiden.datasets import planted_partition  # noqa: E402
from dynleiden.graph import build_graph  # noqa: E402

A, B = 0, 3  # triangle community ids in the barbell after min-member renumbering


@pytest.fixture
def barbell():
    return _barbell()


@pytest.fixture
def triangle():
    return build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1)], 3)


@pytest.fixture
def two_triangles():
    return build_graph([(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)], 6)


@pytest.fixture(scope="session")
def corpus():
    """Small planted-partition graphs shared by the slower tests."""
    return [
        planted_partition(n, k, avg_degree=d, mixing=mu, seed=s)[0]
        for s, (n, k, d, mu) in enumerate(
            [(60, 4, 6, 0.2), (200, 8, 8, 0.3), (500, 10, 10, 0.25), (1000, 20, 10, 0.4)]
        )
    ]


def dense_adjacency(g):
    n = g.vertex_count
    adj = np.zeros((n, n))
    src, dst, w = g.to_edges()
    adj[src, dst] = w
    return adj


def naive_modularity(adj, c):
    """Textbook Q = 1/2m * sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j), self-loops
    entered once on the diagonal and counted once in the degree."""
    c = np.asarray(c)
    k = adj.sum(axis=1)
    two_m = k.sum()
    if two_m == 0:
        return 0.0
    same = c[:, None] == c[None, :]
    return float(((adj - np.outer(k, k) / two_m) * same).sum() / two_m)


def set_partitions(n):
    """All partitions of range(n) as restricted-growth label arrays."""
    if n == 0:
        yield np.zeros(0, int)
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield np.array(prefix)
            return
        for v in range(top + 2):
            yield from rec(prefix + [v], max(top, v))

    yield from rec([0], 0)


def best_partition(g):
    adj = dense_adjacency(g)
    best, best_q = None, -np.inf
    for c in set_partitions(g.vertex_count):
        q = naive_modularity(adj, c)
        if q > best_q + 1e-12:
            best, best_q = c, q
    return best, best_q


def as_sets(c):
    groups = {}
    for i, x in enumerate(np.asarray(c).tolist()):
        groups.setdefault(x, set()).add(i)
    return frozenset(frozenset(s) for s in groups.values())


def random_graph(rng, n, p, weighted=False, loops=False):
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    if loops:
        pairs += [(i, i) for i in range(n) if rng.random() < 0.1]
    w = rng.integers(1, 5, size=len(pairs)) if weighted else np.ones(len(pairs))
    edges = [(i, j, float(x)) for (i, j), x in zip(pairs, w)]
    return build_graph(edges, n)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
