import math
from collections import defaultdict

import numpy as np
import pytest

from streamclust.graph_io import MemoryGraph, NodeStream


def naive_modularity(edges, labels):
    """Canonical modularity straight from an edge list ``(u, v, w)``."""
    m = 0.0
    intra = defaultdict(float)
    vol = defaultdict(float)
    for u, v, w in edges:
        m += w
        vol[labels[u]] += w
        vol[labels[v]] += w
        if labels[u] == labels[v]:
            intra[labels[u]] += w
    if m == 0:
        return 0.0
    return sum(intra[c] / m - (vol[c] / (2 * m)) ** 2 for c in vol)


def set_partitions(n):
    """All partitions of range(n) as restricted growth strings."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, k):
        if i == n:
            yield list(a)
            return
        for c in range(k + 1):
            a[i] = c
            yield from rec(i + 1, max(k, c + 1))

    yield from rec(1, 1)


def random_graph(n, p, rng, max_weight=1):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    u, v = iu[keep], ju[keep]
    w = rng.integers(1, max_weight + 1, size=len(u)) if max_weight > 1 else None
    return MemoryGraph.from_edges(n, u, v, w)


def edge_list(g):
    return list(g.edges())


def two_triangles():
    # {0,1,2} and {3,4,5} joined by the bridge 2-3
    return MemoryGraph.from_edges(6, [0, 0, 1, 3, 3, 4, 2], [1, 2, 2, 4, 5, 5, 3])


def triangle():
    return MemoryGraph.from_edges(3, [0, 0, 1], [1, 2, 2])


@pytest.fixture
def write_graph(tmp_path):
    counter = [0]

    def _write(g, weighted=None):
        counter[0] += 1
        path = tmp_path / f"g{counter[0]}.graph"
        g.write_metis(path, weighted=weighted)
        return str(path)

    return _write


@pytest.fixture
def write_text(tmp_path):
    counter = [0]

    def _write(text):
        counter[0] += 1
        path = tmp_path / f"t{counter[0]}.graph"
        path.write_text(text)
        return str(path)

    return _write


def full_pass(path, sanitize=False):
    with NodeStream(path, sanitize) as s:
        recs = list(s)
        return recs, s.index


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)


ACCEPTANCE: dict = {}


def record_criterion(num, ok, detail):
    """Remember one acceptance line; it is printed now and in the terminal summary.

    ``ok=None`` marks a skipped criterion.
    """
    status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
    line = f"criterion {num}: {status}  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for num in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[num])
