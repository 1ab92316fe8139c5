"""In-memory modularity optimization for (small) quotient graphs.

Only ever run on a quotient graph, never on the streamed input.
"""

from __future__ import annotations

import numpy as np

from .quotient import QuotientGraph, contract, relabel

InMemoryGraph = QuotientGraph

SWEEP_TOL = 1e-12


def _local_moving(g: QuotientGraph, part: list, order: list, two_m) -> None:
    """Sweep nodes in ``order`` until no sweep gains more than SWEEP_TOL.

    A node moves to the neighbor cluster with the largest positive gain, or
    into an empty cluster when isolating it gains more; the latter lets a
    coarse initial partition (e.g. from label propagation) be split.

    ``part`` is updated in place.
    """
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    weights = g.weights.tolist()
    deg = g.degree.tolist()
    vol = [0] * g.n
    size = [0] * g.n
    for v, c in enumerate(part):
        vol[c] += deg[v]
        size[c] += 1
    free = [c for c in range(g.n - 1, -1, -1) if size[c] == 0]
    norm = 0.5 * two_m * two_m  # 2m^2
    while True:
        sweep_gain = 0.0
        for v in order:
            d = deg[v]
            if d == 0:
                continue
            cur = part[v]
            tally: dict[int, int | float] = {}
            for idx in range(indptr[v], indptr[v + 1]):
                c = part[indices[idx]]
                tally[c] = tally.get(c, 0) + weights[idx]
            k_cur = tally.pop(cur, 0)
            base = two_m * k_cur - d * (vol[cur] - d)
            best, best_gain = cur, 0
            for c, k in tally.items():
                gain = two_m * k - d * vol[c] - base
                if gain > best_gain or (gain == best_gain and gain > 0 and c < best):
                    best, best_gain = c, gain
            if size[cur] > 1 and -base > best_gain:
                # isolating v beats every neighbor cluster
                best, best_gain = free[-1], -base
            if best != cur:
                if size[best] == 0:
                    free.pop()
                vol[cur] -= d
                size[cur] -= 1
                if size[cur] == 0:
                    free.append(cur)
                vol[best] += d
                size[best] += 1
                part[v] = best
                sweep_gain += best_gain / norm
        if sweep_gain < SWEEP_TOL:
            return


def louvain(g: QuotientGraph, init=None, seed: int = 0, max_levels: int = 10) -> np.ndarray:
    """Multilevel local moving from ``init`` (default: singletons).

    Every accepted move has positive gain and contraction preserves
    modularity, so the result is never worse than ``init``.
    """
    rng = np.random.default_rng(seed)
    two_m = g.degree.sum().item()
    part = relabel(init).tolist() if init is not None else list(range(g.n))
    if two_m == 0 or g.n == 0:
        return np.asarray(part, dtype=np.int64)
    mapping = np.arange(g.n, dtype=np.int64)  # input node -> level node
    level_graph = g
    for _ in range(max_levels):
        order = rng.permutation(level_graph.n).tolist()
        _local_moving(level_graph, part, order, two_m)
        coarse, labels = contract(level_graph, part)
        mapping = labels[mapping]
        if coarse.n == level_graph.n:
            break
        level_graph = coarse
        part = list(range(coarse.n))
    return relabel(mapping)


def label_propagation(g: QuotientGraph, rounds: int = 5, seed: int = 0) -> np.ndarray:
    """Sequential label propagation in a seeded random order.

    Each node takes the neighbor label with the largest incident weight;
    ties are broken uniformly at random.  Self-loops are ignored.  Stops early
    once a round changes nothing.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = np.random.default_rng(seed)
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    weights = g.weights.tolist()
    labels = list(range(g.n))
    for _ in range(rounds):
        changed = False
        for v in rng.permutation(g.n).tolist():
            lo, hi = indptr[v], indptr[v + 1]
            if lo == hi:
                continue
            tally: dict[int, int | float] = {}
            for idx in range(lo, hi):
                lab = labels[indices[idx]]
                tally[lab] = tally.get(lab, 0) + weights[idx]
            top = max(tally.values())
            best = [lab for lab, w in tally.items() if w == top]
            new = best[0] if len(best) == 1 else best[int(rng.integers(len(best)))]
            if new != labels[v]:
                labels[v] = new
                changed = True
        if not changed:
            break
    return relabel(labels)
