"""Quotient graph built during the first pass, and contraction in general.

Each cluster becomes a supernode.  Inter-cluster edges between two clusters
are summed into one quotient edge; intra-cluster edges become a self-loop
stored as *twice* their total weight.  A supernode's degree counts the
self-loop once, its intra-cluster weight counts half of it, so the quotient
has the same total weight as the input and the modularity of any clustering
of the quotient equals that of its expansion.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph_io import NodeRecord
from .modularity import ClusteringState


class QuotientEdgeAccumulator:
    """On-the-fly quotient edges keyed by the packed pair ``min * n + max``.

    Edges are recorded at their later endpoint: when ``v`` streams, every
    neighbor ``u < v`` already has its final first-pass cluster.
    """

    def __init__(self, n: int):
        self.n = n
        self.weights: dict[int, int | float] = {}
        self.members: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.weights)

    def add(self, v: NodeRecord, assignments: Sequence[int]) -> None:
        n = self.n
        ci = assignments[v.id]
        self.members[ci] = self.members.get(ci, 0) + 1
        acc = self.weights
        vid = v.id
        for u, w in zip(v.neighbors, v.weights):
            if u >= vid:
                continue
            cj = assignments[u]
            if ci == cj:
                key = ci * n + ci
                w = 2 * w
            elif ci < cj:
                key = ci * n + cj
            else:
                key = cj * n + ci
            acc[key] = acc.get(key, 0) + w

    __call__ = add

    def items(self):
        n = self.n
        for key, w in self.weights.items():
            yield divmod(key, n), w


def accumulate_edges(v: NodeRecord, assignments: Sequence[int], acc: QuotientEdgeAccumulator) -> None:
    acc.add(v, assignments)


@dataclass
class QuotientGraph:
    """Compact weighted graph with self-loops.

    ``indptr``/``indices``/``weights`` hold off-diagonal adjacency in CSR form
    (both directions); self-loops live in ``self_loop``.  ``id_map[i]`` is the
    original cluster id of supernode ``i`` when the graph came from a stream.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    self_loop: np.ndarray
    node_weight: np.ndarray
    id_map: Optional[np.ndarray] = None

    @classmethod
    def from_pairs(cls, n: int, a, b, w, self_loop, node_weight, id_map=None) -> "QuotientGraph":
        """Build from undirected off-diagonal pairs (each listed once, ``a != b``)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        w = np.asarray(w)
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst[order], ww[order], np.asarray(self_loop), np.asarray(node_weight), id_map)

    @classmethod
    def from_memory_graph(cls, g) -> "QuotientGraph":
        """View an input graph as the quotient of its singleton clustering."""
        return cls(g.n, g.indptr.copy(), g.indices.copy(), g.weights.copy(),
                   np.zeros(g.n, dtype=g.weights.dtype), np.ones(g.n, dtype=np.int64))

    @property
    def num_edges(self) -> int:
        """Undirected off-diagonal edges."""
        return len(self.indices) // 2

    @property
    def degree(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        deg = np.bincount(rows, weights=self.weights, minlength=self.n) + self.self_loop
        return deg if self.weights.dtype.kind == "f" or self.self_loop.dtype.kind == "f" else deg.astype(np.int64)

    @property
    def total_weight(self):
        return self.degree.sum() / 2

    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.indptr))

    def neighbors(self, i: int) -> list[tuple[int, int | float]]:
        """Adjacency of ``i``, including a self entry when it has a self-loop."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        out = list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))
        if self.self_loop[i]:
            out.append((i, self.self_loop[i].item()))
        return out

    def write_metis(self, path: str | os.PathLike) -> None:
        """Debug dump in METIS fmt=1; a self-loop is written as a self entry."""
        entries = len(self.indices) + int(np.count_nonzero(self.self_loop))
        with open(path, "w") as fh:
            fh.write(f"% quotient graph: self entries carry twice the intra-cluster weight\n")
            fh.write(f"{self.n} {entries // 2 + entries % 2} 1\n")
            for i in range(self.n):
                toks = []
                for j, w in self.neighbors(i):
                    toks.append(f"{j + 1} {w}")
                fh.write(" ".join(toks) + "\n")


def finalize(acc: QuotientEdgeAccumulator) -> QuotientGraph:
    """Densely renumber the accumulated clusters into a :class:`QuotientGraph`.

    Clusters without incident quotient edges (isolated nodes) still become
    supernodes.
    """
    clusters = np.array(sorted(acc.members), dtype=np.int64)
    k = len(clusters)
    dense = {int(c): i for i, c in enumerate(clusters)}
    node_weight = np.array([acc.members[int(c)] for c in clusters], dtype=np.int64)
    items = list(acc.items())
    integral = all(isinstance(w, (int, np.integer)) for _, w in items)
    dtype = np.int64 if integral else np.float64
    self_loop = np.zeros(k, dtype=dtype)
    a, b, w = [], [], []
    for (ci, cj), wt in items:
        i, j = dense[ci], dense[cj]
        if i == j:
            self_loop[i] += wt
        else:
            a.append(i)
            b.append(j)
            w.append(wt)
    return QuotientGraph.from_pairs(k, a, b, np.array(w, dtype=dtype), self_loop, node_weight, clusters)


def relabel(partition) -> np.ndarray:
    """Dense labels ``0..k-1`` in order of first appearance."""
    partition = np.asarray(partition)
    _, first, inv = np.unique(partition, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.ravel()]


def contract(g: QuotientGraph, partition) -> tuple[QuotientGraph, np.ndarray]:
    """Contract ``g`` by ``partition``; returns the coarse graph and dense labels."""
    labels = relabel(partition)
    k = int(labels.max()) + 1 if len(labels) else 0
    rows = g.rows()
    a = labels[rows]
    b = labels[g.indices]
    intra = a == b
    dtype = np.result_type(g.weights.dtype, g.self_loop.dtype)
    self_loop = np.bincount(labels, weights=g.self_loop, minlength=k)
    # each undirected intra edge appears twice in CSR, giving 2w as required
    self_loop += np.bincount(a[intra], weights=g.weights[intra], minlength=k)
    self_loop = self_loop.astype(dtype)
    node_weight = np.bincount(labels, weights=g.node_weight, minlength=k).astype(np.int64)
    keep = (~intra) & (a < b)
    keys = a[keep] * k + b[keep]
    uniq, inv = np.unique(keys, return_inverse=True)
    w = np.bincount(inv.ravel(), weights=g.weights[keep], minlength=len(uniq)).astype(dtype)
    coarse = QuotientGraph.from_pairs(k, uniq // k, uniq % k, w, self_loop, node_weight)
    return coarse, labels


def quotient_modularity(qg: QuotientGraph, partition) -> float:
    """Canonical modularity of a partition of the supernodes.

    A self-loop adds ``l`` to the supernode degree and ``l / 2`` to its
    cluster's intra weight.
    """
    labels = relabel(partition)
    k = int(labels.max()) + 1
    deg = qg.degree
    two_m = deg.sum()
    if two_m == 0:
        return 0.0
    rows = qg.rows()
    same = labels[rows] == labels[qg.indices]
    # intra2 = twice the intra weight: off-diagonal entries count both directions
    intra2 = np.bincount(labels[rows[same]], weights=qg.weights[same], minlength=k) \
        + np.bincount(labels, weights=qg.self_loop, minlength=k)
    vol = np.bincount(labels, weights=deg, minlength=k)
    return float((two_m * intra2.sum() - (vol * vol).sum()) / (two_m * two_m))


def project(qg: QuotientGraph, quotient_partition, state: ClusteringState) -> ClusteringState:
    """Expand a clustering of the supernodes back onto the input nodes.

    Volumes and sizes of the new clusters are rebuilt from the supernode
    degrees and weights, so no graph pass is needed.  New cluster ids are
    dense, ``0..k-1``.
    """
    if qg.id_map is None:
        raise ValueError("quotient graph has no cluster id map")
    labels = relabel(quotient_partition)
    if len(labels) != qg.n:
        raise ValueError("partition must cover every supernode")
    n = state.n
    lookup = np.full(n, -1, dtype=np.int64)
    lookup[qg.id_map] = labels
    assign = lookup[np.asarray(state.assignments, dtype=np.int64)]
    assert np.all(assign >= 0), "state has clusters unknown to the quotient graph"
    k = int(labels.max()) + 1
    volume = np.zeros(n, dtype=qg.degree.dtype)
    volume[:k] = np.bincount(labels, weights=qg.degree, minlength=k)
    size = np.zeros(n, dtype=np.int64)
    size[:k] = np.bincount(labels, weights=qg.node_weight, minlength=k)
    return ClusteringState(assign.tolist(), volume.tolist(), size.tolist(), state.total_weight, k)


def identity_partition(qg: QuotientGraph) -> np.ndarray:
    return np.arange(qg.n, dtype=np.int64)
