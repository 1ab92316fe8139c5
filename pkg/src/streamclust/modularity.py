"""Clustering state, the modularity objective and one-pass streaming assignment.

Modularity is the canonical form

    Q = sum_C [ e_C / m - (vol_C / 2m)^2 ]

with ``e_C`` the undirected intra-cluster edge weight and ``vol_C`` the sum of
weighted degrees in ``C``.  :func:`delta_modularity` is its exact change for a
single-node move.

Gains are compared in the scaled form ``2m^2 * dQ``, which is exact integer
arithmetic whenever edge weights are integral.  That keeps tie-breaking
deterministic and guarantees every accepted move really increases ``Q``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .graph_io import NodeRecord, NodeStream

logger = logging.getLogger(__name__)


@dataclass
class ClusteringState:
    """Per-node assignments plus per-cluster volume and size.

    Cluster ids are integers in ``[0, n)``; during the first pass a cluster is
    named after the node that founded it.  ``volume`` and ``size`` are indexed
    by cluster id.  Lists rather than arrays: the streaming loops do scalar
    access only.
    """

    assignments: list
    volume: list
    size: list
    total_weight: int | float
    num_clusters: int

    @property
    def n(self) -> int:
        return len(self.assignments)

    @classmethod
    def singletons(cls, n: int, total_weight, degrees: Optional[Sequence] = None) -> "ClusteringState":
        """Every node in its own cluster.

        Without ``degrees`` the volumes start at zero and are filled in as nodes
        stream (a node's degree is unknown until its line is read).
        """
        vol = [0] * n if degrees is None else [d for d in degrees]
        return cls(list(range(n)), vol, [1] * n, total_weight, n)

    @classmethod
    def from_assignments(cls, assignments: Sequence[int], degrees: Sequence,
                         total_weight) -> "ClusteringState":
        assignments = [int(c) for c in assignments]
        n = len(assignments)
        if assignments and (min(assignments) < 0 or max(assignments) >= n):
            raise ValueError("cluster ids must lie in [0, n)")
        vol = [0] * n
        size = [0] * n
        for v, c in enumerate(assignments):
            vol[c] += degrees[v]
            size[c] += 1
        k = sum(1 for s in size if s)
        return cls(assignments, vol, size, total_weight, k)

    def copy(self) -> "ClusteringState":
        return ClusteringState(list(self.assignments), list(self.volume), list(self.size),
                               self.total_weight, self.num_clusters)

    def check(self) -> None:
        """Assert the structural invariants (tests and debugging)."""
        n = self.n
        size = [0] * n
        for c in self.assignments:
            size[c] += 1
        assert size == list(self.size)
        assert sum(1 for s in size if s) == self.num_clusters
        assert all(v >= 0 for v in self.volume)
        assert all(self.volume[c] == 0 for c in range(n) if size[c] == 0)


def _intra_and_volume(assignments: Sequence[int], nodes: Iterable[NodeRecord]):
    k = max(assignments, default=-1) + 1
    intra2 = [0] * k  # twice the intra weight per cluster
    vol = [0] * k
    for rec in nodes:
        c = assignments[rec.id]
        vol[c] += rec.weighted_degree
        s = 0
        for u, w in zip(rec.neighbors, rec.weights):
            if assignments[u] == c:
                s += w
        intra2[c] += s
    return intra2, vol


def modularity(assignments: Sequence[int], nodes: Iterable[NodeRecord]) -> float:
    """Modularity of ``assignments`` over one full pass of ``nodes``.

    With integral weights the numerator ``4m * sum(e_C) - sum(vol_C^2)`` is
    accumulated exactly, so the result is the correctly rounded rational
    value and comparisons between clusterings of the same graph are exact.
    """
    if isinstance(assignments, ClusteringState):
        assignments = assignments.assignments
    intra2, vol = _intra_and_volume(assignments, nodes)
    two_m = sum(vol)
    if two_m == 0:
        warnings.warn("modularity of an edgeless graph is defined as 0", RuntimeWarning, stacklevel=2)
        return 0.0
    # Q = (2*2m*sum(e) - sum(vol^2)) / (2m)^2 with e = intra2 / 2
    num = two_m * sum(intra2) - sum(x * x for x in vol)
    return num / (two_m * two_m)


def singleton_modularity(degrees: Iterable) -> float:
    degrees = list(degrees)
    two_m = sum(degrees)
    if two_m == 0:
        return 0.0
    return -sum(d * d for d in degrees) / (two_m * two_m)


def delta_modularity(d_v, k_cur, k_can, vol_cur, vol_can, m) -> float:
    """Exact change in modularity when a node leaves its cluster for another.

    ``k_cur`` excludes the node itself, ``vol_cur`` includes its degree and
    ``vol_can`` does not.
    """
    assert m > 0 and vol_cur >= d_v
    return (k_can - k_cur) / m - d_v / (2.0 * m * m) * (d_v + vol_can - vol_cur)


def _best_move(v: int, neighbors, weights, d_v, state: ClusteringState,
               allow_new: bool, streamed_only: int = -1):
    """Gain-maximizing target for ``v`` as (cluster, scaled gain, k_cur, k_can).

    ``scaled gain`` is ``2m^2 * dQ``.  With ``streamed_only >= 0`` only
    neighbors with id below it are candidates (first pass).
    """
    assign = state.assignments
    vol = state.volume
    cur = assign[v]
    tally: dict[int, int | float] = {}
    if streamed_only >= 0:
        for u, w in zip(neighbors, weights):
            if u < streamed_only:
                c = assign[u]
                tally[c] = tally.get(c, 0) + w
    else:
        for u, w in zip(neighbors, weights):
            c = assign[u]
            tally[c] = tally.get(c, 0) + w
    k_cur = tally.pop(cur, 0)
    two_m = 2 * state.total_weight
    # score(C) = 2m*K_C - d*vol_C (vol without v); gain = score(can) - score(cur)
    base = two_m * k_cur - d_v * (vol[cur] - d_v)
    best, best_gain, best_k = cur, 0, k_cur
    for c, k in tally.items():
        g = two_m * k - d_v * vol[c] - base
        if g > best_gain or (g == best_gain and g > 0 and c < best):
            best, best_gain, best_k = c, g, k
    if allow_new and state.size[v] == 0 and cur != v:
        # v's founding id is free: isolating v there is a legal new cluster.
        g = -base
        if g > best_gain or (g == best_gain and g > 0 and v < best):
            best, best_gain, best_k = v, g, 0
    return best, best_gain, k_cur, best_k


def compute_cluster(v: NodeRecord, state: ClusteringState, allow_new: bool = True) -> int:
    """Cluster maximizing the modularity gain of ``v``; its current one if no gain is positive.

    Candidates are the clusters of ``v``'s neighbors.  Ties go to the lowest
    cluster id.  With ``allow_new`` the node may also be isolated under its own
    id when that id is unused.
    """
    if v.weighted_degree == 0 or state.total_weight == 0:
        return state.assignments[v.id]
    return _best_move(v.id, v.neighbors, v.weights, v.weighted_degree, state, allow_new)[0]


def apply_move(state: ClusteringState, v: int, src: int, dst: int, d_v) -> None:
    assert state.assignments[v] == src
    if src == dst:
        return
    assert state.volume[src] >= d_v, "volume underflow"
    state.assignments[v] = dst
    state.volume[src] -= d_v
    state.size[src] -= 1
    if state.size[src] == 0:
        state.num_clusters -= 1
    if state.size[dst] == 0:
        state.num_clusters += 1
    state.volume[dst] += d_v
    state.size[dst] += 1


@dataclass
class PassReport:
    moves: int = 0
    gain: float = 0.0  # sum of accepted gains
    singleton_q: float = 0.0

    @property
    def modularity(self) -> float:
        """Modularity after the pass, tracked without another read."""
        return self.singleton_q + self.gain


def stream_pass_assign(stream: NodeStream | Iterable[NodeRecord], state: Optional[ClusteringState] = None,
                       quotient_hook: Optional[Callable[[NodeRecord, list], None]] = None,
                       report: Optional[PassReport] = None) -> ClusteringState:
    """One pass over the node stream, assigning each node once.

    The state starts as all singletons.  Volumes of not-yet-streamed nodes are
    unknown, so when ``v`` arrives only clusters of already-streamed neighbors
    are candidates; unstreamed neighbors still sit in their own singletons and
    the gain is then exact for the whole graph.  ``quotient_hook(v, assignments)``
    runs right after ``v`` is placed.
    """
    if state is None:
        if not isinstance(stream, NodeStream):
            raise ValueError("a fresh state needs a NodeStream (for n and m)")
        state = ClusteringState.singletons(stream.header.n, stream.total_weight)
    if report is None:
        report = PassReport()
    m = state.total_weight
    assign, vol = state.assignments, state.volume
    sq = 0
    two_m_sq = 2.0 * m * m if m else 1.0
    for rec in stream:
        v = rec.id
        d = rec.weighted_degree
        cur = assign[v]
        vol[cur] += d
        sq += d * d
        if d and m:
            best, g, _, _ = _best_move(v, rec.neighbors, rec.weights, d, state, True, streamed_only=v)
            if best != cur:
                apply_move(state, v, cur, best, d)
                report.moves += 1
                report.gain += g / two_m_sq
        if quotient_hook is not None:
            quotient_hook(rec, assign)
    report.singleton_q = -sq / (4.0 * m * m) if m else 0.0
    return state
