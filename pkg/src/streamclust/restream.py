"""Re-streaming local search over an existing clustering.

Round 1 revisits every node; later rounds read only the active nodes (the
neighborhoods of nodes that moved) through the offset index.  No new cluster
is ever created.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .graph_io import NodeOffsetIndex, NodeStream, read_nodes_at
from .modularity import ClusteringState, _best_move, apply_move, modularity

logger = logging.getLogger(__name__)


@dataclass
class LSConfig:
    floor: float = 0.05  # relative gain floor X
    time_limit: float = 600.0

    def __post_init__(self):
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError("floor must lie in [0, 1]")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class ActiveSet:
    ids: list
    round: int = 0

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class RoundStats:
    round: int
    visited: int
    records_read: int
    moves: int
    gain: float
    seconds: float


@dataclass
class LSReport:
    initial_modularity: float = 0.0
    final_modularity: float = 0.0
    rounds: list = field(default_factory=list)

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)


def round_gain_check(delta_q: float, q_total: float, floor: float) -> bool:
    """Keep going while the last round gained at least ``floor`` of the running score.

    A non-positive running score makes the relative floor meaningless; then
    any positive gain continues.
    """
    if q_total <= 0:
        return delta_q > 0
    return delta_q >= floor * q_total


def restream_local_search(state: ClusteringState, index: NodeOffsetIndex, cfg: Optional[LSConfig] = None,
                          q_total: Optional[float] = None, verbose: bool = False,
                          report: Optional[LSReport] = None) -> ClusteringState:
    """Improve ``state`` in place by gain-positive moves, re-reading nodes from disk.

    ``q_total`` is the modularity of ``state``; when omitted it is computed
    with one extra pass.  The first round always runs; the relative floor
    applies from the second round on.
    """
    cfg = LSConfig() if cfg is None else cfg
    report = LSReport() if report is None else report
    if q_total is None:
        with NodeStream(index.path, index.sanitize) as stream:
            q_total = modularity(state.assignments, stream)
    report.initial_modularity = q_total
    m = state.total_weight
    norm = 2.0 * m * m if m else 1.0
    n = state.n
    active = ActiveSet(list(range(n)))
    start = time.perf_counter()
    delta_q = float("inf")
    log = logger.info if verbose else logger.debug
    while (len(active) and (active.round == 0 or round_gain_check(delta_q, q_total, cfg.floor))
           and time.perf_counter() - start < cfg.time_limit):
        t0 = time.perf_counter()
        reads_before = index.records_read
        nxt: set[int] = set()
        delta_q = 0.0
        moves = 0
        for rec in read_nodes_at(index, active.ids):
            d = rec.weighted_degree
            if d == 0 or m == 0:
                continue
            v = rec.id
            cur = state.assignments[v]
            best, g, _, _ = _best_move(v, rec.neighbors, rec.weights, d, state, False)
            if best != cur:
                apply_move(state, v, cur, best, d)
                moves += 1
                delta_q += g / norm
                nxt.add(v)
                nxt.update(rec.neighbors)
        q_total += delta_q
        stats = RoundStats(active.round + 1, len(active), index.records_read - reads_before,
                           moves, delta_q, time.perf_counter() - t0)
        report.rounds.append(stats)
        log("ls round %d: visited=%d moves=%d dQ=%.6g elapsed=%.3fs",
            stats.round, stats.visited, stats.moves, stats.gain, time.perf_counter() - start)
        active = ActiveSet(sorted(nxt), active.round + 1)
    report.final_modularity = q_total
    return state
