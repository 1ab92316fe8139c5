"""METIS node-stream reading, selective re-reads and clustering files.

Nodes are delivered one adjacency line at a time.  The first full pass over a
file records the byte offset of every node line in a :class:`NodeOffsetIndex`,
which later lets :func:`read_nodes_at` seek directly to an arbitrary subset of
nodes instead of re-reading the whole stream.

On disk node ids are 1-indexed; in memory they are 0-indexed.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

VALID_FORMATS = {None, "0", "1", "10", "11", "100", "101", "110", "111"}


class GraphFormatError(ValueError):
    """Raised for malformed METIS content (header, tokens, ids, counts)."""


@dataclass(frozen=True)
class GraphHeader:
    n: int
    m: int
    fmt: Optional[str] = None
    ncon: int = 1

    @property
    def has_edge_weights(self) -> bool:
        return self.fmt is not None and self.fmt[-1] == "1"

    @property
    def has_node_weights(self) -> bool:
        return self.fmt is not None and len(self.fmt) >= 2 and self.fmt[-2] == "1"

    @property
    def has_node_sizes(self) -> bool:
        return self.fmt is not None and len(self.fmt) == 3 and self.fmt[0] == "1"


@dataclass(slots=True)
class NodeRecord:
    """One streamed node: its id and weighted neighbor list."""

    id: int
    neighbors: list
    weights: list
    weighted_degree: int | float = 0

    @property
    def pairs(self) -> list[tuple[int, int | float]]:
        return list(zip(self.neighbors, self.weights))


@dataclass
class NodeOffsetIndex:
    """Byte offset of each node line, built during the first full pass.

    ``records_read`` counts every record parsed through :func:`read_nodes_at`
    and is the I/O counter used to check selective re-reads.
    """

    path: str
    header: GraphHeader
    offsets: np.ndarray
    sanitize: bool = False
    records_read: int = field(default=0, compare=False)

    @property
    def n(self) -> int:
        return self.header.n


def _parse_header(tokens: list[str]) -> GraphHeader:
    if len(tokens) < 2 or len(tokens) > 4:
        raise GraphFormatError(f"malformed header: {' '.join(tokens)!r}")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise GraphFormatError(f"malformed header: {' '.join(tokens)!r}") from None
    fmt = tokens[2] if len(tokens) >= 3 else None
    if fmt is not None and fmt not in VALID_FORMATS:
        # METIS allows leading zeros to be dropped ("1" == "001").
        stripped = fmt.lstrip("0") or "0"
        if stripped not in VALID_FORMATS:
            raise GraphFormatError(f"unsupported fmt {fmt!r}")
        fmt = stripped
    ncon = 1
    if len(tokens) == 4:
        try:
            ncon = int(tokens[3])
        except ValueError:
            raise GraphFormatError(f"malformed header: {' '.join(tokens)!r}") from None
    if n < 1:
        raise GraphFormatError("header must declare at least one node")
    if m < 0:
        raise GraphFormatError("header edge count must be non-negative")
    return GraphHeader(n=n, m=m, fmt=fmt, ncon=ncon)


class _LineParser:
    """Turns one adjacency line into a NodeRecord; tracks sanitization counters."""

    def __init__(self, header: GraphHeader, sanitize: bool):
        self.header = header
        self.sanitize = sanitize
        self.skip = 0
        if header.has_node_sizes:
            self.skip += 1
        if header.has_node_weights:
            self.skip += header.ncon
        self.weighted = header.has_edge_weights
        self.self_loops_dropped = 0
        self.parallel_merged = 0

    def parse(self, v: int, line: bytes) -> tuple[NodeRecord, int]:
        """Return the record and its raw adjacency entry count."""
        n = self.header.n
        try:
            values = [int(t) for t in line.split()]
        except ValueError:
            raise GraphFormatError(f"non-numeric token on line of node {v + 1}") from None
        values = values[self.skip:]
        if self.weighted:
            if len(values) % 2:
                raise GraphFormatError(f"odd token count for weighted node {v + 1}")
            nbrs = values[0::2]
            wts = values[1::2]
        else:
            nbrs = values
            wts = [1] * len(values)
        raw = len(nbrs)
        nbrs = [u - 1 for u in nbrs]
        for u, w in zip(nbrs, wts):
            if u < 0 or u >= n:
                raise GraphFormatError(f"neighbor id {u + 1} out of range on node {v + 1}")
            if w <= 0:
                raise GraphFormatError(f"non-positive edge weight on node {v + 1}")
        if self.sanitize:
            merged: dict[int, int] = {}
            for u, w in zip(nbrs, wts):
                if u == v:
                    self.self_loops_dropped += 1
                    continue
                if u in merged:
                    self.parallel_merged += 1
                    merged[u] += w
                else:
                    merged[u] = w
            nbrs = list(merged)
            wts = list(merged.values())
        else:
            if v in nbrs:
                raise GraphFormatError(f"self-loop on node {v + 1}")
            if len(set(nbrs)) != len(nbrs):
                raise GraphFormatError(f"parallel edge on node {v + 1}")
        return NodeRecord(v, nbrs, wts, sum(wts)), raw


class NodeStream:
    """Sequential reader over the node lines of a METIS file.

    Iterating yields :class:`NodeRecord` objects in ascending id order.  When a
    full pass completes, :attr:`index` holds the node offsets.
    """

    def __init__(self, path: str | os.PathLike, sanitize: bool = False):
        self.path = os.fspath(path)
        self.sanitize = sanitize
        self._fh = open(self.path, "rb")
        try:
            self.header = self._read_header()
        except GraphFormatError:
            self._fh.close()
            raise
        self._data_start = self._fh.tell()
        self._parser = _LineParser(self.header, sanitize)
        self.index: Optional[NodeOffsetIndex] = None
        self._offsets = np.zeros(self.header.n, dtype=np.int64)
        self._next_id = 0
        self._raw_entries = 0
        self._entries = 0
        self._weight_sum = 0
        self._total_weight: int | float | None = None
        self.records_read = 0

    def _read_header(self) -> GraphHeader:
        while True:
            line = self._fh.readline()
            if not line:
                raise GraphFormatError("missing header")
            stripped = line.strip()
            if not stripped or stripped.startswith(b"%"):
                continue
            return _parse_header(stripped.decode("ascii", "replace").split())

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        self._fh.close()

    def __iter__(self) -> Iterator[NodeRecord]:
        while True:
            rec = self.next_node()
            if rec is None:
                return
            yield rec

    def rewind(self) -> None:
        """Restart the stream at node 0."""
        self._fh.seek(self._data_start)
        self._next_id = 0
        self._raw_entries = self._entries = 0
        self._weight_sum = 0

    @property
    def total_weight(self) -> int | float:
        """Sum of undirected edge weights.

        For unweighted files this is the header edge count.  Weighted files
        need one extra sequential scan, done once on a separate handle.
        """
        if self._total_weight is None:
            if not self.header.has_edge_weights:
                self._total_weight = self.header.m
            else:
                with NodeStream(self.path, self.sanitize) as scan:
                    s = 0
                    for rec in scan:
                        s += rec.weighted_degree
                self._total_weight = s // 2 if isinstance(s, int) else s / 2
        return self._total_weight

    def next_node(self) -> Optional[NodeRecord]:
        n = self.header.n
        fh = self._fh
        while self._next_id < n:
            pos = fh.tell()
            line = fh.readline()
            if not line:
                raise GraphFormatError(
                    f"file ends after {self._next_id} of {n} node lines")
            if line.lstrip().startswith(b"%"):
                continue
            v = self._next_id
            self._offsets[v] = pos
            rec, raw = self._parser.parse(v, line)
            self._raw_entries += raw
            self._entries += len(rec.neighbors)
            self._weight_sum += rec.weighted_degree
            self._next_id += 1
            self.records_read += 1
            if self._next_id == n:
                self._finish_pass()
            return rec
        return None

    def _finish_pass(self) -> None:
        two_m = 2 * self.header.m
        if self._entries != two_m and self._raw_entries != two_m:
            msg = (f"edge count mismatch: header says m={self.header.m}, "
                   f"adjacency lists hold {self._raw_entries} entries")
            if not self.sanitize:
                raise GraphFormatError(msg)
            logger.warning(msg)
        if self._parser.self_loops_dropped or self._parser.parallel_merged:
            logger.warning("sanitized input: dropped %d self-loop entries, merged %d parallel entries",
                           self._parser.self_loops_dropped, self._parser.parallel_merged)
        if self._total_weight is None:
            s = self._weight_sum
            self._total_weight = s // 2 if isinstance(s, int) else s / 2
        if self.index is None:
            self.index = NodeOffsetIndex(self.path, self.header, self._offsets.copy(), self.sanitize)

    @property
    def sanitize_counts(self) -> dict[str, int]:
        return {"self_loops_dropped": self._parser.self_loops_dropped,
                "parallel_merged": self._parser.parallel_merged}


def open_stream(path: str | os.PathLike, sanitize: bool = False) -> tuple[NodeStream, GraphHeader]:
    stream = NodeStream(path, sanitize)
    return stream, stream.header


def next_node(stream: NodeStream) -> Optional[NodeRecord]:
    return stream.next_node()


def read_nodes_at(index: Optional[NodeOffsetIndex], ids: Iterable[int]) -> Iterator[NodeRecord]:
    """Yield the records of ``ids`` (ascending) by seeking to stored offsets.

    Consecutive ids are read sequentially without seeking.
    """
    if index is None:
        raise ValueError("offset index not built; complete a full pass first")
    parser = _LineParser(index.header, index.sanitize)
    n = index.header.n
    offsets = index.offsets
    with open(index.path, "rb") as fh:
        prev = -1
        for v in ids:
            v = int(v)
            if v < 0 or v >= n:
                raise IndexError(f"node id {v} out of range [0, {n})")
            if v <= prev:
                raise ValueError("ids must be strictly ascending")
            off = int(offsets[v])
            if fh.tell() != off:
                fh.seek(off)
            rec, _ = parser.parse(v, fh.readline())
            index.records_read += 1
            prev = v
            yield rec


def validate_symmetry(path: str | os.PathLike, sanitize: bool = False) -> None:
    """Check that every edge appears in both endpoint lists with equal weight.

    Loads the whole graph; meant for small files.
    """
    seen: dict[tuple[int, int], int | float] = {}
    with NodeStream(path, sanitize) as stream:
        for rec in stream:
            for u, w in zip(rec.neighbors, rec.weights):
                seen[(rec.id, u)] = w
    for (v, u), w in seen.items():
        back = seen.get((u, v))
        if back is None:
            raise GraphFormatError(f"edge ({v + 1},{u + 1}) missing its reverse")
        if back != w:
            raise GraphFormatError(f"edge ({v + 1},{u + 1}) has asymmetric weights {w} vs {back}")


def write_clustering(path: str | os.PathLike, assignments: Sequence[int]) -> None:
    assert len(assignments) > 0, "clustering must cover at least one node"
    with open(path, "w") as fh:
        for c in assignments:
            fh.write(f"{int(c)}\n")


def read_clustering(path: str | os.PathLike) -> list[int]:
    with open(path) as fh:
        return [int(line) for line in fh if line.strip()]


@dataclass
class MemoryGraph:
    """Small in-memory weighted graph in CSR form.

    Used by generators and tests; it is never built for streamed inputs.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_edges(cls, n: int, u, v, w=None) -> "MemoryGraph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if w is None:
            w = np.ones(len(u), dtype=np.int64)
        w = np.asarray(w)
        if np.any(u == v):
            raise ValueError("self-loops are not allowed")
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        if len(src) > 1 and np.any((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])):
            raise ValueError("parallel edges are not allowed")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst, ww)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def total_weight(self):
        return self.weights.sum() / 2 if self.weights.dtype.kind == "f" else int(self.weights.sum()) // 2

    @property
    def weighted(self) -> bool:
        return bool(np.any(self.weights != 1))

    def degrees(self) -> np.ndarray:
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        deg = np.bincount(rows, weights=self.weights, minlength=self.n)
        return deg if self.weights.dtype.kind == "f" else deg.astype(np.int64)

    def records(self) -> Iterator[NodeRecord]:
        ind = self.indices.tolist()
        wts = self.weights.tolist()
        ptr = self.indptr.tolist()
        for v in range(self.n):
            nb = ind[ptr[v]:ptr[v + 1]]
            w = wts[ptr[v]:ptr[v + 1]]
            yield NodeRecord(v, nb, w, sum(w))

    def edges(self) -> Iterator[tuple[int, int, int | float]]:
        for rec in self.records():
            for u, w in zip(rec.neighbors, rec.weights):
                if rec.id < u:
                    yield rec.id, u, w

    def write_metis(self, path: str | os.PathLike, weighted: Optional[bool] = None) -> None:
        if weighted is None:
            weighted = self.weighted
        with open(path, "w") as fh:
            fh.write(f"{self.n} {self.num_edges}{' 1' if weighted else ''}\n")
            ind = self.indices + 1
            ptr = self.indptr
            for v in range(self.n):
                nb = ind[ptr[v]:ptr[v + 1]]
                if weighted:
                    w = self.weights[ptr[v]:ptr[v + 1]]
                    toks = np.empty(2 * len(nb), dtype=object)
                    toks[0::2] = nb.tolist()
                    toks[1::2] = w.tolist()
                    fh.write(" ".join(map(str, toks)))
                else:
                    fh.write(" ".join(map(str, nb.tolist())))
                fh.write("\n")
