"""Quality evaluation, synthetic benchmark graphs and run statistics."""

from __future__ import annotations

import json
import os
import resource
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph_io import MemoryGraph, read_clustering

NMI_NORMALIZATION = "arithmetic"


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(predicted: Sequence[int], truth: Sequence[int]) -> float:
    """Normalized mutual information, ``I(X;Y) / ((H(X) + H(Y)) / 2)``, natural log.

    Two single-cluster partitions are identical and score 1.
    """
    x = np.asarray(predicted)
    y = np.asarray(truth)
    if x.shape != y.shape:
        raise ValueError("partitions differ in length")
    n = len(x)
    if n == 0:
        raise ValueError("empty partitions")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    xi, yi = xi.ravel(), yi.ravel()
    hx = _entropy(np.bincount(xi), n)
    hy = _entropy(np.bincount(yi), n)
    if hx == 0.0 and hy == 0.0:
        return 1.0
    ky = int(yi.max()) + 1
    joint = np.bincount(xi * ky + yi)
    joint = joint[joint > 0]
    hxy = _entropy(joint, n)
    mi = hx + hy - hxy
    return float(min(1.0, max(0.0, 2.0 * mi / (hx + hy))))


def ring_of_cliques(num_cliques: int, clique_size: int) -> tuple[MemoryGraph, np.ndarray]:
    """Cliques of consecutive ids on a ring.

    Node ``i*s + 1`` of clique ``i`` links to the first node of clique
    ``i + 1`` (the usual networkx layout).
    """
    if num_cliques < 3 or clique_size < 3:
        raise ValueError("need at least 3 cliques of size >= 3")
    s = clique_size
    n = num_cliques * s
    iu, ju = np.triu_indices(s, k=1)
    base = np.arange(num_cliques)[:, None] * s
    u = (base + iu).ravel()
    v = (base + ju).ravel()
    bu = np.arange(num_cliques) * s + 1
    bv = (np.arange(num_cliques) + 1) * s % n
    g = MemoryGraph.from_edges(n, np.concatenate([u, bu]), np.concatenate([v, bv]))
    truth = np.repeat(np.arange(num_cliques), s)
    return g, truth


def _sample_pairs(rng, count: int, na: int, nb: int, same: bool) -> tuple[np.ndarray, np.ndarray]:
    """``count`` distinct uniform pairs from an ``na x nb`` grid (``i < j`` when ``same``)."""
    found = np.empty(0, dtype=np.int64)
    while len(found) < count:
        need = count - len(found)
        i = rng.integers(na, size=2 * need + 16)
        j = rng.integers(nb, size=2 * need + 16)
        if same:
            ok = i < j
            i, j = i[ok], j[ok]
        keys = i * nb + j
        # keep draw order among new keys so the sample stays uniform
        merged = np.concatenate([found, keys])
        _, first = np.unique(merged, return_index=True)
        found = merged[np.sort(first)][:count]
    return found // nb, found % nb


def planted_partition(k: int, n: int, p_in: float, p_out: float, seed: int = 0) -> tuple[MemoryGraph, np.ndarray]:
    """Equal blocks with edge probability ``p_in`` inside and ``p_out`` across.

    Edge counts per block pair are binomial and the pairs are then drawn
    uniformly without replacement, so the graph is distributed exactly like
    the independent-edge model while staying fast for sparse, large ``n``.
    """
    if n % k:
        raise ValueError("k must divide n")
    if not 0 <= p_out < p_in <= 1:
        raise ValueError("need 0 <= p_out < p_in <= 1")
    rng = np.random.default_rng(seed)
    b = n // k
    us, vs = [], []
    for a in range(k):
        cnt = int(rng.binomial(b * (b - 1) // 2, p_in))
        i, j = _sample_pairs(rng, cnt, b, b, True)
        us.append(a * b + i)
        vs.append(a * b + j)
    if p_out > 0:
        for a in range(k):
            for c in range(a + 1, k):
                cnt = int(rng.binomial(b * b, p_out))
                i, j = _sample_pairs(rng, cnt, b, b, False)
                us.append(a * b + i)
                vs.append(c * b + j)
    g = MemoryGraph.from_edges(n, np.concatenate(us), np.concatenate(vs))
    return g, np.repeat(np.arange(k), b)


def audit_modularity(assignments, graph_path: str | os.PathLike) -> float:
    """Recompute modularity from the raw file with a parser and formula of its own.

    Used to cross-check :func:`streamclust.modularity.modularity`.  Accepts an
    assignment sequence or the path of a clustering file.
    """
    if isinstance(assignments, (str, os.PathLike)):
        assignments = read_clustering(assignments)
    labels = np.asarray(assignments, dtype=np.int64)
    with open(graph_path) as fh:
        lines = (ln for ln in fh if not ln.lstrip().startswith("%"))
        header = ""
        for ln in lines:
            if ln.strip():
                header = ln.split()
                break
        n = int(header[0])
        fmt = header[2].zfill(3) if len(header) > 2 else "000"
        ncon = int(header[3]) if len(header) > 3 else 1
        lead = (1 if fmt[0] == "1" else 0) + (ncon if fmt[1] == "1" else 0)
        step = 2 if fmt[2] == "1" else 1
        if len(labels) != n:
            raise ValueError(f"clustering has {len(labels)} entries, graph has {n} nodes")
        k = int(labels.max()) + 1
        intra = np.zeros(k)
        vol = np.zeros(k)
        for v in range(n):
            tok = next(lines).split()[lead:]
            nb = np.array(tok[0::step], dtype=np.int64) - 1
            w = np.array(tok[1::2], dtype=np.float64) if step == 2 else np.ones(len(nb))
            c = labels[v]
            vol[c] += w.sum()
            intra[c] += w[labels[nb] == c].sum()
    m = vol.sum() / 2.0
    if m == 0:
        return 0.0
    return float(np.sum(intra / 2.0 / m - (vol / (2.0 * m)) ** 2))


def read_labels(path: str | os.PathLike) -> list[int]:
    return read_clustering(path)


def peak_memory_bytes() -> int:
    """Peak resident set size of this process."""
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # kilobytes on Linux, bytes on macOS
    return int(peak if sys.platform == "darwin" else peak * 1024)


@dataclass
class RunStats:
    mode: str
    n: int = 0
    m: int | float = 0
    modularity: float = 0.0
    clusters: int = 0
    phase_seconds: dict = field(default_factory=dict)
    peak_memory_bytes: int = 0
    ls_rounds: int = 0
    nmi: Optional[float] = None
    nmi_normalization: str = NMI_NORMALIZATION
    audit_modularity: Optional[float] = None

    @property
    def total_seconds(self) -> float:
        return sum(self.phase_seconds.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.nmi is None:
            d.pop("nmi")
            d.pop("nmi_normalization")
        if self.audit_modularity is None:
            d.pop("audit_modularity")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_line(self) -> str:
        parts = []
        for key, val in self.to_dict().items():
            if isinstance(val, dict):
                parts.extend(f"{key}.{k}={v:.6f}" for k, v in val.items())
            elif isinstance(val, float):
                parts.append(f"{key}={val:.6f}")
            else:
                parts.append(f"{key}={val}")
        return " ".join(parts)
