"""Command-line entry point: the four pipeline modes.

=========== ============ ==========
mode        memetic      re-stream
=========== ============ ==========
light       no           no
light-plus  no           yes
evo         yes          no
strong      yes          yes
=========== ============ ==========
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .evaluation import RunStats, audit_modularity, nmi, peak_memory_bytes, read_labels
from .graph_io import GraphFormatError, NodeStream, write_clustering
from .memetic import DEFAULT_POPULATION, evolve
from .modularity import PassReport, stream_pass_assign
from .quotient import QuotientEdgeAccumulator, finalize, identity_partition, project
from .restream import LSConfig, LSReport, restream_local_search

logger = logging.getLogger("streamclust")

MODES = {
    "light": (False, False),
    "light-plus": (False, True),
    "evo": (True, False),
    "strong": (True, True),
}

EXIT_OK, EXIT_FORMAT, EXIT_IO, EXIT_FLAGS = 0, 1, 2, 3


@dataclass
class ModeConfig:
    mode: str = "light"
    evo_time: float = 15.0
    ls_time: float = 600.0
    ls_floor: float = 0.05
    seed: int = 0
    sanitize: bool = False
    output: Optional[str] = None
    stats_json: Optional[str] = None
    truth: Optional[str] = None
    audit: bool = False
    evo_iterations: Optional[int] = None
    population: int = DEFAULT_POPULATION
    dump_quotient: Optional[str] = None
    verbose: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.evo_time <= 0 or self.ls_time <= 0:
            raise ValueError("time limits must be positive")
        if not 0.0 <= self.ls_floor <= 1.0:
            raise ValueError("ls floor must lie in [0, 1]")
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.evo_iterations is not None and self.evo_iterations < 0:
            raise ValueError("evo iterations must be >= 0")

    @property
    def refine_quotient(self) -> bool:
        return MODES[self.mode][0]

    @property
    def restream(self) -> bool:
        return MODES[self.mode][1]


def run(cfg: ModeConfig, graph_path: str) -> tuple[RunStats, list]:
    """Cluster ``graph_path`` in the configured mode.

    Returns run statistics and the final assignment list, and writes the
    clustering / stats files named in ``cfg``.
    """
    stats = RunStats(cfg.mode)
    t0 = time.perf_counter()
    with NodeStream(graph_path, cfg.sanitize) as stream:
        stats.n, stats.m = stream.header.n, stream.total_weight
        acc = QuotientEdgeAccumulator(stream.header.n) if cfg.refine_quotient else None
        pass_report = PassReport()
        state = stream_pass_assign(stream, None, acc, pass_report)
        index = stream.index
    q = pass_report.modularity
    stats.phase_seconds["stream"] = time.perf_counter() - t0

    if cfg.refine_quotient:
        t0 = time.perf_counter()
        qg = finalize(acc)
        del acc
        if cfg.dump_quotient:
            qg.write_metis(cfg.dump_quotient)
        # the first-pass clustering itself is the identity partition of the quotient
        best = evolve(qg, cfg.population, cfg.evo_time, cfg.seed,
                      iterations=cfg.evo_iterations, initial=[identity_partition(qg)])
        state = project(qg, best.partition, state)
        q = best.fitness
        del qg
        stats.phase_seconds["evo"] = time.perf_counter() - t0

    if cfg.restream:
        t0 = time.perf_counter()
        ls_report = LSReport()
        restream_local_search(state, index, LSConfig(cfg.ls_floor, cfg.ls_time), q_total=q,
                              verbose=cfg.verbose, report=ls_report)
        q = ls_report.final_modularity
        stats.ls_rounds = ls_report.num_rounds
        stats.phase_seconds["ls"] = time.perf_counter() - t0

    stats.modularity = q
    stats.clusters = state.num_clusters
    assignments = state.assignments
    if cfg.output:
        write_clustering(cfg.output, assignments)
    if cfg.audit:
        stats.audit_modularity = audit_modularity(assignments, graph_path)
    if cfg.truth:
        stats.nmi = nmi(assignments, read_labels(cfg.truth))
    stats.peak_memory_bytes = peak_memory_bytes()
    if cfg.stats_json:
        with open(cfg.stats_json, "w") as fh:
            fh.write(stats.to_json() + "\n")
    return stats, assignments


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="streamclust", description="Streaming modularity clustering of METIS graphs.")
    p.add_argument("graph", help="input graph in METIS format")
    p.add_argument("--mode", choices=list(MODES), default="light")
    p.add_argument("--evo-time", type=float, default=15.0, help="memetic time budget in seconds")
    p.add_argument("--evo-iterations", type=int, default=None,
                   help="run exactly this many memetic generations instead (deterministic)")
    p.add_argument("--population", type=int, default=DEFAULT_POPULATION)
    p.add_argument("--ls-time", type=float, default=600.0, help="re-stream local search time limit")
    p.add_argument("--ls-floor", type=float, default=0.05, help="stop once a round gains less than this fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sanitize", action="store_true", help="merge parallel edges, drop self-loops")
    p.add_argument("--output", "-o", default=None, help="clustering output (one id per line)")
    p.add_argument("--stats-json", default=None)
    p.add_argument("--truth", default=None, help="ground-truth labels; adds NMI to the stats")
    p.add_argument("--audit", action="store_true", help="recompute modularity with an independent pass")
    p.add_argument("--dump-quotient", default=None, help="write the quotient graph (METIS) here")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ModeConfig(args.mode, args.evo_time, args.ls_time, args.ls_floor, args.seed, args.sanitize,
                         args.output, args.stats_json, args.truth, args.audit, args.evo_iterations,
                         args.population, args.dump_quotient, args.verbose)
    except ValueError as exc:
        print(f"streamclust: invalid flags: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    try:
        stats, _ = run(cfg, args.graph)
    except GraphFormatError as exc:
        print(f"streamclust: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:
        print(f"streamclust: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"streamclust: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(stats.to_line())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
