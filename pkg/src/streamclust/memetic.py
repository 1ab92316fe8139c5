"""Evolutionary refinement of a quotient-graph clustering.

A population of clusterings of the quotient graph is seeded with label
propagation + Louvain and evolved by recombination (overlay, contract,
Louvain, expand) and mutation (balanced splits of every cluster).  An
offspring replaces the most similar member among those it is at least as
good as, where similarity is the symmetric difference of cut-edge sets.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .louvain import label_propagation, louvain
from .quotient import QuotientGraph, contract, quotient_modularity, relabel

logger = logging.getLogger(__name__)

DEFAULT_POPULATION = 10
RECOMBINE_PROB = 0.9


@dataclass
class Individual:
    partition: np.ndarray
    fitness: float
    cut_signature: np.ndarray  # bool mask over the canonical (i < j) quotient edges

    @classmethod
    def evaluate(cls, qg: QuotientGraph, partition) -> "Individual":
        partition = relabel(partition)
        return cls(partition, quotient_modularity(qg, partition), cut_signature(qg, partition))


def _canonical_edges(qg: QuotientGraph) -> tuple[np.ndarray, np.ndarray]:
    rows = qg.rows()
    keep = rows < qg.indices
    return rows[keep], qg.indices[keep]


def cut_signature(qg: QuotientGraph, partition) -> np.ndarray:
    a, b = _canonical_edges(qg)
    partition = np.asarray(partition)
    return partition[a] != partition[b]


def symmetric_difference(sig_a: np.ndarray, sig_b: np.ndarray) -> int:
    return int(np.count_nonzero(sig_a ^ sig_b))


@dataclass
class Population:
    individuals: list
    rng: np.random.Generator
    generation: int = 0

    def __len__(self) -> int:
        return len(self.individuals)

    def best(self) -> Individual:
        return self.individuals[self.best_index()]

    def best_index(self) -> int:
        fit = [ind.fitness for ind in self.individuals]
        return int(np.argmax(fit))  # first maximum


def init_population(qg: QuotientGraph, size: int = DEFAULT_POPULATION, seed: int = 0,
                    initial: Sequence = ()) -> Population:
    """Seed ``size`` individuals.

    Partitions in ``initial`` are taken as they are; the rest are Louvain runs
    started from label propagation with independent seeds.  Label propagation
    can collapse weakly separated groups into one label that local moving
    cannot undo, so each slot keeps the better of that run and a Louvain run
    from singletons with the same seed.
    """
    if size < 2:
        raise ValueError("population size must be >= 2")
    rng = np.random.default_rng(seed)
    individuals = [Individual.evaluate(qg, p) for p in initial][:size]
    while len(individuals) < size:
        s = int(rng.integers(2**31))
        rounds = int(rng.integers(1, 6))
        lp = Individual.evaluate(qg, louvain(qg, label_propagation(qg, rounds, seed=s), seed=s))
        plain = Individual.evaluate(qg, louvain(qg, None, seed=s))
        individuals.append(lp if lp.fitness >= plain.fitness else plain)
    return Population(individuals, rng)


def tournament_select(pop: Population, rng: Optional[np.random.Generator] = None) -> int:
    """Fitter of two distinct uniformly drawn members; ties go to the lower index."""
    rng = pop.rng if rng is None else rng
    i, j = rng.choice(len(pop), size=2, replace=False).tolist()
    if i > j:
        i, j = j, i
    return j if pop.individuals[j].fitness > pop.individuals[i].fitness else i


def overlay(p1, p2) -> np.ndarray:
    """Two nodes share a cluster iff they share one in both inputs."""
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValueError("partitions must have equal length")
    if len(p1) == 0:
        return p1.astype(np.int64)
    a = relabel(p1)
    b = relabel(p2)
    return relabel(a * (int(b.max()) + 1) + b)


def _combine(qg: QuotientGraph, p_a, p_b, seed: int) -> np.ndarray:
    coarse, labels = contract(qg, overlay(p_a, p_b))
    coarse_part = louvain(coarse, None, seed=seed)
    return coarse_part[labels]


def _two_parents(pop: Population, rng) -> tuple[int, int]:
    a = tournament_select(pop, rng)
    b = a
    for _ in range(8):
        b = tournament_select(pop, rng)
        if b != a:
            break
    if b == a:
        b = (a + 1 + int(rng.integers(len(pop) - 1))) % len(pop)
    return a, b


def recombine(pop: Population, qg: QuotientGraph, rng: Optional[np.random.Generator] = None) -> Individual:
    """Overlay two tournament-selected parents, contract, run Louvain, expand.

    If the result is worse than the better parent, that parent is returned
    instead, so the offspring is never worse than its inputs.
    """
    rng = pop.rng if rng is None else rng
    a, b = _two_parents(pop, rng)
    pa, pb = pop.individuals[a], pop.individuals[b]
    child = Individual.evaluate(qg, _combine(qg, pa.partition, pb.partition, int(rng.integers(2**31))))
    better = pa if pa.fitness >= pb.fitness else pb
    if child.fitness < better.fitness:
        return Individual(better.partition.copy(), better.fitness, better.cut_signature.copy())
    return child


def split_clusters(qg: QuotientGraph, partition, rng: np.random.Generator) -> np.ndarray:
    """Split every cluster of size >= 2 into blocks of sizes ceil(s/2) and floor(s/2).

    The first block grows breadth-first from a random member inside the
    cluster; when the cluster is disconnected the search restarts from another
    random unvisited member.
    """
    part = relabel(partition)
    out = part.copy()
    k = int(part.max()) + 1
    indptr, indices = qg.indptr, qg.indices
    members_of = [[] for _ in range(k)]
    for v, c in enumerate(part.tolist()):
        members_of[c].append(v)
    next_id = k
    for c, members in enumerate(members_of):
        s = len(members)
        if s < 2:
            continue
        target = (s + 1) // 2
        member_set = set(members)
        taken: set[int] = set()
        remaining = list(members)
        rng.shuffle(remaining)
        while len(taken) < target:
            start = next(v for v in remaining if v not in taken)
            queue = deque([start])
            taken.add(start)
            while queue and len(taken) < target:
                v = queue.popleft()
                for u in indices[indptr[v]:indptr[v + 1]].tolist():
                    if u in member_set and u not in taken:
                        taken.add(u)
                        queue.append(u)
                        if len(taken) == target:
                            break
        for v in members:
            if v not in taken:
                out[v] = next_id
        next_id += 1
    return relabel(out)


def mutate(pop: Population, qg: QuotientGraph, rng: Optional[np.random.Generator] = None) -> Individual:
    """Split the clusters of two random members, then recombine the splits.

    No quality floor: the replacement rule protects the population.
    """
    rng = pop.rng if rng is None else rng
    a, b = rng.choice(len(pop), size=2, replace=False).tolist()
    sa = split_clusters(qg, pop.individuals[a].partition, rng)
    sb = split_clusters(qg, pop.individuals[b].partition, rng)
    return Individual.evaluate(qg, _combine(qg, sa, sb, int(rng.integers(2**31))))


def replace_most_similar(pop: Population, offspring: Individual) -> bool:
    """Replace the most similar member among those no better than ``offspring``.

    Returns False (offspring discarded) when every member is strictly better.
    """
    best_i, best_d = -1, None
    for i, ind in enumerate(pop.individuals):
        if ind.fitness <= offspring.fitness:
            d = symmetric_difference(ind.cut_signature, offspring.cut_signature)
            if best_d is None or d < best_d:
                best_i, best_d = i, d
    if best_i < 0:
        return False
    pop.individuals[best_i] = offspring
    return True


@dataclass
class EvolveReport:
    generations: int = 0
    accepted: int = 0
    best_history: list = field(default_factory=list)
    seconds: float = 0.0


def evolve(qg: QuotientGraph, size: int = DEFAULT_POPULATION, time_budget: Optional[float] = 15.0,
           seed: int = 0, iterations: Optional[int] = None, initial: Sequence = (),
           report: Optional[EvolveReport] = None) -> Individual:
    """Run the memetic loop and return the fittest individual.

    With ``iterations`` set the loop runs exactly that many generations and
    ignores the clock, which makes the result a pure function of the seed.
    Otherwise it stops once ``time_budget`` seconds have elapsed (the
    population is always fully initialized first).
    """
    if iterations is None and (time_budget is None or time_budget < 0):
        raise ValueError("need a time budget or an iteration count")
    start = time.perf_counter()
    report = EvolveReport() if report is None else report
    pop = init_population(qg, size, seed, initial)
    report.best_history.append(pop.best().fitness)
    if qg.n >= 2:
        while True:
            if iterations is not None:
                if pop.generation >= iterations:
                    break
            elif time.perf_counter() - start >= time_budget:
                break
            if pop.rng.random() < RECOMBINE_PROB:
                child = recombine(pop, qg)
            else:
                child = mutate(pop, qg)
            if replace_most_similar(pop, child):
                report.accepted += 1
            pop.generation += 1
            report.best_history.append(pop.best().fitness)
    report.generations = pop.generation
    report.seconds = time.perf_counter() - start
    logger.debug("memetic: %d generations, %d accepted, best Q=%.6f",
                 report.generations, report.accepted, pop.best().fitness)
    return pop.best()
