import numpy as np
import pytest

from conftest import random_graph, set_partitions, two_triangles
from streamclust.evaluation import ring_of_cliques
from streamclust.graph_io import MemoryGraph
from streamclust.memetic import (EvolveReport, Individual, Population, cut_signature, evolve, init_population,
                                 mutate, overlay, recombine, replace_most_similar, split_clusters,
                                 symmetric_difference, tournament_select)
from streamclust.quotient import QuotientGraph, contract, identity_partition, quotient_modularity, relabel


def qgraph(g):
    return QuotientGraph.from_memory_graph(g)


def same_partition(a, b):
    return relabel(a).tolist() == relabel(b).tolist()


def fake_population(fitnesses, signatures=None, seed=0):
    inds = []
    for i, f in enumerate(fitnesses):
        sig = np.zeros(0, dtype=bool) if signatures is None else np.asarray(signatures[i], dtype=bool)
        inds.append(Individual(np.zeros(1, dtype=np.int64), f, sig))
    return Population(inds, np.random.default_rng(seed))


def ring_quotient(k=8, s=5):
    g, truth = ring_of_cliques(k, s)
    coarse, _ = contract(qgraph(g), truth)
    return coarse


class TestPopulation:
    def test_two_triangles_p2(self):
        qg = qgraph(two_triangles())
        pop = init_population(qg, size=2, seed=0)
        assert len(pop) == 2
        for ind in pop.individuals:
            assert ind.fitness == pytest.approx(5 / 14, abs=1e-12)

    def test_at_least_singletons(self):
        qg = qgraph(random_graph(40, 0.1, np.random.default_rng(1)))
        floor = quotient_modularity(qg, identity_partition(qg))
        pop = init_population(qg, size=6, seed=3)
        assert all(ind.fitness >= floor for ind in pop.individuals)

    def test_reproducible(self):
        qg = qgraph(random_graph(40, 0.1, np.random.default_rng(1)))
        a = init_population(qg, size=5, seed=11)
        b = init_population(qg, size=5, seed=11)
        assert all(np.array_equal(x.partition, y.partition) for x, y in zip(a.individuals, b.individuals))

    def test_initial_members_kept(self):
        qg = qgraph(two_triangles())
        pop = init_population(qg, size=3, initial=[identity_partition(qg)])
        assert pop.individuals[0].partition.tolist() == list(range(6))

    def test_size_validated(self):
        with pytest.raises(ValueError):
            init_population(qgraph(two_triangles()), size=1)


class TestTournament:
    def test_two_members(self):
        pop = fake_population([0.1, 0.9])
        assert all(tournament_select(pop) == 1 for _ in range(20))

    def test_ties_go_to_lower_index(self):
        pop = fake_population([0.5, 0.5])
        assert all(tournament_select(pop) == 0 for _ in range(20))

    def test_winner_frequency(self):
        pop = fake_population([0.1, 0.2, 0.9], seed=5)
        draws = [tournament_select(pop) for _ in range(10_000)]
        assert abs(draws.count(2) / len(draws) - 2 / 3) <= 0.05
        assert draws.count(0) == 0


class TestOverlay:
    def test_idempotent(self):
        p = np.array([3, 3, 1, 2, 1])
        assert same_partition(overlay(p, p), p)

    def test_full_disagreement(self):
        assert overlay([0, 0, 1, 1], [0, 1, 0, 1]).tolist() == [0, 1, 2, 3]

    def test_intersection(self):
        assert same_partition(overlay([0, 0, 0, 1], [0, 0, 1, 1]), [0, 0, 1, 2])

    def test_symmetric_and_refining(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = rng.integers(0, 4, size=20)
            b = rng.integers(0, 4, size=20)
            ov = overlay(a, b)
            assert same_partition(ov, overlay(b, a))
            for i in range(20):
                for j in range(20):
                    assert (ov[i] == ov[j]) == (a[i] == a[j] and b[i] == b[j])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            overlay([0, 1], [0])

    def test_contraction_keeps_overlay_modularity(self):
        rng = np.random.default_rng(4)
        qg = qgraph(random_graph(40, 0.15, rng, max_weight=3))
        ov = overlay(rng.integers(0, 5, size=40), rng.integers(0, 5, size=40))
        coarse, _ = contract(qg, ov)
        assert quotient_modularity(coarse, identity_partition(coarse)) == pytest.approx(
            quotient_modularity(qg, ov), abs=1e-9)


class TestRecombine:
    def test_never_worse_than_parents(self):
        qg = qgraph(two_triangles())
        for seed in range(100):
            rng = np.random.default_rng(seed)
            parents = [Individual.evaluate(qg, rng.integers(0, 3, size=6)) for _ in range(2)]
            pop = Population(parents, rng)
            child = recombine(pop, qg)
            assert child.fitness >= max(p.fitness for p in parents)
            assert child.fitness == pytest.approx(quotient_modularity(qg, child.partition), abs=1e-12)

    def test_optimal_parents_fixed_point(self):
        qg = qgraph(two_triangles())
        opt = Individual.evaluate(qg, [0, 0, 0, 1, 1, 1])
        pop = Population([opt, opt], np.random.default_rng(0))
        assert recombine(pop, qg).partition.tolist() == [0, 0, 0, 1, 1, 1]


class TestMutation:
    def test_singletons_unchanged(self):
        qg = qgraph(two_triangles())
        assert split_clusters(qg, range(6), np.random.default_rng(0)).tolist() == list(range(6))

    @pytest.mark.parametrize("seed", range(8))
    def test_split_path_of_four(self, seed):
        qg = qgraph(MemoryGraph.from_edges(4, [0, 1, 2], [1, 2, 3]))
        out = split_clusters(qg, [0, 0, 0, 0], np.random.default_rng(seed))
        blocks = [set(np.flatnonzero(out == c).tolist()) for c in range(2)]
        assert sorted(len(b) for b in blocks) == [2, 2]
        # the BFS-grown block is always a connected pair
        assert any(max(b) - min(b) == 1 for b in blocks)

    def test_split_odd_sizes(self):
        g, truth = ring_of_cliques(3, 5)
        out = split_clusters(qgraph(g), truth, np.random.default_rng(1))
        sizes = sorted(np.bincount(out).tolist())
        assert sizes == [2, 2, 2, 3, 3, 3]

    def test_split_increases_cluster_count(self):
        rng = np.random.default_rng(6)
        qg = qgraph(random_graph(30, 0.2, rng))
        for _ in range(20):
            p = relabel(rng.integers(0, 8, size=30))
            assert split_clusters(qg, p, rng).max() > p.max()

    def test_mutate_yields_valid_individual(self):
        qg = qgraph(random_graph(30, 0.2, np.random.default_rng(2)))
        pop = init_population(qg, size=4, seed=2)
        child = mutate(pop, qg)
        assert child.fitness == pytest.approx(quotient_modularity(qg, child.partition), abs=1e-12)
        assert np.array_equal(child.cut_signature, cut_signature(qg, child.partition))


class TestReplacement:
    def test_worse_offspring_discarded(self):
        pop = fake_population([0.5, 0.6], [[1, 0], [0, 1]])
        before = list(pop.individuals)
        child = Individual(np.zeros(1, dtype=np.int64), 0.4, np.array([1, 0], dtype=bool))
        assert not replace_most_similar(pop, child)
        assert pop.individuals == before

    def test_equal_member_replaced(self):
        pop = fake_population([0.5, 0.5], [[1, 0], [0, 1]])
        child = Individual(np.zeros(1, dtype=np.int64), 0.5, np.array([0, 1], dtype=bool))
        assert replace_most_similar(pop, child)
        assert pop.individuals[1] is child

    def test_smallest_symmetric_difference(self):
        # edges e1..e4; A = {e1, e2}, B = {e1, e3}, offspring = {e1, e2, e4}
        pop = fake_population([0.3, 0.4], [[1, 1, 0, 0], [1, 0, 1, 0]])
        child = Individual(np.zeros(1, dtype=np.int64), 0.5, np.array([1, 1, 0, 1], dtype=bool))
        assert symmetric_difference(pop.individuals[0].cut_signature, child.cut_signature) == 1
        assert symmetric_difference(pop.individuals[1].cut_signature, child.cut_signature) == 3
        assert replace_most_similar(pop, child)
        assert pop.individuals[0] is child

    def test_only_dominated_members_are_candidates(self):
        pop = fake_population([0.9, 0.4], [[1, 1], [0, 0]])
        child = Individual(np.zeros(1, dtype=np.int64), 0.5, np.array([1, 1], dtype=bool))
        assert replace_most_similar(pop, child)
        assert pop.individuals[0].fitness == 0.9 and pop.individuals[1] is child


class TestEvolve:
    def test_zero_iterations_returns_best_initial(self):
        qg = qgraph(random_graph(30, 0.15, np.random.default_rng(3)))
        pop = init_population(qg, size=4, seed=8)
        best = evolve(qg, size=4, seed=8, iterations=0)
        assert np.array_equal(best.partition, pop.best().partition)

    def test_deterministic_in_iteration_mode(self):
        qg = qgraph(random_graph(40, 0.12, np.random.default_rng(5)))
        a = evolve(qg, size=4, seed=1, iterations=25)
        b = evolve(qg, size=4, seed=1, iterations=25)
        assert np.array_equal(a.partition, b.partition)

    def test_best_history_non_decreasing(self):
        qg = qgraph(random_graph(40, 0.12, np.random.default_rng(5)))
        report = EvolveReport()
        evolve(qg, size=4, seed=2, iterations=40, report=report)
        assert report.generations == 40
        assert np.all(np.diff(report.best_history) >= 0)

    def test_cached_fitness_stays_exact(self):
        qg = qgraph(random_graph(40, 0.12, np.random.default_rng(7), max_weight=3))
        pop = init_population(qg, size=5, seed=4)
        for gen in range(30):
            child = recombine(pop, qg) if gen % 10 else mutate(pop, qg)
            replace_most_similar(pop, child)
            for ind in pop.individuals:
                assert abs(ind.fitness - quotient_modularity(qg, ind.partition)) <= 1e-9
                assert np.array_equal(ind.cut_signature, cut_signature(qg, ind.partition))

    def test_ring_of_cliques_quotient_reaches_optimum(self):
        qg = ring_quotient()
        best_q = max(quotient_modularity(qg, p) for p in set_partitions(qg.n))
        best = evolve(qg, size=6, seed=0, iterations=30)
        assert best.fitness == pytest.approx(best_q, abs=1e-12)

    def test_wall_clock_budget(self):
        qg = ring_quotient()
        report = EvolveReport()
        evolve(qg, size=4, time_budget=0.2, seed=0, report=report)
        assert report.seconds < 5

    def test_needs_a_budget(self):
        with pytest.raises(ValueError):
            evolve(qgraph(two_triangles()), time_budget=None)
