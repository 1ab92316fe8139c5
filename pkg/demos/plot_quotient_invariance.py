"""
Contracting a clustering keeps its modularity
=============================================

Each cluster becomes a supernode with a self-loop of twice its internal
weight.  Any clustering of the supernodes then scores exactly what its
expansion scores on the original graph.
"""

import numpy as np

from streamclust import QuotientGraph, contract, modularity, quotient_modularity
from streamclust.evaluation import ring_of_cliques

g, truth = ring_of_cliques(6, 5)
base = QuotientGraph.from_memory_graph(g)

# contract by the cliques: 6 supernodes with self-loop 20 and degree 22 each
coarse, labels = contract(base, truth)
print("supernodes", coarse.n, "self loops", coarse.self_loop.tolist(), "degrees", coarse.degree.tolist())

# the identity partition of the quotient is the clique clustering of g
print(quotient_modularity(coarse, np.arange(coarse.n)), modularity(truth.tolist(), g.records()))

# merging neighbouring supernodes pairwise, then expanding
pairs = np.arange(coarse.n) // 2
print(quotient_modularity(coarse, pairs), modularity(pairs[labels].tolist(), g.records()))
