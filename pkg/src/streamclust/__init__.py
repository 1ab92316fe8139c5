"""Streaming modularity clustering with quotient-graph memetic refinement
and re-streaming local search."""

from .graph_io import (GraphFormatError, GraphHeader, MemoryGraph, NodeOffsetIndex, NodeRecord,
                       NodeStream, next_node, open_stream, read_clustering, read_nodes_at,
                       write_clustering)
from .modularity import (ClusteringState, apply_move, compute_cluster, delta_modularity, modularity,
                         stream_pass_assign)
from .quotient import (QuotientEdgeAccumulator, QuotientGraph, accumulate_edges, contract, finalize,
                       project, quotient_modularity)
from .louvain import label_propagation, louvain
from .memetic import evolve
from .restream import LSConfig, restream_local_search
from .evaluation import audit_modularity, nmi, planted_partition, ring_of_cliques
from .cli import ModeConfig, run

__version__ = "0.1.0"
