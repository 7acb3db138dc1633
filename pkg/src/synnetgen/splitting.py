"""Split a reference network into its clustered and singleton parts.

The clustered part is the subgraph induced by all nodes whose cluster has
more than one member; the singleton part is every remaining edge (at least
one endpoint is a singleton), kept over the full node universe. Together
the two edge sets partition the reference edges exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Clustering, CsrGraph, EdgeSet, build_csr


@dataclass
class SplitResult:
    g_c: CsrGraph            # induced subgraph on clustered nodes, local ids
    gc_nodes: np.ndarray     # local id -> parent id, ascending
    c_c: Clustering          # original cluster ids, over g_c local ids
    g_s_edges: EdgeSet       # singleton-side edges over parent ids
    c_s: Clustering          # over parent ids; singletons get fresh ids


def fresh_singleton_ids(c: Clustering) -> np.ndarray:
    """Cluster id for each singleton node: max input id + rank of node id."""
    singles = c.singleton_nodes
    if len(c.cluster_ids) == 0:
        base = 0
    else:
        base = int(c.cluster_ids.max())
    return base + 1 + np.arange(len(singles), dtype=np.int64)


def split(g: CsrGraph, c: Clustering) -> SplitResult:
    """Partition g's edges by whether both endpoints are clustered.

    Pure edge filtering over the tabular edge list; no intermediate
    adjacency is built. g_c keeps every clustered node even if it ends up
    isolated there.
    """
    if c.n != g.n:
        raise ValueError(f"clustering covers {c.n} nodes, graph has {g.n}")
    arr = g.edge_array()
    clustered = c.clustered_mask
    if arr.size:
        both = clustered[arr[:, 0]] & clustered[arr[:, 1]]
        gc_parent = arr[both]
        gs_arr = arr[~both]
    else:
        gc_parent = arr
        gs_arr = arr
    gc_nodes = np.flatnonzero(clustered)
    mark = np.full(g.n, -1, dtype=np.int64)
    mark[gc_nodes] = np.arange(len(gc_nodes), dtype=np.int64)
    g_c = build_csr(mark[gc_parent], len(gc_nodes))
    c_c = Clustering(c.assignment[gc_nodes])

    assign_s = c.assignment.copy()
    singles = c.singleton_nodes
    assign_s[singles] = fresh_singleton_ids(c)
    g_s_edges = EdgeSet._from_canonical(map(tuple, gs_arr.tolist()))
    return SplitResult(
        g_c=g_c,
        gc_nodes=gc_nodes,
        c_c=c_c,
        g_s_edges=g_s_edges,
        c_s=Clustering(assign_s),
    )
