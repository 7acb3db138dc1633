"""Shared test fixtures: graph builders and independent oracles.

Oracles here are deliberately written the slow, obvious way (exhaustive
enumeration, O(n^3) loops, arbitrary precision arithmetic) so they cannot
share a bug with the fast implementations they check.
"""

from __future__ import annotations

import itertools
from collections import Counter

import networkx as nx
import numpy as np

from synnetgen import Clustering, EdgeSet, build_csr


# ===== Random graph builders =====


def random_edge_array(rng, n, p):
    """Random simple graph as a canonical edge array."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def random_graph(rng, n, p):
    return build_csr(random_edge_array(rng, n, p), n)


def random_clustering(rng, n, k):
    """Uniform random assignment of n nodes to k labels."""
    return Clustering(rng.integers(0, k, size=n))


def _cluster_core(rng, size, target_cut):
    """Connected cluster whose min cut lands at the target (1..4)."""
    if size == 2:
        return [(0, 1)]
    c = min(target_cut, size - 1)
    if c <= 1:
        # random tree
        return [(int(rng.integers(0, i)), i) for i in range(1, size)]
    if c == 2:
        return [(i, (i + 1) % size) for i in range(size)]
    h = nx.hkn_harary_graph(c, size)
    return [(min(u, v), max(u, v)) for u, v in h.edges()]


def planted_reference(rng, n_nodes, n_clusters, singleton_frac=0.08,
                      inter_frac=0.25, cut_choices=(1, 2, 3, 4)):
    """Planted-partition style reference network.

    Returns (edge_array, assignment). Clusters get connected cores with
    min cuts drawn from cut_choices; singletons attach to random clustered
    nodes; extra random inter-cluster edges are sprinkled on top.
    """
    n_single = int(round(n_nodes * singleton_frac))
    n_clustered = n_nodes - n_single
    assert n_clustered >= 5 * n_clusters, "not enough nodes for the clusters"
    # random composition with floor 5
    splits = np.sort(rng.choice(n_clustered - 5 * n_clusters + 1,
                                size=n_clusters - 1, replace=True))
    sizes = np.diff(np.concatenate(([0], splits, [n_clustered - 5 * n_clusters]))) + 5
    assert sizes.sum() == n_clustered and sizes.min() >= 5

    edges = set()
    assignment = np.empty(n_nodes, dtype=np.int64)
    base = 0
    for ci, size in enumerate(sizes.tolist()):
        target = int(rng.choice(cut_choices))
        for u, v in _cluster_core(rng, size, target):
            edges.add((base + u, base + v))
        assignment[base:base + size] = ci
        base += size
    intra_total = len(edges)
    # inter-cluster edges between random clustered nodes
    want = int(round(inter_frac * intra_total))
    tries = 0
    while want > 0 and tries < 20 * want:
        tries += 1
        u = int(rng.integers(0, n_clustered))
        v = int(rng.integers(0, n_clustered))
        if u == v or assignment[u] == assignment[v]:
            continue
        e = (min(u, v), max(u, v))
        if e in edges:
            continue
        edges.add(e)
        want -= 1
    # singletons: unique cluster ids, one to three edges each
    for i in range(n_single):
        node = n_clustered + i
        assignment[node] = n_clusters + i
        for _ in range(int(rng.integers(1, 4))):
            v = int(rng.integers(0, n_clustered))
            edges.add((min(node, v), max(node, v)))
    arr = np.array(sorted(edges), dtype=np.int64)
    return arr, assignment


def write_network_files(tmp_path, edge_array, assignment, prefix="ref"):
    """Write edge list and clustering files; returns their paths."""
    net = tmp_path / f"{prefix}_edges.tsv"
    clu = tmp_path / f"{prefix}_clusters.tsv"
    net.write_text(
        "".join(f"{u}\t{v}\n" for u, v in np.asarray(edge_array).tolist()),
        encoding="utf-8")
    clu.write_text(
        "".join(f"{i}\t{c}\n" for i, c in enumerate(np.asarray(assignment).tolist())),
        encoding="utf-8")
    return net, clu


# ===== Oracles =====


def brute_force_min_cut(n, edges):
    """Exhaustive minimum over all 2^(n-1) - 1 proper bipartitions."""
    if n <= 1:
        return 0
    masks = np.arange(1, 1 << (n - 1), dtype=np.int64)
    cut = np.zeros(len(masks), dtype=np.int64)
    zeros = np.zeros(len(masks), dtype=np.int64)
    for u, v in edges:
        bu = ((masks >> u) & 1) if u < n - 1 else zeros
        bv = ((masks >> v) & 1) if v < n - 1 else zeros
        cut += bu != bv
    return int(cut.min())


def cut_across(edges, side):
    """Edge count across an explicit bipartition."""
    side = set(int(x) for x in side)
    return sum(1 for u, v in edges if (u in side) != (v in side))


def triangle_oracle(n, edges):
    """(triangles per node, wedges per node) by cubic enumeration."""
    adj = [[False] * n for _ in range(n)]
    for u, v in edges:
        adj[u][v] = adj[v][u] = True
    tri = [0] * n
    for a, b, c in itertools.combinations(range(n), 3):
        if adj[a][b] and adj[b][c] and adj[a][c]:
            tri[a] += 1
            tri[b] += 1
            tri[c] += 1
    deg = [sum(row) for row in adj]
    wedges = [d * (d - 1) // 2 for d in deg]
    return tri, wedges


def local_coefficient_oracle(n, edges, count_low_degree_as_zero=True):
    tri, wedges = triangle_oracle(n, edges)
    vals = [t / w if w > 0 else 0.0 for t, w in zip(tri, wedges)]
    if count_low_degree_as_zero:
        return sum(vals) / n if n else 0.0
    eligible = [v for v, w in zip(vals, wedges) if w > 0]
    return sum(eligible) / len(eligible) if eligible else 0.0


def global_coefficient_oracle(n, edges):
    tri, wedges = triangle_oracle(n, edges)
    total_tri = sum(tri) / 3
    total_wedges = sum(wedges)
    return 3 * total_tri / total_wedges if total_wedges else 0.0


def min_edges_for_degree_floor(n, existing, t):
    """Smallest number of additions giving every node degree >= t.

    Exhaustive search over subsets of the missing edges, smallest first.
    Only sane for n <= 6.
    """
    existing = {(min(u, v), max(u, v)) for u, v in existing}
    missing = [e for e in itertools.combinations(range(n), 2) if e not in existing]
    deg = Counter()
    for u, v in existing:
        deg[u] += 1
        deg[v] += 1
    for k in range(len(missing) + 1):
        for subset in itertools.combinations(missing, k):
            d = deg.copy()
            for u, v in subset:
                d[u] += 1
                d[v] += 1
            if all(d[x] >= t for x in range(n)):
                return k
    raise AssertionError("unreachable: adding all missing edges saturates")


def block_tally_oracle(edges, assignment):
    """Single-threaded dict tally of edges into cluster pairs."""
    tally = Counter()
    for u, v in edges:
        r, s = assignment[u], assignment[v]
        if r > s:
            r, s = s, r
        tally[(int(r), int(s))] += 1
    return dict(tally)


def nmi_oracle(a, b):
    """Direct entropy-sum NMI with arithmetic mean normalization."""
    import math

    a = list(map(int, a))
    b = list(map(int, b))
    n = len(a)
    ca = Counter(a)
    cb = Counter(b)
    cab = Counter(zip(a, b))
    h_a = -sum((c / n) * math.log(c / n) for c in ca.values())
    h_b = -sum((c / n) * math.log(c / n) for c in cb.values())
    mi = 0.0
    for (x, y), c in cab.items():
        p = c / n
        mi += p * math.log(p * n * n / (ca[x] * cb[y]))
    denom = (h_a + h_b) / 2
    if denom <= 0:
        return 1.0
    if mi <= 0:
        return 0.0
    return mi / denom


def ari_pair_oracle(a, b):
    """ARI from explicit O(n^2) pair counts."""
    n = len(a)
    n11 = n00 = n10 = n01 = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = a[i] == a[j]
            same_b = b[i] == b[j]
            if same_a and same_b:
                n11 += 1
            elif same_a:
                n10 += 1
            elif same_b:
                n01 += 1
            else:
                n00 += 1
    num = 2 * (n11 * n00 - n10 * n01)
    den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00)
    if den == 0:
        return 1.0
    return num / den


def structural_violations(g_out, c, stats):
    """Check every multi-node cluster of the output against its targets.

    stats maps cluster id -> ClusterStats of the reference. Returns a list
    of violation strings (empty means all guarantees hold): connectivity,
    exact min cut >= min(k, size-1), min intra degree >= min(max(1,k), size-1).
    """
    from synnetgen import global_min_cut, induced_subgraph
    from synnetgen.repair import min_degree_target

    bad = []
    for cid, s in stats.items():
        members = c.members(cid)
        size = len(members)
        if size < 2:
            continue
        sub, _ = induced_subgraph(g_out, members)
        cut = global_min_cut(sub).value
        need_cut = max(1, min(s.mincut, size - 1))
        if cut < need_cut:
            bad.append(f"cluster {cid}: cut {cut} < {need_cut}")
        t = min_degree_target(s.mincut, size)
        dmin = int(sub.degrees.min())
        if dmin < t:
            bad.append(f"cluster {cid}: min degree {dmin} < {t}")
    return bad


def edges_of(g):
    """Edge tuples of a CsrGraph, canonical."""
    return [tuple(e) for e in g.edge_array().tolist()]


def graph_from_edges(edges, n):
    return build_csr(np.array(sorted(set(edges)), dtype=np.int64).reshape(-1, 2), n)
