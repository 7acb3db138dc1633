"""Fidelity metrics between a reference network and a synthetic one.

Three scalar comparisons (absolute difference, relative difference, root
mean squared error over aligned sequences) applied to eight network
statistics, plus clustering agreement scores (NMI, ARI) and a Frobenius
distance between adjacency matrices for small fixtures.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import Clustering, CsrGraph, connected_components, gather_neighbors, induced_subgraph
from .mincut import global_min_cut

log = logging.getLogger(__name__)

DIAMETER_GUARD = 200_000

MIXING_EDGE_FRACTION = "edge-fraction"
MIXING_NODE_MEAN = "node-mean"

ALIGN_IDENTITY = "identity"   # element i of both sequences is the same node
ALIGN_SORTED = "sorted"       # rank-aligned descending sequences


# ===== Scalar comparisons =====


def absolute_difference(s: float, s_syn: float) -> float:
    """Signed difference, reference minus synthetic."""
    return float(s) - float(s_syn)


def relative_difference(s: float, s_syn: float) -> float:
    """(s - s') / s; NaN when the reference value is zero."""
    s = float(s)
    if s == 0.0:
        return math.nan
    return (s - float(s_syn)) / s


def rmse(a, b) -> float:
    """Root mean squared error between two aligned sequences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return math.nan
    return float(np.sqrt(np.mean((a - b) ** 2)))


def frobenius_diff(a, b) -> float:
    """Frobenius norm of the entrywise difference of two matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


# ===== Per-network statistics =====


def _triangles_per_node(g: CsrGraph) -> np.ndarray:
    if g.n == 0 or g.m == 0:
        return np.zeros(g.n, dtype=np.float64)
    a = sp.csr_matrix(
        (np.ones(len(g.cols), dtype=np.float64), g.cols, g.offsets),
        shape=(g.n, g.n),
    )
    common = (a @ a).multiply(a)
    return np.asarray(common.sum(axis=1)).ravel() / 2.0


def clustering_coefficients(g: CsrGraph, count_low_degree_as_zero: bool = True
                            ) -> tuple[float, float]:
    """(mean local coefficient, global coefficient).

    Local coefficient of a node with degree < 2 counts as 0 in the mean by
    default; pass False to exclude those nodes from the mean instead. The
    global coefficient is 3 * triangles / wedges (0 when there are no
    wedges).
    """
    deg = g.degrees.astype(np.float64)
    tri = _triangles_per_node(g)
    pairs = deg * (deg - 1) / 2.0
    eligible = deg >= 2
    local = np.zeros(g.n, dtype=np.float64)
    local[eligible] = tri[eligible] / pairs[eligible]
    if count_low_degree_as_zero:
        mean_local = float(local.mean()) if g.n else 0.0
    else:
        mean_local = float(local[eligible].mean()) if eligible.any() else 0.0
    wedges = float(pairs.sum())
    total_tri = float(tri.sum()) / 3.0
    global_coeff = 3.0 * total_tri / wedges if wedges > 0 else 0.0
    return mean_local, global_coeff


def _bfs_eccentricity(g: CsrGraph, source: int) -> tuple[int, int]:
    """(eccentricity within the source's component, farthest node id)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    farthest = source
    while frontier.size:
        nb = gather_neighbors(g, frontier)
        nb = np.unique(nb[dist[nb] < 0])
        if nb.size == 0:
            break
        level += 1
        dist[nb] = level
        frontier = nb
        farthest = int(nb[0])
    return level, farthest


def diameter_largest_component(g: CsrGraph, guard: int = DIAMETER_GUARD
                               ) -> tuple[int, bool]:
    """Diameter of the largest connected component.

    Exact via breadth-first search from every component node. Components
    above the guard get a double-sweep lower bound instead; the second
    return value says whether the figure is exact.
    """
    if g.n == 0:
        return 0, True
    labels = connected_components(g)
    counts = np.bincount(labels)
    comp = int(np.argmax(counts))  # ties resolve to the smaller label
    nodes = np.flatnonzero(labels == comp)
    if len(nodes) == 1:
        return 0, True
    if len(nodes) > guard:
        _, far = _bfs_eccentricity(g, int(nodes[0]))
        ecc, _ = _bfs_eccentricity(g, far)
        log.warning("component of %d nodes exceeds diameter guard %d; "
                    "reporting double-sweep lower bound", len(nodes), guard)
        return ecc, False
    best = 0
    for s in nodes.tolist():
        ecc, _ = _bfs_eccentricity(g, s)
        if ecc > best:
            best = ecc
    return best, True


def mixing_parameter(g: CsrGraph, c: Clustering,
                     mode: str = MIXING_EDGE_FRACTION) -> float:
    """Fraction of edges crossing clusters, or the per-node mean of that.

    Singleton nodes sit in their own clusters, so their edges always cross.
    """
    arr = g.edge_array()
    if mode == MIXING_EDGE_FRACTION:
        if g.m == 0:
            return 0.0
        crossing = c.assignment[arr[:, 0]] != c.assignment[arr[:, 1]]
        return float(crossing.sum()) / float(g.m)
    if mode == MIXING_NODE_MEAN:
        deg = g.degrees
        cross_deg = np.zeros(g.n, dtype=np.int64)
        crossing = arr[c.assignment[arr[:, 0]] != c.assignment[arr[:, 1]]]
        np.add.at(cross_deg, crossing[:, 0], 1)
        np.add.at(cross_deg, crossing[:, 1], 1)
        has_deg = deg > 0
        if not has_deg.any():
            return 0.0
        return float(np.mean(cross_deg[has_deg] / deg[has_deg]))
    raise ValueError(f"unknown mixing mode {mode!r}")


def outlier_clustered_edge_count(g: CsrGraph, c: Clustering) -> int:
    """Edges with exactly one singleton endpoint."""
    arr = g.edge_array()
    if not arr.size:
        return 0
    single = ~c.clustered_mask
    return int((single[arr[:, 0]] ^ single[arr[:, 1]]).sum())


def cluster_mincut_map(g: CsrGraph, c: Clustering) -> dict[int, int]:
    """Exact min cut of every multi-node cluster's induced subgraph."""
    out = {}
    for cid in c.multi_cluster_ids.tolist():
        sub, _ = induced_subgraph(g, c.members(cid))
        out[cid] = global_min_cut(sub).value
    return out


@dataclass
class NetworkStats:
    """Descriptive statistics of one network under one clustering."""

    degree_sequence: np.ndarray          # descending
    mincut_sequence: np.ndarray          # descending, one per multi cluster
    diameter: int
    diameter_exact: bool
    outlier_clustered_edges: int
    outlier_degree_sequence: np.ndarray  # descending
    local_clustering_mean: float
    global_clustering: float
    mixing: float
    mixing_mode: str

    def to_dict(self) -> dict:
        return {
            "degree_sequence": self.degree_sequence.tolist(),
            "mincut_sequence": self.mincut_sequence.tolist(),
            "diameter": self.diameter,
            "diameter_exact": self.diameter_exact,
            "outlier_clustered_edges": self.outlier_clustered_edges,
            "outlier_degree_sequence": self.outlier_degree_sequence.tolist(),
            "local_clustering_mean": self.local_clustering_mean,
            "global_clustering": self.global_clustering,
            "mixing": self.mixing,
            "mixing_mode": self.mixing_mode,
        }


def compute_network_stats(g: CsrGraph, c: Clustering,
                          mixing_mode: str = MIXING_EDGE_FRACTION,
                          count_low_degree_as_zero: bool = True,
                          diameter_guard: int = DIAMETER_GUARD) -> NetworkStats:
    if c.n != g.n:
        raise ValueError("clustering does not cover the graph's nodes")
    deg = g.degrees
    cuts = cluster_mincut_map(g, c)
    diam, exact = diameter_largest_component(g, guard=diameter_guard)
    mean_local, global_coeff = clustering_coefficients(
        g, count_low_degree_as_zero=count_low_degree_as_zero)
    singles = c.singleton_nodes
    return NetworkStats(
        degree_sequence=np.sort(deg)[::-1].copy(),
        mincut_sequence=np.sort(np.array(
            [cuts[cid] for cid in sorted(cuts)], dtype=np.int64))[::-1].copy(),
        diameter=diam,
        diameter_exact=exact,
        outlier_clustered_edges=outlier_clustered_edge_count(g, c),
        outlier_degree_sequence=np.sort(deg[singles])[::-1].copy(),
        local_clustering_mean=mean_local,
        global_clustering=global_coeff,
        mixing=mixing_parameter(g, c, mode=mixing_mode),
        mixing_mode=mixing_mode,
    )


# ===== Reference vs synthetic comparison =====


@dataclass
class MetricEntry:
    stat: str
    metric: str   # "rmse" | "relative" | "absolute"
    value: float
    note: str = ""

    def defined(self) -> bool:
        return not math.isnan(self.value)


@dataclass
class MetricReport:
    entries: list = field(default_factory=list)
    alignment: str = ALIGN_IDENTITY
    mixing_mode: str = MIXING_EDGE_FRACTION

    def value(self, stat: str) -> float:
        for e in self.entries:
            if e.stat == stat:
                return e.value
        raise KeyError(stat)

    def to_dict(self) -> dict:
        return {
            "alignment": self.alignment,
            "mixing_mode": self.mixing_mode,
            "metrics": [
                {"stat": e.stat, "metric": e.metric,
                 "value": None if math.isnan(e.value) else e.value,
                 "note": e.note}
                for e in self.entries
            ],
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("stat,metric,value,note\n")
            for e in self.entries:
                val = "" if math.isnan(e.value) else repr(e.value)
                fh.write(f"{e.stat},{e.metric},{val},{e.note}\n")


def compare_networks(g_ref: CsrGraph, g_syn: CsrGraph, c: Clustering,
                     alignment: str = ALIGN_IDENTITY,
                     mixing_mode: str = MIXING_EDGE_FRACTION,
                     count_low_degree_as_zero: bool = True,
                     diameter_guard: int = DIAMETER_GUARD) -> MetricReport:
    """Eight-statistic fidelity report, reference versus synthetic.

    Both graphs must live on the same node universe and share the
    clustering. Degree sequences compare node-by-node under the identity
    alignment (the default) or rank-by-rank when alignment="sorted";
    min cut sequences align cluster-by-cluster.
    """
    if g_ref.n != g_syn.n or g_ref.n != c.n:
        raise ValueError("graphs and clustering must share one node universe")
    if alignment not in (ALIGN_IDENTITY, ALIGN_SORTED):
        raise ValueError(f"unknown alignment {alignment!r}")
    report = MetricReport(alignment=alignment, mixing_mode=mixing_mode)

    deg_r = g_ref.degrees.astype(np.float64)
    deg_s = g_syn.degrees.astype(np.float64)
    if alignment == ALIGN_SORTED:
        deg_r = np.sort(deg_r)[::-1]
        deg_s = np.sort(deg_s)[::-1]
    report.entries.append(MetricEntry(
        "degree_sequence", "rmse", rmse(deg_r, deg_s), alignment))

    cuts_r = cluster_mincut_map(g_ref, c)
    cuts_s = cluster_mincut_map(g_syn, c)
    cids = sorted(cuts_r)
    seq_r = [cuts_r[cid] for cid in cids]
    seq_s = [cuts_s[cid] for cid in cids]
    if alignment == ALIGN_SORTED:
        seq_r = sorted(seq_r, reverse=True)
        seq_s = sorted(seq_s, reverse=True)
    note = "by-cluster-id" if alignment == ALIGN_IDENTITY else alignment
    report.entries.append(MetricEntry(
        "mincut_sequence", "rmse",
        rmse(seq_r, seq_s) if cids else math.nan,
        note if cids else "no multi-node clusters"))

    diam_r, exact_r = diameter_largest_component(g_ref, guard=diameter_guard)
    diam_s, exact_s = diameter_largest_component(g_syn, guard=diameter_guard)
    note = "" if exact_r and exact_s else "lower-bound"
    val = relative_difference(diam_r, diam_s)
    report.entries.append(MetricEntry(
        "diameter", "relative", val,
        note or ("undefined: reference is 0" if math.isnan(val) else "")))

    oc_r = outlier_clustered_edge_count(g_ref, c)
    oc_s = outlier_clustered_edge_count(g_syn, c)
    val = relative_difference(oc_r, oc_s)
    report.entries.append(MetricEntry(
        "outlier_clustered_edges", "relative", val,
        "undefined: reference is 0" if math.isnan(val) else ""))

    singles = c.singleton_nodes
    od_r = g_ref.degrees[singles].astype(np.float64)
    od_s = g_syn.degrees[singles].astype(np.float64)
    if alignment == ALIGN_SORTED:
        od_r = np.sort(od_r)[::-1]
        od_s = np.sort(od_s)[::-1]
    report.entries.append(MetricEntry(
        "outlier_degree_sequence", "rmse",
        rmse(od_r, od_s) if len(singles) else math.nan,
        "" if len(singles) else "no outliers"))

    lc_r, gc_r = clustering_coefficients(g_ref, count_low_degree_as_zero)
    lc_s, gc_s = clustering_coefficients(g_syn, count_low_degree_as_zero)
    report.entries.append(MetricEntry(
        "local_clustering_mean", "absolute", absolute_difference(lc_r, lc_s)))
    report.entries.append(MetricEntry(
        "global_clustering", "absolute", absolute_difference(gc_r, gc_s)))

    mix_r = mixing_parameter(g_ref, c, mode=mixing_mode)
    mix_s = mixing_parameter(g_syn, c, mode=mixing_mode)
    report.entries.append(MetricEntry(
        "mixing_parameter", "absolute", absolute_difference(mix_r, mix_s),
        mixing_mode))
    return report


# ===== Clustering agreement =====


def _canonical_labels(arr) -> np.ndarray:
    """Relabel by first occurrence so label names cannot affect anything."""
    arr = np.asarray(arr)
    _, first, inverse = np.unique(arr, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse]


def _contingency(a, b):
    a = _canonical_labels(a)
    b = _canonical_labels(b)
    if len(a) != len(b):
        raise ValueError("partitions must cover the same nodes")
    ka = int(a.max()) + 1 if len(a) else 0
    kb = int(b.max()) + 1 if len(b) else 0
    keys, counts = np.unique(a * kb + b, return_counts=True)
    na = np.bincount(a, minlength=ka)
    nb = np.bincount(b, minlength=kb)
    return ka, kb, keys, counts, na, nb


def nmi(a, b) -> float:
    """Normalized mutual information with arithmetic-mean normalization.

    Exactly 1.0 when the partitions are identical up to relabeling; 0.0
    when the mutual information is zero. Invariant under any relabeling of
    either argument.
    """
    a = a.assignment if isinstance(a, Clustering) else a
    b = b.assignment if isinstance(b, Clustering) else b
    ka, kb, keys, counts, na, nb = _contingency(a, b)
    n = len(np.asarray(a))
    if n == 0:
        return 1.0
    # identical up to relabeling: exactly one nonzero per row and column
    if len(keys) == ka == kb:
        return 1.0
    na = na.astype(np.float64)
    nb = nb.astype(np.float64)
    h_a = -np.sum((na / n) * np.log(na / n))
    h_b = -np.sum((nb / n) * np.log(nb / n))
    denom = (h_a + h_b) / 2.0
    if denom <= 0.0:
        return 1.0  # both partitions trivial, hence identical
    pij = counts.astype(np.float64) / n
    pi = na[keys // kb] / n
    qj = nb[keys % kb] / n
    mi = float(np.sum(pij * (np.log(pij) - np.log(pi) - np.log(qj))))
    if mi <= 0.0:
        return 0.0
    return float(mi / denom)


def ari(a, b) -> float:
    """Adjusted Rand index under the permutation model."""
    a = a.assignment if isinstance(a, Clustering) else a
    b = b.assignment if isinstance(b, Clustering) else b
    ka, kb, keys, counts, na, nb = _contingency(a, b)
    n = len(np.asarray(a))
    if n == 0:
        return 1.0

    def comb2(x):
        x = np.asarray(x, dtype=np.int64)
        return x * (x - 1) // 2

    index = int(comb2(counts).sum())
    sum_a = int(comb2(na).sum())
    sum_b = int(comb2(nb).sum())
    total = int(comb2(np.array([n])).sum())
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))
