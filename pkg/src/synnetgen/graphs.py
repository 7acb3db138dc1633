"""Graph containers, node clusterings, and edge-list file I/O.

Everything downstream works on simple undirected graphs. Node ids are
densified to 0..n-1 at load time (ascending by external label) and the
original labels are restored on output, so writing back a loaded graph
round-trips exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class GraphFormatError(ValueError):
    """Malformed edge-list or clustering file."""


# ===== Edge containers =====


class EdgeSet:
    """Deduplicated set of undirected edges stored as (u, v) with u < v.

    Membership and insertion are amortized O(1); self-loops are rejected.
    Iteration order is unspecified, use to_array() for the canonical
    lexicographic ordering.
    """

    __slots__ = ("_edges",)

    def __init__(self, edges=None):
        self._edges = set()
        if edges is not None:
            for u, v in edges:
                self.add(int(u), int(v))

    @classmethod
    def _from_canonical(cls, pairs):
        """Wrap an iterable of already-canonical (u < v) pairs without checks."""
        es = cls()
        es._edges = set(pairs)
        return es

    @classmethod
    def from_array(cls, arr) -> "EdgeSet":
        arr = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
        es = cls()
        for u, v in arr.tolist():
            es.add(u, v)
        return es

    def add(self, u: int, v: int) -> bool:
        """Insert edge {u, v}. Returns False when it was already present."""
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        if u > v:
            u, v = v, u
        before = len(self._edges)
        self._edges.add((u, v))
        return len(self._edges) != before

    def __contains__(self, edge) -> bool:
        u, v = edge
        if u > v:
            u, v = v, u
        return (u, v) in self._edges

    def __len__(self) -> int:
        return len(self._edges)

    def __iter__(self):
        return iter(self._edges)

    def to_array(self) -> np.ndarray:
        """Edges as an (m, 2) int64 array sorted lexicographically."""
        if not self._edges:
            return np.empty((0, 2), dtype=np.int64)
        arr = np.array(sorted(self._edges), dtype=np.int64)
        return arr


@dataclass(frozen=True)
class CsrGraph:
    """Immutable undirected graph in compressed sparse row form.

    offsets has length n+1 with offsets[n] == 2m; cols holds each node's
    neighbors as a sorted run. Both directions of every edge are stored,
    there are no self-loops and no duplicates.
    """

    n: int
    m: int
    offsets: np.ndarray
    cols: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def degree(self, u: int) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    def neighbors(self, u: int) -> np.ndarray:
        return self.cols[self.offsets[u]:self.offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v

    def edge_array(self) -> np.ndarray:
        """Canonical (m, 2) edge array, u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.cols
        return np.column_stack([src[keep], self.cols[keep]])


def build_csr(edges, n: int) -> CsrGraph:
    """Build a CsrGraph from an EdgeSet or a canonical (m, 2) edge array.

    All endpoints must be < n. The layout is a counting pass over edge
    endpoints followed by a deterministic fill, so the result does not
    depend on input ordering.
    """
    if isinstance(edges, EdgeSet):
        arr = edges.to_array()
    else:
        arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size:
        if arr.min() < 0 or arr.max() >= n:
            raise IndexError(f"edge endpoint out of range for n={n}")
    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    order = np.lexsort((dst, src))
    return CsrGraph(n=n, m=int(arr.shape[0]), offsets=offsets, cols=dst[order])


# ===== Clusterings =====


class Clustering:
    """Total assignment of nodes 0..n-1 to integer cluster ids.

    A node is "clustered" iff its cluster has more than one member;
    otherwise it is a singleton (outlier).
    """

    def __init__(self, assignment):
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self._ids, inverse, self._counts = np.unique(
            self.assignment, return_inverse=True, return_counts=True
        )
        self._node_sizes = self._counts[inverse]
        # members grouped by cluster: stable argsort keeps node ids ascending
        self._order = np.argsort(self.assignment, kind="stable")
        self._bounds = np.concatenate(([0], np.cumsum(self._counts)))

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def cluster_ids(self) -> np.ndarray:
        """Sorted unique cluster ids."""
        return self._ids

    @property
    def node_sizes(self) -> np.ndarray:
        """Size of each node's own cluster."""
        return self._node_sizes

    @property
    def clustered_mask(self) -> np.ndarray:
        return self._node_sizes > 1

    @property
    def singleton_nodes(self) -> np.ndarray:
        return np.flatnonzero(self._node_sizes == 1)

    @property
    def multi_cluster_ids(self) -> np.ndarray:
        """Ids of clusters with more than one member, ascending."""
        return self._ids[self._counts > 1]

    def size_of(self, cluster_id: int) -> int:
        return int(self._counts[self._index(cluster_id)])

    def members(self, cluster_id: int) -> np.ndarray:
        """Member node ids of a cluster, ascending."""
        i = self._index(cluster_id)
        return self._order[self._bounds[i]:self._bounds[i + 1]]

    def _index(self, cluster_id: int) -> int:
        i = int(np.searchsorted(self._ids, cluster_id))
        if i >= len(self._ids) or self._ids[i] != cluster_id:
            raise KeyError(f"unknown cluster id {cluster_id}")
        return i


# ===== File I/O =====


def _parse_int_pairs(path):
    """Parse a two-integer-column text file.

    Skips blank lines and lines starting with '#' or '%'. Returns a list of
    (a, b) tuples; raises GraphFormatError naming the first offending line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise GraphFormatError(f"{path}: file not found")
    pairs = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphFormatError(
                f"{path}: line {line_no}: expected two integer columns, got {len(parts)}"
            )
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphFormatError(
                f"{path}: line {line_no}: non-integer token in {stripped!r}"
            )
    return pairs


@dataclass
class LoadResult:
    """Loaded edge list with the densified id space.

    labels maps internal node id -> external file label (ascending), so
    internal ordering agrees with external label ordering everywhere.
    """

    edges: EdgeSet
    labels: np.ndarray
    n: int
    self_loops_dropped: int
    duplicates_dropped: int

    def label_index(self) -> dict:
        """External label -> internal id."""
        return {int(lab): i for i, lab in enumerate(self.labels)}


def load_edge_list(path) -> LoadResult:
    """Read an undirected edge list into internal dense ids.

    Self-loops and duplicate edges (either orientation) are dropped and
    counted. The node universe is every label mentioned in the file.
    """
    pairs = _parse_int_pairs(path)
    if not pairs:
        raise GraphFormatError(f"{path}: no edges found")
    arr = np.array(pairs, dtype=np.int64)
    loops = arr[:, 0] == arr[:, 1]
    self_loops = int(loops.sum())
    labels = np.unique(arr)
    data = arr[~loops]
    u = np.searchsorted(labels, data[:, 0])
    v = np.searchsorted(labels, data[:, 1])
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    n = len(labels)
    keys = np.unique(lo * n + hi)
    duplicates = int(len(lo) - len(keys))
    canon = zip((keys // n).tolist(), (keys % n).tolist())
    edges = EdgeSet._from_canonical(canon)
    if self_loops or duplicates:
        log.info(
            "%s: dropped %d self-loops and %d duplicate edges",
            path, self_loops, duplicates,
        )
    return LoadResult(
        edges=edges,
        labels=labels,
        n=n,
        self_loops_dropped=self_loops,
        duplicates_dropped=duplicates,
    )


def write_edge_list(edges, labels, path) -> None:
    """Write edges under their external labels, tab separated.

    Rows come out sorted by endpoints so identical edge sets always produce
    identical bytes. An empty set produces an empty file.
    """
    arr = edges.to_array() if isinstance(edges, EdgeSet) else np.asarray(edges)
    labels = np.asarray(labels)
    path = Path(path)
    if arr.size == 0:
        path.write_text("", encoding="utf-8")
        return
    ext = labels[arr]
    # labels are ascending, so external pairs stay canonical and sorted
    out = "\n".join(f"{a}\t{b}" for a, b in ext.tolist())
    path.write_text(out + "\n", encoding="utf-8")


def load_clustering(path, labels) -> Clustering:
    """Read a "node cluster" two-column file covering a graph's node universe.

    Every graph node must get exactly one cluster; unknown or missing nodes
    are an error naming the offender.
    """
    pairs = _parse_int_pairs(path)
    labels = np.asarray(labels)
    n = len(labels)
    assignment = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for node_label, cluster_id in pairs:
        i = int(np.searchsorted(labels, node_label))
        if i >= n or labels[i] != node_label:
            raise GraphFormatError(
                f"{path}: clustering mentions unknown node {node_label}"
            )
        if seen[i]:
            raise GraphFormatError(
                f"{path}: node {node_label} assigned more than once"
            )
        seen[i] = True
        assignment[i] = cluster_id
    if not seen.all():
        missing = int(labels[int(np.flatnonzero(~seen)[0])])
        raise GraphFormatError(f"{path}: node {missing} missing from clustering")
    return Clustering(assignment)


def write_clustering(c: Clustering, labels, path) -> None:
    """Write a clustering as "node cluster" rows sorted by node label."""
    labels = np.asarray(labels)
    rows = "\n".join(
        f"{int(lab)}\t{int(cid)}" for lab, cid in zip(labels, c.assignment)
    )
    Path(path).write_text(rows + "\n" if rows else "", encoding="utf-8")


# ===== Traversal helpers =====


def gather_neighbors(g: CsrGraph, nodes: np.ndarray) -> np.ndarray:
    """Concatenated neighbor lists of the given nodes (with repeats)."""
    counts = g.offsets[nodes + 1] - g.offsets[nodes]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.repeat(g.offsets[nodes], counts)
    within = np.arange(total, dtype=np.int64) - np.repeat(
        np.cumsum(counts) - counts, counts
    )
    return g.cols[starts + within]


def connected_components(g: CsrGraph) -> np.ndarray:
    """Component label per node; labels assigned by ascending smallest member."""
    labels = np.full(g.n, -1, dtype=np.int64)
    current = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        labels[s] = current
        frontier = np.array([s], dtype=np.int64)
        while frontier.size:
            nb = gather_neighbors(g, frontier)
            nb = np.unique(nb[labels[nb] < 0])
            labels[nb] = current
            frontier = nb
        current += 1
    return labels


def induced_subgraph(g: CsrGraph, nodes) -> tuple[CsrGraph, np.ndarray]:
    """Subgraph induced by a node subset.

    Returns (sub, index_map) where index_map[i] is the parent id of the
    subgraph's node i. Subgraph ids follow ascending parent id order.
    """
    nodes = np.asarray(sorted(set(np.asarray(nodes, dtype=np.int64).tolist())),
                       dtype=np.int64)
    mark = np.full(g.n, -1, dtype=np.int64)
    mark[nodes] = np.arange(len(nodes), dtype=np.int64)
    counts = g.offsets[nodes + 1] - g.offsets[nodes]
    src = np.repeat(mark[nodes], counts)
    dst = mark[gather_neighbors(g, nodes)]
    keep = (dst >= 0) & (src < dst)
    pairs = np.column_stack([src[keep], dst[keep]])
    return build_csr(pairs, len(nodes)), nodes
