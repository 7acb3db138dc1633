"""Per-cluster edge repair stages.

Four operations run over a sampled cluster to push it back toward the
reference: minimum intra-degree enforcement, connected-component
stitching, minimum-cut repair, and degree-sequence matching. All stages
only ever add edges, and every tie-break resolves by ascending node id,
so a stage's output is a deterministic function of its input.

Two variant compositions exist. "plus" runs degree enforcement, then
stitching, then cut repair per cluster and leaves degree matching to one
global pass over the whole clustered part afterwards (edges may cross
clusters). "pp" stitches first (those edges count toward the degree
targets), then enforces degrees, repairs the cut, and matches degrees
inside the cluster only.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .mincut import stoer_wagner_dense

DEFAULT_PARTNER_CAP = 64

VARIANT_PLUS = "plus"
VARIANT_PP = "pp"
VARIANTS = (VARIANT_PLUS, VARIANT_PP)

STAGE_MIN_DEGREE = "min_degree"
STAGE_STITCH = "stitch"
STAGE_MINCUT = "mincut"
STAGE_DEGREE_MATCH = "degree_match"


@dataclass
class ClusterWork:
    """One cluster's repair input.

    members lists the cluster's node ids in the clustered subnetwork,
    ascending; edges holds the sampled intra-cluster edges in local
    indices (position within members). ext_deg is each member's sampled
    degree toward the rest of the network, which stays fixed during
    repair; ref_deg is the member's reference degree in the clustered
    subnetwork.
    """

    cluster_id: int
    members: np.ndarray
    edges: set
    target_cut: int
    ref_deg: np.ndarray
    ext_deg: np.ndarray


@dataclass
class RepairOutcome:
    cluster_id: int
    added: dict = field(default_factory=dict)     # stage -> list of local pairs
    residual: dict = field(default_factory=dict)  # local node -> unmet deficit
    warnings: list = field(default_factory=list)

    def added_count(self) -> int:
        return sum(len(v) for v in self.added.values())


class _LocalGraph:
    """Mutable adjacency view over a work item's local edge set."""

    __slots__ = ("size", "adj", "deg", "edges")

    def __init__(self, size: int, edges: set):
        self.size = size
        self.adj = [set() for _ in range(size)]
        self.deg = [0] * size
        self.edges = edges
        for u, v in edges:
            self.adj[u].add(v)
            self.adj[v].add(u)
            self.deg[u] += 1
            self.deg[v] += 1

    def add(self, u: int, v: int) -> tuple[int, int]:
        if u > v:
            u, v = v, u
        self.edges.add((u, v))
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.deg[u] += 1
        self.deg[v] += 1
        return (u, v)


def min_degree_target(k: int, size: int) -> int:
    """Intra-degree floor for a cluster: min(max(1, k), size - 1)."""
    return min(max(1, k), size - 1)


def _enforce_min_degree(lg: _LocalGraph, k: int) -> list:
    size = lg.size
    added = []
    if size < 2:
        return added
    t = min_degree_target(k, size)
    heap = [(-(t - lg.deg[v]), v) for v in range(size) if lg.deg[v] < t]
    heapq.heapify(heap)
    while heap:
        nd, u = heapq.heappop(heap)
        if t - lg.deg[u] != -nd:
            continue
        # try the most deficient compatible partner first
        partner = None
        skipped = []
        while heap:
            entry = heapq.heappop(heap)
            dv, v = -entry[0], entry[1]
            if t - lg.deg[v] != dv:
                continue
            if v != u and v not in lg.adj[u]:
                partner = v
                break
            skipped.append(entry)
        for entry in skipped:
            heapq.heappush(heap, entry)
        if partner is None:
            # fall back to the lowest-degree member u is not adjacent to
            best = None
            for v in range(size):
                if v == u or v in lg.adj[u]:
                    continue
                key = (lg.deg[v], v)
                if best is None or key < best:
                    best = key
                    partner = v
            if partner is None:
                # deg[u] < t <= size-1 guarantees a non-neighbor exists
                raise AssertionError("no non-adjacent partner for deficient node")
        added.append(lg.add(u, partner))
        for w in (u, partner):
            d = t - lg.deg[w]
            if d > 0:
                heapq.heappush(heap, (-d, w))
    return added


def _local_components(lg: _LocalGraph) -> list:
    """Connected components as member lists, ordered by smallest member."""
    seen = [False] * lg.size
    comps = []
    for s in range(lg.size):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for v in lg.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def _stitch(lg: _LocalGraph) -> list:
    comps = _local_components(lg)
    if len(comps) <= 1:
        return []
    # per-component representative picked before any stitch edge lands
    reps = [min(comp, key=lambda v: (lg.deg[v], v)) for comp in comps]
    return [lg.add(a, b) for a, b in zip(reps, reps[1:])]


def _local_min_cut(lg: _LocalGraph) -> tuple[int, list]:
    w = np.zeros((lg.size, lg.size), dtype=np.int64)
    for u, v in lg.edges:
        w[u, v] = 1
        w[v, u] = 1
    return stoer_wagner_dense(w)


def _repair_mincut(lg: _LocalGraph, k: int) -> tuple[list, list]:
    size = lg.size
    added = []
    warnings = []
    target = min(k, size - 1)
    if size < 2 or target <= 0:
        return added, warnings
    while True:
        value, side = _local_min_cut(lg)
        if value >= target:
            break
        inside = set(side)
        other = [v for v in range(size) if v not in inside]
        pair = _lowest_degree_cross_pair(lg, sorted(inside), other)
        if pair is None:
            warnings.append(
                f"cut saturated at {value} (target {target}), no addable pair"
            )
            break
        added.append(lg.add(*pair))
    return added, warnings


def _lowest_degree_cross_pair(lg: _LocalGraph, side_a: list, side_b: list):
    """Lowest-degree non-adjacent pair across a cut, ties by node id.

    Minimizes deg(a) + deg(b), breaking ties by the smaller sorted key
    ((deg, id) per endpoint). Returns None if every cross pair is already
    an edge.
    """
    a_sorted = sorted(side_a, key=lambda v: (lg.deg[v], v))
    b_sorted = sorted(side_b, key=lambda v: (lg.deg[v], v))
    best = None
    best_pair = None
    for a in a_sorted:
        if best is not None and lg.deg[a] + lg.deg[b_sorted[0]] > best[0]:
            break
        for b in b_sorted:
            s = lg.deg[a] + lg.deg[b]
            if best is not None and s > best[0]:
                break
            if b in lg.adj[a]:
                continue
            # first valid b minimizes (deg, id) for this a; later equal-sum
            # pairs for the same a cannot beat it on the id tie-break
            key = (s, min(a, b), max(a, b))
            if best is None or key < best:
                best = key
                best_pair = (a, b)
            break
    return best_pair


def _deficit_matching(cur: dict, is_adjacent, add_edge,
                      partner_cap: int = DEFAULT_PARTNER_CAP):
    """Greedy max-deficit pairing shared by both degree matching modes.

    cur maps node -> remaining deficit (> 0 entries only are considered).
    Repeatedly takes the most deficient node (ties toward smaller id) and
    pairs it with the most deficient node it is not yet adjacent to,
    scanning at most partner_cap live candidates before retiring it with
    its residual deficit. Pairing only ever joins two deficient nodes, so
    no node is pushed past its reference degree.
    """
    heap = [(-d, v) for v, d in cur.items() if d > 0]
    heapq.heapify(heap)
    added = []
    residual = {}
    while heap:
        nd, u = heapq.heappop(heap)
        if cur.get(u, 0) != -nd:
            continue
        partner = None
        skipped = []
        scanned = 0
        while heap and scanned < partner_cap:
            entry = heapq.heappop(heap)
            dv, v = -entry[0], entry[1]
            if cur.get(v, 0) != dv:
                continue
            scanned += 1
            if v != u and not is_adjacent(u, v):
                partner = v
                break
            skipped.append(entry)
        for entry in skipped:
            heapq.heappush(heap, entry)
        if partner is None:
            residual[u] = cur[u]
            cur[u] = 0  # retired
            continue
        add_edge(u, partner)
        added.append((u, partner) if u < partner else (partner, u))
        cur[u] -= 1
        cur[partner] -= 1
        if cur[u] > 0:
            heapq.heappush(heap, (-cur[u], u))
        if cur[partner] > 0:
            heapq.heappush(heap, (-cur[partner], partner))
    return added, residual


# ===== Public per-cluster operations =====


def enforce_min_degree(item: ClusterWork) -> list:
    """Raise every member's intra-cluster degree to min(max(1, k), size-1).

    Deficient nodes pair most-deficient-first; a node with no deficient
    partner takes the lowest-degree non-adjacent member. Returns the added
    local edges.
    """
    lg = _LocalGraph(len(item.members), item.edges)
    return _enforce_min_degree(lg, item.target_cut)


def stitch_components(item: ClusterWork, combined: bool = False) -> list:
    """Chain the cluster's components into one.

    Components are ordered by smallest member; one edge joins the lowest
    degree node (ties by id) of component i to that of component i+1.
    combined marks the fully per-cluster variant's ordering, where
    stitching runs before degree enforcement; the edge rule is identical.
    """
    lg = _LocalGraph(len(item.members), item.edges)
    return _stitch(lg)


def repair_mincut(item: ClusterWork) -> tuple[list, list]:
    """Add edges until the cluster's exact min cut reaches min(k, size-1).

    Each round recomputes the cut and adds a single edge across it between
    the lowest-degree non-adjacent pair. Returns (added, warnings).
    """
    lg = _LocalGraph(len(item.members), item.edges)
    return _repair_mincut(lg, item.target_cut)


def match_degrees_per_cluster(item: ClusterWork,
                              partner_cap: int = DEFAULT_PARTNER_CAP
                              ) -> tuple[list, dict]:
    """Degree matching allowed to add intra-cluster edges only.

    Deficits count the member's full current degree (intra plus its fixed
    outward edges) against its reference degree.
    """
    lg = _LocalGraph(len(item.members), item.edges)
    cur = {}
    for v in range(lg.size):
        d = int(item.ref_deg[v]) - int(item.ext_deg[v]) - lg.deg[v]
        if d > 0:
            cur[v] = d
    return _deficit_matching(
        cur,
        is_adjacent=lambda u, v: v in lg.adj[u],
        add_edge=lg.add,
        partner_cap=partner_cap,
    )


def match_degrees_global(edge_set: set, deficits: np.ndarray,
                         partner_cap: int = DEFAULT_PARTNER_CAP
                         ) -> tuple[list, dict]:
    """Degree matching over the whole clustered part; edges may cross clusters.

    edge_set holds canonical (u, v) pairs and is mutated in place.
    """
    cur = {int(v): int(d) for v, d in enumerate(deficits) if d > 0}

    def is_adjacent(u, v):
        return ((u, v) if u < v else (v, u)) in edge_set

    def add_edge(u, v):
        edge_set.add((u, v) if u < v else (v, u))

    return _deficit_matching(cur, is_adjacent, add_edge, partner_cap)


def process_cluster(item: ClusterWork, variant: str,
                    partner_cap: int = DEFAULT_PARTNER_CAP) -> RepairOutcome:
    """Run one cluster through a variant's per-cluster stage sequence."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    lg = _LocalGraph(len(item.members), item.edges)
    out = RepairOutcome(cluster_id=item.cluster_id)
    if variant == VARIANT_PP:
        out.added[STAGE_STITCH] = _stitch(lg)
        out.added[STAGE_MIN_DEGREE] = _enforce_min_degree(lg, item.target_cut)
    else:
        out.added[STAGE_MIN_DEGREE] = _enforce_min_degree(lg, item.target_cut)
        out.added[STAGE_STITCH] = _stitch(lg)
    cut_added, warnings = _repair_mincut(lg, item.target_cut)
    out.added[STAGE_MINCUT] = cut_added
    out.warnings.extend(warnings)
    if variant == VARIANT_PP:
        cur = {}
        for v in range(lg.size):
            d = int(item.ref_deg[v]) - int(item.ext_deg[v]) - lg.deg[v]
            if d > 0:
                cur[v] = d
        matched, residual = _deficit_matching(
            cur,
            is_adjacent=lambda u, v: v in lg.adj[u],
            add_edge=lg.add,
            partner_cap=partner_cap,
        )
        out.added[STAGE_DEGREE_MATCH] = matched
        out.residual = residual
    return out


def repair_cluster_task(args) -> RepairOutcome:
    """Process-pool entry point: args is (ClusterWork, variant, partner_cap)."""
    item, variant, partner_cap = args
    return process_cluster(item, variant, partner_cap)
