"""Exact global minimum edge cut.

Stoer-Wagner over a dense weight matrix. Intended cluster sizes are a few
thousand nodes at most; a size guard refuses anything larger instead of
silently approximating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import CsrGraph, connected_components

DEFAULT_SIZE_GUARD = 50_000


class MinCutSizeError(RuntimeError):
    """Input exceeds the exact-cut size guard."""


@dataclass(frozen=True)
class MinCutResult:
    value: int
    side: np.ndarray  # sorted node ids of one side of the cut


def stoer_wagner_dense(w: np.ndarray) -> tuple[int, list[int]]:
    """Minimum cut of a weighted undirected graph given as a dense matrix.

    w must be symmetric with a zero diagonal and at least 2 rows. Returns
    (value, side) with side listing the nodes on one shore of a minimum
    cut. All tie-breaks resolve toward smaller node ids, so the result is
    deterministic.
    """
    n = w.shape[0]
    wm = np.array(w, dtype=np.int64)
    groups = [[i] for i in range(n)]
    active = np.arange(n)
    best_value = None
    best_side: list[int] = []
    while len(active) > 1:
        a = len(active)
        added = np.zeros(a, dtype=bool)
        added[0] = True
        weight_to_a = wm[active[0], :][active].astype(np.int64)
        prev_pos = 0
        last_pos = 0
        cut_of_phase = 0
        for _ in range(1, a):
            sel = int(np.argmax(np.where(added, np.int64(-1), weight_to_a)))
            cut_of_phase = int(weight_to_a[sel])
            added[sel] = True
            prev_pos = last_pos
            last_pos = sel
            weight_to_a = weight_to_a + wm[active[sel], :][active]
        t = int(active[last_pos])
        s = int(active[prev_pos])
        if best_value is None or cut_of_phase < best_value:
            best_value = cut_of_phase
            best_side = list(groups[t])
        # merge t into s
        wm[s, :] += wm[t, :]
        wm[:, s] += wm[:, t]
        wm[s, s] = 0
        groups[s].extend(groups[t])
        active = active[active != t]
    return int(best_value), sorted(best_side)


def _first_component(g: CsrGraph) -> np.ndarray:
    labels = connected_components(g)
    return np.flatnonzero(labels == 0)


def global_min_cut(g: CsrGraph, size_guard: int = DEFAULT_SIZE_GUARD) -> MinCutResult:
    """Exact global minimum edge cut of a CsrGraph.

    Graphs with fewer than two nodes have cut 0 and an empty side; a
    disconnected graph has cut 0 with one whole component as the side.
    """
    if g.n > size_guard:
        raise MinCutSizeError(
            f"graph has {g.n} nodes, exact min cut guard is {size_guard}"
        )
    if g.n <= 1:
        return MinCutResult(0, np.empty(0, dtype=np.int64))
    labels = connected_components(g)
    if labels.max() > 0:
        return MinCutResult(0, np.flatnonzero(labels == 0))
    w = np.zeros((g.n, g.n), dtype=np.int64)
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    w[src, g.cols] = 1
    value, side = stoer_wagner_dense(w)
    return MinCutResult(value, np.array(side, dtype=np.int64))


def min_cut_of_edges(n: int, edges, size_guard: int = DEFAULT_SIZE_GUARD) -> MinCutResult:
    """Exact min cut of a small graph given by node count and an edge iterable."""
    if n > size_guard:
        raise MinCutSizeError(f"{n} nodes exceeds exact min cut guard {size_guard}")
    if n <= 1:
        return MinCutResult(0, np.empty(0, dtype=np.int64))
    w = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        w[u, v] = 1
        w[v, u] = 1
    # connectivity check without building a CSR
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(w[u]):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    if not seen.all():
        return MinCutResult(0, np.flatnonzero(seen))
    value, side = stoer_wagner_dense(w)
    return MinCutResult(value, np.array(side, dtype=np.int64))
