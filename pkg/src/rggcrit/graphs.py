"""Random geometric graphs and exact critical radii.

Edges use the closed rule dist <= r so that the critical radii, which are
realized pairwise distances of the sample, are attained by the graph built at
exactly that radius.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .spatial import PointSample, build_grid, default_cell_size, kth_nn_distance, neighbors_within

__all__ = [
    "Graph",
    "CriticalRadii",
    "build_rgg",
    "min_degree",
    "is_k_connected",
    "vertex_connectivity",
    "critical_radius_min_degree",
    "critical_radius_k_connectivity",
]


@dataclass
class Graph:
    """Undirected graph as sorted adjacency lists."""

    n: int
    adj: list
    r: float


@dataclass
class CriticalRadii:
    rho_delta: float
    rho_kappa: float
    k: int
    equal: bool


def build_rgg(sample: PointSample, r: float, cell_size: float | None = None) -> Graph:
    """Geometric graph with an edge {i, j} iff dist(i, j) <= r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if cell_size is None:
        cell_size = default_cell_size(sample, target=r if r > 0 else None)
    grid = build_grid(sample, cell_size)
    adj = [neighbors_within(grid, i, r) for i in range(sample.count)]
    return Graph(n=sample.count, adj=adj, r=r)


def _graph_from_dense(dist: np.ndarray, r: float) -> Graph:
    n = dist.shape[0]
    close = dist <= r
    np.fill_diagonal(close, False)
    adj = [np.nonzero(close[i])[0] for i in range(n)]
    return Graph(n=n, adj=adj, r=r)


def min_degree(g: Graph) -> int:
    if g.n < 1:
        raise ValueError("min_degree of an empty graph is undefined")
    return min(len(a) for a in g.adj)


def _is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in g.adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(int(v))
    return count == g.n


def _has_articulation_point(g: Graph) -> bool:
    """Iterative Hopcroft-Tarjan cut-vertex detection (graph assumed connected)."""
    n = g.n
    disc = np.full(n, -1, dtype=int)
    low = np.zeros(n, dtype=int)
    parent = np.full(n, -1, dtype=int)
    timer = 0
    # explicit DFS stack of (vertex, iterator index)
    it_pos = np.zeros(n, dtype=int)
    stack = [0]
    disc[0] = low[0] = timer
    timer += 1
    root_children = 0
    while stack:
        u = stack[-1]
        if it_pos[u] < len(g.adj[u]):
            v = int(g.adj[u][it_pos[u]])
            it_pos[u] += 1
            if disc[v] == -1:
                parent[v] = u
                disc[v] = low[v] = timer
                timer += 1
                if u == 0:
                    root_children += 1
                stack.append(v)
            elif v != parent[u]:
                low[u] = min(low[u], disc[v])
        else:
            stack.pop()
            p = parent[u]
            if p != -1:
                low[p] = min(low[p], low[u])
                if p != 0 and low[u] >= disc[p]:
                    return True
    return root_children > 1


def _local_connectivity(g: Graph, s: int, t: int, limit: int) -> int:
    """Max number of internally vertex-disjoint s-t paths, capped at limit.

    Unit-capacity max-flow on the vertex-split digraph: node u becomes
    u_in = 2u, u_out = 2u + 1 with capacity 1 on (u_in, u_out)."""
    n = g.n
    cap = {}

    def add(a, b, c):
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)

    for u in range(n):
        add(2 * u, 2 * u + 1, 1 if u not in (s, t) else limit + 1)
        for v in g.adj[u]:
            add(2 * u + 1, 2 * int(v), 1)
    source, sink = 2 * s + 1, 2 * t
    out: dict[int, list[int]] = {}
    for (a, b) in cap:
        out.setdefault(a, []).append(b)
    flow = 0
    while flow < limit:
        prev = {source: None}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if u == sink:
                break
            for v in out.get(u, ()):
                if v not in prev and cap[(u, v)] > 0:
                    prev[v] = u
                    queue.append(v)
        if sink not in prev:
            break
        v = sink
        while prev[v] is not None:
            u = prev[v]
            cap[(u, v)] -= 1
            cap[(v, u)] += 1
            v = u
        flow += 1
    return flow


def is_k_connected(g: Graph, k: int) -> bool:
    """True iff the vertex connectivity of g is at least k."""
    if k <= 0:
        return True
    if g.n < k + 1:
        return False
    if not _is_connected(g):
        return False
    if k == 1:
        return True
    delta = min_degree(g)
    if delta < k:
        return False
    if delta == g.n - 1:  # complete graph, kappa = n - 1 >= k
        return True
    if k == 2:
        return not _has_articulation_point(g)
    return vertex_connectivity(g, upper=k) >= k


def vertex_connectivity(g: Graph, upper: int | None = None) -> int:
    """Exact vertex connectivity via the minimum-degree-vertex flow sweep.

    With upper set, stops early once the connectivity is known to be >= upper.
    """
    if g.n < 1:
        raise ValueError("connectivity of an empty graph is undefined")
    if g.n == 1:
        return 0
    if not _is_connected(g):
        return 0
    delta = min_degree(g)
    if delta == g.n - 1:
        return g.n - 1
    bound = delta if upper is None else min(delta, upper)
    s = min(range(g.n), key=lambda u: len(g.adj[u]))
    neigh = set(int(v) for v in g.adj[s])
    kappa = bound
    for t in range(g.n):
        if t != s and t not in neigh:
            kappa = min(kappa, _local_connectivity(g, s, t, kappa))
    ns = sorted(neigh)
    for i, x in enumerate(ns):
        xs = set(int(v) for v in g.adj[x])
        for y in ns[i + 1:]:
            if y not in xs:
                kappa = min(kappa, _local_connectivity(g, x, y, kappa))
    return kappa


def critical_radius_min_degree(sample: PointSample, k: int,
                               cell_size: float | None = None) -> float:
    """Least r such that the geometric graph at radius r has minimum degree
    >= k: the max over points of the k-th nearest-neighbor distance."""
    if k < 1:
        raise ValueError("degree level k must be >= 1")
    if sample.count < k + 1:
        raise ValueError(f"need at least {k + 1} points, got {sample.count}")
    if cell_size is None:
        cell_size = default_cell_size(sample)
    grid = build_grid(sample, cell_size)
    return max(kth_nn_distance(grid, i, k) for i in range(sample.count))


def critical_radius_k_connectivity(sample: PointSample, k: int,
                                   cell_size: float | None = None) -> float:
    """Least r such that the geometric graph at radius r is k-connected.

    Lower-bounded by the minimum-degree radius; when the graph there is
    already k-connected (the typical case) the two radii coincide exactly.
    Otherwise binary search over the sorted realized pairwise distances.
    """
    if k < 1:
        raise ValueError("connectivity level k must be >= 1")
    if sample.count < k + 1:
        raise ValueError(f"need at least {k + 1} points, got {sample.count}")
    rho_delta = critical_radius_min_degree(sample, k, cell_size)
    condensed = pdist(sample.points)
    dist = squareform(condensed)
    if is_k_connected(_graph_from_dense(dist, rho_delta), k):
        return rho_delta
    cands = np.unique(condensed)
    cands = cands[cands > rho_delta]
    lo, hi = 0, len(cands) - 1
    if not is_k_connected(_graph_from_dense(dist, cands[hi]), k):
        raise ValueError(f"graph is not {k}-connected even as a complete graph")
    while lo < hi:
        mid = (lo + hi) // 2
        if is_k_connected(_graph_from_dense(dist, cands[mid]), k):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])
