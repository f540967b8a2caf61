"""Cell-grid spatial index for k-nearest-neighbor and fixed-radius queries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ConvexRegion

__all__ = ["PointSample", "CellGrid", "build_grid", "default_cell_size",
           "kth_nn_distance", "neighbors_within"]


@dataclass
class PointSample:
    """A realized point process over a region."""

    points: np.ndarray  # (N, 3)
    region: ConvexRegion
    kind: str  # "binomial" | "poisson"
    n_param: int
    seed: int | None = None

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


@dataclass
class CellGrid:
    """Uniform bucket grid over the region bounding box; immutable after build."""

    points: np.ndarray
    cell_size: float
    origin: np.ndarray
    buckets: dict = field(repr=False, default_factory=dict)
    diameter_bound: float = 0.0  # upper bound on any pairwise distance

    def cell_of(self, p) -> tuple[int, int, int]:
        return tuple(np.floor((np.asarray(p) - self.origin) / self.cell_size).astype(int))


def default_cell_size(sample: PointSample, target: float | None = None) -> float:
    """Cell edge heuristic: the expected query radius if provided, otherwise
    roughly one point per cell; clamped to [extent/128, extent/4]."""
    extent = sample.region.extent()
    if target is None:
        target = extent / max(1.0, sample.count ** (1.0 / 3.0))
    return float(min(max(target, extent / 128.0), extent / 4.0))


def build_grid(sample: PointSample, cell_size: float) -> CellGrid:
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    origin = np.asarray(sample.region.bounding_box[0], dtype=float)
    grid = CellGrid(points=sample.points, cell_size=float(cell_size), origin=origin)
    if sample.count:
        keys = np.floor((sample.points - origin) / cell_size).astype(int)
        for idx, key in enumerate(map(tuple, keys)):
            grid.buckets.setdefault(key, []).append(idx)
        grid.buckets = {k: np.asarray(v, dtype=int) for k, v in grid.buckets.items()}
        spread = sample.points.max(axis=0) - sample.points.min(axis=0)
        grid.diameter_bound = float(np.linalg.norm(spread)) + cell_size
    return grid


def _ring_cells(center: tuple[int, int, int], ring: int):
    cx, cy, cz = center
    if ring == 0:
        yield center
        return
    for dx in range(-ring, ring + 1):
        for dy in range(-ring, ring + 1):
            for dz in range(-ring, ring + 1):
                if max(abs(dx), abs(dy), abs(dz)) == ring:
                    yield (cx + dx, cy + dy, cz + dz)


def kth_nn_distance(grid: CellGrid, i: int, k: int) -> float:
    """Exact distance from point i to its k-th nearest other point, found by
    expanding-ring search over grid cells."""
    npts = grid.points.shape[0]
    if not 1 <= k <= npts - 1:
        raise ValueError(f"k={k} out of range for {npts} points")
    p = grid.points[i]
    center = grid.cell_of(p)
    dists: list[float] = []
    ring = 0
    while True:
        idx = [grid.buckets[c] for c in _ring_cells(center, ring) if c in grid.buckets]
        if idx:
            cand = np.concatenate(idx)
            cand = cand[cand != i]
            if cand.size:
                d = np.linalg.norm(grid.points[cand] - p, axis=1)
                dists.extend(d.tolist())
        # any point beyond ring R is at distance > (R-1) * cell from the
        # query cell, hence >= ring * cell once we have scanned rings 0..ring
        if len(dists) >= k:
            dists.sort()
            if dists[k - 1] <= ring * grid.cell_size:
                return dists[k - 1]
        ring += 1
        if ring * grid.cell_size > grid.diameter_bound and len(dists) >= k:
            dists.sort()
            return dists[k - 1]


def neighbors_within(grid: CellGrid, i: int, r: float) -> np.ndarray:
    """Indices j != i with dist(i, j) <= r, sorted ascending."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    p = grid.points[i]
    lo = np.floor((p - r - grid.origin) / grid.cell_size).astype(int)
    hi = np.floor((p + r - grid.origin) / grid.cell_size).astype(int)
    hits = []
    for cx in range(lo[0], hi[0] + 1):
        for cy in range(lo[1], hi[1] + 1):
            for cz in range(lo[2], hi[2] + 1):
                bucket = grid.buckets.get((cx, cy, cz))
                if bucket is not None:
                    hits.append(bucket)
    if not hits:
        return np.empty(0, dtype=int)
    cand = np.concatenate(hits)
    cand = cand[cand != i]
    if cand.size == 0:
        return cand
    d = np.linalg.norm(grid.points[cand] - p, axis=1)
    return np.sort(cand[d <= r])
