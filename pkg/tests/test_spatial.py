import numpy as np
import pytest

from rggcrit.geometry import parse_region_spec, sample_uniform
from rggcrit.spatial import (
    PointSample,
    build_grid,
    default_cell_size,
    kth_nn_distance,
    neighbors_within,
)

CUBE = parse_region_spec("cube")


def _sample(points) -> PointSample:
    return PointSample(points=np.asarray(points, dtype=float), region=CUBE,
                       kind="binomial", n_param=len(points))


def _uniform_sample(n, seed) -> PointSample:
    pts = sample_uniform(CUBE, np.random.default_rng(seed), size=n)
    return PointSample(points=pts, region=CUBE, kind="binomial", n_param=n)


COLLINEAR = _sample([(0, 0, 0), (1, 0, 0), (3, 0, 0)])


class TestBuildGrid:
    def test_empty_sample(self):
        grid = build_grid(_sample(np.empty((0, 3))), 0.25)
        assert len(grid.buckets) == 0

    def test_single_point(self):
        grid = build_grid(_sample([(0.4, 0.4, 0.4)]), 0.25)
        assert len(grid.buckets) == 1

    def test_partition(self):
        sample = _uniform_sample(500, seed=0)
        grid = build_grid(sample, 0.2)
        total = sum(len(b) for b in grid.buckets.values())
        assert total == 500
        for key, bucket in grid.buckets.items():
            for i in bucket:
                assert grid.cell_of(sample.points[i]) == key

    def test_bad_cell_size(self):
        with pytest.raises(ValueError):
            build_grid(COLLINEAR, 0.0)


class TestKthNNDistance:
    def test_collinear(self):
        grid = build_grid(COLLINEAR, 0.5)
        assert kth_nn_distance(grid, 0, 1) == pytest.approx(1.0)
        assert kth_nn_distance(grid, 0, 2) == pytest.approx(3.0)

    def test_k_out_of_range(self):
        grid = build_grid(COLLINEAR, 0.5)
        with pytest.raises(ValueError):
            kth_nn_distance(grid, 0, 0)
        with pytest.raises(ValueError):
            kth_nn_distance(grid, 0, 3)

    def test_brute_force_oracle_all_pairs(self):
        sample = _uniform_sample(200, seed=1)
        grid = build_grid(sample, default_cell_size(sample))
        pts = sample.points
        for i in range(sample.count):
            d = np.sort(np.linalg.norm(pts - pts[i], axis=1))[1:]
            for k in (1, 2, 5, 50, 199):
                assert kth_nn_distance(grid, i, k) == d[k - 1]

    def test_cell_size_independence(self):
        sample = _uniform_sample(150, seed=2)
        grids = [build_grid(sample, cs) for cs in (0.05, 0.21, 0.9)]
        for i in range(0, 150, 7):
            for k in (1, 3, 10):
                vals = {kth_nn_distance(g, i, k) for g in grids}
                assert len(vals) == 1

    def test_nondecreasing_in_k(self):
        sample = _uniform_sample(60, seed=3)
        grid = build_grid(sample, default_cell_size(sample))
        for i in range(10):
            ds = [kth_nn_distance(grid, i, k) for k in range(1, 60)]
            assert all(b >= a for a, b in zip(ds, ds[1:]))


class TestNeighborsWithin:
    def test_r_zero_empty(self):
        grid = build_grid(COLLINEAR, 0.5)
        assert neighbors_within(grid, 0, 0.0).size == 0

    def test_collinear(self):
        grid = build_grid(COLLINEAR, 0.5)
        assert neighbors_within(grid, 1, 2.0).tolist() == [0, 2]

    def test_closed_rule_includes_exact_distance(self):
        grid = build_grid(COLLINEAR, 0.5)
        assert neighbors_within(grid, 0, 1.0).tolist() == [1]

    def test_negative_r_rejected(self):
        grid = build_grid(COLLINEAR, 0.5)
        with pytest.raises(ValueError):
            neighbors_within(grid, 0, -0.1)

    def test_brute_force_oracle(self):
        sample = _uniform_sample(200, seed=4)
        grid = build_grid(sample, default_cell_size(sample))
        pts = sample.points
        for i in range(0, 200, 11):
            for r in (0.05, 0.15, 0.4):
                d = np.linalg.norm(pts - pts[i], axis=1)
                expect = sorted(j for j in range(200) if j != i and d[j] <= r)
                assert neighbors_within(grid, i, r).tolist() == expect

    def test_symmetry(self):
        sample = _uniform_sample(80, seed=5)
        grid = build_grid(sample, 0.2)
        r = 0.25
        neigh = [set(neighbors_within(grid, i, r).tolist()) for i in range(80)]
        for i in range(80):
            for j in neigh[i]:
                assert i in neigh[j]

    def test_consistency_with_kth_nn(self):
        sample = _uniform_sample(100, seed=6)
        grid = build_grid(sample, default_cell_size(sample))
        for i in range(0, 100, 13):
            for k in (1, 4, 9):
                rho = kth_nn_distance(grid, i, k)
                assert neighbors_within(grid, i, rho).size >= k
                assert neighbors_within(grid, i, rho * (1 - 1e-12)).size < k

    def test_cell_size_independence(self):
        sample = _uniform_sample(120, seed=7)
        for i in (0, 17, 55):
            results = [
                neighbors_within(build_grid(sample, cs), i, 0.3).tolist()
                for cs in (0.07, 0.3, 0.95)
            ]
            assert results[0] == results[1] == results[2]
