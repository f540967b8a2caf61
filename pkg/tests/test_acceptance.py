"""Acceptance suite: one test per criterion, each emitting a single
CRITERION line (echoed in the terminal summary by conftest)."""

import itertools
import math
import statistics

import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from conftest import record_criterion
from rggcrit.experiments import ExperimentConfig, run_experiment
from rggcrit.geometry import (
    cap_volume_beyond,
    halfspace_clipped_ball_volume,
    lens_deficit,
    parse_region_spec,
    sample_uniform,
)
from rggcrit.graphs import (
    Graph,
    critical_radius_k_connectivity,
    critical_radius_min_degree,
    is_k_connected,
    vertex_connectivity,
)
from rggcrit.spatial import PointSample
from rggcrit.theory import (
    boundary_layer_asymptote,
    boundary_layer_integral,
    psi_integral_over_region,
    radius_3d,
    solve_xi_3d,
    theory_params,
)

CUBE = parse_region_spec("cube")


def _uniform_sample(n, seed):
    pts = sample_uniform(CUBE, np.random.default_rng(seed), size=n)
    return PointSample(points=pts, region=CUBE, kind="binomial", n_param=n)


def test_criterion_1_calculator_identities():
    worst = 0.0
    for c in (-2.0, 0.0, 2.0, 4.0):
        for k in range(1, 6):
            for area in (4.836, 6.0, 7.0):
                xi = solve_xi_3d(c, k, area)
                K = (area * (4.0 / (3.0 * math.pi))
                     * (5.0 * math.pi / 16.0) ** (2.0 / 3.0)
                     * (2.0 / 3.0) ** k / math.factorial(k))
                r1 = abs(K * math.exp(-2.0 * xi / 3.0) - math.exp(-c))
                r2 = abs(area * boundary_layer_asymptote(k, xi) - math.exp(-c))
                worst = max(worst, r1, r2)
    ok = worst < 1e-12
    record_criterion(1, ok, f"max residual {worst:.2e} (require < 1e-12)")
    assert ok


def test_criterion_2_appendix_anchor_identities():
    worst = 0.0
    for n in (10**4, 10**8, 10**12):
        for k in (1, 2, 3):
            xi = solve_xi_3d(0.0, k, 6.0)
            r = radius_3d(n, k, xi)
            L = math.log(n) + (1.5 * k - 1.0) * math.log(math.log(n)) + xi
            e1 = abs(n * cap_volume_beyond(r, r / 2.0) / ((2.0 / 3.0) * L) - 1.0)
            e2 = abs(n * cap_volume_beyond(r, 0.0) / ((32.0 / 15.0) * L) - 1.0)
            worst = max(worst, e1, e2)
    ok = worst < 1e-10
    record_criterion(2, ok, f"max relative error {worst:.2e} (require < 1e-10)")
    assert ok


def test_criterion_3_lemma3_asymptotic_trend():
    details = []
    ok = True
    for k in (1, 2):
        xi = solve_xi_3d(0.0, k, 6.0)
        asym = boundary_layer_asymptote(k, xi)
        ratios = [boundary_layer_integral(n, k, xi).value / asym
                  for n in (10**6, 10**9, 10**12)]
        gaps = [abs(r - 1.0) for r in ratios]
        monotone = gaps[0] >= gaps[1] >= gaps[2]
        in_band = 0.7 <= ratios[2] <= 1.3
        ok = ok and monotone and in_band
        details.append(
            f"k={k} ratios={ratios[0]:.3f},{ratios[1]:.3f},{ratios[2]:.3f}"
            f" monotone={monotone} band={in_band}"
        )
    record_criterion(3, ok, "; ".join(details))
    assert ok


def test_criterion_4_proposition1_trend_and_mc():
    values = []
    for n in (10**6, 10**8, 10**10):
        params = theory_params(n, 1, 0.0, CUBE.surface_area)
        values.append(psi_integral_over_region(CUBE, params,
                                               estimator="layered").value)
    gaps = [abs(v - 1.0) for v in values]
    trend_ok = gaps[0] >= gaps[1] >= gaps[2]
    params = theory_params(10**8, 1, 0.0, CUBE.surface_area)
    lay = psi_integral_over_region(CUBE, params, estimator="layered")
    mc = psi_integral_over_region(CUBE, params, estimator="mc",
                                  mc_samples=10**7, seed=1)
    agree = abs(lay.value - mc.value) <= lay.error + mc.error
    ok = trend_ok and agree
    record_criterion(
        4, ok,
        f"layered={values[0]:.3e},{values[1]:.3e},{values[2]:.3e} "
        f"toward-1={trend_ok}; mc@1e8={mc.value:.3e}+-{mc.error:.1e} "
        f"vs layered={lay.value:.3e} agree={agree}"
    )
    assert ok


def _oracle_connected(n, edges, removed=frozenset()):
    verts = [v for v in range(n) if v not in removed]
    if not verts:
        return True
    adj = {v: set() for v in verts}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen = {verts[0]}
    stack = [verts[0]]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(verts)


def _oracle_connectivity(n, edges):
    if n == 1:
        return 0
    if not _oracle_connected(n, edges):
        return 0
    for size in range(1, n - 1):
        for cut in itertools.combinations(range(n), size):
            if not _oracle_connected(n, edges, frozenset(cut)):
                return size
    return n - 1


def test_criterion_5_exact_combinatorics_oracles():
    # (a) min-degree radius vs order-statistic threshold-scan oracle
    mindeg_ok = True
    for seed in range(50):
        sample = _uniform_sample(200, seed=1000 + seed)
        dist = squareform(pdist(sample.points))
        for k in (1, 2, 3):
            oracle = float(np.max(np.partition(dist, k, axis=1)[:, k]))
            if critical_radius_min_degree(sample, k) != oracle:
                mindeg_ok = False
    # (b) vertex connectivity vs exhaustive cut enumeration
    conn_ok = True
    rng = np.random.default_rng(99)
    for _ in range(500):
        n = int(rng.integers(2, 10))
        p = rng.uniform(0.1, 0.95)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < p]
        adj = [[] for _ in range(n)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        g = Graph(n=n, adj=[np.array(sorted(a), dtype=int) for a in adj], r=0.0)
        if vertex_connectivity(g) != _oracle_connectivity(n, edges):
            conn_ok = False
    # (c) k-connectivity radius vs full threshold scan
    kconn_ok = True
    for seed in range(20):
        sample = _uniform_sample(100, seed=2000 + seed)
        dist = squareform(pdist(sample.points))
        cands = np.unique(pdist(sample.points))
        for k in (1, 2):
            oracle = None
            for r in cands:
                close = dist <= r
                np.fill_diagonal(close, False)
                g = Graph(n=100,
                          adj=[np.nonzero(close[i])[0] for i in range(100)],
                          r=float(r))
                if is_k_connected(g, k):
                    oracle = float(r)
                    break
            if critical_radius_k_connectivity(sample, k) != oracle:
                kconn_ok = False
    ok = mindeg_ok and conn_ok and kconn_ok
    record_criterion(
        5, ok,
        f"min-degree-scan={mindeg_ok} connectivity-enum={conn_ok} "
        f"kconn-scan={kconn_ok} (all exact equality)"
    )
    assert ok


def _mc_fraction(rng, total, predicate):
    hits = 0
    batch = 2_000_000
    done = 0
    while done < total:
        m = min(batch, total - done)
        pts = rng.uniform(-1.0, 1.0, size=(m, 3))
        hits += int(np.count_nonzero(predicate(pts)))
        done += m
    return hits / total


def test_criterion_6_geometry_mc_oracles():
    rng = np.random.default_rng(7)
    m = 10**7
    ok = True
    worst = 0.0
    for _ in range(10):
        r = rng.uniform(0.3, 1.0)
        s = rng.uniform(0.0, r)
        p = _mc_fraction(
            rng, m,
            lambda pts: (np.sum((pts * r) ** 2, axis=1) <= r * r)
            & (pts[:, 0] * r <= s),
        )
        est = (2 * r) ** 3 * p
        sigma = (2 * r) ** 3 * math.sqrt(p * (1 - p) / m)
        z = abs(halfspace_clipped_ball_volume(r, s) - est) / sigma
        worst = max(worst, z)
        ok = ok and z < 3.0
    for _ in range(10):
        r = rng.uniform(0.3, 1.0)
        d = rng.uniform(0.0, r)

        def in_deficit(pts, r=r, d=d):
            scaled = pts * r
            in_semi = (np.sum(scaled**2, axis=1) <= r * r) & (scaled[:, 0] >= 0)
            shifted = scaled.copy()
            shifted[:, 0] -= d
            return in_semi & (np.sum(shifted**2, axis=1) > r * r)

        p = _mc_fraction(rng, m, in_deficit)
        est = (2 * r) ** 3 * p
        sigma = (2 * r) ** 3 * math.sqrt(p * (1 - p) / m)
        z = abs(lens_deficit(d) - est) / sigma
        worst = max(worst, z)
        ok = ok and z < 3.0
    record_criterion(6, ok, f"20 draws vs 1e7-sample MC, worst z={worst:.2f} "
                            f"(require < 3)")
    assert ok


@pytest.fixture(scope="module")
def headline_experiment():
    config = ExperimentConfig(region="cube", n=2000, k=1, c=0.0,
                              process="binomial", trials=400, master_seed=42,
                              workers=1)
    return run_experiment(config)


def test_criterion_7_theorem2_desk_scale(headline_experiment):
    res = headline_experiment
    in_band = 0.22 <= res.p_hat_delta <= 0.52
    ordered = res.p_hat_kappa <= res.p_hat_delta
    ok = in_band and ordered
    record_criterion(
        7, ok,
        f"p_hat_delta={res.p_hat_delta:.4f} (band [0.22,0.52], limit 0.3679) "
        f"p_hat_kappa={res.p_hat_kappa:.4f} ordered={ordered}"
    )
    assert ok


def test_criterion_8_proposition4_desk_scale(headline_experiment):
    rate = headline_experiment.equality_rate
    rate_ok = rate >= 0.9
    medians = []
    for n in (500, 1000, 2000):
        rates = []
        for seed in range(5):
            config = ExperimentConfig(region="cube", n=n, k=1, c=0.0,
                                      trials=100, master_seed=seed, workers=1)
            rates.append(run_experiment(config).equality_rate)
        medians.append(statistics.median(rates))
    trend_ok = medians[0] <= medians[1] <= medians[2]
    ok = rate_ok and trend_ok
    record_criterion(
        8, ok,
        f"equality_rate={rate:.4f} (require >= 0.9); medians over n=500,1000,"
        f"2000: {medians[0]:.2f},{medians[1]:.2f},{medians[2]:.2f} "
        f"nondecreasing={trend_ok}"
    )
    assert ok


def test_criterion_9_determinism(tmp_path):
    blobs = []
    for workers in (1, 3):
        out = tmp_path / f"w{workers}.csv"
        config = ExperimentConfig(region="cube", n=300, k=1, c=0.0,
                                  trials=12, master_seed=5, workers=workers,
                                  output=str(out))
        run_experiment(config)
        blobs.append((out.read_bytes(),
                      (tmp_path / f"w{workers}.json").read_bytes()))
    csv_same = blobs[0][0] == blobs[1][0]
    json_same = blobs[0][1] == blobs[1][1]
    ok = csv_same and json_same
    record_criterion(
        9, ok,
        f"worker counts 1 vs 3: csv byte-identical={csv_same} "
        f"json byte-identical={json_same}"
    )
    assert ok
