"""Convex bodies in R^3 and ball-intersection volume formulas.

Supported region kinds: ball, box, ellipsoid and H-polytope, all normalized
to unit volume.  Besides membership / boundary-distance / sampling, the module
provides the spherical-cap, halfspace-clip and lens-deficit volumes together
with a deterministic low-discrepancy estimator for the volume of a ball
clipped by an arbitrary supported region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linprog, minimize
from scipy.spatial import ConvexHull, HalfspaceIntersection
from scipy.special import ellipeinc, ellipkinc
from scipy.stats import qmc

__all__ = [
    "ConvexRegion",
    "RegionError",
    "normalize_unit_volume",
    "parse_region_spec",
    "contains",
    "dist_to_boundary",
    "sample_uniform",
    "cap_volume_beyond",
    "halfspace_clipped_ball_volume",
    "clipped_ball_volume",
    "lens_deficit",
    "ball_volume",
]

#: default number of low-discrepancy nodes for clipped-volume estimation
DEFAULT_CLIP_SAMPLES = 32768

#: rejection-sampling attempt cap per requested point
MAX_REJECTION_ATTEMPTS = 10**6


class RegionError(ValueError):
    """Raised for degenerate region specifications or invalid queries."""


@dataclass(eq=False)
class ConvexRegion:
    """A unit-volume convex body in R^3.

    ``params`` depends on ``kind``:
      ball       -> (radius,)
      box        -> (lx, ly, lz), corner at the origin
      ellipsoid  -> (a, b, c) semi-axes, centered at the origin
      polytope   -> (normals (m,3) array with unit rows, offsets (m,) array)
    """

    kind: str
    params: tuple
    volume: float
    surface_area: float
    bounding_box: tuple
    inradius: float
    # polytope only: hull vertices kept for bounding-box / area queries
    _vertices: np.ndarray | None = field(default=None, repr=False)

    def extent(self) -> float:
        lo, hi = self.bounding_box
        return float(np.max(np.asarray(hi) - np.asarray(lo)))


def ball_volume(r: float) -> float:
    return 4.0 * math.pi * r**3 / 3.0


def _ellipsoid_surface_area(a: float, b: float, c: float) -> float:
    # exact Legendre form; axes sorted descending, sphere/near-sphere guarded
    a, b, c = sorted((a, b, c), reverse=True)
    if (a - c) / a < 1e-12:
        return 4.0 * math.pi * a * b
    phi = math.acos(c / a)
    m = (a * a * (b * b - c * c)) / (b * b * (a * a - c * c))
    s = math.sin(phi)
    return 2.0 * math.pi * c * c + (2.0 * math.pi * a * b / s) * (
        ellipeinc(phi, m) * s * s + ellipkinc(phi, m) * math.cos(phi) ** 2
    )


def _polytope_geometry(normals: np.ndarray, offsets: np.ndarray):
    """Chebyshev center, hull vertices, volume and surface area of
    {x : normals @ x <= offsets}."""
    m = normals.shape[0]
    # maximize inradius t s.t. n_i . x + t <= b_i
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=np.hstack([normals, np.ones((m, 1))]),
        b_ub=offsets,
        bounds=[(None, None)] * 3 + [(0.0, None)],
        method="highs",
    )
    if not res.success or res.x[3] <= 1e-12:
        raise RegionError("halfspace set has empty or degenerate interior")
    center, inr = res.x[:3], float(res.x[3])
    hs = HalfspaceIntersection(
        np.hstack([normals, -offsets[:, None]]), center
    )
    hull = ConvexHull(hs.intersections)
    return center, inr, hull.points[hull.vertices], hull.volume, hull.area


def _make_region(kind: str, params: tuple) -> ConvexRegion:
    if kind == "ball":
        (r,) = params
        if not (r > 0 and math.isfinite(r)):
            raise RegionError("ball radius must be positive and finite")
        return ConvexRegion(
            kind, (float(r),), ball_volume(r), 4.0 * math.pi * r * r,
            (np.full(3, -r), np.full(3, r)), float(r),
        )
    if kind == "box":
        lx, ly, lz = (float(v) for v in params)
        if min(lx, ly, lz) <= 0:
            raise RegionError("box side lengths must be positive")
        vol = lx * ly * lz
        area = 2.0 * (lx * ly + ly * lz + lz * lx)
        return ConvexRegion(
            kind, (lx, ly, lz), vol, area,
            (np.zeros(3), np.array([lx, ly, lz])), min(lx, ly, lz) / 2.0,
        )
    if kind == "ellipsoid":
        a, b, c = (float(v) for v in params)
        if min(a, b, c) <= 0:
            raise RegionError("ellipsoid semi-axes must be positive")
        vol = 4.0 * math.pi * a * b * c / 3.0
        return ConvexRegion(
            kind, (a, b, c), vol, _ellipsoid_surface_area(a, b, c),
            (-np.array([a, b, c]), np.array([a, b, c])), min(a, b, c),
        )
    if kind == "polytope":
        normals, offsets = params
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        offsets = np.asarray(offsets, dtype=float).ravel()
        if normals.shape[0] < 4 or normals.shape[1] != 3:
            raise RegionError("polytope needs at least 4 halfspaces (nx ny nz offset)")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms <= 0):
            raise RegionError("zero normal vector in halfspace list")
        normals = normals / norms[:, None]
        offsets = offsets / norms
        _, inr, verts, vol, area = _polytope_geometry(normals, offsets)
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        return ConvexRegion(
            kind, (normals, offsets), vol, area, (lo, hi), inr, _vertices=verts
        )
    raise RegionError(f"unknown region kind {kind!r}")


def normalize_unit_volume(kind: str, params: tuple) -> ConvexRegion:
    """Scale a raw shape isotropically so its volume is exactly 1."""
    raw = _make_region(kind, params)
    if not (raw.volume > 0 and math.isfinite(raw.volume)):
        raise RegionError("region has nonpositive or infinite volume")
    s = raw.volume ** (-1.0 / 3.0)
    if kind == "polytope":
        normals, offsets = raw.params
        scaled = _make_region(kind, (normals, offsets * s))
    else:
        scaled = _make_region(kind, tuple(p * s for p in raw.params))
    # kill the last round-off so downstream identities see volume 1 exactly
    scaled.volume = 1.0
    return scaled


def parse_region_spec(spec: str) -> ConvexRegion:
    """Build a unit-volume region from a spec token.

    Grammar: ``ball``, ``cube``, ``box:LX,LY,LZ``, ``ellipsoid:A,B,C``,
    ``polytope:<path>`` (one ``nx ny nz offset`` halfspace per line).
    """
    spec = spec.strip()
    if spec == "ball":
        return normalize_unit_volume("ball", (1.0,))
    if spec == "cube":
        return normalize_unit_volume("box", (1.0, 1.0, 1.0))
    if spec.startswith("box:"):
        sides = tuple(float(v) for v in spec[4:].split(","))
        if len(sides) != 3:
            raise RegionError("box spec needs three side lengths")
        return normalize_unit_volume("box", sides)
    if spec.startswith("ellipsoid:"):
        axes = tuple(float(v) for v in spec[10:].split(","))
        if len(axes) != 3:
            raise RegionError("ellipsoid spec needs three semi-axes")
        return normalize_unit_volume("ellipsoid", axes)
    if spec.startswith("polytope:"):
        rows = []
        with open(spec[9:], "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append([float(v) for v in line.split()])
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise RegionError("polytope file rows must be 'nx ny nz offset'")
        return normalize_unit_volume("polytope", (arr[:, :3], arr[:, 3]))
    raise RegionError(f"unrecognized region spec {spec!r}")


def contains(region: ConvexRegion, p, tol: float = 1e-12) -> bool:
    """Closed-region membership test."""
    p = np.asarray(p, dtype=float)
    if region.kind == "ball":
        return float(np.dot(p, p)) <= region.params[0] ** 2 + tol
    if region.kind == "box":
        l = np.asarray(region.params)
        return bool(np.all(p >= -tol) and np.all(p <= l + tol))
    if region.kind == "ellipsoid":
        axes = np.asarray(region.params)
        return float(np.sum((p / axes) ** 2)) <= 1.0 + tol
    normals, offsets = region.params
    return bool(np.all(normals @ p <= offsets + tol))


def _ellipsoid_boundary_distance(axes: np.ndarray, p: np.ndarray) -> float:
    # closest boundary point y_i = a_i^2 p_i / (a_i^2 + t) with
    # F(t) = sum (a_i p_i / (a_i^2 + t))^2 = 1; interior points give t <= 0.
    if np.all(p == 0.0):
        return float(np.min(axes))

    a2 = axes**2

    def f(t):
        return float(np.sum((axes * p) ** 2 / (a2 + t) ** 2)) - 1.0

    tmin = -float(np.min(a2))
    lo = tmin * (1.0 - 1e-12)
    if f(lo) > 0.0:
        t = brentq(f, lo, 0.0, xtol=1e-15, rtol=1e-14)
        y = a2 * p / (a2 + t)
        return float(np.linalg.norm(p - y))

    # nearest point lies in a degenerate configuration (flat interior ridge);
    # fall back to direct minimization over the surface
    def dist2(ang):
        th, ph = ang
        y = axes * np.array(
            [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]
        )
        return float(np.sum((y - p) ** 2))

    best = math.inf
    for th0 in (0.5, 1.5, 2.5):
        for ph0 in (0.5, 2.5, 4.5):
            res = minimize(dist2, x0=[th0, ph0], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-24})
            best = min(best, res.fun)
    return math.sqrt(best)


def dist_to_boundary(region: ConvexRegion, p) -> float:
    """Distance from an interior/boundary point to the region boundary."""
    p = np.asarray(p, dtype=float)
    if not contains(region, p, tol=1e-9):
        raise RegionError("dist_to_boundary queried with a point outside the region")
    if region.kind == "ball":
        return max(0.0, region.params[0] - float(np.linalg.norm(p)))
    if region.kind == "box":
        l = np.asarray(region.params)
        return max(0.0, float(np.min(np.minimum(p, l - p))))
    if region.kind == "ellipsoid":
        return _ellipsoid_boundary_distance(np.asarray(region.params), p)
    normals, offsets = region.params
    return max(0.0, float(np.min(offsets - normals @ p)))


def _face_distances(region: ConvexRegion, p: np.ndarray) -> np.ndarray:
    """Distances from p to each face plane (box/polytope only)."""
    if region.kind == "box":
        l = np.asarray(region.params)
        return np.concatenate([p, l - p])
    normals, offsets = region.params
    return offsets - normals @ p


def sample_uniform(region: ConvexRegion, rng: np.random.Generator,
                   size: int | None = None) -> np.ndarray:
    """Draw uniform points; shape (3,) for size=None, else (size, 3).

    Ball/box/ellipsoid are sampled directly; polytopes by rejection from the
    bounding box with an attempt cap.
    """
    n = 1 if size is None else int(size)
    if region.kind == "box":
        pts = rng.random((n, 3)) * np.asarray(region.params)
    elif region.kind in ("ball", "ellipsoid"):
        d = rng.standard_normal((n, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        u = rng.random(n) ** (1.0 / 3.0)
        pts = d * u[:, None]
        if region.kind == "ball":
            pts *= region.params[0]
        else:
            pts *= np.asarray(region.params)
    else:
        lo, hi = region.bounding_box
        normals, offsets = region.params
        out = np.empty((n, 3))
        got = 0
        attempts = 0
        while got < n:
            m = min(4096, 4 * (n - got) + 64)
            cand = lo + rng.random((m, 3)) * (hi - lo)
            ok = np.all(cand @ normals.T <= offsets + 1e-12, axis=1)
            acc = cand[ok]
            take = min(len(acc), n - got)
            out[got:got + take] = acc[:take]
            got += take
            attempts += m
            if attempts > MAX_REJECTION_ATTEMPTS * n:
                raise RegionError("rejection sampling attempt cap exceeded")
        pts = out
    return pts[0] if size is None else pts


def cap_volume_beyond(r: float, t: float) -> float:
    """Volume of the spherical cap of B(0,r) at signed distance >= t from the
    center: pi/3 * (r-t)^2 * (2r+t) for 0 <= t <= r."""
    if t < 0.0 or t > r:
        raise ValueError(f"cap distance t={t} outside [0, r={r}]")
    return math.pi / 3.0 * (r - t) ** 2 * (2.0 * r + t)


def halfspace_clipped_ball_volume(r: float, s: float) -> float:
    """Volume of B(x,r) clipped by a halfspace whose boundary plane is at
    distance s >= 0 from x, with x on the inside."""
    if s < 0.0:
        raise ValueError(f"plane distance s={s} must be nonnegative")
    return ball_volume(r) - cap_volume_beyond(r, min(s, r))


def lens_deficit(d: float) -> float:
    """Volume of the half of B(x,r) facing y not covered by B(y,r), for two
    equal-radius balls with center distance d < r: pi*d^3/4."""
    if d < 0.0:
        raise ValueError(f"center distance d={d} must be nonnegative")
    return math.pi * d**3 / 4.0


def _ball_qmc_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic low-discrepancy nodes in the unit ball (cached)."""
    cached = _ball_qmc_nodes._cache.get(m)
    if cached is not None:
        return cached
    u = qmc.Sobol(d=3, scramble=False).random(m)
    rad = u[:, 0] ** (1.0 / 3.0)
    cz = 2.0 * u[:, 1] - 1.0
    sz = np.sqrt(np.maximum(0.0, 1.0 - cz * cz))
    phi = 2.0 * math.pi * u[:, 2]
    pts = np.column_stack(
        [rad * sz * np.cos(phi), rad * sz * np.sin(phi), rad * cz]
    )
    _ball_qmc_nodes._cache[m] = (pts, u)
    return pts, u


_ball_qmc_nodes._cache = {}


def _contains_many(region: ConvexRegion, pts: np.ndarray, tol=1e-12) -> np.ndarray:
    if region.kind == "ball":
        return np.sum(pts * pts, axis=1) <= region.params[0] ** 2 + tol
    if region.kind == "box":
        l = np.asarray(region.params)
        return np.all(pts >= -tol, axis=1) & np.all(pts <= l + tol, axis=1)
    if region.kind == "ellipsoid":
        axes = np.asarray(region.params)
        return np.sum((pts / axes) ** 2, axis=1) <= 1.0 + tol
    normals, offsets = region.params
    return np.all(pts @ normals.T <= offsets + tol, axis=1)


def clipped_ball_volume(region: ConvexRegion, x, r: float,
                        m: int = DEFAULT_CLIP_SAMPLES) -> float:
    """Volume of B(x,r) intersected with the region.

    Exact when the ball is fully interior or when exactly one face plane of a
    box/polytope cuts it; otherwise a deterministic low-discrepancy estimate
    with m nodes.
    """
    x = np.asarray(x, dtype=float)
    if r <= 0.0:
        raise ValueError("ball radius must be positive")
    if not contains(region, x, tol=1e-9):
        raise RegionError("clipped_ball_volume requires the center inside the region")
    d = dist_to_boundary(region, x)
    if d >= r:
        return ball_volume(r)
    if region.kind in ("box", "polytope"):
        fd = _face_distances(region, x)
        cutting = fd < r
        if int(np.sum(cutting)) == 1:
            return halfspace_clipped_ball_volume(r, float(fd[cutting][0]))
    nodes, _ = _ball_qmc_nodes(m)
    inside = _contains_many(region, x + r * nodes)
    return ball_volume(r) * float(np.count_nonzero(inside)) / m
