"""Closed-form asymptotic calculators and numerical integrals.

Everything here is a pure function of its arguments: the 3D and 2D critical
radius formulas, the degree-tail weight psi, the boundary-layer cap integral
with its closed-form asymptote, and numerical estimators for the region
integral of psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import (
    ConvexRegion,
    ball_volume,
    cap_volume_beyond,
    clipped_ball_volume,
    halfspace_clipped_ball_volume,
)

__all__ = [
    "TheoryParams",
    "IntegralReport",
    "theory_params",
    "solve_xi_3d",
    "radius_3d",
    "limit_probability",
    "solve_xi_2d",
    "radius_2d",
    "psi",
    "psi_integral_over_region",
    "boundary_layer_integral",
    "boundary_layer_asymptote",
    "adaptive_simpson",
]

#: adaptive quadrature defaults
QUAD_REL_TOL = 1e-8
QUAD_MAX_NODES = 2**20


@dataclass(frozen=True)
class TheoryParams:
    """Bundle (n, k, c, xi, r_n, area) tied together by the 3D radius law."""

    n: int
    k: int
    c: float
    xi: float
    r_n: float
    area: float


@dataclass(frozen=True)
class IntegralReport:
    value: float
    estimator: str  # "layered" | "monte-carlo" | "quadrature-1d"
    nodes: int
    error: float


def _xi_equation_constant(k: int, area: float) -> float:
    return (
        area
        * (4.0 / (3.0 * math.pi))
        * (5.0 * math.pi / 16.0) ** (2.0 / 3.0)
        * (2.0 / 3.0) ** k
        / math.factorial(k)
    )


def solve_xi_3d(c: float, k: int, area: float) -> float:
    """Solve K(area,k) * exp(-2 xi / 3) = exp(-c) for xi in closed form."""
    if k < 1:
        raise ValueError("3D formulas require k >= 1")
    if area <= 0:
        raise ValueError("boundary surface area must be positive")
    xi = 1.5 * (c + math.log(_xi_equation_constant(k, area)))
    residual = _xi_equation_constant(k, area) * math.exp(-2.0 * xi / 3.0) - math.exp(-c)
    if abs(residual) > 1e-12:
        raise ArithmeticError(f"xi back-substitution residual {residual:.3e}")
    return xi


def boundary_layer_asymptote(k: int, xi: float) -> float:
    """Limit value of the boundary-layer cap integral (per unit boundary area)."""
    if k < 1:
        raise ValueError("boundary-layer asymptote requires k >= 1")
    return (
        (4.0 / (3.0 * math.pi))
        * math.exp(-2.0 * xi / 3.0)
        * (5.0 * math.pi / 16.0) ** (2.0 / 3.0)
        * (2.0 / 3.0) ** k
        / math.factorial(k)
    )


def _log_weight_3d(n: float, k: int, xi: float) -> float:
    if n < 3:
        raise ValueError("need n >= 3 so that loglog n is positive")
    ln = math.log(n)
    lln = math.log(ln)
    val = ln + (1.5 * k - 1.0) * lln + xi
    if val <= 0:
        raise ValueError(
            f"log n + (3k/2-1) loglog n + xi = {val:.6g} is nonpositive "
            f"(xi={xi:.6g} too negative at n={n:g})"
        )
    return val


def radius_3d(n: int, k: int, xi: float) -> float:
    """3D critical-radius scale ((16/(5 pi)) * L / n)^(1/3)."""
    if k < 1:
        raise ValueError("3D radius requires k >= 1")
    val = _log_weight_3d(n, k, xi)
    return (16.0 / (5.0 * math.pi) * val / n) ** (1.0 / 3.0)


def limit_probability(c: float) -> float:
    """Gumbel-type limit exp(-e^(-c))."""
    return math.exp(-math.exp(-c))


def solve_xi_2d(c: float, k: int, l: float) -> float:
    """2D xi for boundary length l; separate branches for k = 1 and k > 1."""
    if k < 1:
        raise ValueError("the k = 0 law has no xi; use radius_2d with c instead")
    if l <= 0:
        raise ValueError("boundary length must be positive")
    if k == 1:
        root = math.sqrt(math.exp(-c) + math.pi * l * l / 64.0) - l * math.sqrt(math.pi) / 8.0
        return -2.0 * math.log(root)
    return 2.0 * math.log(l * math.sqrt(math.pi) / (2 ** (k + 1) * math.factorial(k))) + 2.0 * c


def radius_2d(n: int, k: int, *, xi: float | None = None, c: float | None = None) -> float:
    """2D critical-radius scale; k = 0 takes c, k >= 1 takes xi."""
    if n < 3:
        raise ValueError("need n >= 3 so that loglog n is positive")
    ln = math.log(n)
    if k == 0:
        if c is None:
            raise ValueError("k = 0 branch needs the tail parameter c")
        val = ln + c
    else:
        if xi is None:
            raise ValueError("k >= 1 branch needs xi")
        val = ln + (2.0 * k - 1.0) * math.log(ln) + xi
    if val <= 0:
        raise ValueError(f"radius numerator {val:.6g} is nonpositive")
    return math.sqrt(val / (math.pi * n))


def theory_params(n: int, k: int, c: float, area: float) -> TheoryParams:
    """Chain c -> xi -> r_n for a region with the given boundary area."""
    xi = solve_xi_3d(c, k, area)
    return TheoryParams(n=n, k=k, c=c, xi=xi, r_n=radius_3d(n, k, xi), area=area)


def psi(n: float, k: int, v: float) -> float:
    """(n v)^k e^(-n v) / k!, evaluated in log space."""
    if v < 0:
        raise ValueError("clipped volume must be nonnegative")
    if k < 0:
        raise ValueError("k must be nonnegative")
    nv = n * v
    if nv == 0.0:
        return 1.0 if k == 0 else 0.0
    logval = k * math.log(nv) - nv - math.lgamma(k + 1)
    if logval < -745.0:
        return 0.0
    return math.exp(logval)


def _log_psi_weight(n: float, k: int, nv: np.ndarray) -> np.ndarray:
    """n * psi as array arithmetic, safe against under/overflow."""
    nv = np.asarray(nv, dtype=float)
    out = np.zeros_like(nv)
    pos = nv > 0.0
    logval = np.full_like(nv, -np.inf)
    logval[pos] = (
        math.log(n) + k * np.log(nv[pos]) - nv[pos] - math.lgamma(k + 1)
    )
    ok = logval > -745.0
    out[ok] = np.exp(logval[ok])
    return out


def adaptive_simpson(f, a: float, b: float, rel_tol: float = QUAD_REL_TOL,
                     max_nodes: int = QUAD_MAX_NODES) -> tuple[float, float, int]:
    """Adaptive Simpson quadrature; returns (value, error_estimate, evals)."""
    evals = [0]

    def ev(x):
        evals[0] += 1
        return f(x)

    fa, fm, fb = ev(a), ev(0.5 * (a + b)), ev(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(abs(whole), 1e-300)

    def recurse(a, b, fa, fm, fb, whole, tol):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = ev(lm), ev(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol * scale or evals[0] >= max_nodes:
            return left + right + err, abs(err)
        lv, le = recurse(a, m, fa, flm, fm, left, tol / 2.0)
        rv, re = recurse(m, b, fm, frm, fb, right, tol / 2.0)
        return lv + rv, le + re

    value, err = recurse(a, b, fa, fm, fb, whole, rel_tol)
    return value, err, evals[0]


def boundary_layer_integral(n: int, k: int, xi: float,
                            rel_tol: float = QUAD_REL_TOL) -> IntegralReport:
    """n * integral_0^{r/2} (n a(t))^k e^(-n a(t)) / k! dt with a(t) the
    spherical-cap volume beyond depth t."""
    r = radius_3d(n, k, xi)

    def integrand(t):
        na = n * cap_volume_beyond(r, t)
        logval = math.log(n) + k * math.log(na) - na - math.lgamma(k + 1)
        return math.exp(logval) if logval > -745.0 else 0.0

    value, err, evals = adaptive_simpson(integrand, 0.0, r / 2.0, rel_tol)
    return IntegralReport(value=value, estimator="quadrature-1d", nodes=evals, error=err)


# ---------------------------------------------------------------------------
# exact orthogonal clips of a ball (used by the layered box estimator)

def _corner_disk_area(a, b, rho):
    """Area of {x >= a, y >= b} inside a disk of radius rho, for a, b >= 0."""
    a, b, rho = np.broadcast_arrays(
        np.asarray(a, float), np.asarray(b, float), np.asarray(rho, float)
    )
    out = np.zeros(a.shape)
    ok = (a * a + b * b) < rho * rho
    if not np.any(ok):
        return out
    aa, bb, rr = a[ok], b[ok], rho[ok]
    xup = np.sqrt(rr * rr - bb * bb)
    g_up = 0.5 * rr * rr * np.arcsin(xup / rr) - 0.5 * bb * xup
    g_lo = (
        0.5 * aa * np.sqrt(np.maximum(0.0, rr * rr - aa * aa))
        + 0.5 * rr * rr * np.arcsin(np.clip(aa / rr, -1.0, 1.0))
        - bb * aa
    )
    out[ok] = g_up - g_lo
    return out


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(npts: int):
    if npts not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(npts)
        _GL_CACHE[npts] = (0.5 * (x + 1.0), 0.5 * w)  # mapped to [0, 1]
    return _GL_CACHE[npts]


def _wedge_volume(t1, t2, r: float, npts: int = 64):
    """Volume of {x >= t1, y >= t2} inside B(0,r), t1, t2 >= 0 (vectorized)."""
    t1, t2 = np.broadcast_arrays(np.asarray(t1, float), np.asarray(t2, float))
    out = np.zeros(t1.shape)
    ok = (t1 * t1 + t2 * t2) < r * r
    if not np.any(ok):
        return out
    a, b = t1[ok], t2[ok]
    xup = np.sqrt(r * r - b * b)
    u, w = _gl(npts)
    x = a[:, None] + (xup - a)[:, None] * u[None, :]
    rho = np.sqrt(np.maximum(0.0, r * r - x * x))
    seg = np.where(
        rho > b[:, None],
        rho * rho * np.arccos(np.clip(b[:, None] / np.maximum(rho, 1e-300), -1, 1))
        - b[:, None] * np.sqrt(np.maximum(0.0, rho * rho - b[:, None] ** 2)),
        0.0,
    )
    out[ok] = (xup - a) * np.sum(seg * w[None, :], axis=1)
    return out


def _octant_volume(t1, t2, t3, r: float, npts: int = 64):
    """Volume of {x >= t1, y >= t2, z >= t3} inside B(0,r) (vectorized)."""
    t1, t2, t3 = np.broadcast_arrays(
        np.asarray(t1, float), np.asarray(t2, float), np.asarray(t3, float)
    )
    out = np.zeros(t1.shape)
    ok = (t1 * t1 + t2 * t2 + t3 * t3) < r * r
    if not np.any(ok):
        return out
    a, b, c = t1[ok], t2[ok], t3[ok]
    zup = np.sqrt(r * r - a * a - b * b)
    u, w = _gl(npts)
    z = c[:, None] + (zup - c)[:, None] * u[None, :]
    rho = np.sqrt(np.maximum(0.0, r * r - z * z))
    area = _corner_disk_area(a[:, None], b[:, None], rho)
    out[ok] = (zup - c) * np.sum(area * w[None, :], axis=1)
    return out


def _box_edge_clip(t1, t2, r: float):
    """|B cap {x >= -t1... }| i.e. ball at face depths t1, t2 from two
    orthogonal faces: full - cap(t1) - cap(t2) + wedge(t1,t2)."""
    cap = np.vectorize(lambda t: cap_volume_beyond(r, min(t, r)))
    return ball_volume(r) - cap(t1) - cap(t2) + _wedge_volume(t1, t2, r)


def _box_corner_clip(t1, t2, t3, r: float):
    cap = np.vectorize(lambda t: cap_volume_beyond(r, min(t, r)))
    return (
        ball_volume(r)
        - cap(t1) - cap(t2) - cap(t3)
        + _wedge_volume(t1, t2, r) + _wedge_volume(t1, t3, r) + _wedge_volume(t2, t3, r)
        - _octant_volume(t1, t2, t3, r)
    )


def _sphere_overlap(r1: float, r2: float, d: float) -> float:
    """Intersection volume of two balls with radii r1, r2 and center gap d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return ball_volume(min(r1, r2))
    h1 = r1 - (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r2 - (d * d + r2 * r2 - r1 * r1) / (2.0 * d)
    return math.pi * (h1 * h1 * (3.0 * r1 - h1) + h2 * h2 * (3.0 * r2 - h2)) / 3.0


# ---------------------------------------------------------------------------
# region integral of psi

def _layered_box(region: ConvexRegion, p: TheoryParams, grid: int):
    n, k, r = p.n, p.k, p.r_n
    sides = np.asarray(region.params)
    vfull = ball_volume(r)

    def weight(v):
        return _log_psi_weight(n, k, n * np.asarray(v, dtype=float))

    inner = sides - 2.0 * r
    total = float(weight(vfull)[()] * np.prod(inner))

    u, w = _gl(grid)
    # substitution t = r s^2 concentrates nodes at the boundary where the
    # integrand peaks
    t = r * u * u
    jac = 2.0 * r * u * w

    vface = np.array([halfspace_clipped_ball_volume(r, ti) for ti in t])
    gface = weight(vface)
    for i in range(3):
        face_area = float(np.prod(np.delete(inner, i)))
        total += 2.0 * face_area * float(np.sum(gface * jac))

    t1, t2 = np.meshgrid(t, t, indexing="ij")
    gedge = weight(_box_edge_clip(t1, t2, r))
    jac2 = np.outer(jac, jac)
    for i in range(3):
        total += 4.0 * float(inner[i]) * float(np.sum(gedge * jac2))

    t1, t2, t3 = np.meshgrid(t, t, t, indexing="ij")
    gcorner = weight(_box_corner_clip(t1, t2, t3, r))
    jac3 = jac[:, None, None] * jac[None, :, None] * jac[None, None, :]
    total += 8.0 * float(np.sum(gcorner * jac3))
    return total


def _layered_ball(region: ConvexRegion, p: TheoryParams, grid: int):
    n, k, r = p.n, p.k, p.r_n
    R = region.params[0]
    vfull = ball_volume(r)

    def weight(v):
        return _log_psi_weight(n, k, n * np.asarray(v, dtype=float))

    total = float(weight(vfull)[()] * ball_volume(R - r))
    u, w = _gl(grid)
    # center distance s = R - r q^2, q in [0, 1]; nodes cluster at s = R
    q = u
    s = R - r * q * q
    jac = 2.0 * r * q * w
    v = np.array([_sphere_overlap(R, r, si) for si in s])
    total += float(np.sum(weight(v) * 4.0 * math.pi * s * s * jac))
    return total


def _mc_psi_integral(region: ConvexRegion, p: TheoryParams, samples: int,
                     seed: int, clip_samples: int):
    n, k, r = p.n, p.k, p.r_n
    rng = np.random.default_rng(seed)
    vfull = ball_volume(r)
    batch = 1_000_000
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        pts = geometry.sample_uniform(region, rng, size=m)
        v = np.full(m, vfull)
        if region.kind == "box":
            sides = np.asarray(region.params)
            fd = np.concatenate([pts, sides[None, :] - pts], axis=1)
            ncut = np.sum(fd < r, axis=1)
            one = ncut == 1
            v[one] = np.array(
                [halfspace_clipped_ball_volume(r, s) for s in np.min(fd[one], axis=1)]
            )
            hard = np.nonzero(ncut >= 2)[0]
        elif region.kind == "ball":
            R = region.params[0]
            d = R - np.linalg.norm(pts, axis=1)
            hard = np.nonzero(d < r)[0]
        elif region.kind == "polytope":
            normals, offsets = region.params
            fd = offsets[None, :] - pts @ normals.T
            ncut = np.sum(fd < r, axis=1)
            one = ncut == 1
            v[one] = np.array(
                [halfspace_clipped_ball_volume(r, s) for s in np.min(fd[one], axis=1)]
            )
            hard = np.nonzero(ncut >= 2)[0]
        else:  # ellipsoid: conservative Lipschitz bound on boundary distance
            axes = np.asarray(region.params)
            rho = np.sqrt(np.sum((pts / axes) ** 2, axis=1))
            hard = np.nonzero((1.0 - rho) * np.min(axes) < r)[0]
        for i in hard:
            v[i] = clipped_ball_volume(region, pts[i], r, m=clip_samples)
        g = _log_psi_weight(n, k, n * v)
        total += float(np.sum(g))
        total_sq += float(np.sum(g * g))
        done += m
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    return mean, math.sqrt(var / samples)


def psi_integral_over_region(region: ConvexRegion, params: TheoryParams,
                             estimator: str = "layered",
                             mc_samples: int = 1_000_000,
                             seed: int = 0,
                             clip_samples: int = 2**17,
                             grid: int = 48) -> IntegralReport:
    """Estimate n * integral over the region of psi(n, k, |B(x, r_n) ^ region|).

    The layered estimator handles balls and boxes by exact interior term plus
    boundary-layer quadrature (faces, edges, corners for the box; radial shell
    for the ball); other regions and estimator="mc" use plain Monte Carlo over
    sampled centers.
    """
    if params.r_n >= region.inradius:
        raise ValueError(
            f"r_n={params.r_n:.4g} is not below the region inradius "
            f"{region.inradius:.4g}; asymptotic regime violated"
        )
    if estimator == "layered" and region.kind in ("box", "ball"):
        fn = _layered_box if region.kind == "box" else _layered_ball
        value = fn(region, params, grid)
        coarse = fn(region, params, max(8, grid // 2))
        err = abs(value - coarse) + QUAD_REL_TOL * abs(value)
        return IntegralReport(value=value, estimator="layered",
                              nodes=grid, error=err)
    if estimator not in ("layered", "mc"):
        raise ValueError(f"unknown estimator {estimator!r}")
    value, err = _mc_psi_integral(region, params, mc_samples, seed, clip_samples)
    return IntegralReport(value=value, estimator="monte-carlo",
                          nodes=mc_samples, error=err)
