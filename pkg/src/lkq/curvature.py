"""Scalar curvature in momentum coordinates and derived functionals.

The scalar curvature of a toric metric with symplectic potential G is

    S(mu) = -sum_{ij} d^2 H_ij / dmu_i dmu_j,      H = (Hess G)^{-1}.

H is an exact closed form here, so only two derivative orders are taken
numerically: central differences with a step proportional to the distance
to the nearest log singularity, Richardson-extrapolated (steps h, h/2).
The same machinery gives the toric Laplacian of affine functions and the
conformally modified scalar

    s_{w,p} = w^2 S - 2(p-1) w Lap(w) - p(p-1) <dw, H dw>.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import potential as pot
from . import polytope as poly
from .errors import (
    BoundaryProximity,
    DegenerateSampleSet,
    NonpositiveWeight,
    QuadratureFailure,
)

STEP_FACTOR = 1e-2   # h_fd = STEP_FACTOR * min_k |L_k(mu)|


class CurvatureSample:
    """One evaluation point: scalar curvature, its (w, p) modification, and
    the weight value (which must be positive, with s finite)."""

    __slots__ = ("mu", "s", "s_wp", "w_value", "p")

    def __init__(self, mu, s, s_wp, w_value, p):
        if not w_value > 0:
            raise NonpositiveWeight(f"w = {w_value} at mu = {mu}")
        if not np.isfinite(s):
            raise QuadratureFailure(f"nonfinite scalar at mu = {mu}")
        self.mu = np.asarray(mu, dtype=float)
        self.s = float(s)
        self.s_wp = float(s_wp)
        self.w_value = float(w_value)
        self.p = float(p)

    def as_dict(self):
        return {"mu": self.mu.tolist(), "s": self.s, "s_wp": self.s_wp,
                "w": self.w_value, "p": self.p}


def curvature_samples(G, mus, w, p, step_factor=STEP_FACTOR):
    """Batch of CurvatureSample records over interior points."""
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    svals = abreu_scalar_batch(G, mus, step_factor)
    swp = wp_scalar_batch(G, mus, w, p, step_factor)
    wvals = w.values(mus)
    return [CurvatureSample(mu, s, sw, wv, p)
            for mu, s, sw, wv in zip(mus, svals, swp, wvals)]


def _steps(G, mus, step_factor):
    h = step_factor * G.min_abs_term(mus)
    if np.any(h <= 0):
        raise BoundaryProximity("sample point on a log singularity")
    return h


def _second_divergence(G, mus, h):
    """sum_ij d_i d_j H_ij by central differences at steps h (per point)."""
    n, m = mus.shape
    total = np.zeros(n)
    Hc = pot.metric_H_batch(G, mus, check=False)
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        Hp = pot.metric_H_batch(G, mus + h[:, None] * e, check=False)
        Hm = pot.metric_H_batch(G, mus - h[:, None] * e, check=False)
        total += (Hp[:, i, i] - 2.0 * Hc[:, i, i] + Hm[:, i, i]) / h ** 2
    for i, j in itertools.combinations(range(m), 2):
        ei = np.zeros(m)
        ei[i] = 1.0
        ej = np.zeros(m)
        ej[j] = 1.0
        Hpp = pot.metric_H_batch(G, mus + h[:, None] * (ei + ej), check=False)
        Hpm = pot.metric_H_batch(G, mus + h[:, None] * (ei - ej), check=False)
        Hmp = pot.metric_H_batch(G, mus - h[:, None] * (ei - ej), check=False)
        Hmm = pot.metric_H_batch(G, mus - h[:, None] * (ei + ej), check=False)
        total += 2.0 * (Hpp[:, i, j] - Hpm[:, i, j] - Hmp[:, i, j] + Hmm[:, i, j]) / (4.0 * h ** 2)
    return total


def abreu_scalar_batch(G: pot.SymplecticPotential, mus, step_factor=STEP_FACTOR,
                       richardson=True):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    if step_factor > 0.05:
        raise ValueError("step_factor must be <= 0.05 to keep stencils interior")
    h = _steps(G, mus, step_factor)
    G.check_interior(mus)
    s1 = -_second_divergence(G, mus, h)
    if not richardson:
        return s1
    s2 = -_second_divergence(G, mus, h / 2.0)
    return (4.0 * s2 - s1) / 3.0


def abreu_scalar(G: pot.SymplecticPotential, mu, step_factor=STEP_FACTOR,
                 richardson=True) -> float:
    """Scalar curvature S = -sum d^2 H_ij/dmu_i dmu_j at an interior point."""
    return float(abreu_scalar_batch(G, np.atleast_2d(mu), step_factor, richardson)[0])


def _first_divergence_dot(G, mus, h, a):
    """sum_ij d_i H_ij a_j by central differences."""
    n, m = mus.shape
    total = np.zeros(n)
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        Hp = pot.metric_H_batch(G, mus + h[:, None] * e, check=False)
        Hm = pot.metric_H_batch(G, mus - h[:, None] * e, check=False)
        total += ((Hp[:, i, :] - Hm[:, i, :]) @ a) / (2.0 * h)
    return total


def laplacian_affine_batch(G, mus, a, step_factor=STEP_FACTOR, richardson=True):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    a = np.asarray(a, dtype=float)
    h = _steps(G, mus, step_factor)
    G.check_interior(mus)
    l1 = -_first_divergence_dot(G, mus, h, a)
    if not richardson:
        return l1
    l2 = -_first_divergence_dot(G, mus, h / 2.0, a)
    return (4.0 * l2 - l1) / 3.0


def laplacian_affine(G: pot.SymplecticPotential, mu, a, step_factor=STEP_FACTOR,
                     richardson=True) -> float:
    """Toric Laplacian of the affine function with differential a:
    Lap = -sum_ij d_i H_ij a_j."""
    if isinstance(a, poly.AffineFunction):
        a = a.float_linear()
    return float(laplacian_affine_batch(G, np.atleast_2d(mu), a, step_factor, richardson)[0])


def wp_scalar_batch(G, mus, w: poly.AffineFunction, p, step_factor=STEP_FACTOR,
                    richardson=True):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    wvals = w.values(mus)
    if np.any(wvals <= 0):
        raise NonpositiveWeight(f"w takes nonpositive value {wvals.min():.3e}")
    a = w.float_linear()
    s = abreu_scalar_batch(G, mus, step_factor, richardson)
    lap = laplacian_affine_batch(G, mus, a, step_factor, richardson)
    H = pot.metric_H_batch(G, mus, check=False)
    gsq = np.einsum("i,nij,j->n", a, H, a)
    return wvals ** 2 * s - 2.0 * (p - 1.0) * wvals * lap - p * (p - 1.0) * gsq


def wp_scalar(G: pot.SymplecticPotential, mu, w: poly.AffineFunction, p,
              step_factor=STEP_FACTOR, richardson=True) -> float:
    """Modified scalar s_{w,p} = w^2 S - 2(p-1) w Lap w - p(p-1) |dw|^2."""
    return float(wp_scalar_batch(G, np.atleast_2d(mu), w, p, step_factor, richardson)[0])


# ---------------------------------------------------------------------------
# affine fitting
# ---------------------------------------------------------------------------

class AffineFit:
    def __init__(self, affine, max_residual, rel_range, rel_scale):
        self.affine = affine
        self.max_residual = max_residual      # absolute
        self.rel_range = rel_range            # relative to value range
        self.rel_scale = rel_scale            # relative to max(range, |values|)

    def as_dict(self):
        return {
            "a0": float(self.affine.a0),
            "a": [float(v) for v in self.affine.a],
            "max_residual": self.max_residual,
            "rel_range": self.rel_range,
            "rel_scale": self.rel_scale,
        }


def affine_fit(points, values) -> AffineFit:
    """Least-squares affine fit f(mu) ~ a0 + <a, mu>.

    The residual is reported relative to the value range and also relative
    to max(range, sup|f|); the latter is the one to use for verdicts on
    possibly-constant data.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = np.asarray(values, dtype=float)
    n, m = pts.shape
    if n < m + 2:
        raise DegenerateSampleSet(f"need at least {m + 2} points, got {n}")
    design = np.column_stack([np.ones(n), pts])
    if np.linalg.matrix_rank(design) < m + 1:
        raise DegenerateSampleSet("sample points are affinely degenerate")
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    resid = float(np.abs(design @ coef - vals).max())
    rng = float(vals.max() - vals.min())
    scale = max(rng, float(np.abs(vals).max()), 1e-300)
    rel_range = resid / rng if rng > 0 else (0.0 if resid == 0 else np.inf)
    return AffineFit(poly.AffineFunction(coef[0], coef[1:]), resid, rel_range,
                     resid / scale)


# ---------------------------------------------------------------------------
# generalized Futaki invariant
# ---------------------------------------------------------------------------

def _cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _fan_triangulate_2d(verts):
    c = verts.mean(axis=0)
    ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
    order = np.argsort(ang)
    v = verts[order]
    return [np.array([v[i], v[(i + 1) % len(v)], c]) for i in range(len(v))]


def _triangle_midpoints(tri, k):
    """Centroids and equal weights of the k^2 congruent sub-triangles."""
    v0, e1, e2 = tri[0], tri[1] - tri[0], tri[2] - tri[0]
    pts = []
    for i in range(k):
        for j in range(k - i):
            # upward cell (i,j)
            pts.append(v0 + (i + 1.0 / 3) * e1 / k + (j + 1.0 / 3) * e2 / k)
            if i + j <= k - 2:
                pts.append(v0 + (i + 2.0 / 3) * e1 / k + (j + 2.0 / 3) * e2 / k)
    area = abs(_cross2(e1, e2)) / 2.0
    return np.array(pts), area / k ** 2


def quadrature_points(P: poly.LabelledPolytope, n_quad, shrink=1e-6, seed=0):
    """Midpoint quadrature nodes and weights on a simplicial decomposition
    of the polytope, shrunk slightly toward the barycenter.

    m = 1: interval midpoints; m = 2: fan triangulation with uniform
    sub-triangle centroids; m >= 3: Delaunay simplices with per-simplex
    uniform (seeded) sampling at equal weights.
    """
    verts = P.vertices_float()
    c = verts.mean(axis=0)
    verts = c + (1.0 - shrink) * (verts - c)
    m = P.dim
    if m == 1:
        lo, hi = verts.min(), verts.max()
        k = max(n_quad, 1)
        xs = lo + (hi - lo) * (np.arange(k) + 0.5) / k
        return xs[:, None], np.full(k, (hi - lo) / k)
    if m == 2:
        tris = _fan_triangulate_2d(verts)
        areas = np.array([abs(_cross2(t[1] - t[0], t[2] - t[0])) / 2 for t in tris])
        total = areas.sum()
        pts, wts = [], []
        for tri, ar in zip(tris, areas):
            k = max(1, int(round(np.sqrt(n_quad * ar / total))))
            p, w = _triangle_midpoints(tri, k)
            pts.append(p)
            wts.append(np.full(len(p), w))
        return np.vstack(pts), np.concatenate(wts)
    from scipy.spatial import Delaunay
    tri = Delaunay(verts)
    rng = np.random.default_rng(seed)
    pts, wts = [], []
    vols = np.array([abs(np.linalg.det(verts[s][1:] - verts[s][0])) for s in tri.simplices])
    vols = vols / float(np.prod(range(1, m + 1)))
    total = vols.sum()
    for simplex, vol in zip(tri.simplices, vols):
        if vol <= 0:
            continue
        vs = verts[simplex]
        nj = max(1, int(round(n_quad * vol / total)))
        bary = rng.dirichlet(np.ones(m + 1), size=nj)
        pts.append(bary @ vs)
        wts.append(np.full(nj, vol / nj))
    return np.vstack(pts), np.concatenate(wts)


def futaki(P: poly.LabelledPolytope, grouping, G: pot.SymplecticPotential,
           w: poly.AffineFunction, p, h: poly.AffineFunction,
           n_quad=100_000, seed=0) -> float:
    """Generalized Futaki invariant

        F(h) = integral over Delta of  s0_{w,p}(mu) h(mu) w(mu)^{-(p+1)} dmu

    where s0 is s_{w,p} minus its w^{-(p+1)}-weighted mean (integral-zero
    normalization against constants).  The constant pushforward factor
    (2 pi)^m is omitted; only ratios and zero tests are contract-bearing.
    """
    pts, wts = quadrature_points(P, n_quad, shrink=max(1e-6, pot.BOUNDARY_MARGIN))
    wvals = w.values(pts)
    if np.any(wvals <= 0):
        raise NonpositiveWeight("w is not positive on the quadrature nodes")
    svals = wp_scalar_batch(G, pts, w, p)
    if not np.all(np.isfinite(svals)):
        raise QuadratureFailure("nonfinite modified scalar at quadrature nodes")
    weight = wts * wvals ** (-(p + 1.0))
    mean = float((weight * svals).sum() / weight.sum())
    hvals = h.values(pts)
    return float((weight * (svals - mean) * hvals).sum())
