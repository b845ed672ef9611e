"""Closed-form symplectic potentials and the inverse-Hessian metric.

Potentials are finite sums G(mu) = sum_k c_k L_k(mu) log|L_k(mu)| over
affine functions L_k, which covers both the Guillemin potential (one term
of weight 1/2 per facet) and the quotient potential of a grouped polytope
(facet terms plus one extra term L_inf = -sum L per factor, negative on
the interior, hence the absolute values).  Gradient and Hessian are exact
closed forms:

    grad G = sum c_k (1 + log|L_k|) a_k
    Hess G = sum c_k a_k a_k^T / L_k
"""

from __future__ import annotations

import numpy as np

from . import levi as levi_mod
from . import polytope as poly
from .errors import (
    BoundaryProximity,
    IllConditioned,
    NotPositivePair,
)

BOUNDARY_MARGIN = 1e-7   # times diam(Delta)


class SymplecticPotential:
    """Sum of c_k * L_k log|L_k| terms over a labelled polytope domain."""

    def __init__(self, terms, domain: poly.LabelledPolytope):
        self.terms = tuple((f, w) for f, w in terms)
        self.domain = domain
        self.dim = domain.dim
        self.weights = np.array([float(w) for _, w in self.terms])
        self.consts = np.array([float(f.a0) for f, _ in self.terms])
        self.linear = np.array([f.float_linear() for f, _ in self.terms])
        self.delta_bd = BOUNDARY_MARGIN * domain.diameter()

    @property
    def n_terms(self):
        return len(self.terms)

    def term_values(self, mus):
        mus = np.atleast_2d(np.asarray(mus, dtype=float))
        return self.consts[None, :] + mus @ self.linear.T

    def check_interior(self, mus, margin=None):
        margin = self.delta_bd if margin is None else margin
        vals = self.term_values(mus)
        worst = np.abs(vals).min()
        if worst <= margin:
            raise BoundaryProximity(
                f"point within {worst:.3e} of a log singularity (margin {margin:.3e})")
        return vals

    def min_abs_term(self, mus):
        return np.abs(self.term_values(mus)).min(axis=1)


def levi_kahler_potential(P: poly.LabelledPolytope, grouping=None,
                          check_positive=True) -> SymplecticPotential:
    """Quotient potential of a grouped polytope: weight 1/2 on every facet
    label and on each factor's extra label L_inf = -sum of the factor."""
    grouping = poly.resolve_grouping(P, grouping)
    if check_positive:
        setup = levi_mod.setup_from_polytope(P, grouping)
        try:
            report = levi_mod.is_positive_pair(setup, P, grouping, n=2000)
        except Exception as exc:
            raise NotPositivePair(f"positivity check failed: {exc}") from exc
        if not report.positive:
            raise NotPositivePair("the pair defined by the labels is not positive")
    half = 0.5
    terms = []
    for g in grouping:
        for s in g:
            terms.append((P.facets[s], half))
        terms.append((-poly.affine_sum([P.facets[s] for s in g]), half))
    return SymplecticPotential(terms, P)


def guillemin_potential(P: poly.LabelledPolytope) -> SymplecticPotential:
    """Classical potential: weight 1/2 on every facet label."""
    return SymplecticPotential([(f, 0.5) for f in P.facets], P)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval(G: SymplecticPotential, mu):  # noqa: A001 - established operation name
    vals = G.check_interior(np.atleast_2d(mu))
    out = (G.weights[None, :] * vals * np.log(np.abs(vals))).sum(axis=1)
    return float(out[0]) if out.shape == (1,) else out


def grad(G: SymplecticPotential, mu):
    mus = np.atleast_2d(mu)
    vals = G.check_interior(mus)
    coef = G.weights[None, :] * (1.0 + np.log(np.abs(vals)))
    out = coef @ G.linear
    return out[0] if np.ndim(mu) == 1 else out

def hess(G: SymplecticPotential, mu):
    out = hess_batch(G, np.atleast_2d(mu))
    return out[0] if np.ndim(mu) == 1 else out


def hess_batch(G: SymplecticPotential, mus, check=True):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    if check:
        vals = G.check_interior(mus)
    else:
        vals = G.term_values(mus)
    coef = G.weights[None, :] / vals        # (n, K)
    return np.einsum("nk,ki,kj->nij", coef, G.linear, G.linear)


def metric_H(G: SymplecticPotential, mu, cond_limit=1e12):
    """Inverse Hessian (the torus-part metric); IllConditioned beyond 1e12."""
    h = hess(G, np.asarray(mu, dtype=float))
    single = h.ndim == 2
    hmat = h[None] if single else h
    eig = np.linalg.eigvalsh(hmat)
    conds = np.abs(eig).max(axis=1) / np.maximum(np.abs(eig).min(axis=1), 1e-300)
    if np.any(conds > cond_limit):
        raise IllConditioned(f"Hessian condition number {conds.max():.3e} > {cond_limit:.1e}")
    out = np.linalg.inv(hmat)
    return out[0] if single else out


def metric_H_batch(G: SymplecticPotential, mus, check=True):
    return np.linalg.inv(hess_batch(G, mus, check=check))


# ---------------------------------------------------------------------------
# Kahler potential (Legendre transform)
# ---------------------------------------------------------------------------

class KahlerPotential:
    """Legendre transform of the quotient potential based at p:

        H(mu) = <mu - p, grad G(mu)> - G(mu) = -sum_k c_k L_k(p) log|L_k(mu)|

    (the per-factor labels sum to zero, which collapses the transform to
    the closed form on the right)."""

    def __init__(self, G: SymplecticPotential, basepoint):
        self.G = G
        self.basepoint = np.asarray(basepoint, dtype=float)
        pvals = G.term_values(self.basepoint[None, :])[0]
        self.coeffs = -G.weights * pvals

    def __call__(self, mu):
        vals = self.G.check_interior(np.atleast_2d(mu))
        out = (self.coeffs[None, :] * np.log(np.abs(vals))).sum(axis=1)
        return float(out[0]) if out.shape == (1,) else out

    def legendre_residual(self, mu):
        """|H(mu) - (<mu - p, grad G> - G)|, the pointwise identity check."""
        mus = np.atleast_2d(mu)
        direct = (mus - self.basepoint[None, :]) * np.atleast_2d(grad(self.G, mus))
        direct = direct.sum(axis=1) - np.atleast_1d(eval(self.G, mus))
        return np.abs(np.atleast_1d(self(mus)) - direct).max()


def kahler_potential(P: poly.LabelledPolytope, grouping=None, basepoint=None,
                     check_positive=True) -> KahlerPotential:
    """Kahler potential of the quotient metric by Legendre transform; the
    basepoint defaults to the vertex barycenter."""
    G = levi_kahler_potential(P, grouping, check_positive=check_positive)
    if basepoint is None:
        basepoint = P.barycenter()
    basepoint = np.asarray(basepoint, dtype=float)
    G.check_interior(basepoint[None, :])
    return KahlerPotential(G, basepoint)


# ---------------------------------------------------------------------------
# boundary behaviour
# ---------------------------------------------------------------------------

class FacetBoundaryResult:
    def __init__(self, facet, hu_limit, normal_ratio_limit, passed):
        self.facet = facet
        self.hu_limit = hu_limit
        self.normal_ratio_limit = normal_ratio_limit
        self.passed = passed

    def as_dict(self):
        return {
            "facet": self.facet,
            "Hu_limit": self.hu_limit,
            "normal_ratio_limit": self.normal_ratio_limit,
            "passed": self.passed,
        }


class BoundaryReport:
    def __init__(self, facet_results, positive_definite, min_eigenvalue):
        self.facet_results = facet_results
        self.positive_definite = positive_definite
        self.min_eigenvalue = min_eigenvalue

    @property
    def passed(self):
        return self.positive_definite and all(r.passed for r in self.facet_results)

    def worst(self):
        return max(max(abs(r.hu_limit), abs(r.normal_ratio_limit))
                   for r in self.facet_results)

    def as_dict(self):
        return {
            "passed": self.passed,
            "positive_definite": self.positive_definite,
            "min_hessian_eigenvalue": self.min_eigenvalue,
            "facets": [r.as_dict() for r in self.facet_results],
        }


def abreu_boundary_check(G: SymplecticPotential, P=None, distances=(1e-3, 5e-4),
                         n_facet_points=3, tol=1e-5, n_grid=5) -> BoundaryReport:
    """First-order boundary conditions of the metric H = (Hess G)^{-1}.

    On each facet (at several facet points, approaching along segments to
    the barycenter at the given relative distances, Richardson-extrapolated
    to the facet):
      (a) H u_s -> 0 linearly in L_s;
      (b) u_s^T H u_s / L_s -> 2, the invariant contraction of the normal
          derivative condition D_{u_s}(H)u_s = |u_s|^2 h_s, <h_s, u_s> = 2;
    plus (c) positive-definiteness of Hess G on an interior grid.

    Report-only: never raises on failure.
    """
    if P is None:
        P = G.domain
    lat = P.face_lattice()
    bary = P.barycenter()
    diam = P.diameter()
    results = []
    t1, t2 = distances
    for s in range(P.n_facets):
        u = P.facets[s].float_linear()
        vs = np.array([[float(x) for x in p] for a, p in lat.vertices if s in a])
        fb = vs.mean(axis=0)
        # a few points spread over the facet, pulled slightly toward its middle
        base_pts = [fb] + [0.7 * v + 0.3 * fb for v in vs[:max(0, n_facet_points - 1)]]
        hu_lims, ratio_lims = [], []
        for x0 in base_pts:
            rs = []
            for t in (t1, t2):
                mu = (1 - t) * x0 + t * bary
                H = metric_H(G, mu)
                Ls = float(P.facets[s].value(mu))
                rs.append((np.linalg.norm(H @ u) / diam, (u @ H @ u) / Ls))
            # linear extrapolation to t = 0 (t2 = t1/2)
            hu_lims.append(2 * rs[1][0] - rs[0][0])
            ratio_lims.append(2 * rs[1][1] - rs[0][1])
        hu = float(np.abs(hu_lims).max())
        ratio = float(np.abs(np.asarray(ratio_lims) - 2.0).max())
        results.append(FacetBoundaryResult(s, hu, ratio, hu < tol and ratio < tol))
    grid = P.interior_grid(n_grid, inset=0.05)
    eigs = np.linalg.eigvalsh(hess_batch(G, grid))
    min_eig = float(eigs.min())
    return BoundaryReport(results, min_eig > 0, min_eig)
