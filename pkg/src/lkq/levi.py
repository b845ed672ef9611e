"""Levi pairs over products of odd spheres: kernels, characteristic
functions, momentum maps, transversality and positivity.

The linear data is the diagram

    0 -> g -> R^S --u--> t -> 0          (g = ker u, lambda = L|_g)

with L : R^S -> h the label map of a grouped polytope, together with the
reference pair (g_o, lambda_o) of the product of spheres: g_o is spanned by
the per-factor indicator vectors and lambda_o is the all-ones functional.
The chart for h is R^{m+1} with the first coordinate the constant term of
the affine function (the epsilon component) and the rest its linear part.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import polytope as poly
from . import rational
from .errors import (
    Inconsistent,
    RankDeficient,
    SelfCheckFailure,
    SingularSystem,
)


class SigmaPoint:
    """Momentum coordinates on a product of spheres: sigma_s >= 0 with unit
    per-factor sums (renormalized on construction, entries clamped at 0)."""

    __slots__ = ("values", "grouping")

    def __init__(self, values, grouping):
        v = np.array(values, dtype=float)
        v = np.clip(v, 0.0, None)
        for g in grouping:
            idx = list(g)
            tot = v[idx].sum()
            if tot <= 0:
                raise ValueError("sigma vanishes on an entire factor")
            v[idx] /= tot
        self.values = v
        self.grouping = tuple(tuple(g) for g in grouping)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


class LeviSetup:
    """Linear-algebra data of a Levi pair for a grouped labelled polytope."""

    def __init__(self, P: poly.LabelledPolytope, grouping, L_mat, u_mat,
                 g_basis, lam, g_basis_exact=None):
        self.polytope = P
        self.grouping = tuple(tuple(g) for g in grouping)
        self.m = P.dim
        self.ell = len(self.grouping)
        self.d = self.m + self.ell
        self.L_mat = L_mat              # (m+1, d)
        self.u_mat = u_mat              # (m, d)
        self.g_basis = g_basis          # (d, ell)
        self.lam = lam                  # (ell,)
        self.g_basis_exact = g_basis_exact
        self.factor_of = np.empty(self.d, dtype=int)
        for i, g in enumerate(self.grouping):
            for s in g:
                self.factor_of[s] = i
        self.ref_basis = np.zeros((self.d, self.ell))
        for i, g in enumerate(self.grouping):
            self.ref_basis[list(g), i] = 1.0
        self.lambda_o = np.ones(self.ell)
        # least-squares solver for the momentum map (same matrix for all sigma)
        self._moment_pinv = np.linalg.pinv(self.u_mat.T)

    def factor_masks(self):
        return [self.factor_of == i for i in range(self.ell)]


def setup_from_polytope(P: poly.LabelledPolytope, grouping=None) -> LeviSetup:
    """Assemble the kernel diagram from the labels of a grouped polytope.

    The kernel basis is computed exactly (rationally) when the labels are
    rational; a float copy drives the numerics either way.
    """
    grouping = poly.resolve_grouping(P, grouping)
    d = P.n_facets
    m = P.dim
    L_mat = np.zeros((m + 1, d))
    for s, f in enumerate(P.facets):
        a0, a = f.as_floats()
        L_mat[0, s] = a0
        L_mat[1:, s] = a
    u_mat = L_mat[1:, :]
    if np.linalg.matrix_rank(u_mat, tol=poly.EPS_COMB) < m:
        raise RankDeficient("facet normals do not span t")
    if np.linalg.matrix_rank(L_mat, tol=poly.EPS_COMB) < m + 1:
        raise RankDeficient("labels do not span h")

    g_exact = None
    if P.is_exact:
        rows = [[Fraction(f.a[k]) for f in P.facets] for k in range(m)]
        kernel = rational.nullspace(rows, d)
        if len(kernel) != d - m:
            raise RankDeficient("kernel dimension mismatch")
        g_exact = kernel
        g_basis = np.array([[float(v) for v in vec] for vec in kernel]).T
    else:
        u, sv, vt = np.linalg.svd(u_mat)
        g_basis = vt[m:].T
        if g_basis.shape[1] != d - m:
            raise RankDeficient("kernel dimension mismatch")
    lam = (L_mat @ g_basis)[0]
    return LeviSetup(P, grouping, L_mat, u_mat, g_basis, lam, g_basis_exact=g_exact)


def canonical_setup(factor_dims) -> LeviSetup:
    """Setup of the canonical pair (g_o, lambda_o) on a product of simplices."""
    P = poly.product_of_simplices(factor_dims)
    return setup_from_polytope(P)


def _sigma_array(sigma, setup: LeviSetup):
    if isinstance(sigma, SigmaPoint):
        return np.atleast_2d(sigma.values)
    arr = np.atleast_2d(np.asarray(sigma, dtype=float))
    if arr.shape[-1] != setup.d:
        raise ValueError(f"sigma has length {arr.shape[-1]}, expected {setup.d}")
    return arr


def transversality_matrix(sigma, setup: LeviSetup):
    """The d x d system matrix: upper rows sigma_s per factor, lower block u."""
    sig = _sigma_array(sigma, setup)
    n = sig.shape[0]
    A = np.zeros((n, setup.d, setup.d))
    for i in range(setup.ell):
        mask = setup.factor_of == i
        A[:, i, mask] = sig[:, mask]
    A[:, setup.ell:, :] = setup.u_mat[None, :, :]
    return A


def transversality_det(sigma, setup: LeviSetup):
    """det of the transversality system; nowhere zero iff the pair is
    transversal along the sampled stratum."""
    A = transversality_matrix(sigma, setup)
    det = np.linalg.det(A)
    return float(det[0]) if det.shape == (1,) else det


def characteristic(sigma, setup: LeviSetup):
    """Per-factor characteristic vector chi solving
    (g^T  2 diag(sigma)  g_o) chi = lambda."""
    chi = characteristic_batch(_sigma_array(sigma, setup), setup)
    return chi[0] if chi.shape[0] == 1 else chi


def characteristic_batch(sigmas, setup: LeviSetup, allow_singular=False):
    sig = np.asarray(sigmas, dtype=float)
    # M[n] = g_basis^T (2 diag sig[n]) ref_basis
    M = 2.0 * np.einsum("sk,ns,sj->nkj", setup.g_basis, sig, setup.ref_basis)
    lam = np.broadcast_to(setup.lam, (sig.shape[0], setup.ell))
    try:
        chi = np.linalg.solve(M, lam[..., None])[..., 0]
    except np.linalg.LinAlgError:
        if not allow_singular:
            raise SingularSystem("transversality fails at a sample point")
        chi = np.full((sig.shape[0], setup.ell), np.nan)
        dets = np.linalg.det(M)
        ok = np.abs(dets) > 1e-300
        if ok.any():
            chi[ok] = np.linalg.solve(M[ok], lam[ok][..., None])[..., 0]
        return chi
    if not np.all(np.isfinite(chi)):
        if not allow_singular:
            raise SingularSystem("transversality fails at a sample point")
    return chi


def moment(sigma, setup: LeviSetup, chi=None):
    """Horizontal momentum image of sigma: the unique solution of the
    consistent overdetermined system L_s(mu) = 2 chi_{i(s)} sigma_s.

    Solved by least squares; the residual certifies consistency and must
    stay below 1e-10 * |sigma|.
    """
    sig = _sigma_array(sigma, setup)
    mus, resid = moment_batch(sig, setup, chi=chi, return_residual=True)
    tol = 1e-10 * np.linalg.norm(sig, axis=1)
    if np.any(resid > tol):
        raise Inconsistent(
            f"momentum solve residual {resid.max():.3e} exceeds {tol.max():.3e}")
    return mus[0] if mus.shape[0] == 1 else mus


def moment_batch(sigmas, setup: LeviSetup, chi=None, return_residual=False):
    sig = np.asarray(sigmas, dtype=float)
    if chi is None:
        chi = characteristic_batch(sig, setup)
    chi = np.atleast_2d(chi)
    rhs = 2.0 * chi[:, setup.factor_of] * sig - setup.L_mat[0][None, :]
    mus = rhs @ setup._moment_pinv.T
    if not return_residual:
        return mus
    resid = np.linalg.norm(mus @ setup.u_mat - rhs, axis=1)
    return mus, resid


class PositivePairReport:
    """Deterministic combinatorial verdict plus a stochastic chi-sign sweep."""

    def __init__(self, combinatorial, stochastic, n_samples, min_chi, seed):
        self.combinatorial = bool(combinatorial)
        self.stochastic = bool(stochastic)
        self.n_samples = n_samples
        self.min_chi = min_chi
        self.seed = seed

    @property
    def positive(self):
        return self.combinatorial

    def __bool__(self):
        return self.combinatorial

    def as_dict(self):
        return {
            "combinatorial": self.combinatorial,
            "stochastic": self.stochastic,
            "n_samples": self.n_samples,
            "min_chi": self.min_chi,
            "seed": self.seed,
        }


def dirichlet_sigma(grouping, n, seed):
    """Dirichlet(1,...,1) per factor: uniform on each momentum simplex."""
    rng = np.random.default_rng(seed)
    d = sum(len(g) for g in grouping)
    out = np.empty((n, d))
    for g in grouping:
        out[:, list(g)] = rng.dirichlet(np.ones(len(g)), size=n)
    return out


def is_positive_pair(setup: LeviSetup, P=None, grouping=None, n=10000, seed=0):
    """Positivity of the Levi pair, decided combinatorially and verified by
    sampling chi on n Dirichlet points; the two verdicts must agree."""
    if P is None:
        P = setup.polytope
    if grouping is None:
        grouping = setup.grouping
    comb = poly.matches_product_of_simplices(P, grouping)
    sig = dirichlet_sigma(grouping, n, seed)
    chi = characteristic_batch(sig, setup, allow_singular=True)
    finite = np.all(np.isfinite(chi), axis=1)
    min_chi = float(chi[finite].min()) if finite.any() else float("nan")
    stoch = bool(finite.all() and min_chi > 0)
    if comb != stoch:
        raise SelfCheckFailure(
            f"combinatorial positivity {comb} but sampled chi verdict {stoch} "
            f"(min chi {min_chi:.3e} over {n} samples)")
    return PositivePairReport(comb, stoch, n, min_chi, seed)
