"""Monte-Carlo verification on the sphere side: sigma sampling, momentum
image containment and coverage, and positivity of the horizontal form.

Sampling is Dirichlet(1,...,1) per factor (uniform on each momentum
simplex) with a fixed seed, so every report is reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

from . import levi as levi_mod
from . import polytope as poly
from .errors import (
    ContainmentFailure,
    CoverageFailure,
    SelfCheckFailure,
    SingularRestriction,
)


class SampleBatch:
    """Reproducible batch of SigmaPoints for a grouping."""

    def __init__(self, grouping, points, seed):
        self.grouping = tuple(tuple(g) for g in grouping)
        self.points = points
        self.seed = seed

    @property
    def n(self):
        return self.points.shape[0]


def sample(grouping, n, seed=0) -> SampleBatch:
    """n sigma points, Dirichlet(1,..,1) per factor, deterministic in seed."""
    if n < 1:
        raise ValueError("n >= 1 required")
    pts = levi_mod.dirichlet_sigma(grouping, n, seed)
    return SampleBatch(grouping, pts, seed)


def _hull_volume(points):
    from scipy.spatial import ConvexHull
    return float(ConvexHull(points).volume)


def polytope_volume(P: poly.LabelledPolytope) -> float:
    verts = P.vertices_float()
    if P.dim == 1:
        return float(verts.max() - verts.min())
    return _hull_volume(verts)


class MomentImageReport:
    def __init__(self, n, min_margin, coverage, containment_ok, coverage_ok,
                 containment_tol, coverage_min, seed):
        self.n = n
        self.min_margin = min_margin
        self.coverage = coverage
        self.containment_ok = containment_ok
        self.coverage_ok = coverage_ok
        self.containment_tol = containment_tol
        self.coverage_min = coverage_min
        self.seed = seed

    @property
    def passed(self):
        return self.containment_ok and self.coverage_ok

    def as_dict(self):
        return {
            "n": self.n,
            "min_label_margin": self.min_margin,
            "coverage": self.coverage,
            "containment_ok": self.containment_ok,
            "coverage_ok": self.coverage_ok,
            "containment_tol": self.containment_tol,
            "coverage_min": self.coverage_min,
            "seed": self.seed,
            "passed": self.passed,
        }


def moment_image_test(P: poly.LabelledPolytope, grouping=None, batch=None,
                      n=100_000, seed=0, containment_tol=1e-9,
                      coverage_min=0.99, check=True) -> MomentImageReport:
    """Containment (every momentum image satisfies all labels >= -tol) and
    coverage (hull of the images fills at least coverage_min of the
    polytope volume, exact hull volumes via qhull for m in {2, 3})."""
    grouping = poly.resolve_grouping(P, grouping)
    if batch is None:
        batch = sample(grouping, n, seed)
    setup = levi_mod.setup_from_polytope(P, grouping)
    chi = levi_mod.characteristic_batch(batch.points, setup, allow_singular=True)
    finite = np.all(np.isfinite(chi), axis=1)
    mus = levi_mod.moment_batch(batch.points[finite], setup, chi=chi[finite])
    vals = P.label_values(mus)
    min_margin = float(vals.min()) if len(vals) else float("nan")
    containment_ok = bool(finite.all()) and min_margin >= -containment_tol
    if P.dim == 1:
        cov = (mus.max() - mus.min()) / polytope_volume(P)
    else:
        cov = _hull_volume(mus) / polytope_volume(P)
    cov = float(cov)
    coverage_ok = cov >= coverage_min
    report = MomentImageReport(batch.n, min_margin, cov, containment_ok,
                               coverage_ok, containment_tol, coverage_min,
                               batch.seed)
    if check and not containment_ok:
        raise ContainmentFailure(
            f"momentum image escapes the polytope (margin {min_margin:.3e})",
            report=report)
    if check and not coverage_ok:
        raise CoverageFailure(
            f"hull coverage {cov:.4f} below {coverage_min}", report=report)
    return report


class HorizontalReport:
    def __init__(self, eigenvalues, chi, n_pos, n_neg, n_zero, dims):
        self.eigenvalues = eigenvalues
        self.chi = chi
        self.n_pos = n_pos
        self.n_neg = n_neg
        self.n_zero = n_zero
        self.dims = dims

    @property
    def positive_definite(self):
        return self.n_neg == 0 and self.n_zero == 0 and self.n_pos == sum(self.dims)

    def as_dict(self):
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "chi": self.chi.tolist(),
            "n_pos": self.n_pos, "n_neg": self.n_neg, "n_zero": self.n_zero,
            "positive_definite": self.positive_definite,
        }


def horizontal_positivity(sigma, setup: levi_mod.LeviSetup) -> HorizontalReport:
    """Sign profile of the horizontal form

        sum_s 2 chi_{i(s)} ( v_sigma_s^2 / (2 sigma_s) + 2 sigma_s v_theta_s^2 )

    restricted to  sum_r v_sigma_{ir} = 0  and  sum_r sigma_{ir} v_theta_{ir} = 0
    per factor.  Components at sigma_s = 0 are excluded (the circle
    degenerates on that stratum).  Per factor the restriction contributes
    2(m_i-active) directions, all with the sign of chi_i; positive definite
    iff every chi_i > 0 (self-checked)."""
    sig = np.asarray(sigma.values if isinstance(sigma, levi_mod.SigmaPoint) else sigma,
                     dtype=float)
    chi = np.atleast_2d(levi_mod.characteristic_batch(sig[None, :], setup))[0]
    active = [np.array([s for s in g if sig[s] > 0]) for g in setup.grouping]
    dims = [2 * (len(a) - 1) for a in active]
    dim_total = sum(dims)
    if dim_total == 0:
        raise SingularRestriction("sigma sits on a vertex stratum; no horizontal directions")
    # basis of the restricted subspace, block structure (sigma-block, theta-block)
    cols = []
    nact = sum(len(a) for a in active)
    pos = {}
    k = 0
    for a in active:
        for s in a:
            pos[s] = k
            k += 1
    for i, a in enumerate(active):
        for s in a[1:]:
            v = np.zeros(2 * nact)
            v[pos[a[0]]] = -1.0
            v[pos[s]] = 1.0
            cols.append(v)
        for s in a[1:]:
            v = np.zeros(2 * nact)
            v[nact + pos[a[0]]] = -sig[s]
            v[nact + pos[s]] = sig[a[0]]
            cols.append(v)
    B = np.array(cols).T
    diag = np.empty(2 * nact)
    for i, a in enumerate(active):
        for s in a:
            diag[pos[s]] = 2 * chi[i] / (2 * sig[s])
            diag[nact + pos[s]] = 2 * chi[i] * 2 * sig[s]
    M = B.T @ (diag[:, None] * B)
    eig = np.linalg.eigvalsh(M)
    tol = 1e-12 * max(1.0, float(np.abs(eig).max()))
    n_pos = int((eig > tol).sum())
    n_neg = int((eig < -tol).sum())
    n_zero = len(eig) - n_pos - n_neg
    report = HorizontalReport(eig, chi, n_pos, n_neg, n_zero, dims)
    expected_neg = sum(d for d, c in zip(dims, chi) if c < 0)
    expected_pos = sum(d for d, c in zip(dims, chi) if c > 0)
    if (n_neg, n_pos) != (expected_neg, expected_pos):
        raise SelfCheckFailure(
            f"sign profile ({n_pos}, {n_neg}) does not match chi signs {chi}")
    return report
