"""Diagonal ansatz for polytopes projectively equivalent to a cube.

The data is a vector b = (b_0, ..., b_m) and per-axis polynomials A_i of
degree at most 3 with roots alpha_{i0} < alpha_{i1} bounding the box and an
optional third root alpha_{i,inf} outside it (infinite third root = degree
2, the limiting case).  On the chart sum_j b_j mu_j = 1 the coordinates

    mu_0 = 1 / (b_0 + b_1 xi_1 + ... + b_m xi_m),   mu_i = xi_i mu_0

turn the box into the momentum polytope with labels

    L_{ir}(mu) = 2 (mu_i - alpha_{ir} mu_0) / A_i'(alpha_{ir}),

and the metric takes the diagonal form with dxi-block mu_0/A_i(xi_i) and
angular block mu_0 A_i(xi_i).  The scalar curvature and its (w, m+2)
modification with w = mu_0 are closed forms in this chart.
"""

from __future__ import annotations

import numpy as np

from . import polytope as poly
from .errors import (
    BoundaryProximity,
    CharacteristicHyperplane,
    DegenerateRoots,
    InputError,
)

ROOT_GAP = 1e-9
ROOT_CHECK_TOL = 1e-10


class AxisPolynomial:
    """One factor's polynomial, stored both by roots and by coefficients."""

    __slots__ = ("lead", "alpha0", "alpha1", "alpha_inf", "coeffs")

    def __init__(self, lead, alpha0, alpha1, alpha_inf=None):
        self.lead = float(lead)
        self.alpha0 = float(alpha0)
        self.alpha1 = float(alpha1)
        self.alpha_inf = None if alpha_inf is None else float(alpha_inf)
        roots = [self.alpha0, self.alpha1] + ([] if self.alpha_inf is None else [self.alpha_inf])
        self.coeffs = self.lead * np.poly(roots)   # highest degree first
        self._validate()

    def _validate(self):
        if self.alpha1 - self.alpha0 <= ROOT_GAP:
            raise DegenerateRoots("box roots must satisfy alpha0 < alpha1")
        if self.alpha_inf is not None:
            if min(abs(self.alpha_inf - self.alpha0), abs(self.alpha_inf - self.alpha1)) <= ROOT_GAP:
                raise DegenerateRoots("third root collides with a box root")
            if self.alpha0 < self.alpha_inf < self.alpha1:
                raise DegenerateRoots("third root lies inside the box")
        mid = 0.5 * (self.alpha0 + self.alpha1)
        if self(mid) <= 0:
            raise DegenerateRoots("polynomial is not positive on the box interior")
        scale = max(1.0, np.abs(self.coeffs).max())
        for r in self.roots():
            if abs(self(r)) > ROOT_CHECK_TOL * scale * max(1.0, abs(r)) ** self.degree:
                raise DegenerateRoots("stored roots inconsistent with coefficients")

    @property
    def degree(self):
        return 2 if self.alpha_inf is None else 3

    def roots(self):
        return [self.alpha0, self.alpha1] + ([] if self.alpha_inf is None else [self.alpha_inf])

    def __call__(self, y):
        return np.polyval(self.coeffs, y)

    def deriv(self, y):
        return np.polyval(np.polyder(self.coeffs), y)

    def deriv2(self, y):
        return np.polyval(np.polyder(self.coeffs, 2), y)

    def deriv_at_root(self, r):
        """A'(root) as the product over the other roots (exact factorization)."""
        out = self.lead
        for q in self.roots():
            if q != r:
                out *= (r - q)
        return out


class CubeAnsatz:
    """Projective-cube data (b, A_1..A_m) with the box of root intervals."""

    def __init__(self, b, axis_polys):
        self.b = np.asarray([float(v) for v in b], dtype=float)
        self.axes = tuple(p if isinstance(p, AxisPolynomial) else AxisPolynomial(*p)
                          for p in axis_polys)
        self.m = len(self.axes)
        if len(self.b) != self.m + 1:
            raise InputError(f"b must have length m+1 = {self.m + 1}")
        if self.b[0] == 0:
            raise InputError("b_0 must be nonzero to fix the momentum chart")
        corners = np.array(np.meshgrid(
            *[[p.alpha0, p.alpha1] for p in self.axes], indexing="ij")).reshape(self.m, -1).T
        denom = self.b[0] + corners @ self.b[1:]
        if np.any(denom <= 0):
            raise InputError("b_0 + <b, xi> must be positive on the box")

    # -- coordinate transforms ----------------------------------------------

    def box_low(self):
        return np.array([p.alpha0 for p in self.axes])

    def box_high(self):
        return np.array([p.alpha1 for p in self.axes])

    def mu0_of_xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        return 1.0 / (self.b[0] + xi @ self.b[1:])

    def mu0_affine(self) -> poly.AffineFunction:
        """mu_0 as an affine function of (mu_1..mu_m) on the chart."""
        return poly.AffineFunction(1.0 / self.b[0], (-self.b[1:] / self.b[0]).tolist())

    def mu_from_xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 1
        xs = np.atleast_2d(xi)
        lo, hi = self.box_low(), self.box_high()
        if np.any(xs < lo - 1e-12) or np.any(xs > hi + 1e-12):
            raise InputError("xi outside the closed box")
        mu0 = 1.0 / (self.b[0] + xs @ self.b[1:])
        mus = xs * mu0[:, None]
        return mus[0] if single else mus

    def xi_from_mu(self, mu):
        mu = np.asarray(mu, dtype=float)
        single = mu.ndim == 1
        mus = np.atleast_2d(mu)
        mu0 = self.mu0_affine().values(mus)
        if np.any(mu0 <= 0):
            raise CharacteristicHyperplane("mu_0 <= 0: point beyond the characteristic hyperplane")
        xs = mus / mu0[:, None]
        return xs[0] if single else xs

    # -- labels ----------------------------------------------------------------

    def labels(self):
        """The 2m affine facet labels L_{ir}, grouped in opposite pairs."""
        m0 = self.mu0_affine()
        facets = []
        grouping = []
        for i, p in enumerate(self.axes):
            pair = []
            for r in (p.alpha0, p.alpha1):
                Apr = p.deriv_at_root(r)
                mu_i = poly.AffineFunction(0.0, [1.0 if j == i else 0.0 for j in range(self.m)])
                lab = (mu_i - m0.scale(r)).scale(2.0 / Apr)
                facets.append(lab)
                pair.append(len(facets) - 1)
            grouping.append(tuple(pair))
        return facets, grouping

    def infinity_label(self, i) -> poly.AffineFunction:
        """L_{i,inf} = -(L_{i0} + L_{i1}); for cubic axes this is also the
        closed form 2(mu_i - alpha_inf mu_0)/A'(alpha_inf)."""
        facets, grouping = self.labels()
        return -poly.affine_sum([facets[s] for s in grouping[i]])

    def check_label_sums(self, tol=1e-12):
        """Per-factor identity sum_{r in H} L_{ir} = 0 for cubic axes."""
        m0 = self.mu0_affine()
        worst = 0.0
        for i, p in enumerate(self.axes):
            if p.alpha_inf is None:
                continue
            facets, grouping = self.labels()
            mu_i = poly.AffineFunction(0.0, [1.0 if j == i else 0.0 for j in range(self.m)])
            linf = (mu_i - m0.scale(p.alpha_inf)).scale(2.0 / p.deriv_at_root(p.alpha_inf))
            total = poly.affine_sum([facets[s] for s in grouping[i]] + [linf])
            worst = max(worst, abs(total.a0), max(abs(v) for v in total.a))
        return worst <= tol, worst


def labels_from_cube(ansatz: CubeAnsatz) -> poly.LabelledPolytope:
    """The labelled polytope cut out by the ansatz (image of the box)."""
    facets, grouping = ansatz.labels()
    return poly.LabelledPolytope(facets, grouping)


def xi_from_mu(ansatz: CubeAnsatz, mu):
    return ansatz.xi_from_mu(mu)


def mu_from_xi(ansatz: CubeAnsatz, xi):
    return ansatz.mu_from_xi(xi)


def _check_interior_xi(ansatz, xs, margin=1e-9):
    lo, hi = ansatz.box_low(), ansatz.box_high()
    gap = (hi - lo) * margin
    if np.any(xs <= lo + gap) or np.any(xs >= hi - gap):
        raise BoundaryProximity("xi on or outside the box boundary")


def metric_at_xi(ansatz: CubeAnsatz, xi):
    """Diagonal metric blocks at xi: (dxi-block, angular block) =
    (mu_0 diag(1/A_i), mu_0 diag(A_i))."""
    xi = np.asarray(xi, dtype=float)
    _check_interior_xi(ansatz, np.atleast_2d(xi))
    mu0 = ansatz.mu0_of_xi(xi)
    avals = np.array([p(x) for p, x in zip(ansatz.axes, xi)])
    return np.diag(mu0 / avals), np.diag(mu0 * avals)


class AngularFrame:
    """Coefficient matrix of the angular frame theta_i = sum_j T_ij dt_j,
    T = I - b_{1:} mu^T.  The frame satisfies d theta_i = -b_i omega: at the
    coefficient level, dT_ij = -b_i dmu_j, i.e. the finite difference
    T(mu') - T(mu) equals -b_{1:} (mu' - mu)^T exactly."""

    __slots__ = ("b_tail", "mu", "matrix")

    def __init__(self, ansatz, mu):
        self.b_tail = ansatz.b[1:]
        self.mu = np.asarray(mu, dtype=float)
        self.matrix = np.eye(ansatz.m) - np.outer(self.b_tail, self.mu)

    def curvature_identity_residual(self, other):
        """|dtheta + b omega| at the coefficient level, probed against a
        second frame: T(mu') - T(mu) + b_{1:} (mu' - mu)^T must vanish."""
        diff = other.matrix - self.matrix
        return float(np.abs(diff + np.outer(self.b_tail, other.mu - self.mu)).max())


def angular_frame(ansatz: CubeAnsatz, mu):
    """Frame coefficient matrix T = I - b_{1:} mu^T at mu."""
    return AngularFrame(ansatz, mu).matrix


def torus_metric_at_mu(ansatz: CubeAnsatz, mu):
    """Angular-part metric in the dt-frame: T^T (mu_0 diag A_i) T.  Equals
    the inverse Hessian of the quotient potential of labels_from_cube."""
    xi = ansatz.xi_from_mu(mu)
    mu0 = ansatz.mu0_of_xi(xi)
    D = mu0 * np.array([p(x) for p, x in zip(ansatz.axes, xi)])
    T = angular_frame(ansatz, mu)
    return T.T @ np.diag(D) @ T


def ricci_potential(ansatz: CubeAnsatz, xi) -> float:
    """mu_0^{m+2} prod_i A_i(xi_i), the volume-ratio potential whose
    -1/2 ddc log gives the Ricci form."""
    xi = np.asarray(xi, dtype=float)
    mu0 = ansatz.mu0_of_xi(xi)
    out = mu0 ** (ansatz.m + 2)
    for p, x in zip(ansatz.axes, xi):
        out *= p(x)
    return float(out)


def scalar_closed_form(ansatz: CubeAnsatz, xi):
    """Scalar curvature in the xi-chart:

        S = -sum A_i''(xi_i)/mu_0 + 2(m+1) sum b_i A_i'(xi_i)
            - (m+1)(m+2) mu_0 sum b_i^2 A_i(xi_i).
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xs = np.atleast_2d(xi)
    m = ansatz.m
    mu0 = 1.0 / (ansatz.b[0] + xs @ ansatz.b[1:])
    out = np.zeros(xs.shape[0])
    for i, p in enumerate(ansatz.axes):
        bi = ansatz.b[i + 1]
        out += (-p.deriv2(xs[:, i]) / mu0
                + 2.0 * (m + 1) * bi * p.deriv(xs[:, i])
                - (m + 1) * (m + 2) * mu0 * bi ** 2 * p(xs[:, i]))
    return float(out[0]) if single else out


def wp_scalar_closed_form(ansatz: CubeAnsatz, xi):
    """s_{w,m+2} with w = mu_0:  -mu_0 sum_i A_i''(xi_i), affine in momenta."""
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xs = np.atleast_2d(xi)
    mu0 = 1.0 / (ansatz.b[0] + xs @ ansatz.b[1:])
    tot = np.zeros(xs.shape[0])
    for i, p in enumerate(ansatz.axes):
        tot += p.deriv2(xs[:, i])
    out = -mu0 * tot
    return float(out[0]) if single else out


def xi_potential(ansatz: CubeAnsatz, xi) -> float:
    """sum_i int^{xi_i} ds / A_i(s) via partial fractions:
    sum over roots of log|xi_i - r| / A_i'(r)."""
    xi = np.asarray(xi, dtype=float)
    out = 0.0
    for p, x in zip(ansatz.axes, xi):
        for r in p.roots():
            out += np.log(abs(x - r)) / p.deriv_at_root(r)
    return float(out)


def label_log_potential(ansatz: CubeAnsatz, mu) -> float:
    """sum_{i, r in H} log|L_{ir}(mu)| / A_i'(alpha_{ir}) over all roots
    including the infinity label; differs from xi_potential by a constant."""
    facets, grouping = ansatz.labels()
    mu = np.asarray(mu, dtype=float)
    out = 0.0
    for i, p in enumerate(ansatz.axes):
        labs = [facets[s] for s in grouping[i]]
        roots = [p.alpha0, p.alpha1]
        if p.alpha_inf is not None:
            m0 = ansatz.mu0_affine()
            mu_i = poly.AffineFunction(0.0, [1.0 if j == i else 0.0 for j in range(ansatz.m)])
            labs.append((mu_i - m0.scale(p.alpha_inf)).scale(2.0 / p.deriv_at_root(p.alpha_inf)))
            roots.append(p.alpha_inf)
        for lab, r in zip(labs, roots):
            out += np.log(abs(lab.value(mu))) / p.deriv_at_root(r)
    return float(out)


def random_ansatz(m, rng, allow_quadratic=True):
    """Random admissible ansatz for cross-checks: boxes of varied position
    and size, cubic or quadratic axes, b positive on the box."""
    axes = []
    for _ in range(m):
        lo = rng.uniform(-0.8, 0.3)
        hi = lo + rng.uniform(0.6, 1.6)
        if allow_quadratic and rng.random() < 0.3:
            lead = -rng.uniform(0.5, 2.5)      # negative leading coeff: positive between roots
            axes.append(AxisPolynomial(lead, lo, hi, None))
        else:
            below = rng.random() < 0.5
            gap = rng.uniform(0.4, 2.0)
            ainf = lo - gap if below else hi + gap
            lead = rng.uniform(0.5, 2.5) * (-1.0 if below else 1.0)
            axes.append(AxisPolynomial(lead, lo, hi, ainf))
    while True:
        b = np.concatenate([[1.0], rng.uniform(-0.6, 0.6, size=m)])
        corners = np.array(np.meshgrid(*[[p.alpha0, p.alpha1] for p in axes],
                                       indexing="ij")).reshape(m, -1).T
        if np.all(b[0] + corners @ b[1:] > 0.15):
            break
    return CubeAnsatz(b, axes)
