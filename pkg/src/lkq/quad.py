"""Quotients of S^3 x S^3: C-matrix normal form, momenta, ambitoric
classification, Segre coordinates and extremality.

The quotient data is a 2x2 matrix C = (alpha gamma; beta delta) and a
positive pair c = (c_1, c_2): the subalgebra is spanned by
w_i = e_{i0} + e_{i1} + sum_j C_{ji} e_{j0} and lambda(w_i) = c_i.  With
P = I + diag(sigma) C and Q = P^{-1}, the momenta and characteristic
vector are

    mu_i = 2 chi_i sigma_i,    2 chi_i = sum_j c_j Q_{ji},

rational in sigma with common denominator Z = det P.  The facet labels in
momenta are L_{i0} = mu_i and L_{i1} = c_i - mu_i - (C^T mu)_i.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import cube as cube_mod
from . import curvature as curv
from . import levi as levi_mod
from . import polytope as poly
from . import potential as pot
from . import rational
from .errors import DegenerateRoots, PositivityFailure, SelfCheckFailure

ZERO_TOL = 1e-10


class QuadData:
    """Quotient data (C, c); entries may be exact rationals or floats."""

    def __init__(self, C, c):
        self.C_raw = tuple(tuple(row) for row in C)
        self.c_raw = tuple(c)
        if len(self.C_raw) != 2 or any(len(r) != 2 for r in self.C_raw) or len(self.c_raw) != 2:
            raise PositivityFailure("C must be 2x2 and c of length 2")
        self.C = np.array([[float(v) for v in row] for row in self.C_raw])
        self.c = np.array([float(v) for v in self.c_raw])
        self.is_exact = all(rational.is_exact(v) for row in self.C_raw for v in row) and \
            all(rational.is_exact(v) for v in self.c_raw)
        if np.any(self.c <= 0):
            raise PositivityFailure("c_1, c_2 must be positive")
        corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        for s in corners:
            if self.Z(*s) <= 0:
                raise PositivityFailure(f"Z <= 0 at sigma = {s}")
        # positivity of chi on the closed square (numerators affine per factor)
        a, g = self.C[0]
        b, d = self.C[1]
        c1, c2 = self.c
        if min(c1, c1 * (1 + d) - c2 * b) <= 0 or min(c2, c2 * (1 + a) - c1 * g) <= 0:
            raise PositivityFailure("characteristic numerators vanish on the square")

    @property
    def alpha(self):
        return self.C[0, 0]

    @property
    def gamma(self):
        return self.C[0, 1]

    @property
    def beta(self):
        return self.C[1, 0]

    @property
    def delta(self):
        return self.C[1, 1]

    def Z(self, s1, s2):
        a, g = self.C[0]
        b, d = self.C[1]
        return 1.0 + a * s1 + d * s2 + (a * d - b * g) * s1 * s2

    def swap_factors(self):
        """Exchange the two sphere factors: transpose C blocks and swap c."""
        (a, g), (b, d) = self.C_raw
        return QuadData(((d, b), (g, a)), (self.c_raw[1], self.c_raw[0]))


class AmbitoricClass:
    """Product / Calabi / Orthotoric trichotomy by the (beta, gamma) zero
    pattern, cross-checked against dim(g meet ab_i)."""

    def __init__(self, tag, side, intersection_dims):
        self.tag = tag
        self.side = side                      # which of beta/gamma vanish
        self.intersection_dims = intersection_dims

    def __repr__(self):
        return f"AmbitoricClass({self.tag!r}, side={self.side!r}, dims={self.intersection_dims})"

    def as_dict(self):
        return {"tag": self.tag, "side": self.side,
                "intersection_dims": list(self.intersection_dims)}


def _is_zero(value, exact):
    if exact:
        return value == 0
    return abs(float(value)) < ZERO_TOL


def g_basis_vectors(qd: QuadData):
    """The canonical basis w_1, w_2 of g in coordinates (e10, e11, e20, e21)."""
    (a, g), (b, d) = qd.C_raw
    w1 = [1 + a, 1, b, 0]
    w2 = [g, 0, 1 + d, 1]
    return w1, w2


def classify(qd: QuadData) -> AmbitoricClass:
    """Tag per the vanishing pattern of beta, gamma (exact on rationals),
    verified against the subspace criterion dim(g meet ab_i)."""
    (a, g), (b, d) = qd.C_raw
    bz = _is_zero(b, qd.is_exact)
    gz = _is_zero(g, qd.is_exact)
    if bz and gz:
        tag, side = "Product", "both"
    elif bz or gz:
        tag, side = "Calabi", ("beta" if bz else "gamma")
    else:
        tag, side = "Orthotoric", "none"
    # dim(g meet ab_1): components on the second factor vanish
    w1, w2 = g_basis_vectors(qd)
    if qd.is_exact:
        rows1 = [[Fraction(w1[2]), Fraction(w2[2])], [Fraction(w1[3]), Fraction(w2[3])]]
        rows2 = [[Fraction(w1[0]), Fraction(w2[0])], [Fraction(w1[1]), Fraction(w2[1])]]
        dims = (2 - rational.rank(rows1), 2 - rational.rank(rows2))
    else:
        m1 = np.array([[w1[2], w2[2]], [w1[3], w2[3]]], dtype=float)
        m2 = np.array([[w1[0], w2[0]], [w1[1], w2[1]]], dtype=float)
        dims = (2 - int(np.linalg.matrix_rank(m1, tol=ZERO_TOL)),
                2 - int(np.linalg.matrix_rank(m2, tol=ZERO_TOL)))
    expected = {"Product": (1, 1), "Calabi": {(1, 0), (0, 1)}, "Orthotoric": (0, 0)}
    ok = dims in expected[tag] if tag == "Calabi" else dims == expected[tag]
    if not ok:
        raise SelfCheckFailure(f"tag {tag} inconsistent with intersection dims {dims}")
    return AmbitoricClass(tag, side, dims)


# ---------------------------------------------------------------------------
# momenta and setup
# ---------------------------------------------------------------------------

def sigma_to_mu(qd: QuadData, sigmas):
    """Momenta of the two factors as rational functions of (sigma_1, sigma_2)."""
    s = np.atleast_2d(np.asarray(sigmas, dtype=float))
    a, g = qd.C[0]
    b, d = qd.C[1]
    c1, c2 = qd.c
    z = qd.Z(s[:, 0], s[:, 1])
    mu1 = (c1 * s[:, 0] * (1 + d * s[:, 1]) - c2 * b * s[:, 0] * s[:, 1]) / z
    mu2 = (-c1 * g * s[:, 0] * s[:, 1] + c2 * (1 + a * s[:, 0]) * s[:, 1]) / z
    out = np.column_stack([mu1, mu2])
    return out[0] if np.ndim(sigmas) == 1 else out


def chi_closed(qd: QuadData, sigmas):
    """2 chi_i = sum_j c_j Q_{ji} with Q = (I + diag(sigma) C)^{-1}."""
    s = np.atleast_2d(np.asarray(sigmas, dtype=float))
    P = np.eye(2)[None, :, :] + s[:, :, None] * qd.C[None, :, :]
    Q = np.linalg.inv(P)
    chi = 0.5 * np.einsum("j,nji->ni", qd.c, Q)
    return chi[0] if np.ndim(sigmas) == 1 else chi


def toral_metric_closed(qd: QuadData, sigmas):
    """Angular metric in the dt-frame directly from (sigma, C, c):
    sum_i 4 chi_i sigma_i (1 - sigma_i) (Qt_i)(Qt_i)^T with
    Qt = (I + C diag(sigma))^{-1}."""
    s = np.asarray(sigmas, dtype=float)
    single = s.ndim == 1
    ss = np.atleast_2d(s)
    chi = np.atleast_2d(chi_closed(qd, ss))
    Pt = np.eye(2)[None, :, :] + qd.C[None, :, :] * ss[:, None, :]
    Qt = np.linalg.inv(Pt)
    f = 4.0 * chi * ss * (1.0 - ss)
    H = np.einsum("ni,nij,nik->njk", f, Qt, Qt)
    return H[0] if single else H


def quad_labels(qd: QuadData):
    """Affine labels in momenta: L_{i0} = mu_i, L_{i1} = c_i - mu_i - (C^T mu)_i."""
    if qd.is_exact:
        (a, g), (b, d) = (tuple(Fraction(v) for v in row) for row in qd.C_raw)
        c1, c2 = (Fraction(v) for v in qd.c_raw)
        one, zero = Fraction(1), Fraction(0)
    else:
        (a, g), (b, d) = qd.C
        c1, c2 = qd.c
        one, zero = 1.0, 0.0
    facets = [
        poly.AffineFunction(zero, (one, zero)),
        poly.AffineFunction(c1, (-(one + a), -b)),
        poly.AffineFunction(zero, (zero, one)),
        poly.AffineFunction(c2, (-g, -(one + d))),
    ]
    return facets, ((0, 1), (2, 3))


def quad_setup(qd: QuadData):
    """Labelled quadrilateral and Levi setup of the quotient data."""
    facets, grouping = quad_labels(qd)
    P = poly.LabelledPolytope(facets, grouping)
    setup = levi_mod.setup_from_polytope(P, grouping)
    return P, setup


def corner_vertices(qd: QuadData):
    """Images of the four sigma-corners (the quadrilateral's vertices)."""
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return sigma_to_mu(qd, corners)


# ---------------------------------------------------------------------------
# Segre coordinates and the induced cube ansatz
# ---------------------------------------------------------------------------

class SegreChart:
    """Per-factor coordinates xi_i(sigma_i) with the polynomials A_i of the
    induced diagonal ansatz (b = (1, c1*gamma, c2*beta))."""

    def __init__(self, qd: QuadData):
        c1, c2 = qd.c
        self.qd = qd
        self.k1 = c1 * qd.gamma - c2 * qd.alpha
        self.k2 = c2 * qd.beta - c1 * qd.delta
        # A_1(y) = c1 c2 y (1 + k1 y)(1 + (k1 - c2) y); roots 0, 1/(c2-k1), -1/k1
        self.rho = (1.0 / (c2 - self.k1), 1.0 / (c1 - self.k2))
        if min(c2 - self.k1, c1 - self.k2) <= 0:
            raise DegenerateRoots("box endpoint root at infinity or negative")
        axes = []
        for fac, (k, cdual) in enumerate([(self.k1, c2), (self.k2, c1)]):
            rho = 1.0 / (cdual - k)
            if abs(k) < 1e-14:
                # quadratic: c1 c2 y (1 - cdual y) => lead -c1 c2 cdual
                axes.append(cube_mod.AxisPolynomial(-c1 * c2 * cdual, 0.0, rho, None))
            else:
                zinf = -1.0 / k
                lead = c1 * c2 * k * (k - cdual)
                axes.append(cube_mod.AxisPolynomial(lead, *sorted((0.0, rho)), zinf))
        self.A = tuple(axes)
        self.b = np.array([1.0, c1 * qd.gamma, c2 * qd.beta])

    def xi_of_sigma(self, sigmas):
        s = np.atleast_2d(np.asarray(sigmas, dtype=float))
        c1, c2 = self.qd.c
        x1 = s[:, 0] / (c2 - self.k1 * s[:, 0])
        x2 = s[:, 1] / (c1 - self.k2 * s[:, 1])
        out = np.column_stack([x1, x2])
        return out[0] if np.ndim(sigmas) == 1 else out

    def deltas(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        c1, c2 = self.qd.c
        return np.column_stack([(1 + self.k1 * xi[:, 0]) / c2,
                                (1 + self.k2 * xi[:, 1]) / c1])

    def identity_residual(self, sigmas):
        """|1 + c1 g xi_1 + c2 b xi_2 - c1 c2 D_1 D_2 Z| at the samples."""
        s = np.atleast_2d(np.asarray(sigmas, dtype=float))
        xi = np.atleast_2d(self.xi_of_sigma(s))
        c1, c2 = self.qd.c
        lhs = 1 + c1 * self.qd.gamma * xi[:, 0] + c2 * self.qd.beta * xi[:, 1]
        D = self.deltas(xi)
        rhs = c1 * c2 * D[:, 0] * D[:, 1] * self.qd.Z(s[:, 0], s[:, 1])
        return float(np.abs(lhs - rhs).max())

    def cube_ansatz(self) -> cube_mod.CubeAnsatz:
        return cube_mod.CubeAnsatz(self.b, self.A)

    def mu_cube_from_mu_quad(self, mu):
        """Chart identification: the ansatz momenta are the quotient momenta
        divided by c1 c2 (the ansatz labels then equal the quotient labels
        times the common scale 2/(c1 c2)^2)."""
        return np.asarray(mu, dtype=float) / (self.qd.c[0] * self.qd.c[1])


def segre_coordinates(qd: QuadData) -> SegreChart:
    """Coordinates and polynomials of the induced diagonal ansatz.  The
    ansatz's own labels equal the quotient labels times the common positive
    scale 2/(c1 c2)^2."""
    chart = SegreChart(qd)
    probe = np.array([[0.3, 0.6], [0.7, 0.2], [0.5, 0.5]])
    resid = chart.identity_residual(probe)
    if resid > 1e-10:
        raise SelfCheckFailure(f"Segre pencil identity residual {resid:.3e}")
    return chart


# ---------------------------------------------------------------------------
# extremality
# ---------------------------------------------------------------------------

class ExtremalReport:
    def __init__(self, tag, extremal, fit, em_constant, closed_form_extremal,
                 closed_form_em, calabi_quoted_form=None):
        self.tag = tag
        self.extremal = extremal
        self.fit = fit
        self.em_constant = em_constant
        self.closed_form_extremal = closed_form_extremal
        self.closed_form_em = closed_form_em
        self.calabi_quoted_form = calabi_quoted_form

    def as_dict(self):
        out = {
            "class": self.tag,
            "extremal": self.extremal,
            "fit_rel_scale": self.fit.rel_scale,
            "fit_rel_range": self.fit.rel_range,
            "extremal_affine": {"a0": float(self.fit.affine.a0),
                                "a": [float(v) for v in self.fit.affine.a]},
            "einstein_maxwell_constant_swp": self.em_constant,
            "closed_form_extremal": self.closed_form_extremal,
            "closed_form_em": self.closed_form_em,
        }
        if self.calabi_quoted_form is not None:
            out["calabi_profile_condition"] = self.calabi_quoted_form
        return out


def _em_closed_form(chart: SegreChart, tol=ZERO_TOL):
    """s_{w,4} = -mu_0 (A_1'' + A_2'') constant  <=>  3 p_i = (q_1+q_2) b_i
    on the cubic/quadratic coefficients p_i, q_i of A_i."""
    coeffs = []
    for ax in chart.A:
        c = ax.coeffs
        p = c[-4] if len(c) >= 4 else 0.0
        q = c[-3] if len(c) >= 3 else 0.0
        coeffs.append((p, q))
    qsum = coeffs[0][1] + coeffs[1][1]
    scale = max(1.0, max(abs(p) for p, _ in coeffs), abs(qsum))
    r1 = 3 * coeffs[0][0] - qsum * chart.b[1]
    r2 = 3 * coeffs[1][0] - qsum * chart.b[2]
    return abs(r1) < tol * scale and abs(r2) < tol * scale


def _calabi_quoted_form(chart: SegreChart, qd: QuadData, tol=1e-9):
    """The quoted profile condition deg B <= 2 and (x A(x))''(0) = -B''(0)
    in the induced normalization A = g^2 A_1((x-1)/g), B = g^2 A_2(-y/g).
    Reported for reference; the EM-constancy form decides extremality."""
    if abs(qd.beta) >= ZERO_TOL:
        return None
    g = qd.c[0] * qd.gamma
    if abs(g) < ZERO_TOL:
        return None
    A1, A2 = chart.A
    degB_ok = A2.degree <= 2 or abs(A2.coeffs[0]) < ZERO_TOL
    lhs = 2.0 * g * A1.deriv(-1.0 / g)
    rhs = -A2.deriv2(0.0)
    scale = max(1.0, abs(lhs), abs(rhs))
    return bool(degB_ok and abs(lhs - rhs) < tol * scale)


def extremal_check(qd: QuadData, n_grid=10, fit_tol=1e-8, em_tol=1e-6) -> ExtremalReport:
    """Extremality of the quotient metric.

    Numeric path: affine-fit of the scalar curvature over an interior grid
    (extremal iff the scale-relative residual is below fit_tol).  Closed
    form: products are always extremal; otherwise extremality is equivalent
    to constancy of s_{w,4} (oppositely oriented metric has CSC), decided
    on the induced ansatz coefficients.  Disagreement between the two paths
    raises SelfCheckFailure.  The report also carries the Einstein-Maxwell
    verdict (is s_{w,4} constant) from both paths.
    """
    tag = classify(qd)
    P, setup = quad_setup(qd)
    G = pot.levi_kahler_potential(P, check_positive=False)
    ss = np.linspace(0.06, 0.94, n_grid)
    s1, s2 = np.meshgrid(ss, ss, indexing="ij")
    sig = np.column_stack([s1.ravel(), s2.ravel()])
    mus = sigma_to_mu(qd, sig)
    svals = curv.abreu_scalar_batch(G, mus)
    fit = curv.affine_fit(mus, svals)
    extremal_numeric = fit.rel_scale < fit_tol

    chart = segre_coordinates(qd)
    closed_em = _em_closed_form(chart)
    closed_extremal = True if tag.tag == "Product" else closed_em

    # numeric EM verdict: s_{w,4} constancy via the ansatz closed form
    xi = chart.xi_of_sigma(sig)
    swp = cube_mod.wp_scalar_closed_form(chart.cube_ansatz(), xi)
    spread = float(swp.max() - swp.min())
    scale = max(float(np.abs(swp).max()), 1e-300)
    em_numeric = spread / scale < em_tol

    if extremal_numeric != closed_extremal:
        raise SelfCheckFailure(
            f"closed-form extremality {closed_extremal} but numeric fit "
            f"rel {fit.rel_scale:.3e} says {extremal_numeric}")
    if em_numeric != closed_em:
        raise SelfCheckFailure(
            f"closed-form EM {closed_em} but numeric s_w4 spread {spread:.3e}")

    quoted = _calabi_quoted_form(chart, qd)
    return ExtremalReport(tag.tag, extremal_numeric, fit, em_numeric,
                          closed_extremal, closed_em, calabi_quoted_form=quoted)
