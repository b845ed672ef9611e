"""Fibered toric metrics: the fibration polytope, the composition identity
for quotient potentials, and the constant-scalar-curvature family over a
weighted projective plane fibre.

A fibration datum is a grouped fibre polytope (coordinates x) plus base
factors (Delta_j, p_j, c_j) with <p_j, x> + c_j > 0 on the fibre.  The
total polytope keeps the fibre labels and homogenizes each base label:
its constant term is multiplied by <p_j, x> + c_j and its base momentum is
replaced by the lifted coordinate yhat_j = y_j (<p_j, x> + c_j).  When all
ingredients carry quotient potentials, the total quotient potential equals
the fibre potential plus the (<p_j,x>+c_j)-scaled base potentials exactly.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import curvature as curv
from . import levi as levi_mod
from . import polytope as poly
from . import potential as pot
from . import rational
from .errors import (
    ConditionFailure,
    IdentityFailure,
    InputError,
    NonConstantScalar,
    PositivityFailure,
    SignFailure,
)


class FibrationData:
    """Grouped fibre polytope plus base factors (polytope, p_j, c_j)."""

    def __init__(self, fibre: poly.LabelledPolytope, base_factors):
        if fibre.grouping is None:
            raise InputError("fibre polytope must be grouped")
        self.fibre = fibre
        self.base_factors = []
        for base, p, c in base_factors:
            if base.grouping is None:
                raise InputError("base polytopes must be grouped")
            p = tuple(p)
            if len(p) != fibre.dim:
                raise InputError("p_j must have the fibre dimension")
            self.base_factors.append((base, p, c))
        for _, p, c in self.base_factors:
            pa = poly.AffineFunction(c, p)
            vals = pa.values(fibre.vertices_float())
            if np.any(vals <= 0):
                raise PositivityFailure("<p_j, x> + c_j is not positive on the fibre polytope")

    @property
    def total_dim(self):
        return self.fibre.dim + sum(base.dim for base, _, _ in self.base_factors)


def hat_polytope(data: FibrationData) -> poly.LabelledPolytope:
    """Total polytope: fibre labels verbatim, base labels homogenized into
    the lifted coordinates; grouping = fibre factors + base factors."""
    lv = data.fibre.dim
    total = data.total_dim
    exact = data.fibre.is_exact and all(
        base.is_exact and all(rational.is_exact(v) for v in p) and rational.is_exact(c)
        for base, p, c in data.base_factors)
    zero = Fraction(0) if exact else 0.0
    facets = []
    grouping = []
    for f in data.fibre.facets:
        facets.append(poly.AffineFunction(f.a0, list(f.a) + [zero] * (total - lv)))
    for g in data.fibre.grouping:
        grouping.append(tuple(g))
    offset = lv
    for base, p, c in data.base_factors:
        db = base.dim
        base_start = len(facets)
        for f in base.facets:
            a = [zero] * total
            for k in range(lv):
                a[k] = f.a0 * p[k]
            for k in range(db):
                a[offset + k] = f.a[k]
            facets.append(poly.AffineFunction(f.a0 * c, a))
        for g in base.grouping:
            grouping.append(tuple(base_start + i for i in g))
        offset += db
    return poly.LabelledPolytope(facets, grouping)


def _interior_points_hat(hatP, n, seed):
    setup = levi_mod.setup_from_polytope(hatP)
    sig = levi_mod.dirichlet_sigma(setup.grouping, n, seed)
    sig = 0.9 * sig + 0.1 / np.array([len(g) for g in setup.grouping])[setup.factor_of][None, :]
    return levi_mod.moment_batch(sig, setup)


class ComposeReport:
    def __init__(self, max_dev_from_const, mean_offset, n_points):
        self.max_dev_from_const = max_dev_from_const
        self.mean_offset = mean_offset
        self.n_points = n_points

    @property
    def passed(self):
        return self.max_dev_from_const < 1e-9

    def as_dict(self):
        return {"max_dev_from_const": self.max_dev_from_const,
                "mean_offset": self.mean_offset, "n_points": self.n_points,
                "passed": self.passed}


def compose_check(data: FibrationData, n=100, seed=0) -> ComposeReport:
    """Verify G_total = G_fibre(x) + sum_j (<p_j,x>+c_j) G_j(yhat_j / (<p_j,x>+c_j))
    up to an additive constant at random interior points of the total polytope."""
    hatP = hat_polytope(data)
    G_tot = pot.levi_kahler_potential(hatP, check_positive=False)
    G_fib = pot.levi_kahler_potential(data.fibre, check_positive=False)
    base_pots = [pot.levi_kahler_potential(base, check_positive=False)
                 for base, _, _ in data.base_factors]
    pts = _interior_points_hat(hatP, n, seed)
    lv = data.fibre.dim
    lhs = np.atleast_1d(pot.eval(G_tot, pts))
    rhs = np.atleast_1d(pot.eval(G_fib, pts[:, :lv]))
    offset = lv
    for (base, p, c), Gj in zip(data.base_factors, base_pots):
        db = base.dim
        scale = np.asarray(poly.AffineFunction(c, p).values(pts[:, :lv]))
        y = pts[:, offset:offset + db] / scale[:, None]
        rhs = rhs + scale * np.atleast_1d(pot.eval(Gj, y))
        offset += db
    diff = lhs - rhs
    dev = float(np.abs(diff - diff.mean()).max())
    report = ComposeReport(dev, float(diff.mean()), n)
    if not report.passed:
        raise IdentityFailure(
            f"composition identity deviates by {dev:.3e}", report=report)
    return report


# ---------------------------------------------------------------------------
# the CSC family over the orthotoric fibre
# ---------------------------------------------------------------------------

class HFKGData:
    """Data (beta, eta, c) of the quartic profile
    F(x) = -c (x^2 - 1)(x - beta)(x - eta) with |beta| < 1, eta < -1, c > 0.

    F vanishes at -1, 1, beta; F/(x - eta) is positive on (beta, 1) and
    negative on (-1, beta) automatically for parameters in range.
    """

    def __init__(self, beta, eta, c):
        self.beta_raw, self.eta_raw, self.c_raw = beta, eta, c
        self.beta, self.eta, self.c = float(beta), float(eta), float(c)
        self.is_exact = all(rational.is_exact(v) for v in (beta, eta, c))
        if not abs(self.beta) < 1:
            raise InputError("|beta| < 1 required")
        if not self.eta < -1:
            raise InputError("eta < -1 required")
        if not self.c > 0:
            raise InputError("c > 0 required")
        # sample self-check of the root/sign pattern of F/p_c
        for x, sign in ((0.5 * (self.beta + 1), +1), (0.5 * (self.beta - 1), -1)):
            v = -self.c * (x ** 2 - 1) * (x - self.beta)
            if sign * v <= 0:
                raise SignFailure(f"F/p_c has the wrong sign at x = {x}")

    def F(self, x):
        return -self.c * (x ** 2 - 1) * (x - self.beta) * (x - self.eta)

    def scal_identity_value(self):
        """2 c (3 eta^2 - 2 beta eta - 1), exact on rationals: the scalar
        curvature the base must carry (the condition F''(eta) = -s)."""
        if self.is_exact:
            b, e, c = (Fraction(v) for v in (self.beta_raw, self.eta_raw, self.c_raw))
            return 2 * c * (3 * e * e - 2 * b * e - 1)
        return 2 * self.c * (3 * self.eta ** 2 - 2 * self.beta * self.eta - 1)


def hfkg_fibre(data: HFKGData) -> poly.LabelledPolytope:
    """Labelled simplex of the fibre in (sigma_1, sigma_2) = (xi_1 + xi_2,
    xi_1 xi_2): labels

        L_{-1} = (sigma_1 + sigma_2 + 1) / (c (1 + beta))
        L_{+1} = (-sigma_1 + sigma_2 + 1) / (c (1 - beta))
        L_beta = 2 (beta sigma_1 - sigma_2 - beta^2) / (c (1 - beta^2))

    normalized so that c_r (F/p_c)'(r) = 2 at each root r of F/p_c."""
    if data.is_exact:
        b = Fraction(data.beta_raw)
        c = Fraction(data.c_raw)
        one = Fraction(1)
    else:
        b, c, one = data.beta, data.c, 1.0
    km1 = one / (c * (1 + b))
    kp1 = one / (c * (1 - b))
    kb = 2 * one / (c * (1 - b * b))
    facets = [
        poly.AffineFunction(km1, (km1, km1)),
        poly.AffineFunction(kp1, (-kp1, kp1)),
        poly.AffineFunction(-kb * b * b, (kb * b, -kb)),
    ]
    P = poly.LabelledPolytope(facets, grouping=((0, 1, 2),))
    # corners of the orthotoric box land on the simplex vertices
    bf, cf = float(b), float(c)
    corners = [(-1.0, bf), (-1.0, 1.0), (bf, 1.0)]
    for x1, x2 in corners:
        mu = np.array([x1 + x2, x1 * x2])
        vals = P.label_values(mu[None, :])[0]
        if np.sum(np.abs(vals) < 1e-9) != 2 or np.any(vals < -1e-9):
            raise SignFailure(f"box corner {(x1, x2)} does not map to a simplex vertex")
    return P


def base_interval(s=4, exact=True):
    """Base factor: interval [0, 4/s] with standard labels (the quotient
    metric of [0, kappa] has scalar curvature 4/kappa)."""
    if exact:
        kappa = Fraction(4) / Fraction(s)
    else:
        kappa = 4.0 / float(s)
    return poly.box([kappa], exact=exact)


def csc_fibration(data: HFKGData, s=4) -> FibrationData:
    """The CSC fibration: hfkg fibre with base interval and
    (p, c) = ((-eta, 1), eta^2), from (eta - xi_1)(eta - xi_2) =
    eta^2 - eta sigma_1 + sigma_2."""
    fibre = hfkg_fibre(data)
    if data.is_exact:
        eta = Fraction(data.eta_raw)
        p = (-eta, Fraction(1))
        cj = eta * eta
    else:
        p = (-data.eta, 1.0)
        cj = data.eta ** 2
    base = base_interval(s, exact=data.is_exact)
    return FibrationData(fibre, [(base, p, cj)])


class CSCReport:
    def __init__(self, s, identity_exact, constant_value, rel_spread, n_grid):
        self.s = s
        self.identity_exact = identity_exact
        self.constant_value = constant_value
        self.rel_spread = rel_spread
        self.n_grid = n_grid

    @property
    def passed(self):
        return self.identity_exact and self.rel_spread < 1e-5

    def as_dict(self):
        return {"base_scalar": float(self.s), "identity_exact": self.identity_exact,
                "total_scalar_constant": self.constant_value,
                "rel_spread": self.rel_spread, "n_grid": self.n_grid,
                "passed": self.passed}


def csc_certify(data: HFKGData, base_scal=4, n_grid=1000, rel_tol=1e-5,
                seed=0) -> CSCReport:
    """Certify the constant-scalar-curvature member.

    (a) the identity 2c(3 eta^2 - 2 beta eta - 1) = s, exactly on rationals;
    (b) the total polytope of the fibration is built (base interval
        [0, 4/s], (p, c) = ((-eta, 1), eta^2));
    (c) the Abreu scalar of its quotient potential is constant on an
        interior grid to rel_tol (relative spread).
    """
    if float(base_scal) <= 0:
        raise InputError("base scalar curvature must be positive")
    want = data.scal_identity_value()
    if data.is_exact and rational.is_exact(base_scal):
        exact_ok = Fraction(want) == Fraction(base_scal)
    else:
        exact_ok = abs(float(want) - float(base_scal)) < 1e-12 * max(1.0, abs(float(want)))
    if not exact_ok:
        raise ConditionFailure(
            f"F''(eta) + s != 0: 2c(3 eta^2 - 2 beta eta - 1) = {float(want)} "
            f"but s = {float(base_scal)}")
    fib = csc_fibration(data, s=base_scal)
    hatP = hat_polytope(fib)
    G = pot.levi_kahler_potential(hatP, check_positive=False)
    pts = _interior_points_hat(hatP, n_grid, seed)
    vals = curv.abreu_scalar_batch(G, pts)
    spread = float(vals.max() - vals.min())
    mean = float(vals.mean())
    rel = spread / max(abs(mean), 1e-300)
    report = CSCReport(float(base_scal), True, mean, rel, len(pts))
    if rel >= rel_tol:
        raise NonConstantScalar(
            f"total scalar spread {rel:.3e} exceeds {rel_tol:.1e}", report=report)
    return report
