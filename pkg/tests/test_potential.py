import math
from fractions import Fraction as F

import numpy as np
import pytest

from lkq import curvature as curv, levi, polytope as poly, potential as pot
from lkq.errors import BoundaryProximity, NotPositivePair

from conftest import interval, square, simplex2, trapezoid


def finite_diff_hess(G, mu, h):
    m = len(mu)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            ei = np.zeros(m); ei[i] = h
            ej = np.zeros(m); ej[j] = h
            out[i, j] = (pot.eval(G, mu + ei + ej) - pot.eval(G, mu + ei - ej)
                         - pot.eval(G, mu - ei + ej) + pot.eval(G, mu - ei - ej)) / (4 * h * h)
    return out


class TestConstruction:
    def test_interval_value(self):
        G = pot.levi_kahler_potential(interval())
        assert pot.eval(G, [0.5]) == pytest.approx(-0.5 * math.log(2), abs=1e-15)

    def test_products_match_guillemin(self, rng):
        for dims in ([1, 1], [2], [2, 1]):
            P = poly.product_of_simplices(dims)
            Glk = pot.levi_kahler_potential(P, check_positive=False)
            Ggl = pot.guillemin_potential(P)
            pts = P.interior_grid(4, inset=0.1)
            assert np.abs(np.atleast_1d(pot.eval(Glk, pts))
                          - np.atleast_1d(pot.eval(Ggl, pts))).max() < 1e-14

    def test_trapezoid_infinity_labels(self):
        P = trapezoid()
        G = pot.levi_kahler_potential(P, check_positive=False)
        # terms: mu1, 1-mu1, -1, mu2, 2-mu1-mu2, mu1-2
        inf1 = G.terms[2][0]
        inf2 = G.terms[5][0]
        assert (float(inf1.a0), tuple(map(float, inf1.a))) == (-1.0, (0.0, 0.0))
        assert (float(inf2.a0), tuple(map(float, inf2.a))) == (-2.0, (1.0, 0.0))

    def test_guillemin_differs_on_quad(self):
        P = trapezoid()
        Glk = pot.levi_kahler_potential(P, check_positive=False)
        Ggl = pot.guillemin_potential(P)
        assert len(Glk.terms) == 6 and len(Ggl.terms) == 4
        mu = np.array([0.4, 0.5])
        assert abs(pot.eval(Glk, mu) - pot.eval(Ggl, mu)) > 1e-3

    def test_not_positive_rejected(self):
        P = poly.LabelledPolytope(square().facets, grouping=((0, 2), (1, 3)))
        with pytest.raises(NotPositivePair):
            pot.levi_kahler_potential(P)


class TestDerivatives:
    def test_interval_hess(self):
        G = pot.levi_kahler_potential(interval())
        assert pot.hess(G, [0.5])[0, 0] == pytest.approx(2.0, abs=1e-14)

    def test_square_hess(self):
        G = pot.levi_kahler_potential(square())
        assert pot.hess(G, [0.5, 0.5]) == pytest.approx(np.diag([2.0, 2.0]), abs=1e-14)

    def test_hess_matches_finite_differences(self, rng):
        for P in (square(), trapezoid(), poly.product_of_simplices([2, 1])):
            G = pot.levi_kahler_potential(P, check_positive=False)
            pts = P.interior_grid(5, inset=0.08)
            diam = P.diameter()
            for mu in pts[:: max(1, len(pts) // 20)]:
                h = min(1e-4 * diam, 0.1 * float(G.min_abs_term(mu[None, :])[0]))
                fd = finite_diff_hess(G, mu, h)
                cf = pot.hess(G, mu)
                rel = np.abs(fd - cf).max() / np.abs(cf).max()
                assert rel < 1e-5

    def test_grad_matches_finite_differences(self):
        P = trapezoid()
        G = pot.levi_kahler_potential(P, check_positive=False)
        mu = np.array([0.35, 0.55])
        h = 1e-6
        fd = np.array([(pot.eval(G, mu + h * e) - pot.eval(G, mu - h * e)) / (2 * h)
                       for e in np.eye(2)])
        assert np.abs(fd - pot.grad(G, mu)).max() < 1e-8

    def test_positive_definite_on_grid(self):
        for P in (square(), trapezoid(), simplex2()):
            G = pot.levi_kahler_potential(P, check_positive=False)
            pts = P.interior_grid(10, inset=0.02)
            assert len(pts) >= 30
            eigs = np.linalg.eigvalsh(pot.hess_batch(G, pts))
            assert eigs.min() > 0

    def test_block_diagonal_for_rectangle(self):
        G = pot.levi_kahler_potential(poly.box([1, 2]), check_positive=False)
        H = pot.hess(G, [0.3, 1.1])
        assert H[0, 1] == 0.0

    def test_boundary_proximity(self):
        G = pot.levi_kahler_potential(square())
        with pytest.raises(BoundaryProximity):
            pot.eval(G, [1e-12, 0.5])


class TestMetric:
    def test_interval_metric(self):
        G = pot.levi_kahler_potential(interval())
        for mu in (0.2, 0.5, 0.77):
            assert pot.metric_H(G, [mu])[0, 0] == pytest.approx(2 * mu * (1 - mu), rel=1e-13)

    def test_square_center(self):
        G = pot.levi_kahler_potential(square())
        assert pot.metric_H(G, [0.5, 0.5]) == pytest.approx(np.diag([0.5, 0.5]), abs=1e-14)

    def test_spherical_pullback(self):
        # spherical case: Hess G equals the pullback sum dL_s^2 / 2 L_s of the
        # flat-cone metric, so H is its inverse
        for P in (simplex2(), square()):
            G = pot.levi_kahler_potential(P, check_positive=False)
            mu = P.barycenter() + 0.07
            A = P.normals_float()
            vals = P.label_values(mu[None, :])[0]
            hred = sum(np.outer(A[s], A[s]) / (2 * vals[s]) for s in range(P.n_facets))
            assert np.abs(pot.metric_H(G, mu) - np.linalg.inv(hred)).max() < 1e-12


class TestKahlerPotential:
    def test_interval_closed_form(self):
        H = pot.kahler_potential(interval(), basepoint=[0.5])
        for mu in (0.3, 0.6):
            assert H([mu]) == pytest.approx(-0.25 * math.log(mu * (1 - mu)), abs=1e-13)

    def test_legendre_identity(self, rng):
        for P in (square(), trapezoid()):
            H = pot.kahler_potential(P, check_positive=False)
            pts = P.interior_grid(5, inset=0.1)[:10]
            assert H.legendre_residual(pts) < 1e-9

    def test_default_basepoint(self):
        P = trapezoid()
        H = pot.kahler_potential(P, check_positive=False)
        assert H.basepoint == pytest.approx(P.barycenter())


class TestBoundaryCheck:
    def test_guillemin_simplex_passes(self):
        P = simplex2()
        rep = pot.abreu_boundary_check(pot.guillemin_potential(P), P)
        assert rep.passed
        assert rep.worst() < 1e-6

    def test_projective_cube_passes(self):
        from lkq import cube as cm
        ans = cm.CubeAnsatz([1.0, 0.25, -0.2],
                            [cm.AxisPolynomial(-2.0, 0.0, 1.0),
                             cm.AxisPolynomial(1.3, 0.0, 0.9, 2.2)])
        P = cm.labels_from_cube(ans)
        G = pot.levi_kahler_potential(P, check_positive=False)
        rep = pot.abreu_boundary_check(G, P)
        assert rep.passed

    def test_broken_weight_fails_on_facet(self):
        P = simplex2()
        terms = [(f, 0.5) for f in P.facets]
        terms[1] = (P.facets[1], 1.0 / 3.0)
        G = pot.SymplecticPotential(terms, P)
        rep = pot.abreu_boundary_check(G, P)
        assert not rep.passed
        assert not rep.facet_results[1].passed
        assert rep.facet_results[0].passed
