from fractions import Fraction as F

import numpy as np
import pytest

from lkq import curvature as curv, levi, polytope as poly, potential as pot, quad as qm
from lkq.errors import DegenerateSampleSet, NonpositiveWeight

from conftest import interval, square, trapezoid


def lk(P):
    return pot.levi_kahler_potential(P, check_positive=False)


class TestAbreuScalar:
    def test_interval_round(self):
        G = lk(interval())
        for mu in (0.2, 0.5, 0.8):
            assert abs(curv.abreu_scalar(G, [mu]) - 4.0) < 1e-8

    def test_square_round(self):
        G = lk(square())
        pts = square().interior_grid(6, inset=0.05)
        s = curv.abreu_scalar_batch(G, pts)
        assert np.abs(s - 8.0).max() < 1e-8

    def test_richardson_consistency(self):
        G = lk(trapezoid())
        pts = trapezoid().interior_grid(4, inset=0.15)
        s1 = curv.abreu_scalar_batch(G, pts, step_factor=1e-2)
        s2 = curv.abreu_scalar_batch(G, pts, step_factor=5e-3)
        assert np.abs((s1 - s2) / s1).max() < 1e-7


class TestLaplacian:
    def test_constant_is_zero(self):
        G = lk(square())
        assert curv.laplacian_affine(G, [0.4, 0.6], [0.0, 0.0]) == 0.0

    def test_interval_affine(self):
        G = lk(interval())
        for mu in (0.25, 0.5, 0.7):
            assert curv.laplacian_affine(G, [mu], [1.0]) == pytest.approx(4 * mu - 2, abs=1e-9)

    def test_divergence_oracle_on_grid(self):
        # independent oracle: differentiate H along a fine grid with numpy
        P = trapezoid()
        G = lk(P)
        a = np.array([0.7, -0.3])
        mu0 = np.array([0.45, 0.55])
        h = 1e-4
        lap = curv.laplacian_affine(G, mu0, a)
        total = 0.0
        for i in range(2):
            xs = np.linspace(-2 * h, 2 * h, 5)
            pts = mu0[None, :] + xs[:, None] * np.eye(2)[i][None, :]
            Hrow = pot.metric_H_batch(G, pts)[:, i, :] @ a
            total -= np.gradient(Hrow, xs)[2]
        assert abs(lap - total) / max(abs(lap), 1.0) < 1e-5


class TestWpScalar:
    def test_w_one_reduces_to_scalar(self):
        G = lk(square())
        mu = [0.3, 0.7]
        w = poly.AffineFunction(1.0, [0.0, 0.0])
        for p in (2.0, 4.0):
            assert curv.wp_scalar(G, mu, w, p) == pytest.approx(curv.abreu_scalar(G, mu), abs=1e-10)

    def test_nonpositive_weight(self):
        G = lk(square())
        with pytest.raises(NonpositiveWeight):
            curv.wp_scalar(G, [0.5, 0.5], poly.AffineFunction(-1.0, [0.0, 0.0]), 4.0)

    def test_quad_wp_affine(self):
        qd = qm.QuadData(((F(1, 4), F(1, 2)), (F(-1, 3), F(1, 5))), (F(1), F(6, 5)))
        P, _ = qm.quad_setup(qd)
        G = lk(P)
        w = poly.detect_projective_cube(P)
        grid = P.interior_grid(8, inset=0.08)
        vals = curv.wp_scalar_batch(G, grid, w, 4.0)
        fit = curv.affine_fit(grid, vals)
        assert fit.rel_scale < 1e-8


class TestAffineFit:
    def test_exact_affine(self, rng):
        pts = rng.uniform(0, 1, size=(20, 2))
        vals = 2.0 - 3.0 * pts[:, 0] + 0.5 * pts[:, 1]
        fit = curv.affine_fit(pts, vals)
        assert fit.max_residual < 1e-12
        assert float(fit.affine.a0) == pytest.approx(2.0)

    def test_nonextremal_large_residual(self):
        qd = qm.QuadData(((F(1, 4), F(1, 2)), (F(-1, 3), F(1, 5))), (F(1), F(6, 5)))
        P, _ = qm.quad_setup(qd)
        G = lk(P)
        grid = P.interior_grid(8, inset=0.08)
        fit = curv.affine_fit(grid, curv.abreu_scalar_batch(G, grid))
        assert fit.rel_scale > 1e-3

    def test_degenerate_sample_set(self):
        with pytest.raises(DegenerateSampleSet):
            curv.affine_fit([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
                            [1.0, 2.0, 3.0, 4.0])
        with pytest.raises(DegenerateSampleSet):
            curv.affine_fit([[0.0, 0.0], [1.0, 1.0]], [1.0, 2.0])


class TestFutaki:
    def test_constant_h_is_zero(self):
        P = trapezoid()
        G = lk(P)
        w = poly.detect_projective_cube(P)
        h = poly.AffineFunction(1.0, [0.0, 0.0])
        val = curv.futaki(P, P.grouping, G, w, 4.0, h, n_quad=2000)
        assert abs(val) < 1e-12

    def test_metric_independence(self):
        P = trapezoid()
        w = poly.detect_projective_cube(P)
        h = poly.AffineFunction(0.0, [1.0, 0.0])
        f1 = curv.futaki(P, P.grouping, lk(P), w, 4.0, h, n_quad=100000)
        f2 = curv.futaki(P, P.grouping, pot.guillemin_potential(P), w, 4.0, h, n_quad=100000)
        scale = max(abs(f1), abs(f2))
        assert scale > 1e-6            # the invariant is not trivially zero here
        assert abs(f1 - f2) / scale < 5e-3

    def test_symmetry_oracle(self):
        # centrally symmetric hexagon, even w, odd h: the invariant vanishes
        hexagon = poly.LabelledPolytope([
            poly.AffineFunction(F(1), (F(1), F(0))),
            poly.AffineFunction(F(1), (F(-1), F(0))),
            poly.AffineFunction(F(1), (F(0), F(1))),
            poly.AffineFunction(F(1), (F(0), F(-1))),
            poly.AffineFunction(F(1), (F(1), F(1))),
            poly.AffineFunction(F(1), (F(-1), F(-1))),
        ])
        G = pot.guillemin_potential(hexagon)
        w = poly.AffineFunction(1.0, [0.0, 0.0])
        h = poly.AffineFunction(0.0, [1.0, 0.0])
        val = curv.futaki(hexagon, None, G, w, 4.0, h, n_quad=40000)
        base = curv.futaki(hexagon, None, G, w, 4.0,
                           poly.AffineFunction(0.0, [1.0, 1.0]), n_quad=40000)
        assert abs(val) < 1e-4 * max(1.0, abs(base))


class TestCurvatureSamples:
    def test_batch_records(self):
        P = trapezoid()
        G = lk(P)
        w = poly.detect_projective_cube(P)
        pts = P.interior_grid(4, inset=0.15)[:5]
        recs = curv.curvature_samples(G, pts, w, 4.0)
        assert len(recs) == len(pts)
        for r in recs:
            assert r.w_value > 0 and np.isfinite(r.s)
            d = r.as_dict()
            assert set(d) == {"mu", "s", "s_wp", "w", "p"}

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(NonpositiveWeight):
            curv.CurvatureSample([0.5, 0.5], 8.0, 8.0, 0.0, 4.0)

    def test_quadrature_convergence(self):
        P = trapezoid()
        G = lk(P)
        w = poly.detect_projective_cube(P)
        h = poly.AffineFunction(0.0, [1.0, 0.0])
        vals = [curv.futaki(P, P.grouping, G, w, 4.0, h, n_quad=n)
                for n in (20000, 80000)]
        assert abs(vals[1] - vals[0]) / max(abs(vals[1]), 1e-12) < 2e-3


class TestCanonicalProducts:
    def test_scalar_constant_value(self):
        # canonical quotient metric of a product of standard simplices:
        # H = 2(diag mu - mu mu^T) per factor gives s = sum_i 2 m_i (m_i + 1)
        for dims in ([2], [3], [2, 1]):
            P = poly.product_of_simplices(dims)
            G = lk(P)
            pts = P.interior_grid({2: 8, 3: 6}[P.dim], inset=0.06)[:150]
            s = curv.abreu_scalar_batch(G, pts)
            want = sum(2 * m * (m + 1) for m in dims)
            assert np.ptp(s) < 1e-7 * want
            assert abs(s.mean() - want) < 1e-7 * want, dims
