from fractions import Fraction as F

import numpy as np
import pytest

from lkq import cube as cm, curvature as curv, levi, polytope as poly, potential as pot
from lkq import quad as qm
from lkq.errors import PositivityFailure


def generic_orthotoric():
    return qm.QuadData(((F(1, 4), F(1, 2)), (F(-1, 3), F(1, 5))), (F(1), F(6, 5)))


def trapezoid_type():
    # beta = 0, gamma = 1/2: genuinely four-vertex quadrilateral
    return qm.QuadData(((F(0), F(1, 2)), (F(0), F(0))), (F(1), F(1)))


class TestQuadData:
    def test_zero_C_rectangle(self):
        qd = qm.QuadData(((0, 0), (0, 0)), (F(3, 2), F(2)))
        mus = qm.sigma_to_mu(qd, np.array([[0.3, 0.7]]))
        assert mus[0] == pytest.approx([0.45, 1.4])
        P, _ = qm.quad_setup(qd)
        verts = sorted(map(tuple, P.vertices_float()))
        assert np.abs(np.array(verts)
                      - [[0, 0], [0, 2], [1.5, 0], [1.5, 2]]).max() < 1e-12

    def test_degenerate_boundary_datum_rejected(self):
        # gamma = 1 with alpha = delta = beta = 0, c = (1,1) collapses a vertex
        with pytest.raises(PositivityFailure):
            qm.QuadData(((F(0), F(1)), (F(0), F(0))), (F(1), F(1)))

    def test_trapezoid_type_corners(self):
        qd = trapezoid_type()
        v = qm.corner_vertices(qd)
        assert np.abs(v - [[0, 0], [1, 0], [1, 0.5], [0, 1]]).max() < 1e-12

    def test_corner_hull_contains_samples(self, rng):
        qd = generic_orthotoric()
        P, _ = qm.quad_setup(qd)
        sig = rng.uniform(0, 1, size=(10000, 2))
        mus = qm.sigma_to_mu(qd, sig)
        assert P.label_values(mus).min() >= -1e-9


class TestRoundTripWithLevi:
    def test_chi_and_moment(self, rng):
        qd = generic_orthotoric()
        P, setup = qm.quad_setup(qd)
        sig2 = rng.uniform(0.02, 0.98, size=(200, 2))
        sig4 = np.column_stack([sig2[:, 0], 1 - sig2[:, 0], sig2[:, 1], 1 - sig2[:, 1]])
        chi_lin = levi.characteristic_batch(sig4, setup)
        chi_cl = qm.chi_closed(qd, sig2)
        assert np.abs(chi_lin - chi_cl).max() < 1e-10
        mu_lin = levi.moment_batch(sig4, setup)
        mu_cl = qm.sigma_to_mu(qd, sig2)
        assert np.abs(mu_lin - mu_cl).max() < 1e-10

    def test_toral_metric_closed_form(self, rng):
        qd = generic_orthotoric()
        P, _ = qm.quad_setup(qd)
        G = pot.levi_kahler_potential(P, check_positive=False)
        sig2 = rng.uniform(0.1, 0.9, size=(20, 2))
        mus = qm.sigma_to_mu(qd, sig2)
        H_lbl = pot.metric_H_batch(G, mus)
        H_cl = qm.toral_metric_closed(qd, sig2)
        assert np.abs(H_lbl - H_cl).max() / np.abs(H_lbl).max() < 1e-8


class TestClassify:
    def test_tags(self):
        assert qm.classify(qm.QuadData(((0, 0), (0, 0)), (1, 1))).tag == "Product"
        assert qm.classify(trapezoid_type()).tag == "Calabi"
        got = qm.classify(generic_orthotoric())
        assert got.tag == "Orthotoric"
        assert got.intersection_dims == (0, 0)

    def test_swap_invariance(self):
        for qd in (qm.QuadData(((0, 0), (0, 0)), (1, 1)), trapezoid_type(),
                   generic_orthotoric()):
            assert qm.classify(qd.swap_factors()).tag == qm.classify(qd).tag

    def test_float_threshold(self):
        qd = qm.QuadData(((0.0, 1e-13), (0.0, 0.0)), (1.0, 1.0))
        assert qm.classify(qd).tag == "Product"


class TestSegre:
    def test_zero_C_quadratic(self):
        qd = qm.QuadData(((0, 0), (0, 0)), (F(1), F(2)))
        chart = qm.segre_coordinates(qd)
        assert chart.A[0].degree == 2 and chart.A[1].degree == 2
        # Delta_1 = 1/c2, Delta_2 = 1/c1
        assert chart.deltas([[0.1, 0.1]])[0] == pytest.approx([0.5, 1.0])

    def test_generic_cubic(self):
        chart = qm.segre_coordinates(generic_orthotoric())
        assert chart.A[0].degree == 3 and chart.A[1].degree == 3

    def test_identity_residual(self, rng):
        chart = qm.segre_coordinates(generic_orthotoric())
        sig = rng.uniform(0, 1, size=(500, 2))
        assert chart.identity_residual(sig) < 1e-10

    def test_cube_labels_common_scale(self, rng):
        qd = generic_orthotoric()
        P, _ = qm.quad_setup(qd)
        chart = qm.segre_coordinates(qd)
        cp = cm.labels_from_cube(chart.cube_ansatz())
        mus = qm.sigma_to_mu(qd, rng.uniform(0.1, 0.9, size=(20, 2)))
        ratios = cp.label_values(chart.mu_cube_from_mu_quad(mus)) / P.label_values(mus)
        t = 2.0 / float(qd.c[0] * qd.c[1]) ** 2
        assert np.abs(ratios - t).max() < 1e-10

    def test_wp_affine_via_cube(self, rng):
        chart = qm.segre_coordinates(generic_orthotoric())
        ans = chart.cube_ansatz()
        sig = rng.uniform(0.05, 0.95, size=(50, 2))
        xi = chart.xi_of_sigma(sig)
        mus = ans.mu_from_xi(xi)
        fit = curv.affine_fit(mus, cm.wp_scalar_closed_form(ans, xi))
        assert fit.rel_scale < 1e-12

    def test_w_matches_mu0_normalization(self):
        # detect_projective_cube's w is proportional to 1 - gamma mu1/c2 - beta mu2/c1
        qd = generic_orthotoric()
        P, _ = qm.quad_setup(qd)
        w = poly.detect_projective_cube(P)
        c1, c2 = qd.c
        ref = np.array([1.0, -qd.gamma / c2, -qd.beta / c1])
        got = np.array([float(w.a0)] + [float(v) for v in w.a])
        assert np.linalg.matrix_rank(np.vstack([ref, got]), tol=1e-10) == 1


class TestExtremal:
    def test_product_extremal_constant(self):
        rep = qm.extremal_check(qm.QuadData(((0, 0), (0, 0)), (F(1), F(3, 2))))
        assert rep.tag == "Product"
        assert rep.extremal and rep.em_constant and rep.closed_form_extremal

    def test_extremal_calabi_member(self):
        # alpha = gamma/3 satisfies the constancy criterion (c1 = c2 = 1)
        qd = qm.QuadData(((F(1, 5), F(3, 5)), (F(0), F(0))), (F(1), F(1)))
        rep = qm.extremal_check(qd)
        assert rep.tag == "Calabi"
        assert rep.extremal and rep.closed_form_extremal and rep.em_constant

    def test_nonextremal_calabi_both_paths(self):
        qd = qm.QuadData(((F(1, 20), F(3, 5)), (F(0), F(0))), (F(1), F(1)))
        rep = qm.extremal_check(qd)
        assert rep.tag == "Calabi"
        assert not rep.extremal and not rep.closed_form_extremal
        assert rep.calabi_quoted_form is False     # violates the quoted profile form too

    def test_generic_orthotoric_not_extremal(self):
        rep = qm.extremal_check(generic_orthotoric())
        assert not rep.extremal and not rep.em_constant
        assert rep.fit.rel_scale > 1e-3

    def test_swp_affine_for_every_tested_data(self, rng):
        # s_{w,4} is affine for every quotient datum (fit through quad labels)
        for qd in (trapezoid_type(), generic_orthotoric()):
            P, _ = qm.quad_setup(qd)
            G = pot.levi_kahler_potential(P, check_positive=False)
            w = poly.detect_projective_cube(P)
            grid = P.interior_grid(7, inset=0.08)
            vals = curv.wp_scalar_batch(G, grid, w, 4.0)
            assert curv.affine_fit(grid, vals).rel_scale < 1e-8


class TestFloatPipeline:
    def test_float_quad_round_trip(self, rng):
        qd = qm.QuadData(((0.25, 0.5), (-1 / 3, 0.2)), (1.0, 1.2))
        assert not qd.is_exact
        P, setup = qm.quad_setup(qd)
        assert not P.is_exact
        sig2 = rng.uniform(0.05, 0.95, size=(100, 2))
        sig4 = np.column_stack([sig2[:, 0], 1 - sig2[:, 0], sig2[:, 1], 1 - sig2[:, 1]])
        mu_lin = levi.moment_batch(sig4, setup)
        mu_cl = qm.sigma_to_mu(qd, sig2)
        assert np.abs(mu_lin - mu_cl).max() < 1e-9
        assert qm.classify(qd).tag == "Orthotoric"
        assert qm.extremal_check(qd).extremal is False


class TestRandomFamilySweep:
    def test_closed_form_agreement_across_family(self):
        # rejection-sampled admissible rational data; extremal_check raises
        # SelfCheckFailure if the closed form and the numeric fit ever
        # disagree, so completing the sweep is the assertion
        rng = np.random.default_rng(2024)
        count = 0
        tags = set()
        while count < 20:
            C = [[F(int(rng.integers(-4, 5)), 10) for _ in range(2)] for _ in range(2)]
            c = (F(int(rng.integers(5, 16)), 10), F(int(rng.integers(5, 16)), 10))
            try:
                qd = qm.QuadData(C, c)
            except PositivityFailure:
                continue
            rep = qm.extremal_check(qd)
            tags.add(rep.tag)
            assert rep.extremal == rep.closed_form_extremal
            assert rep.em_constant == rep.closed_form_em
            count += 1
        assert "Orthotoric" in tags
