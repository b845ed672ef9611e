from fractions import Fraction as F

import numpy as np
import pytest

from lkq import polytope as poly
from lkq.errors import GroupingMismatch, RedundantFacet, Unbounded

from conftest import interval, square, simplex2, trapezoid


def pyramid_over_square():
    # apex (0,0,1) lies on the four slanted facets
    return poly.LabelledPolytope([
        poly.AffineFunction(F(0), (F(0), F(0), F(1))),
        poly.AffineFunction(F(1), (F(-1), F(0), F(-1))),
        poly.AffineFunction(F(1), (F(1), F(0), F(-1))),
        poly.AffineFunction(F(1), (F(0), F(-1), F(-1))),
        poly.AffineFunction(F(1), (F(0), F(1), F(-1))),
    ])


class TestFaceLattice:
    def test_square_counts(self):
        lat = square().face_lattice()
        assert lat.n_vertices == 4
        by_dim = lat.faces_by_dim()
        assert len(by_dim[0]) == 4
        assert len(by_dim[1]) == 4
        assert by_dim[2] == [frozenset()]

    def test_simplex_counts(self):
        lat = simplex2().face_lattice()
        assert lat.n_vertices == 3
        assert len(lat.faces_by_dim()[1]) == 3

    def test_trapezoid_vertices(self):
        lat = trapezoid().face_lattice()
        pts = sorted(tuple(float(x) for x in p) for _, p in lat.vertices)
        assert pts == [(0.0, 0.0), (0.0, 2.0), (1.0, 0.0), (1.0, 1.0)]

    def test_involution_stable(self):
        # recomputing active sets from the vertex coordinates reproduces the lattice
        for P in (square(), trapezoid(), poly.product_of_simplices([2, 1])):
            lat = P.face_lattice()
            rebuilt = set()
            for _, p in lat.vertices:
                vals = [f.value(p) for f in P.facets]
                rebuilt.add(frozenset(i for i, v in enumerate(vals) if v == 0))
            assert rebuilt == set(lat.vertex_active_sets())

    def test_face_nonempty(self):
        lat = square().face_lattice()
        assert lat.face_nonempty({0})
        assert lat.face_nonempty({0, 2})
        assert not lat.face_nonempty({0, 1})

    def test_unbounded_rejected(self):
        with pytest.raises(Unbounded):
            poly.LabelledPolytope([
                poly.AffineFunction(F(0), (F(1), F(0))),
                poly.AffineFunction(F(0), (F(0), F(1))),
                poly.AffineFunction(F(1), (F(0), F(-1))),
            ])

    def test_float_path_matches_exact(self):
        Pe = trapezoid()
        Pf = poly.LabelledPolytope([(float(f.a0), [float(v) for v in f.a])
                                    for f in Pe.facets], Pe.grouping)
        assert not Pf.is_exact
        assert Pf.face_lattice().vertex_active_sets() == Pe.face_lattice().vertex_active_sets()


class TestSimple:
    def test_products_simple(self):
        for dims in ([1], [2], [1, 1], [2, 1], [1, 1, 1]):
            assert poly.is_simple(poly.product_of_simplices(dims))

    def test_redundant_facet_rejected(self):
        facets = [f for f in square().facets]
        facets.append(poly.AffineFunction(F(0), (F(2), F(0))))  # doubled first facet
        with pytest.raises(RedundantFacet):
            poly.LabelledPolytope(facets)

    def test_pyramid_not_simple(self):
        assert not poly.is_simple(pyramid_over_square())


class TestProductMatch:
    def test_square_two_factors(self):
        assert poly.matches_product_of_simplices(square())

    def test_simplex_one_factor(self):
        assert poly.matches_product_of_simplices(simplex2())

    def test_pentagon_grouping_mismatch(self):
        pent = poly.LabelledPolytope([
            poly.AffineFunction(F(0), (F(1), F(0))),
            poly.AffineFunction(F(0), (F(0), F(1))),
            poly.AffineFunction(F(3), (F(-1), F(0))),
            poly.AffineFunction(F(3), (F(0), F(-1))),
            poly.AffineFunction(F(5), (F(-1), F(-1))),
        ])
        with pytest.raises(GroupingMismatch):
            poly.matches_product_of_simplices(pent, ((0, 1), (2, 3, 4)))

    def test_wrong_grouping_is_negative(self):
        P = poly.box([1, 1])
        # pair coordinate facets with each other instead of their opposites
        bad = poly.LabelledPolytope(P.facets, grouping=((0, 2), (1, 3)))
        assert not poly.matches_product_of_simplices(bad)

    def test_all_patterns_up_to_dim_4(self):
        patterns = []
        for m in range(1, 5):
            for split in _compositions(m):
                patterns.append(split)
        for dims in patterns:
            P = poly.product_of_simplices(dims)
            assert poly.matches_product_of_simplices(P), dims


def _compositions(m):
    # unordered factor-size patterns (partitions)
    out = set()

    def rec(rest, biggest, acc):
        if rest == 0:
            out.add(tuple(acc))
            return
        for k in range(1, min(rest, biggest) + 1):
            rec(rest - k, k, acc + [k])

    rec(m, m, [])
    return sorted(out)


class TestProjectiveCube:
    def test_box_gives_constant(self):
        w = poly.detect_projective_cube(poly.box([1, 2]))
        assert float(w.a0) == 1.0
        assert all(float(v) == 0 for v in w.a)

    def test_quadrilateral_always_detected(self):
        w = poly.detect_projective_cube(trapezoid())
        assert w is not None
        vv = w.values(trapezoid().vertices_float())
        assert vv.min() == pytest.approx(1.0, abs=1e-12)
        assert (vv > 0).all()

    def test_pencil_membership_exact(self):
        from lkq import rational
        from lkq.cli import load_polytope
        from conftest import fixture_path
        cube3 = load_polytope(fixture_path("cube3_projective.json"))
        for P in (trapezoid(), cube3):
            w = poly.detect_projective_cube(P)
            assert w.is_exact
            for g in P.grouping:
                rows = [[F(w.a0)] + [F(v) for v in w.a]]
                for s in g:
                    rows.append([F(P.facets[s].a0)] + [F(v) for v in P.facets[s].a])
                assert rational.rank(rows) <= 2

    def test_skew_cuboid_gives_none(self):
        cub = poly.LabelledPolytope([
            poly.AffineFunction(F(0), (F(1), F(0), F(0))),
            poly.AffineFunction(F(1), (F(-1), F(0), F(0))),
            poly.AffineFunction(F(0), (F(0), F(1), F(0))),
            poly.AffineFunction(F(1), (F(0), F(-1), F(1, 5))),
            poly.AffineFunction(F(0), (F(0), F(0), F(1))),
            poly.AffineFunction(F(1), (F(1, 4), F(0), F(-1))),
        ], grouping=((0, 1), (2, 3), (4, 5)))
        assert poly.detect_projective_cube(cub) is None

    def test_interval_constant(self):
        assert float(poly.detect_projective_cube(interval()).a0) == 1.0


class TestStabilizerOrder:
    def test_unimodular_simplex(self):
        P = simplex2()
        lat = P.face_lattice()
        for active, _ in lat.vertices:
            assert poly.stabilizer_order(P, active) == 1

    def test_interval_weight_two(self):
        P = poly.LabelledPolytope([
            poly.AffineFunction(F(0), (F(1),)),
            poly.AffineFunction(F(2), (F(-2),)),
        ])
        assert poly.stabilizer_order(P, [1]) == 2
        assert poly.stabilizer_order(P, [0]) == 1

    def test_det_two_vertex(self):
        P = poly.LabelledPolytope([
            poly.AffineFunction(F(0), (F(1), F(1))),
            poly.AffineFunction(F(0), (F(1), F(-1))),
            poly.AffineFunction(F(1), (F(-1), F(0))),
        ])
        assert poly.stabilizer_order(P, [0, 1]) == 2

    def test_nonintegral_rejected(self):
        P = trapezoid()
        bad = poly.LabelledPolytope([
            poly.AffineFunction(F(0), (F(1, 2), F(0))),
            poly.AffineFunction(F(1), (F(-1), F(0))),
            poly.AffineFunction(F(0), (F(0), F(1))),
            poly.AffineFunction(F(1), (F(0), F(-1))),
        ])
        from lkq.errors import NonIntegral
        with pytest.raises(NonIntegral):
            poly.stabilizer_order(bad, [0])
        assert poly.stabilizer_order(P, [0, 2]) == 1

    def test_unimodular_invariance(self, rng):
        # conjugating all normals by a random GL(m, Z) element preserves orders
        P = trapezoid()
        for _ in range(8):
            while True:
                U = rng.integers(-3, 4, size=(2, 2))
                if abs(round(np.linalg.det(U))) == 1:
                    break
            facets = [poly.AffineFunction(f.a0, tuple(F(int(x)) for x in (U @ [int(v) for v in f.a])))
                      for f in P.facets]
            Q = poly.LabelledPolytope(facets)
            for active, _ in P.face_lattice().vertices:
                assert poly.stabilizer_order(P, active) == poly.stabilizer_order(Q, active)


class TestSmithNormalForm:
    def test_known_forms(self):
        from lkq.rational import smith_normal_form
        assert smith_normal_form([[2, 0], [0, 3]]) == [1, 6]
        assert smith_normal_form([[1, 0], [0, 1]]) == [1, 1]
        assert smith_normal_form([[-2]]) == [2]
        assert smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]]) == [2, 2, 156]
