"""Labelled polytopes: exact combinatorics of affine facet labels.

A labelled polytope is the data (Delta, L_s) of a bounded simple convex
polytope together with one affine defining function per facet.  The labels
are metric data, not just geometry, so redundant facets are an input error
and are never dropped silently.  Rational inputs run through exact
arithmetic; float inputs use the tolerance EPS_COMB for every feasibility
and rank decision.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from . import rational
from .errors import (
    Degenerate,
    GroupingMismatch,
    NonIntegral,
    NotCuboid,
    RedundantFacet,
    Unbounded,
)

EPS_COMB = 1e-9


class AffineFunction:
    """An affine function a0 + <a, mu> on the momentum chart R^m.

    The linear part `a` is the inward normal when the function labels a
    facet.  Coefficients may be Fractions (exact) or floats.
    """

    __slots__ = ("a0", "a")

    def __init__(self, a0, a):
        self.a0 = a0
        self.a = tuple(a)

    @property
    def dim(self):
        return len(self.a)

    @property
    def is_exact(self):
        return rational.is_exact(self.a0) and all(rational.is_exact(v) for v in self.a)

    def value(self, mu):
        acc = self.a0
        for c, x in zip(self.a, mu):
            acc = acc + c * x
        return acc

    def __call__(self, mu):
        return self.value(mu)

    def values(self, mus):
        """Vectorized evaluation on an (n, m) float array."""
        mus = np.asarray(mus, dtype=float)
        return float(self.a0) + mus @ self.float_linear()

    def float_linear(self):
        return np.array([float(v) for v in self.a])

    def as_floats(self):
        return float(self.a0), self.float_linear()

    def __neg__(self):
        return AffineFunction(-self.a0, tuple(-v for v in self.a))

    def __add__(self, other):
        return AffineFunction(self.a0 + other.a0,
                              tuple(x + y for x, y in zip(self.a, other.a)))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, t):
        return AffineFunction(t * self.a0, tuple(t * v for v in self.a))

    def __repr__(self):
        return f"AffineFunction({self.a0!r}, {self.a!r})"

    def __eq__(self, other):
        return isinstance(other, AffineFunction) and self.a0 == other.a0 and self.a == other.a

    def __hash__(self):
        return hash((self.a0, self.a))


def affine_sum(funcs):
    acc = funcs[0]
    for f in funcs[1:]:
        acc = acc + f
    return acc


class FaceLattice:
    """Face poset of a labelled polytope over the facet index set.

    `faces` holds the canonical active set S_mu of every nonempty face
    (including the empty set for the whole polytope); the formal empty face
    is kept implicitly.  `vertices` pairs each vertex's active set with its
    coordinates.
    """

    def __init__(self, vertices, faces, dim, normal_rank):
        self.vertices = tuple(vertices)
        self.faces = frozenset(faces)
        self.dim = dim
        self._normal_rank = normal_rank  # callable: frozenset -> rank of normals

    @property
    def n_vertices(self):
        return len(self.vertices)

    def face_nonempty(self, subset):
        """Whether F_{S'} is nonempty, i.e. S' lies under some vertex active set."""
        s = frozenset(subset)
        return any(s <= active for active, _ in self.vertices)

    def face_dim(self, subset):
        return self.dim - self._normal_rank(frozenset(subset))

    def faces_by_dim(self):
        out = {}
        for f in self.faces:
            out.setdefault(self.face_dim(f), []).append(f)
        return out

    def vertex_active_sets(self):
        return frozenset(active for active, _ in self.vertices)


class LabelledPolytope:
    """Bounded simple-ish convex polytope with affine facet labels.

    Parameters
    ----------
    facets : sequence of AffineFunction (or (a0, a) pairs)
    grouping : optional partition of facet indices into simplex factors,
        each factor listing the indices of its m_i + 1 facets.

    Construction validates boundedness, nonempty interior, and facet
    nonredundancy (raising Unbounded / Degenerate / RedundantFacet).
    """

    def __init__(self, facets, grouping=None):
        fs = []
        for f in facets:
            if not isinstance(f, AffineFunction):
                f = AffineFunction(f[0], f[1])
            fs.append(f)
        if not fs:
            raise Degenerate("no facets")
        self.facets = tuple(fs)
        self.dim = fs[0].dim
        if any(f.dim != self.dim for f in fs):
            raise Degenerate("inconsistent facet dimensions")
        self.is_exact = all(f.is_exact for f in fs)
        if grouping is not None:
            grouping = tuple(tuple(g) for g in grouping)
            flat = sorted(i for g in grouping for i in g)
            if flat != list(range(len(fs))):
                raise GroupingMismatch("grouping is not a partition of the facet set")
            if any(len(g) < 2 for g in grouping):
                raise GroupingMismatch("every factor needs at least 2 facets")
            if sum(len(g) - 1 for g in grouping) != self.dim:
                raise GroupingMismatch(
                    f"factor sizes {[len(g) for g in grouping]} inconsistent with dim {self.dim}")
        self.grouping = grouping
        self._lattice = None
        self._validate()

    # -- basic data ---------------------------------------------------------

    @property
    def n_facets(self):
        return len(self.facets)

    def normals_float(self):
        return np.array([f.float_linear() for f in self.facets])

    def constants_float(self):
        return np.array([float(f.a0) for f in self.facets])

    def label_values(self, mus):
        """All label values on an (n, m) array -> (n, n_facets)."""
        mus = np.atleast_2d(np.asarray(mus, dtype=float))
        return self.constants_float()[None, :] + mus @ self.normals_float().T

    def vertices_float(self):
        return np.array([[float(x) for x in p] for _, p in self.face_lattice().vertices])

    def diameter(self):
        v = self.vertices_float()
        if len(v) < 2:
            return 1.0
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def barycenter(self):
        return self.vertices_float().mean(axis=0)

    def interior_grid(self, n_per_dim, inset=0.05):
        """Axis grid over the bounding box, kept where all labels exceed
        inset * their maximum over the polytope."""
        verts = self.vertices_float()
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        axes = [np.linspace(lo[i], hi[i], n_per_dim + 2)[1:-1] for i in range(self.dim)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        vals = self.label_values(grid)
        vmax = self.label_values(verts).max(axis=0)
        keep = (vals >= inset * vmax[None, :]).all(axis=1)
        return grid[keep]

    def scale_floats(self):
        """Per-facet scale: max of the label over the polytope (for tolerances)."""
        return np.abs(self.label_values(self.vertices_float())).max(axis=0)

    # -- validation + lattice -------------------------------------------------

    def _validate(self):
        lat = self.face_lattice()
        verts = self.vertices_float()
        if len(verts) == 0:
            raise Degenerate("no vertices")
        if np.linalg.matrix_rank(verts - verts[0], tol=EPS_COMB) < self.dim:
            raise Degenerate("polytope has empty interior")
        bary = verts.mean(axis=0)
        vals = self.label_values(bary[None, :])[0]
        scale = np.maximum(self.scale_floats(), 1.0)
        if np.any(vals <= 0):
            raise Degenerate("vertex barycenter not interior")
        # nonredundancy: each facet's vertex barycenter is interior to F_s only
        for s in range(self.n_facets):
            on_s = [p for active, p in lat.vertices if s in active]
            if len(on_s) < self.dim:
                raise RedundantFacet(f"facet {s} supports no (m-1)-face")
            b = np.array([[float(x) for x in p] for p in on_s]).mean(axis=0)
            vb = self.label_values(b[None, :])[0]
            others = np.delete(vb, s)
            other_scale = np.delete(scale, s)
            if np.any(others <= EPS_COMB * other_scale):
                raise RedundantFacet(f"facet {s} is redundant (its face lies inside another facet)")

    def face_lattice(self):
        if self._lattice is None:
            self._lattice = _face_lattice(self)
        return self._lattice


# ---------------------------------------------------------------------------
# face lattice / vertex enumeration
# ---------------------------------------------------------------------------

def _check_bounded(P: LabelledPolytope):
    """Recession-cone test: a nonzero v with <a_s, v> >= 0 for all s means
    a recession ray.  Candidate extreme rays have m-1 active independent
    constraints; a recession line exists iff the normals do not span."""
    m = P.dim
    if P.is_exact:
        rows = [[Fraction(v) for v in f.a] for f in P.facets]
        if rational.rank(rows) < m:
            raise Unbounded("facet normals do not span; recession line exists")
        if m == 1:
            signs = [f.a[0] for f in P.facets]
            if all(s >= 0 for s in signs) or all(s <= 0 for s in signs):
                raise Unbounded("recession ray detected")
            return
        for subset in itertools.combinations(range(P.n_facets), m - 1):
            sub = [rows[i] for i in subset]
            if rational.rank(sub) < m - 1:
                continue
            for v in rational.nullspace(sub, m):
                dots = [sum(c * x for c, x in zip(row, v)) for row in rows]
                if all(d >= 0 for d in dots) or all(d <= 0 for d in dots):
                    raise Unbounded("recession ray detected")
    else:
        A = P.normals_float()
        if np.linalg.matrix_rank(A, tol=EPS_COMB) < m:
            raise Unbounded("facet normals do not span; recession line exists")
        if m == 1:
            if np.all(A >= -EPS_COMB) or np.all(A <= EPS_COMB):
                raise Unbounded("recession ray detected")
            return
        norms = np.linalg.norm(A, axis=1)
        for subset in itertools.combinations(range(P.n_facets), m - 1):
            sub = A[list(subset)]
            u, sv, vt = np.linalg.svd(sub)
            if sv.min() < EPS_COMB * max(sv.max(), 1.0):
                continue
            v = vt[-1]
            dots = A @ v
            tol = EPS_COMB * norms
            if np.all(dots >= -tol) or np.all(dots <= tol):
                raise Unbounded("recession ray detected")


def _vertices_exact(P: LabelledPolytope):
    m = P.dim
    consts = [Fraction(f.a0) for f in P.facets]
    rows = [[Fraction(v) for v in f.a] for f in P.facets]
    found = {}
    for subset in itertools.combinations(range(P.n_facets), m):
        a = [rows[i] for i in subset]
        b = [-consts[i] for i in subset]
        x = rational.solve_square(a, b)
        if x is None:
            continue
        vals = [c + sum(r * xv for r, xv in zip(row, x)) for c, row in zip(consts, rows)]
        if any(v < 0 for v in vals):
            continue
        active = frozenset(i for i, v in enumerate(vals) if v == 0)
        found[tuple(x)] = active
    return [(act, pt) for pt, act in found.items()]


def _vertices_float(P: LabelledPolytope):
    m = P.dim
    consts = P.constants_float()
    A = P.normals_float()
    scale = np.maximum(np.abs(consts), np.linalg.norm(A, axis=1))
    pts, actives = [], []
    for subset in itertools.combinations(range(P.n_facets), m):
        sub = A[list(subset)]
        try:
            cond = np.linalg.cond(sub)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(cond) or cond > 1e12:
            continue
        x = np.linalg.solve(sub, -consts[list(subset)])
        vals = consts + A @ x
        tol = EPS_COMB * np.maximum(scale, 1.0) * max(1.0, np.abs(x).max())
        if np.any(vals < -tol):
            continue
        active = frozenset(int(i) for i in np.nonzero(np.abs(vals) <= tol)[0])
        pts.append(x)
        actives.append(active)
    # dedupe by coordinates; an intermediate gap is ambiguous geometry
    verts = []
    for x, act in zip(pts, actives):
        dup = None
        for k, (_, y) in enumerate(verts):
            d = np.linalg.norm(x - np.array(y))
            scale = max(1.0, np.abs(x).max())
            if d <= 1e-9 * scale:
                dup = k
                break
            if d <= 1e-7 * scale:
                raise Degenerate("ambiguously close vertices; refine input or use rationals")
        if dup is None:
            verts.append((act, tuple(x)))
        else:
            old_act, y = verts[dup]
            verts[dup] = (old_act | act, y)
    return verts


def _face_lattice(P: LabelledPolytope) -> FaceLattice:
    _check_bounded(P)
    verts = _vertices_exact(P) if P.is_exact else _vertices_float(P)
    if not verts:
        raise Degenerate("no vertices; polytope empty or lower dimensional")
    # faces = closure of vertex active sets under intersection (plus the top face)
    sets = {active for active, _ in verts}
    sets.add(frozenset())
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(sets), 2):
            c = a & b
            if c not in sets:
                sets.add(c)
                changed = True

    if P.is_exact:
        rows = [[Fraction(v) for v in f.a] for f in P.facets]

        def normal_rank(subset):
            if not subset:
                return 0
            return rational.rank([rows[i] for i in sorted(subset)])
    else:
        A = P.normals_float()

        def normal_rank(subset):
            if not subset:
                return 0
            return int(np.linalg.matrix_rank(A[sorted(subset)], tol=EPS_COMB))

    return FaceLattice(verts, sets, P.dim, normal_rank)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def face_lattice(P: LabelledPolytope) -> FaceLattice:
    """All nonempty faces of P, with vertices enumerated by m-subset
    intersection of facet hyperplanes plus a feasibility check."""
    return P.face_lattice()


def is_simple(P: LabelledPolytope) -> bool:
    """True iff every vertex lies on exactly m facets (with independent normals)."""
    lat = P.face_lattice()
    return all(len(active) == P.dim for active, _ in lat.vertices)


def resolve_grouping(P, grouping):
    if grouping is None:
        grouping = P.grouping
    if grouping is None:
        raise GroupingMismatch("no grouping given and polytope is ungrouped")
    grouping = tuple(tuple(g) for g in grouping)
    flat = sorted(i for g in grouping for i in g)
    if flat != list(range(P.n_facets)):
        raise GroupingMismatch("grouping is not a partition of the facet set")
    if sum(len(g) - 1 for g in grouping) != P.dim:
        raise GroupingMismatch(
            f"factor sizes {[len(g) for g in grouping]} inconsistent with dim {P.dim}")
    return grouping


def matches_product_of_simplices(P: LabelledPolytope, grouping=None) -> bool:
    """Face-lattice isomorphism (over the facet set) with the product of
    simplices given by the grouping: a face is nonempty exactly when it
    omits at least one facet from every factor."""
    grouping = resolve_grouping(P, grouping)
    lat = P.face_lattice()
    expected = set()
    full = frozenset(range(P.n_facets))
    for choice in itertools.product(*[list(g) for g in grouping]):
        expected.add(full - frozenset(choice))
    return lat.vertex_active_sets() == frozenset(expected)


def detect_projective_cube(P: LabelledPolytope, grouping=None):
    """The affine function w spanning the common pencil of opposite facets.

    Returns w positive on the interior, normalized so its minimum over the
    vertices is 1, or None when the intersection of the pencil spans is
    zero.  Requires cuboid combinatorics (all factors of size 2).
    """
    grouping = resolve_grouping(P, grouping)
    if any(len(g) != 2 for g in grouping):
        raise NotCuboid("grouping must pair opposite facets (all factors of size 2)")
    if not matches_product_of_simplices(P, grouping):
        raise NotCuboid("polytope does not have cuboid combinatorics")
    m = P.dim

    def label_vec(idx):
        f = P.facets[idx]
        return [f.a0] + list(f.a)

    if P.is_exact:
        vecs = [[Fraction(v) for v in label_vec(i)] for i in range(P.n_facets)]
        nuk = m + 1
        # unknowns x_i, y_i: w = x_1 L_{10} + y_1 L_{11} = x_i L_{i0} + y_i L_{i1}
        rows = []
        for i in range(1, m):
            for comp in range(nuk):
                row = [Fraction(0)] * (2 * m)
                row[0] = vecs[grouping[0][0]][comp]
                row[1] = vecs[grouping[0][1]][comp]
                row[2 * i] = -vecs[grouping[i][0]][comp]
                row[2 * i + 1] = -vecs[grouping[i][1]][comp]
                rows.append(row)
        if m == 1:
            kernel = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
        else:
            kernel = rational.nullspace(rows, 2 * m)
        ws = []
        for k in kernel:
            w = [k[0] * vecs[grouping[0][0]][c] + k[1] * vecs[grouping[0][1]][c]
                 for c in range(nuk)]
            ws.append(w)
        wmat = [w for w in ws if any(v != 0 for v in w)]
        dim_w = rational.rank(wmat) if wmat else 0
        if dim_w == 0:
            return None
        if dim_w > 1:
            # constants in the intersection (m = 1 or all-parallel pencils)
            aug = rational.rank(wmat + [[Fraction(1)] + [Fraction(0)] * m])
            if aug == dim_w:
                return AffineFunction(Fraction(1), [Fraction(0)] * m)
            raise Degenerate("pencil intersection has dimension > 1")
        w = next(w for w in ws if any(v != 0 for v in w))
        wf = AffineFunction(w[0], w[1:])
    else:
        vecs = np.array([[float(v) for v in label_vec(i)] for i in range(P.n_facets)])
        nuk = m + 1
        rows = []
        for i in range(1, m):
            for comp in range(nuk):
                row = np.zeros(2 * m)
                row[0] = vecs[grouping[0][0]][comp]
                row[1] = vecs[grouping[0][1]][comp]
                row[2 * i] = -vecs[grouping[i][0]][comp]
                row[2 * i + 1] = -vecs[grouping[i][1]][comp]
                rows.append(row)
        if m == 1:
            kernel = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        else:
            A = np.array(rows)
            u, sv, vt = np.linalg.svd(A)
            thresh = EPS_COMB * max(sv.max() if sv.size else 1.0, 1.0)
            kernel = [vt[i] for i in range(len(vt)) if i >= len(sv) or sv[i] <= thresh]
        ws = []
        for k in kernel:
            w = k[0] * vecs[grouping[0][0]] + k[1] * vecs[grouping[0][1]]
            if np.linalg.norm(w) > EPS_COMB:
                ws.append(w)
        if not ws:
            return None
        wmat = np.array(ws)
        dim_w = np.linalg.matrix_rank(wmat, tol=EPS_COMB)
        if dim_w > 1:
            const = np.zeros(nuk)
            const[0] = 1.0
            aug = np.linalg.matrix_rank(np.vstack([wmat, const]), tol=EPS_COMB)
            if aug == dim_w:
                return AffineFunction(1.0, [0.0] * m)
            raise Degenerate("pencil intersection has dimension > 1")
        w = ws[0]
        wf = AffineFunction(float(w[0]), [float(v) for v in w[1:]])

    # normalize: positive on the interior, min over vertices = 1
    if wf.is_exact and P.is_exact:
        vert_vals = [wf.value(p) for _, p in P.face_lattice().vertices]
        if all(v < 0 for v in vert_vals):
            wf = -wf
            vert_vals = [-v for v in vert_vals]
        if any(v <= 0 for v in vert_vals):
            raise Degenerate("pencil function vanishes on the polytope closure")
        return wf.scale(1 / min(vert_vals))
    vvals = wf.values(P.vertices_float())
    scale = max(1.0, float(np.abs(vvals).max()))
    if np.all(vvals < -EPS_COMB * scale):
        wf = -wf
        vvals = -vvals
    if np.any(vvals <= EPS_COMB * scale):
        raise Degenerate("pencil function vanishes on the polytope closure")
    return wf.scale(1.0 / float(vvals.min()))


def stabilizer_order(P: LabelledPolytope, face) -> int:
    """Order of the orbifold structure group on the face: the product of the
    elementary divisors (Smith normal form) of the matrix of inward normals
    u_s, s in the face's active set.  Requires integral normals."""
    face = sorted(set(face))
    if not face:
        return 1
    cols = []
    for s in face:
        col = []
        for v in P.facets[s].a:
            if rational.is_exact(v):
                fv = Fraction(v)
                if fv.denominator != 1:
                    raise NonIntegral(f"normal of facet {s} is not integral")
                col.append(int(fv))
            else:
                iv = round(float(v))
                if abs(float(v) - iv) > EPS_COMB:
                    raise NonIntegral(f"normal of facet {s} is not integral")
                col.append(int(iv))
        cols.append(col)
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(P.dim)]
    if rational.rank(rational.fraction_matrix(mat)) < len(face):
        raise Degenerate("face normals are linearly dependent")
    divisors = rational.smith_normal_form(mat)
    order = 1
    for d in divisors:
        order *= d
    return order


# ---------------------------------------------------------------------------
# constructors for common polytopes
# ---------------------------------------------------------------------------

def product_of_simplices(factor_dims, exact=True):
    """Product of standard simplices with the canonical labels; grouped."""
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    m = sum(factor_dims)
    facets = []
    grouping = []
    offset = 0
    for mi in factor_dims:
        idxs = []
        for r in range(mi):
            a = [zero] * m
            a[offset + r] = one
            facets.append(AffineFunction(zero, a))
            idxs.append(len(facets) - 1)
        a = [zero] * m
        for r in range(mi):
            a[offset + r] = -one
        facets.append(AffineFunction(one, a))
        idxs.append(len(facets) - 1)
        grouping.append(tuple(idxs))
        offset += mi
    return LabelledPolytope(facets, grouping)


def box(sides, exact=True):
    """Product of intervals [0, c_i], grouped in opposite pairs."""
    m = len(sides)
    facets = []
    grouping = []
    for i, c in enumerate(sides):
        ci = Fraction(c) if exact else float(c)
        one = Fraction(1) if exact else 1.0
        zero = Fraction(0) if exact else 0.0
        lo = [zero] * m
        lo[i] = one
        hi = [zero] * m
        hi[i] = -one
        facets.append(AffineFunction(zero, lo))
        facets.append(AffineFunction(ci, hi))
        grouping.append((2 * i, 2 * i + 1))
    return LabelledPolytope(facets, grouping)
