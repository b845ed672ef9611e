"""Exact rational linear algebra on tiny matrices.

All combinatorial decisions (vertices, face lattices, kernels, cube
detection, stabilizer orders) run through this module when the input
coefficients are rational, so the answers are exact and stable.  Matrices
are lists of lists of Fractions; everything here is O(n^3) on systems with
at most a dozen rows, so no attempt is made to be clever.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


def to_fraction(x):
    """Parse a number or a 'p/q' string into a Fraction; floats are rejected."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def is_exact(x):
    return isinstance(x, Rational) and not isinstance(x, float)


def fraction_matrix(rows):
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows):
    """Reduced row echelon form. Returns (new_rows, pivot_columns)."""
    m = [list(r) for r in rows]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        f = m[r][c]
        m[r] = [v / f for v in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                g = m[i][c]
                m[i] = [a - g * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m, pivots


def rank(rows):
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows, ncols=None):
    """Basis of the right kernel as a list of Fraction vectors."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        rows = [[Fraction(0)] * ncols]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve_square(a, b):
    """Solve the square system a x = b exactly; None if singular."""
    n = len(a)
    aug = [list(row) + [bv] for row, bv in zip(a, b)]
    red, pivots = rref(aug)
    if len(pivots) < n or any(p >= n for p in pivots):
        return None
    x = [Fraction(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = red[r][n]
    return x


def smith_normal_form(mat):
    """Diagonal of the Smith normal form of an integer matrix.

    Returns the list of nonzero elementary divisors d_1 | d_2 | ... (positive
    ints); trailing zero divisors are dropped.
    """
    a = [[int(v) for v in row] for row in mat]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    divisors = []
    top = 0
    while top < min(nr, nc):
        # locate a nonzero pivot of minimal absolute value
        best = None
        for i in range(top, nr):
            for j in range(top, nc):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        a[top], a[bi] = a[bi], a[top]
        for row in a:
            row[top], row[bj] = row[bj], row[top]
        # clear the pivot row and column; restart if a remainder pops up
        while True:
            p = a[top][top]
            dirty = False
            for i in range(top + 1, nr):
                if a[i][top] != 0:
                    q = a[i][top] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[top])]
                    if a[i][top] != 0:
                        a[top], a[i] = a[i], a[top]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, nc):
                if a[top][j] != 0:
                    q = a[top][j] // p
                    for row in a:
                        row[j] -= q * row[top]
                    if a[top][j] != 0:
                        for row in a:
                            row[top], row[j] = row[j], row[top]
                        dirty = True
                        break
            if not dirty:
                break
        # force divisibility of the remaining block by the pivot
        p = a[top][top]
        fixed = True
        for i in range(top + 1, nr):
            for j in range(top + 1, nc):
                if a[i][j] % p != 0:
                    a[top] = [x + y for x, y in zip(a[top], a[i])]
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        divisors.append(abs(p))
        top += 1
    return divisors
