"""Exact rational linear algebra.

Fraction-free (Bareiss) elimination over integers with deterministic
pivoting (first nonzero in fixed column order), plus reduced echelon form,
nullspace, determinant and linear solves over Fraction.
"""

from __future__ import annotations

import math
from fractions import Fraction


def _to_integer_rows(rows):
    out = []
    for row in rows:
        den = math.lcm(*(Fraction(v).denominator for v in row)) if row else 1
        ints = [int(Fraction(v) * den) for v in row]
        g = math.gcd(*ints) if any(ints) else 1
        if g > 1:
            ints = [v // g for v in ints]
        out.append(ints)
    return out


def bareiss_echelon(rows):
    """Fraction-free row echelon form of an integer-scaled copy of `rows`.

    Returns (echelon integer rows, pivot column list).
    """
    m = _to_integer_rows(rows)
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(bareiss_echelon(rows)[1])


def rref(rows):
    """Reduced row echelon form over Fraction.  Returns (rows, pivots)."""
    ech, pivots = bareiss_echelon(rows)
    out = [[Fraction(v) for v in row] for row in ech]
    for i in reversed(range(len(pivots))):
        c = pivots[i]
        pv = out[i][c]
        out[i] = [v / pv for v in out[i]]
        for k in range(i):
            f = out[k][c]
            if f:
                out[k] = [a - f * b for a, b in zip(out[k], out[i])]
    return out, pivots


def nullspace(rows, ncols=None):
    """Basis of the right nullspace, one vector per free column, in free
    column order.  Exact: every returned vector satisfies A v = 0."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    rr, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rr[i][fc]
        basis.append(v)
    return basis


def scale_to_integer(vec):
    """Scale a rational vector to integer entries, content 1, first nonzero
    entry positive."""
    vec = [Fraction(v) for v in vec]
    if not any(vec):
        return vec
    den = math.lcm(*(v.denominator for v in vec))
    ints = [int(v * den) for v in vec]
    g = math.gcd(*ints)
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v)
    if lead < 0:
        ints = [-v for v in ints]
    return [Fraction(v) for v in ints]


def det(matrix) -> Fraction:
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(v) for v in row] for row in matrix]
    sign = 1
    out = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        out *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return sign * out


def solve(a_rows, b):
    """One exact solution of A x = b, or None if inconsistent."""
    ncols = len(a_rows[0])
    aug = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(a_rows, b)]
    rr, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = rr[i][ncols]
    return x


def mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def span_equal(vecs_a, vecs_b) -> bool:
    """Do two vector lists span the same subspace (exact rank test)?"""
    ra = rank(vecs_a) if vecs_a else 0
    rb = rank(vecs_b) if vecs_b else 0
    if ra != rb:
        return False
    stacked = [list(v) for v in vecs_a] + [list(v) for v in vecs_b]
    return (rank(stacked) if stacked else 0) == ra


def span_rref(vecs, ncols=None):
    """Canonical (RREF, zero rows dropped) basis of the span."""
    if not vecs:
        return []
    rr, pivots = rref([list(v) for v in vecs])
    return [rr[i] for i in range(len(pivots))]
