from fractions import Fraction

from liesym import linalg as la

F = Fraction


def test_rank_and_det():
    A = [[F(1), F(2)], [F(3), F(4)]]
    assert la.rank(A) == 2
    assert la.det(A) == F(-2)
    assert la.det([[F(1), F(2)], [F(2), F(4)]]) == 0


def test_nullspace():
    rows = [[F(1), F(1), F(0)], [F(0), F(0), F(1)]]
    ns = la.nullspace(rows, 3)
    assert len(ns) == 1
    v = ns[0]
    assert v[0] + v[1] == 0 and v[2] == 0


def test_solve():
    A = [[F(2), F(1)], [F(1), F(3)]]
    b = [F(5), F(10)]
    x = la.solve(A, b)
    assert [sum(A[i][j] * x[j] for j in range(2)) for i in range(2)] == b
    assert la.solve([[F(1), F(1)], [F(2), F(2)]], [F(1), F(3)]) is None


def test_scale_to_integer():
    v = la.scale_to_integer([F(-1, 2), F(3, 4), F(0)])
    assert v == [F(-2), F(3), F(0)] or v == [F(2), F(-3), F(0)]
    assert v[0] != 0
    # first nonzero positive
    assert next(c for c in v if c) > 0


def test_span_equal():
    a = [[F(1), F(0)], [F(0), F(1)]]
    b = [[F(1), F(1)], [F(1), F(-1)]]
    assert la.span_equal(a, b)
    assert not la.span_equal([[F(1), F(0)]], [[F(0), F(1)]])
