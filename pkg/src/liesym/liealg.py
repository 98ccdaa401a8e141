"""Lie algebra structure from vector fields.

Structure constants via exact linear solves, Killing form, solvability and
nilpotency tests with independent witnesses, center and nilradical, adjoint
exponentials in closed form (Putzer), and Bianchi classification for
dimension 3.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from . import exprcore as ex
from . import linalg as la
from .detsolve import VectorFieldGen


class NotClosed(Exception):
    pass


class NotIndependent(Exception):
    pass


class InternalInconsistency(Exception):
    pass


class IrrationalEigenvalues(Exception):
    pass


class DimensionTooLarge(Exception):
    pass


@dataclass(frozen=True)
class LieAlgebra:
    """[e_i, e_j] = sum_k C[i][j][k] e_k."""

    n: int
    C: tuple  # C[i][j][k] Fraction
    labels: tuple

    def __post_init__(self):
        C = self.C
        n = self.n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if C[i][j][k] != -C[j][i][k]:
                        raise InternalInconsistency("antisymmetry violated")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        s = sum(C[i][j][m] * C[m][k][l]
                                + C[j][k][m] * C[m][i][l]
                                + C[k][i][m] * C[m][j][l] for m in range(n))
                        if s != 0:
                            raise InternalInconsistency("Jacobi identity violated")

    def bracket(self, u, v):
        """Bracket of coefficient vectors."""
        n = self.n
        return [sum(u[i] * v[j] * self.C[i][j][k]
                    for i in range(n) for j in range(n)) for k in range(n)]


def make_algebra(C_rows, labels=None) -> LieAlgebra:
    n = len(C_rows)
    C = tuple(tuple(tuple(Fraction(v) for v in row) for row in plane)
              for plane in C_rows)
    if labels is None:
        labels = tuple(f"e{i+1}" for i in range(n))
    return LieAlgebra(n, C, tuple(labels))


def bracket_fields(g1: VectorFieldGen, g2: VectorFieldGen) -> VectorFieldGen:
    """[g1, g2] = (g1(xi2) - g2(xi1)) dx + (g1(eta2) - g2(eta1)) dy."""
    xi = ex.add(g1.apply(g2.xi), ex.mul(ex.num(-1), g2.apply(g1.xi)))
    eta = ex.add(g1.apply(g2.eta), ex.mul(ex.num(-1), g2.apply(g1.eta)))
    return VectorFieldGen(xi, eta)


def _field_coords(fields):
    """Coordinatize polynomial vector fields over the union of their
    (component, monomial) support; returns (vectors, coordinate order)."""
    cols = []
    data = []
    for g in fields:
        entry = {}
        for slot, part in (("xi", g.xi), ("eta", g.eta)):
            pc = ex.collect(part, ("x", "y"))
            for expo, coeff in pc.terms.items():
                if not isinstance(coeff, ex.Const):
                    raise ex.NotPolynomial("non-rational field coefficient")
                key = (slot, expo)
                entry[key] = coeff.value
                if key not in cols:
                    cols.append(key)
        data.append(entry)
    cols = sorted(cols)
    return [[e.get(c, Fraction(0)) for c in cols] for e in data], cols


def structure_constants(basis, labels=None) -> LieAlgebra:
    n = len(basis)
    brackets = [[bracket_fields(basis[i], basis[j]) for j in range(n)]
                for i in range(n)]
    all_fields = list(basis) + [b for row in brackets for b in row]
    vecs, _cols = _field_coords(all_fields)
    bvecs = vecs[:n]
    if la.rank(bvecs) < n:
        raise NotIndependent("basis fields are linearly dependent")
    A = [list(col) for col in zip(*bvecs)]  # columns = basis coordinates
    C = []
    for i in range(n):
        plane = []
        for j in range(n):
            target = vecs[n + i * n + j]
            sol = la.solve(A, target)
            if sol is None:
                raise NotClosed(f"[{i},{j}] outside the span of the basis")
            plane.append(tuple(sol))
        C.append(tuple(plane))
    if labels is None:
        labels = tuple(f"e{i+1}" for i in range(n))
    return LieAlgebra(n, tuple(C), tuple(labels))


def ad_matrix(L: LieAlgebra, v):
    """(ad_v)_{kj} = sum_i v_i C[i][j][k]."""
    n = L.n
    v = [Fraction(w) for w in v]
    return [[sum(v[i] * L.C[i][j][k] for i in range(n)) for j in range(n)]
            for k in range(n)]


def killing_form(L: LieAlgebra):
    n = L.n
    ads = [ad_matrix(L, [Fraction(int(i == t)) for i in range(n)])
           for t in range(n)]
    return [[sum(la.mat_mul(ads[i], ads[j])[k][k] for k in range(n))
             for j in range(n)] for i in range(n)]


def is_semisimple(L: LieAlgebra) -> bool:
    return la.det(killing_form(L)) != 0


def _basis_vectors(n):
    return [[Fraction(int(i == t)) for i in range(n)] for t in range(n)]


def _sub_bracket_span(L, A, B):
    """Canonical basis of span{[a,b] : a in A, b in B}."""
    vecs = [L.bracket(a, b) for a in A for b in B]
    return la.span_rref(vecs, L.n)


def derived_series(L: LieAlgebra):
    out = [_basis_vectors(L.n)]
    while out[-1]:
        nxt = _sub_bracket_span(L, out[-1], out[-1])
        if len(nxt) == len(out[-1]):
            break
        out.append(nxt)
    return out


def lower_central_series(L: LieAlgebra):
    whole = _basis_vectors(L.n)
    out = [whole]
    while out[-1]:
        nxt = _sub_bracket_span(L, whole, out[-1])
        if len(nxt) == len(out[-1]):
            break
        out.append(nxt)
    return out


def is_nilpotent(L: LieAlgebra) -> bool:
    return not lower_central_series(L)[-1]


def is_solvable(L: LieAlgebra) -> bool:
    """Dual witness: Cartan's criterion K(g, [g,g]) = 0 and the derived
    series reaching 0; raises if the two disagree."""
    derived_ok = not derived_series(L)[-1]
    K = killing_form(L)
    derived = _sub_bracket_span(L, _basis_vectors(L.n), _basis_vectors(L.n))
    cartan_ok = all(
        sum(K[i][j] * w[j] for j in range(L.n)) == 0
        for i in range(L.n) for w in derived)
    if derived_ok != cartan_ok:
        raise InternalInconsistency(
            f"solvability witnesses disagree: derived={derived_ok} cartan={cartan_ok}")
    return derived_ok


def center(L: LieAlgebra):
    """v is central iff ad_{e_i} v = 0 for every i: exact stacked nullspace."""
    stacked = []
    for i in range(L.n):
        stacked.extend(ad_matrix(L, [Fraction(int(t == i)) for t in range(L.n)]))
    basis = la.nullspace(stacked, L.n)
    return [la.scale_to_integer(v) for v in la.span_rref(basis, L.n)]


def _member(span, v, n):
    if not span:
        return all(w == 0 for w in v)
    return la.rank([list(s) for s in span] + [list(v)]) == len(span)


def _is_ideal(L, sub):
    for e in _basis_vectors(L.n):
        for w in sub:
            if not _member(sub, L.bracket(e, w), L.n):
                return False
    return True


def _is_nilpotent_sub(L, sub):
    cur = sub
    while cur:
        nxt = la.span_rref([L.bracket(a, b) for a in sub for b in cur], L.n)
        if len(nxt) == len(cur):
            return False
        cur = nxt
    return True


def nilradical(L: LieAlgebra):
    """Maximal nilpotent ideal, by bounded search (n <= 4): sum the nilpotent
    ideals arising from the center and the derived/lower-central series, then
    greedily extend over small-integer directions, certifying each step."""
    if L.n > 4:
        raise DimensionTooLarge("nilradical search limited to dimension <= 4")
    seeds = [center(L)]
    for series in (derived_series(L), lower_central_series(L)):
        for sub in series[1:]:
            if sub and _is_ideal(L, sub) and _is_nilpotent_sub(L, sub):
                seeds.append(sub)
    cur = la.span_rref([v for s in seeds for v in s], L.n)
    if cur and not (_is_ideal(L, cur) and _is_nilpotent_sub(L, cur)):
        # a sum of nilpotent ideals is a nilpotent ideal; reaching here
        # means a seed was not actually one
        raise InternalInconsistency("seed sum is not a nilpotent ideal")
    candidates = [list(v) for v in itertools.product(
        *[[Fraction(0), Fraction(1), Fraction(-1)]] * L.n)][1:]
    grew = True
    while grew:
        grew = False
        for v in candidates:
            if _member(cur, v, L.n):
                continue
            trial = la.span_rref([list(w) for w in cur] + [v], L.n)
            if _is_ideal(L, trial) and _is_nilpotent_sub(L, trial):
                cur = trial
                grew = True
    return [la.scale_to_integer(v) for v in cur]


# ---------------------------------------------------------------------------
# symbolic matrix exponential (Putzer)


def _char_poly(A):
    """Coefficients of det(xI - A) by the Faddeev-LeVerrier recursion,
    highest power first."""
    n = len(A)
    coeffs = [Fraction(1)]
    M = la.identity(n)
    for k in range(1, n + 1):
        M = la.mat_mul(A, M)
        c = -Fraction(sum(M[i][i] for i in range(n)), k)
        coeffs.append(c)
        for i in range(n):
            M[i][i] += c
    return coeffs


def _rational_roots(coeffs):
    """All roots (with multiplicity) of a rational polynomial, or None when
    any root is irrational.  Rational-root candidates with deflation."""
    den = 1
    for c in coeffs:
        den = den * c.denominator // __import__("math").gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    roots = []
    while len(ints) > 1:
        while ints and ints[0] == 0:
            ints.pop(0)
        if len(ints) <= 1:
            break
        if ints[-1] == 0:
            roots.append(Fraction(0))
            ints.pop()
            continue
        a0, an = abs(ints[-1]), abs(ints[0])
        found = None
        for p in [d for d in range(1, a0 + 1) if a0 % d == 0]:
            for q in [d for d in range(1, an + 1) if an % d == 0]:
                for sgn in (1, -1):
                    r = Fraction(sgn * p, q)
                    if sum(c * r ** (len(ints) - 1 - i)
                           for i, c in enumerate(ints)) == 0:
                        found = r
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            return None
        roots.append(found)
        # synthetic division by (x - found)
        out = [Fraction(ints[0])]
        for c in ints[1:-1]:
            out.append(c + out[-1] * found)
        ints = out
        den2 = 1
        for c in ints:
            den2 = den2 * c.denominator // __import__("math").gcd(den2, c.denominator)
        ints = [int(c * den2) for c in ints]
    return roots


# An ExpPoly is dict[Fraction rate -> list of Fraction poly coeffs in t],
# representing sum_rate e^{rate t} * poly(t).

def _ep_solve_step(prev, mu):
    """r(t) = e^{mu t} * integral_0^t e^{-mu s} prev(s) ds."""
    shifted = {}
    const0 = Fraction(0)
    for rate, poly in prev.items():
        rho = rate - mu
        if rho == 0:
            anti = [Fraction(0)] + [c / (k + 1) for k, c in enumerate(poly)]
            cur = shifted.setdefault(Fraction(0), [])
            for k, c in enumerate(anti):
                while len(cur) <= k:
                    cur.append(Fraction(0))
                cur[k] += c
        else:
            # antiderivative e^{rho s} q(s) with q' + rho q = poly
            q = [Fraction(0)] * len(poly)
            for k in reversed(range(len(poly))):
                nxt = (k + 1) * q[k + 1] if k + 1 < len(poly) else Fraction(0)
                q[k] = (poly[k] - nxt) / rho
            cur = shifted.setdefault(rho, [])
            for k, c in enumerate(q):
                while len(cur) <= k:
                    cur.append(Fraction(0))
                cur[k] += c
            const0 -= q[0]  # subtract antiderivative value at 0
    if const0:
        cur = shifted.setdefault(Fraction(0), [])
        if not cur:
            cur.append(Fraction(0))
        cur[0] += const0
    # multiply by e^{mu t}
    return {rate + mu: poly for rate, poly in shifted.items()
            if any(poly)} or {Fraction(0): [Fraction(0)]}


def _ep_to_expr(ep, lam: ex.Expr) -> ex.Expr:
    parts = []
    for rate, poly in ep.items():
        base = [ex.mul(ex.num(c), ex.pow_(lam, ex.num(k)))
                for k, c in enumerate(poly) if c]
        if not base:
            continue
        piece = ex.add(*base)
        if rate:
            piece = ex.mul(piece, ex.exp_(ex.mul(ex.num(rate), lam)))
        parts.append(piece)
    return ex.add(*parts) if parts else ex.ZERO


def adjoint_exp(L: LieAlgebra, i: int, lam: ex.Expr = None):
    """Matrix of Y -> Ad(exp(lam e_i)) Y = exp(-lam ad_i) applied to basis
    coordinates, entries as closed-form Exprs (Putzer's method)."""
    if lam is None:
        lam = ex.var("lambda")
    n = L.n
    A = [[-v for v in row] for row in ad_matrix(
        L, [Fraction(int(t == i)) for t in range(n)])]
    roots = _rational_roots(_char_poly(A))
    if roots is None:
        raise IrrationalEigenvalues(f"ad_{i} has irrational eigenvalues")
    roots = sorted(roots)
    # Putzer: exp(tA) = sum_j r_{j+1}(t) P_j
    rs = [{roots[0]: [Fraction(1)]}]
    for mu in roots[1:]:
        rs.append(_ep_solve_step(rs[-1], mu))
    Ps = [la.identity(n)]
    for mu in roots[:-1]:
        shift = [[A[r][c] - (mu if r == c else 0) for c in range(n)]
                 for r in range(n)]
        Ps.append(la.mat_mul(Ps[-1], shift))
    out = [[ex.ZERO] * n for _ in range(n)]
    for j in range(n):
        rj = _ep_to_expr(rs[j], lam)
        for r in range(n):
            for c in range(n):
                if Ps[j][r][c]:
                    out[r][c] = ex.add(out[r][c],
                                       ex.mul(rj, ex.num(Ps[j][r][c])))
    return out


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassificationReport:
    semisimple: bool
    solvable: bool
    nilpotent: bool
    derived_dims: list
    lower_central_dims: list
    center_basis: list
    nilradical_basis: list
    bianchi: str | None
    iso_label: str | None
    witness: dict | None


def _bianchi(L: LieAlgebra, ctr):
    derived = _sub_bracket_span(L, _basis_vectors(L.n), _basis_vectors(L.n))
    d = len(derived)
    if d == 0:
        return "I", "R^3", None
    if d == 1:
        gen = la.scale_to_integer(derived[0])
        if _member(ctr, gen, L.n):
            return "II", "heisenberg", {"e3": gen}
        if ctr:
            # [g,g] 1-dim, not central, with a central direction left over:
            # aff(1) + R.  Witness e1 solving [e1, gen] = gen.
            rows = [[sum(L.C[j][i][k] * gen[i] for i in range(L.n))
                     for j in range(L.n)] for k in range(L.n)]
            sol = la.solve(rows, gen)
            if sol is not None:
                return "III", "aff(1) + R", {
                    "e1": la.scale_to_integer(sol) if any(sol) else sol,
                    "e2": gen, "z": ctr[0]}
        return "other", None, None
    return "other", None, None


def classify(L: LieAlgebra) -> ClassificationReport:
    ctr = center(L)
    dser = derived_series(L)
    lser = lower_central_series(L)
    bianchi = iso = witness = None
    if L.n == 3:
        bianchi, iso, witness = _bianchi(L, ctr)
    return ClassificationReport(
        semisimple=is_semisimple(L),
        solvable=is_solvable(L),
        nilpotent=is_nilpotent(L),
        derived_dims=[len(s) for s in dser],
        lower_central_dims=[len(s) for s in lser],
        center_basis=ctr,
        nilradical_basis=nilradical(L) if L.n <= 4 else [],
        bianchi=bianchi,
        iso_label=iso,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# JSON interface


def to_json(L: LieAlgebra) -> dict:
    return {
        "dim": L.n,
        "C": [[[str(v) for v in row] for row in plane] for plane in L.C],
        "labels": list(L.labels),
    }


def from_json(data) -> LieAlgebra:
    return make_algebra(data["C"], data.get("labels"))
