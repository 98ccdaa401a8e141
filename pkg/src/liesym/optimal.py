"""Optimal system for the 3-dimensional symmetry algebra.

Adjoint action on coefficient vectors of a generic element, canonical-form
reduction from the closed-form orbit invariants, orbit equivalence, and a
sampling-based coverage/overlap audit of a representative list.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import exprcore as ex
from . import liealg as lg


class UnsupportedAlgebra(Exception):
    pass


class ZeroVector(Exception):
    pass


# structure constants of the target algebra: [e1,e3]=e3, [e2,e3]=-e3
_PAPER_C = None


def _paper_C():
    global _PAPER_C
    if _PAPER_C is None:
        C = [[[Fraction(0)] * 3 for _ in range(3)] for _ in range(3)]
        C[0][2][2] = Fraction(1)
        C[2][0][2] = Fraction(-1)
        C[1][2][2] = Fraction(-1)
        C[2][1][2] = Fraction(1)
        _PAPER_C = tuple(tuple(tuple(r) for r in p) for p in C)
    return _PAPER_C


def _require_paper(L: lg.LieAlgebra):
    if L.n != 3 or L.C != _paper_C():
        raise UnsupportedAlgebra(
            "canonicalization is specific to the fixture algebra")


_ADJ_CACHE: dict = {}


def _adj_matrix(L: lg.LieAlgebra, i: int):
    """Symbolic Ad(exp(lambda e_i)) for 1-based basis index i."""
    if not 1 <= i <= L.n:
        raise IndexError(f"basis index {i} out of range 1..{L.n}")
    key = (L.C, i)
    if key not in _ADJ_CACHE:
        _ADJ_CACHE[key] = lg.adjoint_exp(L, i - 1, ex.var("lambda"))
    return _ADJ_CACHE[key]


def adjoint_act(L: lg.LieAlgebra, v, i: int, lam):
    """Coefficients of Ad(exp(lam e_i)) (sum v_k e_k); entries are Exprs,
    exact Consts whenever the exponentials fold to rationals."""
    lam = ex._coerce(lam)
    M = _adj_matrix(L, i)
    vs = [ex._coerce(w if isinstance(w, ex.Expr) else ex.num(w)) for w in v]
    out = []
    for k in range(L.n):
        out.append(ex.add(*[
            ex.mul(ex.substitute(M[k][j], {"lambda": lam}), vs[j])
            for j in range(L.n)]))
    return out


def _as_rationals(vec):
    out = []
    for e in vec:
        e = ex.normalize(e) if isinstance(e, ex.Expr) else ex.num(e)
        if not isinstance(e, ex.Const):
            raise ex.NotRational(f"non-rational coefficient {ex.render(e)}")
        out.append(e.value)
    return out


@dataclass(frozen=True)
class GroupWord:
    """Adjoint steps (basis index, lambda Expr) applied left to right,
    followed by one overall nonzero scaling of the whole vector.

    Lambdas for the scaling directions e1/e2 are stored as ln(mu) so that
    the induced e^{±lambda} factors fold back to exact rationals."""

    steps: tuple = ()
    scale: Fraction = Fraction(1)

    def apply(self, L: lg.LieAlgebra, v):
        cur = [ex._coerce(w if isinstance(w, ex.Expr) else ex.num(w))
               for w in v]
        for i, lam in self.steps:
            cur = adjoint_act(L, cur, i, lam)
        return [ex.mul(ex.num(self.scale), w) for w in cur]

    def apply_rational(self, L: lg.LieAlgebra, v):
        return _as_rationals(self.apply(L, [ex.num(Fraction(w)) for w in v]))

    def invert(self) -> "GroupWord":
        steps = tuple((i, ex.mul(ex.num(-1), lam))
                      for i, lam in reversed(self.steps))
        return GroupWord(steps, 1 / self.scale)

    def compose(self, other: "GroupWord") -> "GroupWord":
        # the action is linear in v, so scalings commute with steps
        return GroupWord(self.steps + other.steps, self.scale * other.scale)


def _sgn(r: Fraction) -> int:
    return (r > 0) - (r < 0)


def canonical_form(L: lg.LieAlgebra, v):
    """Deterministic orbit representative and the word reaching it.

    Orbit invariants of a3 -> mu*a3 + lam*(a1-a2) (mu > 0) plus overall
    nonzero rescaling: a1 != a2 -> (a1,a2,0) scaled to max|ai| = 1 with the
    first nonzero entry positive; a1 = a2 != 0 -> (1,1,sgn(a3/a1));
    a1 = a2 = 0 -> (0,0,1)."""
    _require_paper(L)
    a1, a2, a3 = (Fraction(w) for w in v)
    if a1 == a2 == a3 == 0:
        raise ZeroVector("generic element must be nonzero")
    steps = []
    if a1 != a2:
        if a3:
            steps.append((3, ex.num(-a3 / (a1 - a2))))
        m = max(abs(a1), abs(a2))
        lead = a1 if a1 else a2
        scale = (1 if lead > 0 else -1) / m
        rep = (a1 * scale, a2 * scale, Fraction(0))
    elif a1 != 0:
        if a3:
            # e1 direction: a3 -> e^{-lam} a3; lam = ln|a3/a1| exactly
            steps.append((1, ex.ln_(ex.num(abs(a3 / a1)))))
        scale = 1 / a1
        rep = (Fraction(1), Fraction(1), Fraction(_sgn(a3 / a1)))
    else:
        scale = 1 / a3
        rep = (Fraction(0), Fraction(0), Fraction(1))
    word = GroupWord(tuple(steps), scale)
    got = tuple(word.apply_rational(L, (a1, a2, a3)))
    if got != rep:
        raise lg.InternalInconsistency(f"word reaches {got}, expected {rep}")
    return rep, word


def orbit_equivalent(L: lg.LieAlgebra, v, w):
    """GroupWord mapping v to w when they share an orbit, else None."""
    try:
        rep_v, word_v = canonical_form(L, v)
        rep_w, word_w = canonical_form(L, w)
    except ZeroVector:
        return None
    if rep_v != rep_w:
        return None
    word = word_v.compose(word_w.invert())
    if tuple(word.apply_rational(L, v)) != tuple(Fraction(u) for u in w):
        raise lg.InternalInconsistency("composed word fails to map v to w")
    return word


# ---------------------------------------------------------------------------
# representative-list verification


@dataclass(frozen=True)
class RepFamily:
    name: str
    coeffs: tuple       # Exprs: rational literals or bare symbols
    constraints: tuple  # (lhs Expr, op in {"!=", "=="}, rhs Expr)


def load_representatives(path) -> list:
    with open(path) as fh:
        data = json.load(fh)
    return [parse_family(d, f"family{k+1}") for k, d in enumerate(data)]


def parse_family(d, name=None) -> RepFamily:
    coeffs = tuple(ex.parse(s, extra_vars=("b1", "b2")) for s in d["coeffs"])
    cons = []
    for s in d.get("constraints", ()):
        op = "!=" if "!=" in s else "=="
        lhs, rhs = s.split(op)
        cons.append((ex.parse(lhs, extra_vars=("b1", "b2")), op,
                     ex.parse(rhs, extra_vars=("b1", "b2"))))
    return RepFamily(d.get("name", name or "family"), coeffs, tuple(cons))


_FREE_CANDIDATES = [Fraction(v) for v in
                    (0, 1, -1, 2, -2, 3, -3, Fraction(1, 2), Fraction(-1, 2),
                     Fraction(1, 3), 5, -5)]


def _constraints_ok(fam: RepFamily, assign: dict) -> bool:
    for lhs, op, rhs in fam.constraints:
        l = ex.substitute(lhs, assign)
        r = ex.substitute(rhs, assign)
        eq = ex.is_zero(ex.add(l, ex.mul(ex.num(-1), r)))
        if (op == "!=" and eq) or (op == "==" and not eq):
            return False
    return True


def _instantiate(fam: RepFamily, assign: dict):
    out = []
    for c in fam.coeffs:
        e = ex.substitute(c, assign)
        if not isinstance(e, ex.Const):
            return None
        out.append(e.value)
    return out


def _coeff_value(c, assign):
    if isinstance(c, ex.Const):
        return c.value
    if isinstance(c, ex.Var):
        return assign.get(c.name)
    raise ex.ExprError(f"family coefficient must be literal or symbol: {c!r}")


def _try_assign(c, value, assign):
    """Extend assign so coefficient c takes `value`; None on conflict."""
    if isinstance(c, ex.Const):
        return assign if c.value == value else None
    cur = assign.get(c.name)
    if cur is not None:
        return assign if cur == value else None
    out = dict(assign)
    out[c.name] = value
    return out


def family_matches(L: lg.LieAlgebra, fam: RepFamily, rep) -> bool:
    """Does some admissible instantiation of the family lie on the orbit
    whose canonical representative is `rep`?  Closed-form per orbit class,
    with small finite searches over genuinely free parameters."""
    r1, r2, r3 = rep
    f1, f2, f3 = fam.coeffs

    def finish(assign):
        # fill remaining symbols from the candidate pool
        names = [c.name for c in fam.coeffs
                 if isinstance(c, ex.Var) and c.name not in assign]
        pools = [_FREE_CANDIDATES] * len(names)

        def rec(k, cur):
            if k == len(names):
                inst = _instantiate(fam, cur)
                if inst is None or all(v == 0 for v in inst):
                    return False
                if not _constraints_ok(fam, cur):
                    return False
                got, _ = canonical_form(L, inst)
                return got == tuple(rep)
            for val in pools[k]:
                nxt = dict(cur)
                nxt[names[k]] = val
                if rec(k + 1, nxt):
                    return True
            return False

        return rec(0, dict(assign))

    if r1 != r2:
        # class A: (f1,f2) = t (r1,r2) for some t != 0; f3 free
        scales = []
        for c, r in ((f1, r1), (f2, r2)):
            if isinstance(c, ex.Const) and r != 0:
                scales.append(c.value / r)
        if not scales:
            scales = [Fraction(s) for s in (1, -1, 2, -2, Fraction(1, 2),
                                            Fraction(-1, 2), 3, -3)]
        for t in scales:
            if t == 0:
                continue
            assign = {}
            ok = True
            for c, r in ((f1, r1), (f2, r2)):
                assign = _try_assign(c, t * r, assign)
                if assign is None:
                    ok = False
                    break
            if ok and finish(assign):
                return True
        return False
    if r1 != 0:
        # class B: f1 = f2 = s != 0, sgn(f3/s) = r3
        svals = []
        for c in (f1, f2):
            if isinstance(c, ex.Const):
                svals.append(c.value)
        if not svals:
            svals = [Fraction(v) for v in (1, -1, 2, -2)]
        for s in svals:
            if s == 0:
                continue
            assign = _try_assign(f1, s, {})
            if assign is None:
                continue
            assign = _try_assign(f2, s, assign)
            if assign is None:
                continue
            sigma = int(r3)
            third = [sigma * _sgn(s) * Fraction(m) for m in (1, 2, Fraction(1, 2), 3)] \
                if sigma else [Fraction(0)]
            for t3 in third:
                a2 = _try_assign(f3, t3, assign)
                if a2 is not None and finish(a2):
                    return True
        return False
    # class C: f1 = f2 = 0, f3 != 0
    assign = _try_assign(f1, Fraction(0), {})
    if assign is None:
        return False
    assign = _try_assign(f2, Fraction(0), assign)
    if assign is None:
        return False
    for t3 in (Fraction(1), Fraction(-1), Fraction(2)):
        a2 = _try_assign(f3, t3, assign)
        if a2 is not None and finish(a2):
            return True
    return False


@dataclass
class CoverageReport:
    samples: int
    seed: int
    covered: int
    matched_counts: dict      # family name -> hits
    families_never_hit: list
    unmatched: list           # canonical reps with no matching family
    overlap_counts: dict      # (name_a, name_b) -> samples matched by both

    @property
    def full_coverage(self) -> bool:
        return self.covered == self.samples


def random_vector(rng: random.Random):
    while True:
        v = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)]
        if any(v):
            return v


def verify_representatives(L: lg.LieAlgebra, families, samples: int = 1000,
                           seed: int = 42) -> CoverageReport:
    _require_paper(L)
    rng = random.Random(seed)
    counts = {f.name: 0 for f in families}
    overlaps: dict = {}
    unmatched = []
    covered = 0
    match_cache: dict = {}
    for _ in range(samples):
        v = random_vector(rng)
        rep, _ = canonical_form(L, v)
        hits = match_cache.get(rep)
        if hits is None:
            hits = [f.name for f in families if family_matches(L, f, rep)]
            match_cache[rep] = hits
        if hits:
            covered += 1
            for h in hits:
                counts[h] += 1
            for a in range(len(hits)):
                for b in range(a + 1, len(hits)):
                    key = (hits[a], hits[b])
                    overlaps[key] = overlaps.get(key, 0) + 1
        elif len(unmatched) < 20:
            unmatched.append(rep)
    return CoverageReport(
        samples=samples, seed=seed, covered=covered, matched_counts=counts,
        families_never_hit=[f.name for f in families if counts[f.name] == 0],
        unmatched=unmatched, overlap_counts=overlaps)
