"""Exact symbolic expression kernel.

Immutable expression trees over exact rationals: parsing, printing,
differentiation, substitution, rational-function normalization, polynomial
collection and numeric evaluation.  Every constructor returns a normalized
tree; two normalized trees are equal iff they are structurally identical.

Normalization expands polynomial products and merges like terms, so
polynomial identities reduce to the literal constant 0.  Rational identities
are decided by `is_zero`, which clears denominators first.  Identities
involving exp/ln are decided only up to the rules
``exp(a)*exp(b) -> exp(a+b)``, ``exp(ln(u)) -> u`` and
``ln(u^r) -> r*ln(u)``; numeric sampling is the fallback oracle elsewhere.

Division is represented as a power with negative exponent; square roots are
powers with exponent 1/2 and are kept unexpanded ((x^(1/2))^2 normalizes
to x, with the x > 0 sampling convention handling branch issues).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} (at position {pos})")
        self.pos = pos


class DomainError(ExprError):
    pass


class DivisionByZero(ExprError):
    pass


class NotRational(ExprError):
    pass


class NotPolynomial(ExprError):
    pass


# ---------------------------------------------------------------------------
# node types


@dataclass(frozen=True)
class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, mul(NEG_ONE, _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), mul(NEG_ONE, self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(_coerce(other), NEG_ONE))

    def __rtruediv__(self, other):
        return mul(_coerce(other), pow_(self, NEG_ONE))

    def __pow__(self, other):
        return pow_(self, _coerce(other))

    def __neg__(self):
        return mul(NEG_ONE, self)


@dataclass(frozen=True)
class Const(Expr):
    __slots__ = ("value",)
    value: Fraction


@dataclass(frozen=True)
class Var(Expr):
    __slots__ = ("name",)
    name: str


@dataclass(frozen=True)
class Sum(Expr):
    __slots__ = ("terms",)
    terms: tuple


@dataclass(frozen=True)
class Prod(Expr):
    __slots__ = ("factors",)
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    __slots__ = ("base", "exponent")
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Exp(Expr):
    __slots__ = ("arg",)
    arg: Expr


@dataclass(frozen=True)
class Ln(Expr):
    __slots__ = ("arg",)
    arg: Expr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
NEG_ONE = Const(Fraction(-1))
HALF = Const(Fraction(1, 2))


def num(v) -> Const:
    return Const(Fraction(v))


def var(name: str) -> Var:
    return Var(name)


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Const(Fraction(v))
    raise TypeError(f"cannot coerce {v!r} to Expr")


# ---------------------------------------------------------------------------
# canonical total order on nodes: (kind rank, recursive comparison)

_RANK = {Const: 0, Var: 1, Pow: 2, Exp: 3, Ln: 4, Prod: 5, Sum: 6}


def _key(e: Expr):
    t = type(e)
    if t is Const:
        return (0, e.value)
    if t is Var:
        return (1, e.name)
    if t is Pow:
        return (2, _key(e.base), _key(e.exponent))
    if t is Exp:
        return (3, _key(e.arg))
    if t is Ln:
        return (4, _key(e.arg))
    if t is Prod:
        return (5, tuple(_key(f) for f in e.factors))
    return (6, tuple(_key(x) for x in e.terms))


# ---------------------------------------------------------------------------
# normalizing constructors (arguments must already be normalized)


def _as_coeff_factors(e: Expr):
    """Split a normalized non-Sum term into (rational coeff, factor tuple)."""
    if isinstance(e, Const):
        return e.value, ()
    if isinstance(e, Prod):
        fs = e.factors
        if isinstance(fs[0], Const):
            return fs[0].value, fs[1:]
        return Fraction(1), fs
    return Fraction(1), (e,)


def _mk_term(coeff: Fraction, factors: tuple) -> Expr:
    if coeff == 0:
        return ZERO
    if not factors:
        return Const(coeff)
    if coeff == 1:
        if len(factors) == 1:
            return factors[0]
        return Prod(factors)
    return Prod((Const(coeff),) + factors)


def _nadd(terms) -> Expr:
    acc: dict = {}
    const_acc = Fraction(0)
    stack = list(terms)
    while stack:
        t = stack.pop()
        if isinstance(t, Sum):
            stack.extend(t.terms)
        elif isinstance(t, Const):
            const_acc += t.value
        else:
            c, fs = _as_coeff_factors(t)
            acc[fs] = acc.get(fs, Fraction(0)) + c
    out = [_mk_term(c, fs) for fs, c in acc.items() if c != 0]
    if const_acc != 0:
        out.append(Const(const_acc))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_key)
    return Sum(tuple(out))


def _int_nth_root(n: int, k: int):
    """Exact k-th root of a nonnegative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _const_pow(b: Fraction, r: Fraction):
    """b ** r as an exact Fraction, or None when the result is irrational."""
    if r.denominator == 1:
        return b ** int(r)
    if b < 0:
        return None
    k = r.denominator
    rn = _int_nth_root(b.numerator, k)
    rd = _int_nth_root(b.denominator, k)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd) ** r.numerator


def _npow(b: Expr, e: Expr) -> Expr:
    if isinstance(e, Const):
        r = e.value
        if r == 0:
            return ONE
        if isinstance(b, Const):
            if b.value == 0:
                if r > 0:
                    return ZERO
                raise DivisionByZero("0 raised to a negative power")
            if b.value == 1:
                return ONE
            v = _const_pow(b.value, r)
            if v is not None:
                return Const(v)
            return Pow(b, e)
        if r == 1:
            return b
        if isinstance(b, Pow) and isinstance(b.exponent, Const):
            return _npow(b.base, Const(b.exponent.value * r))
        if isinstance(b, Exp):
            return _nexp(_nmul([e, b.arg]))
        if isinstance(b, Prod) and r.denominator == 1:
            return _nmul([_npow(f, e) for f in b.factors])
        if isinstance(b, Sum) and r.denominator == 1:
            n = int(r)
            if n >= 2:
                cur = [ONE]
                for _ in range(n):
                    cur = [_nmul([t, u]) for t in cur for u in b.terms]
                return _nadd(cur)
            if n <= -2:
                # canonical form: expand the positive power, then invert,
                # matching what parsing 1/(...)^n produces
                return _npow(_npow(b, Const(-r)), NEG_ONE)
            return Pow(b, e)
        return Pow(b, e)
    # symbolic exponent
    if isinstance(b, Const) and b.value == 1:
        return ONE
    if isinstance(b, Exp):
        return _nexp(_nmul([e, b.arg]))
    return Pow(b, e)


def _nexp(a: Expr) -> Expr:
    if a == ZERO:
        return ONE
    if isinstance(a, Ln):
        return a.arg
    terms = a.terms if isinstance(a, Sum) else (a,)
    ln_parts = []
    rest = []
    for t in terms:
        c, fs = _as_coeff_factors(t)
        if len(fs) == 1 and isinstance(fs[0], Ln):
            ln_parts.append((fs[0].arg, c))
        else:
            rest.append(t)
    if ln_parts:
        factors = [_npow(u, Const(c)) for u, c in ln_parts]
        rest_e = _nadd(rest)
        if rest_e != ZERO:
            factors.append(Exp(rest_e))
        return _nmul(factors)
    return Exp(a)


def _nln(a: Expr) -> Expr:
    if isinstance(a, Const):
        if a.value == 1:
            return ZERO
        if a.value <= 0:
            raise DomainError("ln of a non-positive literal")
        return Ln(a)
    if isinstance(a, Exp):
        return a.arg
    if isinstance(a, Pow) and isinstance(a.exponent, Const):
        return _nmul([a.exponent, _nln(a.base)])
    return Ln(a)


def _nmul(factors) -> Expr:
    coeff = Fraction(1)
    base_exp: dict = {}
    exp_args = []  # (arg, multiplier) pairs from Exp factors

    def absorb(f: Expr):
        nonlocal coeff
        stack = [f]
        while stack:
            g = stack.pop()
            if isinstance(g, Const):
                coeff *= g.value
            elif isinstance(g, Prod):
                stack.extend(g.factors)
            elif isinstance(g, Exp):
                exp_args.append((g.arg, Fraction(1)))
            elif isinstance(g, Pow) and isinstance(g.exponent, Const):
                if isinstance(g.base, Exp):
                    exp_args.append((g.base.arg, g.exponent.value))
                else:
                    k = g.base
                    base_exp[k] = base_exp.get(k, Fraction(0)) + g.exponent.value
            else:
                base_exp[g] = base_exp.get(g, Fraction(0)) + 1

    for f in factors:
        absorb(f)
    if exp_args:
        arg = _nadd([_nmul([Const(m), a]) if m != 1 else a for a, m in exp_args])
        folded = _nexp(arg)
        parts = folded.factors if isinstance(folded, Prod) else (folded,)
        for part in parts:
            if isinstance(part, Const):
                coeff *= part.value
            elif isinstance(part, Exp):
                base_exp[part] = base_exp.get(part, Fraction(0)) + 1
            elif isinstance(part, Pow) and isinstance(part.exponent, Const):
                k = part.base
                base_exp[k] = base_exp.get(k, Fraction(0)) + part.exponent.value
            else:
                base_exp[part] = base_exp.get(part, Fraction(0)) + 1

    # rebuild merged powers; a rebuild can fold to a constant or expand,
    # so iterate until the factor set is stable
    plain: list = []
    sums: list = []
    work = sorted(base_exp.items(), key=lambda kv: _key(kv[0]))
    rounds = 0
    while work:
        rounds += 1
        if rounds > 100:  # pragma: no cover
            raise ExprError("product normalization did not stabilize")
        nxt: dict = {}
        for b, r in work:
            if r == 0:
                continue
            p = _npow(b, Const(r))
            if isinstance(p, Const):
                coeff *= p.value
            elif isinstance(p, Sum):
                sums.append(p)
            elif isinstance(p, Prod):
                for f in p.factors:
                    if isinstance(f, Const):
                        coeff *= f.value
                    elif isinstance(f, Pow) and isinstance(f.exponent, Const):
                        nxt[f.base] = nxt.get(f.base, Fraction(0)) + f.exponent.value
                    else:
                        nxt[f] = nxt.get(f, Fraction(0)) + 1
            elif isinstance(p, Pow) and isinstance(p.exponent, Const) and p.base != b:
                nxt[p.base] = nxt.get(p.base, Fraction(0)) + p.exponent.value
            else:
                plain.append(p)
        work = sorted(nxt.items(), key=lambda kv: _key(kv[0]))

    if coeff == 0:
        return ZERO
    if sums:
        # distribute over Sum factors (polynomial expansion)
        terms = [ONE]
        for s in sums:
            terms = [_nmul([t, u]) for t in terms for u in s.terms]
        head = _mk_term(coeff, tuple(sorted(plain, key=_key)))
        return _nadd([_nmul([head, t]) for t in terms])
    return _mk_term(coeff, tuple(sorted(plain, key=_key)))


# public constructors


def add(*es) -> Expr:
    return _nadd([_coerce(e) for e in es])


def mul(*es) -> Expr:
    return _nmul([_coerce(e) for e in es])


def pow_(b, e) -> Expr:
    return _npow(_coerce(b), _coerce(e))


def exp_(a) -> Expr:
    return _nexp(_coerce(a))


def ln_(a) -> Expr:
    return _nln(_coerce(a))


def sqrt_(a) -> Expr:
    return _npow(_coerce(a), HALF)


def normalize(e: Expr) -> Expr:
    """Rebuild an arbitrary tree through the normalizing constructors."""
    return substitute(e, {})


# ---------------------------------------------------------------------------
# structural queries


def free_vars(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.name)
        elif isinstance(g, Sum):
            stack.extend(g.terms)
        elif isinstance(g, Prod):
            stack.extend(g.factors)
        elif isinstance(g, Pow):
            stack.append(g.base)
            stack.append(g.exponent)
        elif isinstance(g, (Exp, Ln)):
            stack.append(g.arg)
    return out


def contains_var(e: Expr, names) -> bool:
    names = set(names)
    return bool(free_vars(e) & names)


# ---------------------------------------------------------------------------
# calculus and substitution


def diff(e: Expr, v: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Sum):
        return _nadd([diff(t, v) for t in e.terms])
    if isinstance(e, Prod):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            if isinstance(f, Const):
                continue
            df = diff(f, v)
            if df == ZERO:
                continue
            parts.append(_nmul(list(fs[:i]) + list(fs[i + 1:]) + [df]))
        return _nadd(parts)
    if isinstance(e, Pow):
        b, ex = e.base, e.exponent
        if isinstance(ex, Const):
            db = diff(b, v)
            if db == ZERO:
                return ZERO
            return _nmul([ex, _npow(b, Const(ex.value - 1)), db])
        # general rule: e * (ex' ln b + ex * b'/b)
        inner = _nadd([
            _nmul([diff(ex, v), _nln(b)]),
            _nmul([ex, diff(b, v), _npow(b, NEG_ONE)]),
        ])
        return _nmul([e, inner])
    if isinstance(e, Exp):
        return _nmul([e, diff(e.arg, v)])
    if isinstance(e, Ln):
        return _nmul([diff(e.arg, v), _npow(e.arg, NEG_ONE)])
    raise ExprError(f"cannot differentiate {e!r}")


def total_derivative(e: Expr, omega: Expr | None = None) -> Expr:
    """D_x = d/dx + p d/dy + y'' d/dp on functions of (x, y, p).

    The second derivative is the fresh symbol ``q`` unless `omega` is given,
    in which case it is substituted directly.
    """
    q = omega if omega is not None else Var("q")
    return _nadd([
        diff(e, "x"),
        _nmul([Var("p"), diff(e, "y")]),
        _nmul([q, diff(e, "p")]),
    ])


def substitute(e: Expr, bindings: dict) -> Expr:
    def go(g):
        if isinstance(g, Const):
            return g
        if isinstance(g, Var):
            return bindings.get(g.name, g)
        if isinstance(g, Sum):
            return _nadd([go(t) for t in g.terms])
        if isinstance(g, Prod):
            return _nmul([go(f) for f in g.factors])
        if isinstance(g, Pow):
            return _npow(go(g.base), go(g.exponent))
        if isinstance(g, Exp):
            return _nexp(go(g.arg))
        if isinstance(g, Ln):
            return _nln(go(g.arg))
        raise ExprError(f"cannot substitute into {g!r}")

    bindings = {k: _coerce(v) for k, v in bindings.items()}
    return go(e)


# ---------------------------------------------------------------------------
# numeric evaluation


def eval_numeric(e: Expr, bindings: dict) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise ExprError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Sum):
        return sum(eval_numeric(t, bindings) for t in e.terms)
    if isinstance(e, Prod):
        out = 1.0
        for f in e.factors:
            out *= eval_numeric(f, bindings)
        return out
    if isinstance(e, Pow):
        b = eval_numeric(e.base, bindings)
        ex = eval_numeric(e.exponent, bindings)
        if b == 0.0 and ex < 0:
            raise DomainError("division by zero")
        if b < 0 and ex != int(ex):
            raise DomainError("negative base with fractional exponent")
        try:
            return b**ex
        except (OverflowError, ZeroDivisionError) as err:
            raise DomainError(str(err)) from None
    if isinstance(e, Exp):
        try:
            return math.exp(eval_numeric(e.arg, bindings))
        except OverflowError as err:
            raise DomainError(str(err)) from None
    if isinstance(e, Ln):
        a = eval_numeric(e.arg, bindings)
        if a <= 0:
            raise DomainError("ln of a non-positive value")
        return math.log(a)
    raise ExprError(f"cannot evaluate {e!r}")


# ---------------------------------------------------------------------------
# rational-function normalization


def _mono_primitive(s: Sum):
    """Factor a Sum as scale * (monomial in its vars) * primitive part.

    Only monomial content and rational content are extracted (x^2 + x*y ->
    x * (x + y)); no general polynomial factorization.  The primitive part
    has positive leading coefficient and integer coefficients with gcd 1.
    """
    coeffs = []
    var_min = None
    for t in s.terms:
        c, fs = _as_coeff_factors(t)
        coeffs.append(c)
        ve: dict = {}
        for f in fs:
            if isinstance(f, Var):
                ve[f.name] = ve.get(f.name, 0) + 1
            elif (isinstance(f, Pow) and isinstance(f.base, Var)
                  and isinstance(f.exponent, Const)
                  and f.exponent.value.denominator == 1
                  and f.exponent.value > 0):
                ve[f.base.name] = ve.get(f.base.name, 0) + int(f.exponent.value)
        if var_min is None:
            var_min = ve
        else:
            var_min = {v: min(k, ve.get(v, 0))
                       for v, k in var_min.items() if ve.get(v, 0) > 0}
    g = Fraction(math.gcd(*(c.numerator for c in coeffs)),
                 math.lcm(*(c.denominator for c in coeffs)))
    lead = max(s.terms, key=_key)
    if _as_coeff_factors(lead)[0] < 0:
        g = -g
    mono = {v: k for v, k in (var_min or {}).items() if k > 0}
    divisors = [Const(1 / g)] + [_npow(Var(v), Const(Fraction(-k)))
                                 for v, k in mono.items()]
    prim = _nmul([s] + divisors)
    return g, mono, prim


def _den_mul(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def _den_expr(den: dict) -> Expr:
    return _nmul([_npow(b, Const(Fraction(k)))
                  for b, k in sorted(den.items(), key=lambda kv: _key(kv[0]))])


def _num_den(e: Expr):
    """Split into (numerator Expr, denominator factor map base -> power)."""
    if isinstance(e, (Const, Var, Exp, Ln)):
        return e, {}
    if isinstance(e, Pow):
        ex = e.exponent
        if isinstance(ex, Const) and ex.value.denominator == 1:
            n = int(ex.value)
            nb, db = _num_den(e.base)
            if n > 0:
                return _npow(nb, Const(Fraction(n))), {k: v * n for k, v in db.items()}
            m = -n
            numr = _npow(_den_expr(db), Const(Fraction(m)))
            if isinstance(nb, Const):
                if nb.value == 0:
                    raise DivisionByZero("zero denominator")
                return _nmul([numr, Const(nb.value**n)]), {}
            if isinstance(nb, Sum):
                sc, mono, prim = _mono_primitive(nb)
                den = {Var(v): k * m for v, k in mono.items()}
                den[prim] = den.get(prim, 0) + m
                return _nmul([numr, Const(sc**n)]), den
            return numr, {nb: m}
        return e, {}  # fractional or symbolic exponent: opaque atom
    if isinstance(e, Prod):
        nums = []
        den: dict = {}
        for f in e.factors:
            nf, df = _num_den(f)
            nums.append(nf)
            den = _den_mul(den, df)
        return _nmul(nums), den
    if isinstance(e, Sum):
        parts = [_num_den(t) for t in e.terms]
        common: dict = {}
        for _, d in parts:
            for k, v in d.items():
                common[k] = max(common.get(k, 0), v)
        terms = []
        for n, d in parts:
            comp = [_npow(b, Const(Fraction(common[b] - d.get(b, 0))))
                    for b in common]
            terms.append(_nmul([n] + comp))
        return _nadd(terms), common
    raise ExprError(f"cannot split {e!r}")


def numer_denom(e: Expr):
    """Return (num, den) Exprs with e == num/den; den expanded."""
    n, d = _num_den(e)
    return n, _den_expr(d)


def is_zero(e: Expr) -> bool:
    """Exact zero test for rational combinations of the tree's atoms."""
    n, _ = _num_den(e)
    return n == ZERO


def _check_rational(e: Expr, names: set):
    """Raise NotRational if a listed variable occurs inside exp/ln or under a
    fractional or symbolic power."""
    if isinstance(e, (Exp, Ln)):
        if contains_var(e.arg, names):
            raise NotRational(f"{type(e).__name__.lower()} contains a listed variable")
        return
    if isinstance(e, Pow):
        if contains_var(e.exponent, names):
            raise NotRational("variable in exponent")
        ex = e.exponent
        frac = not (isinstance(ex, Const) and ex.value.denominator == 1)
        if frac and contains_var(e.base, names):
            raise NotRational("variable under a fractional power")
        _check_rational(e.base, names)
        return
    if isinstance(e, Sum):
        for t in e.terms:
            _check_rational(t, names)
    elif isinstance(e, Prod):
        for f in e.factors:
            _check_rational(f, names)


@dataclass
class PolyCollection:
    """Coefficients of a polynomial grouped by monomials in `vars`."""

    vars: tuple
    terms: dict  # exponent tuple -> coefficient Expr (free of vars)

    def reassemble(self) -> Expr:
        parts = []
        for expo, coeff in self.terms.items():
            mono = [_npow(Var(v), Const(Fraction(k)))
                    for v, k in zip(self.vars, expo) if k]
            parts.append(_nmul([coeff] + mono))
        return _nadd(parts)


def collect(e: Expr, variables) -> PolyCollection:
    vs = tuple(variables)
    idx = {v: i for i, v in enumerate(vs)}
    acc: dict = {}
    terms = e.terms if isinstance(e, Sum) else (e,)
    for t in terms:
        if t == ZERO:
            continue
        c, fs = _as_coeff_factors(t)
        expo = [0] * len(vs)
        coeff_factors = []
        for f in fs:
            if isinstance(f, Pow) and isinstance(f.exponent, Const):
                base, r = f.base, f.exponent.value
            else:
                base, r = f, Fraction(1)
            if isinstance(base, Var) and base.name in idx:
                if r.denominator != 1 or r < 0:
                    raise NotPolynomial(f"non-polynomial power of {base.name}")
                expo[idx[base.name]] += int(r)
            else:
                if contains_var(f, vs):
                    raise NotPolynomial(f"variable inside non-monomial factor {f!r}")
                coeff_factors.append(f)
        key = tuple(expo)
        term = _mk_term(c, tuple(sorted(coeff_factors, key=_key)))
        acc[key] = _nadd([acc.get(key, ZERO), term])
    acc = {k: v for k, v in acc.items() if v != ZERO}
    return PolyCollection(vs, acc)


def _grlex_leading(pc: PolyCollection):
    if not pc.terms:
        return None
    return max(pc.terms, key=lambda k: (sum(k), k))


def normalize_rational(e: Expr, variables):
    """Write e as num/den with num, den polynomial in `variables`.

    The denominator is expanded and made monic under graded-lex order when
    its leading coefficient is rational.  Raises NotRational when a listed
    variable occurs inside exp/ln or under a fractional power.
    """
    vs = tuple(variables)
    names = set(vs)
    n, d = _num_den(e)
    den = _den_expr(d)
    _check_rational(n, names)
    _check_rational(den, names)
    pc = collect(den, vs)
    lead = _grlex_leading(pc)
    if lead is not None:
        lc = pc.terms[lead]
        if isinstance(lc, Const) and lc.value not in (0, 1):
            scale = Const(1 / lc.value)
            n = _nmul([n, scale])
            den = _nmul([den, scale])
    return n, den


# ---------------------------------------------------------------------------
# parser


_DEFAULT_VARS = ("x", "y", "p", "c", "lambda", "a1", "a2", "a3")
_FUNCS = ("exp", "ln", "sqrt")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._lex()
        self.i = 0

    def _lex(self):
        t, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = t[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < n and t[j].isdigit():
                    j += 1
                self.tokens.append(("num", t[i:j], i))
                i = j
            elif ch.isalpha():
                j = i
                while j < n and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.tokens.append(("ident", t[i:j], i))
                i = j
            elif ch in "+-*/^()":
                self.tokens.append((ch, ch, i))
                i += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
        self.tokens.append(("end", "", n))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


class _Parser:
    def __init__(self, text: str, variables, funcs):
        self.lx = _Lexer(text)
        self.variables = variables
        self.funcs = funcs

    def expect(self, kind):
        tok = self.lx.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, got {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.lx.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.lx.peek()[0] in ("+", "-"):
            op = self.lx.next()[0]
            t = self.term()
            terms.append(t if op == "+" else _nmul([NEG_ONE, t]))
        return _nadd(terms)

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.lx.peek()[0] in ("*", "/"):
            op = self.lx.next()[0]
            f = self.factor()
            factors.append(f if op == "*" else _npow(f, NEG_ONE))
        return _nmul(factors)

    def factor(self) -> Expr:
        a = self.atom()
        if self.lx.peek()[0] == "^":
            self.lx.next()
            e = self.factor()
            return _npow(a, e)
        return a

    def atom(self) -> Expr:
        tok = self.lx.next()
        kind, text, pos = tok
        if kind == "num":
            return Const(Fraction(int(text)))
        if kind == "-":
            # unary minus applies after exponentiation: -p^2 == -(p^2)
            return _nmul([NEG_ONE, self.factor()])
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "ident":
            if text in self.funcs:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                if text == "exp":
                    return _nexp(arg)
                if text == "ln":
                    return _nln(arg)
                return _npow(arg, HALF)
            if text in self.variables:
                return Var(text)
            raise ParseError(f"unknown identifier {text!r}", pos)
        raise ParseError(f"unexpected token {text!r}", pos)


def parse(text: str, extra_vars=()) -> Expr:
    """Parse the infix grammar into a normalized Expr."""
    variables = set(_DEFAULT_VARS) | set(extra_vars)
    return _Parser(text, variables, set(_FUNCS)).parse()


# ---------------------------------------------------------------------------
# renderer


def _needs_parens_in_product(e: Expr) -> bool:
    if isinstance(e, Sum):
        return True
    if isinstance(e, Const):
        return e.value < 0 or e.value.denominator != 1
    return False


def _render_base(e: Expr) -> str:
    if isinstance(e, (Var, Exp, Ln)):
        return render(e)
    if isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1:
        return render(e)
    return "(" + render(e) + ")"


def _render_exponent(e: Expr) -> str:
    if isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1:
        return render(e)
    return "(" + render(e) + ")"


def _render_factor(base: Expr, r: Fraction) -> str:
    if r == 1:
        s = render(base)
        if _needs_parens_in_product(base):
            s = "(" + s + ")"
        return s
    if r == Fraction(1, 2):
        return "sqrt(" + render(base) + ")"
    return _render_base(base) + "^" + _render_exponent(Const(r))


def render(e: Expr) -> str:
    """Render to the input grammar; parse(render(e)) == e."""
    if isinstance(e, Const):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator)
        if v < 0:
            return f"-{-v.numerator}/{v.denominator}"
        return f"{v.numerator}/{v.denominator}"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Exp):
        return "exp(" + render(e.arg) + ")"
    if isinstance(e, Ln):
        return "ln(" + render(e.arg) + ")"
    if isinstance(e, Pow):
        ex = e.exponent
        if isinstance(ex, Const):
            r = ex.value
            if r < 0:
                return "1/" + _render_factor(e.base, -r)
            return _render_factor(e.base, r)
        return _render_base(e.base) + "^" + "(" + render(ex) + ")"
    if isinstance(e, Prod):
        coeff, fs = _as_coeff_factors(e)
        nums, dens = [], []
        for f in fs:
            if isinstance(f, Pow) and isinstance(f.exponent, Const) and f.exponent.value < 0:
                dens.append(_render_factor(f.base, -f.exponent.value))
            else:
                nums.append(_render_factor(f, Fraction(1)))
        sign = ""
        if coeff < 0:
            sign = "-"
            coeff = -coeff
        if coeff != 1 or not nums:
            if coeff.denominator == 1:
                nums.insert(0, str(coeff.numerator))
            else:
                nums.insert(0, f"{coeff.numerator}/{coeff.denominator}")
        out = sign + "*".join(nums)
        for d in dens:
            out += "/" + d
        return out
    if isinstance(e, Sum):
        parts = []
        for i, t in enumerate(e.terms):
            c, _ = _as_coeff_factors(t)
            if i == 0:
                parts.append(render(t))
            elif c < 0:
                parts.append(" - " + render(_nmul([NEG_ONE, t])))
            else:
                parts.append(" + " + render(t))
        return "".join(parts)
    raise ExprError(f"cannot render {e!r}")
