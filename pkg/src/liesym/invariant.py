"""Invariant solutions from symmetry generators.

Invariant-curve condition Q = eta - p*xi, reduction to a first-order ODE,
a rule-table solver for the linear/separable class, and symbolic/numeric
verification of candidate solutions against the second-order ODE.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import exprcore as ex
from . import numeric as nm
from .detsolve import OdeSecondOrder, VectorFieldGen

X, Y, P, C = ex.var("x"), ex.var("y"), ex.var("p"), ex.var("c")


@dataclass(frozen=True)
class FirstOrderOde:
    rhs: ex.Expr  # y' = rhs(x, y)


@dataclass(frozen=True)
class AlgebraicLocus:
    relation: ex.Expr  # the curve eta(x, y) = 0


@dataclass(frozen=True)
class SolutionForm:
    kind: str                    # explicit | locus | unsolved
    expr: ex.Expr | None = None  # explicit: y(x, c); locus: relation
    ode: FirstOrderOde | None = None


def invariant_condition(gen: VectorFieldGen) -> ex.Expr:
    """Q = eta - p * xi."""
    return ex.add(gen.eta, ex.mul(ex.num(-1), P, gen.xi))


def reduce(gen: VectorFieldGen):
    if ex.is_zero(gen.xi):
        return AlgebraicLocus(ex.normalize(gen.eta))
    num, den = ex.numer_denom(ex.mul(gen.eta, ex.pow_(gen.xi, ex.num(-1))))
    return FirstOrderOde(ex.mul(num, ex.pow_(den, ex.num(-1))))


# ---------------------------------------------------------------------------
# univariate rational simplification (cancel common polynomial factors in x)


def _poly_coeffs(e: ex.Expr):
    """Dense Fraction coefficient list (low to high) of a polynomial in x,
    or None if e is not one."""
    try:
        pc = ex.collect(ex.normalize(e), ("x",))
    except ex.NotPolynomial:
        return None
    out = [Fraction(0)] * (max((k[0] for k in pc.terms), default=0) + 1)
    for (k,), c in pc.terms.items():
        if not isinstance(c, ex.Const):
            return None
        out[k] = c.value
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        k = len(a) - len(b)
        f = a[-1] / b[-1]
        q[k] = f
        for i, c in enumerate(b):
            a[i + k] -= f * c
        a.pop()
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return q, a


def _poly_gcd(a, b):
    while any(b):
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if a[-1] not in (0, 1):
        a = [c / a[-1] for c in a]
    return a


def _poly_expr(coeffs):
    return ex.add(*[ex.mul(ex.num(c), ex.pow_(X, ex.num(k)))
                    for k, c in enumerate(coeffs) if c]) or ex.ZERO


def _cancel_x(e: ex.Expr) -> ex.Expr:
    """Cancel common polynomial factors between numerator and denominator
    of a univariate rational function of x; other shapes pass through."""
    try:
        num, den = ex.numer_denom(e)
    except ex.ExprError:
        return e
    pn, pd = _poly_coeffs(num), _poly_coeffs(den)
    if pn is None or pd is None or not any(pd):
        return e
    g = _poly_gcd(pn, pd)
    if len(g) > 1:
        pn, _ = _poly_divmod(pn, g)
        pd, _ = _poly_divmod(pd, g)
    return ex.normalize(ex.mul(_poly_expr(pn),
                               ex.pow_(_poly_expr(pd), ex.num(-1))))


# ---------------------------------------------------------------------------
# antiderivative rule table (in x)


def _integrate_term(term: ex.Expr):
    coeff, factors = ex._as_coeff_factors(term)
    exps = [f for f in factors if isinstance(f, ex.Exp)]
    rest = [f for f in factors if not isinstance(f, ex.Exp)]
    if exps:
        # rule: k * g'(x) e^{g(x)} -> k e^{g(x)}
        if len(exps) > 1:
            return None
        g = exps[0].arg
        dg = ex.diff(g, "x")
        if ex.is_zero(dg):
            inner = _integrate_term(ex._mk_term(coeff, tuple(rest)))
            return ex.mul(exps[0], inner) if inner is not None else None
        try:
            ratio = ex.normalize(ex.mul(ex._mk_term(coeff, tuple(rest)),
                                        ex.pow_(dg, ex.num(-1))))
        except ex.DivisionByZero:
            return None
        if isinstance(ratio, ex.Const):
            return ex.mul(ratio, exps[0])
        return None
    if not factors:
        return ex.mul(ex.num(coeff), X)
    if len(factors) != 1:
        return None
    f = factors[0]
    if isinstance(f, ex.Pow) and isinstance(f.exponent, ex.Const):
        base, n = f.base, f.exponent.value
    else:
        base, n = f, Fraction(1)
    dbase = ex.diff(base, "x")
    if not isinstance(dbase, ex.Const) or ex.contains_var(base, ("y", "p")):
        return None
    a = dbase.value
    if a == 0:
        return None
    if n == -1:
        # rules 1/x and 1/(x - r) (any linear base)
        return ex.mul(ex.num(coeff / a), ex.ln_(base))
    return ex.mul(ex.num(coeff / (a * (n + 1))),
                  ex.pow_(base, ex.num(n + 1)))


def integrate_x(e: ex.Expr):
    """Antiderivative in x through the rule table; None when the table is
    insufficient."""
    e = ex.normalize(e)
    terms = e.terms if isinstance(e, ex.Sum) else (e,)
    parts = []
    for t in terms:
        if t == ex.ZERO:
            continue
        anti = _integrate_term(t)
        if anti is None:
            return None
        parts.append(anti)
    return ex.add(*parts) if parts else ex.ZERO


def solve_first_order(f: FirstOrderOde) -> SolutionForm:
    """Linear class y' = a(x) y + b(x) (covering the separable-lite cases
    a = 0 and b = 0) via integrating factor; antiderivatives from the rule
    table only.  Returns kind 'unsolved' when the table is insufficient."""
    unsolved = SolutionForm("unsolved", ode=f)
    try:
        pc = ex.collect(ex.normalize(f.rhs), ("y",))
    except ex.NotPolynomial:
        return unsolved
    if any(k[0] > 1 for k in pc.terms):
        return unsolved
    a = _cancel_x(pc.terms.get((1,), ex.ZERO))
    b = _cancel_x(pc.terms.get((0,), ex.ZERO))
    A = integrate_x(a)
    if A is None:
        return unsolved
    mu = ex.exp_(ex.mul(ex.num(-1), A))  # integrating factor
    B = integrate_x(ex.normalize(ex.mul(mu, b)))
    if B is None:
        return unsolved
    sol = ex.normalize(ex.mul(ex.add(B, C), ex.pow_(mu, ex.num(-1))))
    residual = ex.add(ex.diff(sol, "x"),
                      ex.mul(ex.num(-1), ex.substitute(f.rhs, {"y": sol})))
    if not ex.is_zero(residual):
        return unsolved
    return SolutionForm("explicit", expr=sol)


# ---------------------------------------------------------------------------
# verification


@dataclass
class InvarianceReport:
    checkable: bool
    exact: bool = False
    max_residual: float = 0.0
    samples: int = 0
    passed: bool = False


def verify_invariance(gen: VectorFieldGen, sol: SolutionForm,
                      samples: int = 100, tol: float = 1e-9,
                      seed: int = 0, domain=(0.1, 3.0)) -> InvarianceReport:
    """Check Q = 0 on the curve y = sol(x, c): exact when normalization
    reaches zero, otherwise sampled numerically."""
    if sol.kind != "explicit":
        return InvarianceReport(checkable=False)
    q = ex.substitute(invariant_condition(gen),
                      {"y": sol.expr, "p": ex.diff(sol.expr, "x")})
    if ex.is_zero(q):
        return InvarianceReport(checkable=True, exact=True, passed=True)
    dom = nm.SampleDomain(bounds={"x": domain, "c": (-2.0, 2.0)})
    worst = 0.0
    for point in nm.sample(dom, samples, seed):
        try:
            worst = max(worst, abs(ex.eval_numeric(q, point)))
        except ex.DomainError:
            continue
    return InvarianceReport(checkable=True, exact=False, max_residual=worst,
                            samples=samples, passed=worst < tol)


@dataclass
class OdeCheckReport:
    checkable: bool
    max_residual: float = 0.0
    samples: int = 0
    tol: float = 0.0
    passed: bool = False


def verify_on_ode(ode: OdeSecondOrder, sol: SolutionForm, tol: float = 1e-9,
                  samples: int = 100, seed: int = 0,
                  domain=(0.1, 3.0)) -> OdeCheckReport:
    """Sample y'' - omega on the curve y = sol(x, c), avoiding the
    singular locus."""
    if sol.kind != "explicit":
        return OdeCheckReport(checkable=False)
    y = sol.expr
    dy = ex.diff(y, "x")
    residual = ex.add(ex.diff(dy, "x"),
                      ex.mul(ex.num(-1),
                             ex.substitute(ode.omega, {"y": y, "p": dy})))
    avoid = [(ex.substitute(b, {"y": y}), 1e-3) for b in ode.singular_locus]
    dom = nm.SampleDomain(bounds={"x": domain, "c": (-2.0, 2.0)}, avoid=avoid)
    worst = 0.0
    n = 0
    for point in nm.sample(dom, samples, seed):
        try:
            worst = max(worst, abs(ex.eval_numeric(residual, point)))
            n += 1
        except ex.DomainError:
            continue
    return OdeCheckReport(checkable=True, max_residual=worst, samples=n,
                          tol=tol, passed=n > 0 and worst < tol)


def load_solution_fixture(d) -> dict:
    """Row fixture: {"generator": [a1,a2,a3], "solution": expr or null,
    "domain": [lo, hi], optional "Q", "name"}."""
    out = dict(d)
    out["solution"] = (ex.parse(d["solution"])
                       if d.get("solution") else None)
    if d.get("Q"):
        out["Q"] = ex.parse(d["Q"])
    return out


def load_solutions(path) -> list:
    with open(path) as fh:
        return [load_solution_fixture(d) for d in json.load(fh)]
