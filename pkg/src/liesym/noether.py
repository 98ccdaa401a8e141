"""Jacobi Last Multiplier Lagrangian and Noether machinery.

Determinant-based multiplier, double p-integration to a Lagrangian,
Euler-Lagrange operator, variational-symmetry residual, Noether conserved
quantity, and a trajectory-based conservation audit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import exprcore as ex
from . import numeric as nm
from .detsolve import OdeSecondOrder, VectorFieldGen, prolong

X, Y, P, Q = ex.var("x"), ex.var("y"), ex.var("p"), ex.var("q")

PAPER = "PAPER"
STANDARD = "STANDARD"


class UnsupportedMultiplierShape(Exception):
    pass


class IntegrationBlowup(Exception):
    pass


def _det3(rows):
    """3x3 determinant, computed by two expansion orders which must agree."""
    (a, b, c), (d, e, f), (g, h, i) = rows
    m1 = lambda u, v: ex.mul(u, v)
    first_row = ex.add(
        ex.mul(a, ex.add(m1(e, i), ex.mul(ex.num(-1), m1(f, h)))),
        ex.mul(ex.num(-1), b, ex.add(m1(d, i), ex.mul(ex.num(-1), m1(f, g)))),
        ex.mul(c, ex.add(m1(d, h), ex.mul(ex.num(-1), m1(e, g)))))
    last_col = ex.add(
        ex.mul(c, ex.add(m1(d, h), ex.mul(ex.num(-1), m1(e, g)))),
        ex.mul(ex.num(-1), f, ex.add(m1(a, h), ex.mul(ex.num(-1), m1(b, g)))),
        ex.mul(i, ex.add(m1(a, e), ex.mul(ex.num(-1), m1(b, d)))))
    if not ex.is_zero(ex.add(first_row, ex.mul(ex.num(-1), last_col))):
        raise ex.ExprError("determinant expansion orders disagree")
    return first_row


def jlm_determinant(ode: OdeSecondOrder, g1: VectorFieldGen,
                    g2: VectorFieldGen, first_row: str = PAPER) -> ex.Expr:
    """Jacobi Last Multiplier determinant with y'' replaced by omega.

    first_row PAPER: (x, p, omega); STANDARD: (1, p, omega)."""
    r = X if first_row == PAPER else ex.ONE
    p1 = ex.substitute(prolong(g1).eta1, {"q": ode.omega})
    p2 = ex.substitute(prolong(g2).eta1, {"q": ode.omega})
    return _det3([
        (r, P, ode.omega),
        (g1.xi, g1.eta, p1),
        (g2.xi, g2.eta, p2),
    ])


@dataclass(frozen=True)
class Lagrangian:
    L: ex.Expr


def lagrangian_from_multiplier(M: ex.Expr) -> Lagrangian:
    """Integrate M = L_pp twice in p, dropping the gauge functions f1, f2
    and any purely p-free remainder.

    Supported shapes: M free of p (L = M p^2/2) and
    M = alpha(x,y) / (beta(x,y) - p)."""
    M = ex.normalize(M)
    num, den = ex.numer_denom(M)
    if ex.contains_var(num, ("p",)):
        raise UnsupportedMultiplierShape("numerator must be free of p")
    try:
        pc = ex.collect(den, ("p",))
    except ex.NotPolynomial:
        raise UnsupportedMultiplierShape("denominator not polynomial in p")
    if any(k[0] > 1 for k in pc.terms):
        raise UnsupportedMultiplierShape("denominator degree > 1 in p")
    d1 = pc.terms.get((1,), ex.ZERO)
    if ex.is_zero(d1):
        L = ex.mul(ex.HALF, M, P, P)
    else:
        d0 = pc.terms.get((0,), ex.ZERO)
        neg = ex.num(-1)
        alpha = ex.mul(neg, num, ex.pow_(d1, ex.num(-1)))
        beta = ex.mul(neg, d0, ex.pow_(d1, ex.num(-1)))
        u = ex.add(beta, ex.mul(neg, P))  # beta - p
        # int int M dp dp = alpha[(beta-p)ln(beta-p) - (beta-p)];
        # the p-free parts join the discarded gauge terms
        L = ex.add(ex.mul(alpha, u, ex.ln_(u)), ex.mul(alpha, P))
    L = ex.normalize(L)
    roundtrip = ex.add(ex.diff(ex.diff(L, "p"), "p"), ex.mul(ex.num(-1), M))
    if not ex.is_zero(roundtrip):
        raise UnsupportedMultiplierShape("round-trip L_pp != M")
    return Lagrangian(L)


def euler_lagrange(L: Lagrangian) -> ex.Expr:
    """E(L) = L_y - D_x(L_p), with q the y'' symbol."""
    return ex.add(ex.diff(L.L, "y"),
                  ex.mul(ex.num(-1), ex.total_derivative(ex.diff(L.L, "p"))))


@dataclass
class ElMatchReport:
    max_residual: float
    samples: int
    tol: float
    passed: bool
    multiplier_estimates: list


def el_matches_ode(L: Lagrangian, ode: OdeSecondOrder, tol: float = 1e-9,
                   samples: int = 50, seed: int = 0) -> ElMatchReport:
    """Does E(L) vanish on q = omega?  Also reports E(L)/(q - omega)
    sampled at q = omega + 1 as a multiplier estimate."""
    E = euler_lagrange(L)
    on_shell = ex.substitute(E, {"q": ode.omega})
    off_shell = ex.substitute(E, {"q": ex.add(ode.omega, ex.ONE)})
    avoid = [(b, 1e-3) for b in ode.singular_locus]
    dom = nm.SampleDomain(
        bounds={"x": (0.3, 2.0), "y": (0.3, 2.0), "p": (-2.0, 0.5)},
        avoid=avoid,
        positive=_ln_positivity(L.L))
    worst = 0.0
    ests = []
    n = 0
    for point in nm.sample(dom, samples, seed):
        try:
            worst = max(worst, abs(ex.eval_numeric(on_shell, point)))
            ests.append(ex.eval_numeric(off_shell, point))
            n += 1
        except ex.DomainError:
            continue
    return ElMatchReport(worst, n, tol, n > 0 and worst < tol, ests[:10])


def _ln_positivity(e: ex.Expr):
    """Constraints keeping every ln argument strictly positive."""
    out = []
    stack = [e]
    seen = set()
    while stack:
        g = stack.pop()
        if isinstance(g, ex.Ln) and g.arg not in seen:
            seen.add(g.arg)
            out.append((g.arg, 1e-3))
            stack.append(g.arg)
        elif isinstance(g, ex.Sum):
            stack.extend(g.terms)
        elif isinstance(g, ex.Prod):
            stack.extend(g.factors)
        elif isinstance(g, ex.Pow):
            stack.extend((g.base, g.exponent))
        elif isinstance(g, (ex.Exp, ex.Ln)):
            stack.append(g.arg)
    return out


def variational_residual(L: Lagrangian, gen: VectorFieldGen,
                         f: ex.Expr) -> ex.Expr:
    """xi L_x + xi_x L + eta L_y + eta_[x] L_p - D_x f, for gauge f(x, y)."""
    eta1 = prolong(gen).eta1
    dxf = ex.add(ex.diff(f, "x"), ex.mul(P, ex.diff(f, "y")))
    return ex.add(
        ex.mul(gen.xi, ex.diff(L.L, "x")),
        ex.mul(ex.diff(gen.xi, "x"), L.L),
        ex.mul(gen.eta, ex.diff(L.L, "y")),
        ex.mul(eta1, ex.diff(L.L, "p")),
        ex.mul(ex.num(-1), dxf),
    )


@dataclass(frozen=True)
class ConservedQuantity:
    I: ex.Expr


def conserved_quantity(L: Lagrangian, gen: VectorFieldGen,
                       f: ex.Expr) -> ConservedQuantity:
    """I = (xi p - eta) L_p - xi L + f."""
    I = ex.add(
        ex.mul(ex.add(ex.mul(gen.xi, P), ex.mul(ex.num(-1), gen.eta)),
               ex.diff(L.L, "p")),
        ex.mul(ex.num(-1), gen.xi, L.L),
        f,
    )
    return ConservedQuantity(ex.normalize(I))


@dataclass
class ConservationReport:
    trajectories: int
    max_drift: float
    tol: float
    passed: bool
    step: float
    span: float


def check_conserved(ode: OdeSecondOrder, I: ConservedQuantity,
                    trajectories: int = 20, tol: float = 1e-6,
                    seed: int = 0, h: float = 1e-3,
                    span: float = 1.0) -> ConservationReport:
    """Evaluate I along RK4 trajectories from random non-singular initial
    conditions; pass iff the relative drift stays below tol everywhere."""
    avoid = [(b, 1e-2) for b in ode.singular_locus]
    dom = nm.SampleDomain(
        bounds={"x": (0.4, 1.0), "y": (0.4, 1.0), "p": (-1.0, 1.0)},
        avoid=avoid,
        positive=_ln_positivity(I.I))
    steps = int(round(span / h))
    import random as _random
    rng = _random.Random(seed)
    done = 0
    worst = 0.0
    attempts = 0
    while done < trajectories:
        attempts += 1
        if attempts > 50 * trajectories:
            raise IntegrationBlowup("could not complete enough trajectories")
        point = nm.sample(dom, 1, rng)[0]
        traj = nm.rk4_integrate(ode, point["x"], point["y"], point["p"],
                                h, steps)
        if traj.reason != "completed" and len(traj.xs) < steps // 2:
            continue
        try:
            vals = [ex.eval_numeric(I.I, {"x": a, "y": b, "p": c})
                    for a, b, c in zip(traj.xs, traj.ys, traj.ps)]
        except ex.DomainError:
            continue
        base = vals[0]
        drift = max(abs(v - base) for v in vals) / max(1.0, abs(base))
        worst = max(worst, drift)
        done += 1
    return ConservationReport(done, worst, tol, worst < tol, h, span)


def load_noether_fixture(path) -> dict:
    """{"lagrangian": expr, "generator": {"xi": expr, "eta": expr},
    "gauge": expr}"""
    with open(path) as fh:
        d = json.load(fh)
    return {
        "lagrangian": Lagrangian(ex.parse(d["lagrangian"])),
        "generator": VectorFieldGen(ex.parse(d["generator"]["xi"]),
                                    ex.parse(d["generator"]["eta"])),
        "gauge": ex.parse(d["gauge"]),
    }
