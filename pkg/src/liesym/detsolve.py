"""Point symmetries of y'' = omega(x, y, y').

Second prolongation, linearized symmetry condition, determining equations
under a polynomial ansatz, exact nullspace solve, and a numeric residual
audit for candidate generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import exprcore as ex
from . import linalg as la
from . import numeric as nm

X, Y, P, Q = ex.var("x"), ex.var("y"), ex.var("p"), ex.var("q")


@dataclass(frozen=True)
class OdeSecondOrder:
    omega: ex.Expr
    name: str = "ode"
    singular_locus: tuple = field(default=())

    @staticmethod
    def make(omega: ex.Expr, name: str = "ode") -> "OdeSecondOrder":
        omega = ex.normalize(omega)
        # normalize_rational both validates rationality in (x,y,p) and
        # exposes the denominator factors for the sampler to avoid
        ex.normalize_rational(omega, ("x", "y", "p"))
        _, den_map = ex._num_den(omega)
        locus = tuple(b for b in den_map
                      if ex.contains_var(b, ("x", "y", "p")))
        return OdeSecondOrder(omega, name, locus)


def load_ode(path) -> OdeSecondOrder:
    with open(path) as fh:
        data = json.load(fh)
    return OdeSecondOrder.make(ex.parse(data["omega"]), data.get("name", "ode"))


@dataclass(frozen=True)
class VectorFieldGen:
    xi: ex.Expr
    eta: ex.Expr

    def is_zero(self) -> bool:
        return ex.is_zero(self.xi) and ex.is_zero(self.eta)

    def apply(self, f: ex.Expr) -> ex.Expr:
        """Directional derivative xi f_x + eta f_y."""
        return ex.add(ex.mul(self.xi, ex.diff(f, "x")),
                      ex.mul(self.eta, ex.diff(f, "y")))


@dataclass(frozen=True)
class ProlongedCoeffs:
    eta1: ex.Expr
    eta2: ex.Expr


def prolong(gen: VectorFieldGen) -> ProlongedCoeffs:
    """eta1 = D_x[eta] - (D_x[xi]) p, eta2 = D_x[eta1] - (D_x[xi]) q,
    where D_x = d/dx + p d/dy + q d/dp and q stands for y''."""
    dxi = ex.total_derivative(gen.xi)
    eta1 = ex.add(ex.total_derivative(gen.eta), ex.mul(ex.num(-1), dxi, P))
    eta2 = ex.add(ex.total_derivative(eta1), ex.mul(ex.num(-1), dxi, Q))
    return ProlongedCoeffs(eta1, eta2)


def symmetry_condition(ode: OdeSecondOrder, gen: VectorFieldGen) -> ex.Expr:
    """eta2|_{q<-omega} - xi*omega_x - eta*omega_y - eta1*omega_p.

    Identically zero exactly when gen is a point symmetry of the ODE.
    """
    pr = prolong(gen)
    w = ode.omega
    return ex.add(
        ex.substitute(pr.eta2, {"q": w}),
        ex.mul(ex.num(-1), gen.xi, ex.diff(w, "x")),
        ex.mul(ex.num(-1), gen.eta, ex.diff(w, "y")),
        ex.mul(ex.num(-1), pr.eta1, ex.diff(w, "p")),
    )


def is_point_symmetry(ode: OdeSecondOrder, gen: VectorFieldGen) -> bool:
    """Exact check: the symmetry condition normalizes to zero."""
    return ex.is_zero(symmetry_condition(ode, gen))


@dataclass(frozen=True)
class DeterminingSystem:
    unknowns: tuple        # coefficient symbol names, fixed order
    rows: tuple            # tuples of Fraction, one per monomial equation
    monomials: tuple       # "x^a y^b p^c" label per row


def _ansatz_coeffs(degree: int):
    """(c_ij, d_ij) unknown names and the monomial exponents they multiply,
    in deterministic (i, j) lexicographic order."""
    expos = [(i, j) for i in range(degree + 1)
             for j in range(degree + 1 - i)]
    cs = [f"c{i}_{j}" for i, j in expos]
    ds = [f"d{i}_{j}" for i, j in expos]
    return expos, cs, ds


def _ansatz_fields(degree: int):
    expos, cs, ds = _ansatz_coeffs(degree)
    mono = [ex.mul(ex.pow_(X, i), ex.pow_(Y, j)) for i, j in expos]
    xi = ex.add(*[ex.mul(ex.var(c), m) for c, m in zip(cs, mono)])
    eta = ex.add(*[ex.mul(ex.var(d), m) for d, m in zip(ds, mono)])
    return tuple(cs + ds), VectorFieldGen(xi, eta)


def determining_system(ode: OdeSecondOrder, degree: int) -> DeterminingSystem:
    """Linear determining equations for a polynomial ansatz of total
    degree <= degree in (x, y)."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    unknowns, gen = _ansatz_fields(degree)
    cond = symmetry_condition(ode, gen)
    numer, _den = ex.numer_denom(cond)
    by_mono = ex.collect(numer, ("x", "y", "p"))
    idx = {u: k for k, u in enumerate(unknowns)}
    rows, labels = [], []
    for expo in sorted(by_mono.terms):
        coeff = by_mono.terms[expo]
        lin = ex.collect(coeff, unknowns)
        row = [Fraction(0)] * len(unknowns)
        for uexpo, c in lin.terms.items():
            if sum(uexpo) != 1 or not isinstance(c, ex.Const):
                raise ex.ExprError("determining equation not linear in ansatz")
            row[uexpo.index(1)] = c.value
        rows.append(tuple(row))
        a, b, cdeg = expo
        labels.append(f"x^{a} y^{b} p^{cdeg}")
    return DeterminingSystem(unknowns, tuple(rows), tuple(labels))


def solve_symmetries(ode: OdeSecondOrder, degree: int = 2) -> list:
    """Exact nullspace basis of the determining system, reduced-echelon over
    the ansatz coefficient ordering, integer-scaled with content 1."""
    sysm = determining_system(ode, degree)
    if not sysm.rows:
        basis = la.identity(len(sysm.unknowns))
    else:
        basis = la.nullspace([list(r) for r in sysm.rows], len(sysm.unknowns))
    basis = la.span_rref(basis)
    out = []
    expos, cs, _ds = _ansatz_coeffs(degree)
    n = len(expos)
    for vec in basis:
        vec = la.scale_to_integer(vec)
        xi = ex.add(*[ex.mul(ex.num(vec[k]), ex.pow_(X, i), ex.pow_(Y, j))
                      for k, (i, j) in enumerate(expos)])
        eta = ex.add(*[ex.mul(ex.num(vec[n + k]), ex.pow_(X, i), ex.pow_(Y, j))
                       for k, (i, j) in enumerate(expos)])
        out.append(VectorFieldGen(xi, eta))
    return out


@dataclass
class SymmetryAudit:
    name: str
    max_residual: float
    samples: int
    tol: float
    passed: bool


def is_symmetry(ode: OdeSecondOrder, gen: VectorFieldGen, samples: int = 50,
                tol: float = 1e-9, seed: int = 0,
                name: str = "gen") -> SymmetryAudit:
    """Numeric audit: symmetry-condition residual at random points that keep
    every denominator at magnitude >= 1e-3."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    cond = symmetry_condition(ode, gen)
    dom = nm.SampleDomain(
        bounds={"x": (0.3, 2.0), "y": (0.3, 2.0), "p": (-2.0, 2.0)},
        avoid=[(b, 1e-3) for b in ode.singular_locus],
    )
    worst = 0.0
    for point in nm.sample(dom, samples, seed):
        worst = max(worst, abs(ex.eval_numeric(cond, point)))
    return SymmetryAudit(name, worst, samples, tol, worst < tol)
