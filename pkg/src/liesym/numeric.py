"""Deterministic numeric services.

Fixed-step RK4 integration of y'' = omega(x, y, y'), seeded rejection
sampling with singularity avoidance, and finite-difference derivative
checks.  All randomness goes through an explicitly seeded
``random.Random`` (Mersenne Twister) so runs are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import exprcore as ex

BLOWUP_LIMIT = 1e8
SINGULAR_PROXIMITY = 1e-4


class DomainTooRestrictive(Exception):
    pass


@dataclass
class Trajectory:
    xs: list
    ys: list
    ps: list
    step: float
    initial: tuple
    reason: str  # completed | singularity | blowup


@dataclass
class SampleDomain:
    """Box bounds per variable plus avoidance constraints.

    Every emitted sample satisfies |e| >= eps for (e, eps) in `avoid` and
    e >= eps for (e, eps) in `positive`.
    """

    bounds: dict  # var -> (lo, hi)
    avoid: list = field(default_factory=list)      # (Expr, eps)
    positive: list = field(default_factory=list)   # (Expr, eps)


def _admissible(domain: SampleDomain, point: dict) -> bool:
    try:
        for e, eps in domain.avoid:
            if abs(ex.eval_numeric(e, point)) < eps:
                return False
        for e, eps in domain.positive:
            if ex.eval_numeric(e, point) < eps:
                return False
    except ex.DomainError:
        return False
    return True


def sample(domain: SampleDomain, n: int, seed) -> list:
    """n points from the domain; deterministic for a fixed seed."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    out = []
    for _ in range(n):
        for _attempt in range(1000):
            point = {v: rng.uniform(lo, hi) for v, (lo, hi) in domain.bounds.items()}
            if _admissible(domain, point):
                out.append(point)
                break
        else:
            raise DomainTooRestrictive(f"no admissible point in {domain.bounds}")
    return out


def rk4_integrate(ode, x0: float, y0: float, p0: float, h: float, steps: int) -> Trajectory:
    """Classic RK4 on the first-order system (y' = p, p' = omega).

    Halts early with a reason when |y| + |p| exceeds 1e8 or the state comes
    within 1e-4 of the singular locus.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    omega = ode.omega
    locus = ode.singular_locus

    def f(x, y, p):
        return p, ex.eval_numeric(omega, {"x": x, "y": y, "p": p})

    def near_singular(x, y, p):
        point = {"x": x, "y": y, "p": p}
        for den in locus:
            try:
                if abs(ex.eval_numeric(den, point)) < SINGULAR_PROXIMITY:
                    return True
            except ex.DomainError:
                return True
        return False

    xs, ys, ps = [x0], [y0], [p0]
    x, y, p = x0, y0, p0
    reason = "completed"
    for _ in range(steps):
        if near_singular(x, y, p):
            reason = "singularity"
            break
        try:
            k1y, k1p = f(x, y, p)
            k2y, k2p = f(x + h / 2, y + h / 2 * k1y, p + h / 2 * k1p)
            k3y, k3p = f(x + h / 2, y + h / 2 * k2y, p + h / 2 * k2p)
            k4y, k4p = f(x + h, y + h * k3y, p + h * k3p)
        except ex.DomainError:
            reason = "singularity"
            break
        y = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        x = x + h
        xs.append(x)
        ys.append(y)
        ps.append(p)
        if abs(y) + abs(p) > BLOWUP_LIMIT:
            reason = "blowup"
            break
    return Trajectory(xs, ys, ps, h, (x0, y0, p0), reason)


@dataclass
class FiniteDiffReport:
    max_abs_error: float
    passed: bool
    points: int
    tol: float


def finite_diff_check(e, v: str, points: list, tol: float) -> FiniteDiffReport:
    """Compare diff(e, v) against Richardson-extrapolated central differences
    at the given points."""
    de = ex.diff(e, v)
    h = 1e-5
    worst = 0.0
    for point in points:
        def shifted(delta):
            q = dict(point)
            q[v] = q[v] + delta
            return ex.eval_numeric(e, q)

        d_h = (shifted(h) - shifted(-h)) / (2 * h)
        d_h2 = (shifted(h / 2) - shifted(-h / 2)) / h
        richardson = (4 * d_h2 - d_h) / 3
        exact = ex.eval_numeric(de, point)
        scale = max(1.0, abs(exact))
        worst = max(worst, abs(richardson - exact) / scale)
    return FiniteDiffReport(worst, worst < tol, len(points), tol)
