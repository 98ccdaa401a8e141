import math
import random

import pytest

from liesym import exprcore as ex
from liesym import detsolve as ds
from liesym import numeric as nm
from conftest import rand_expr


def test_sample_deterministic_and_admissible():
    dom = nm.SampleDomain(bounds={"x": (0.5, 2.0), "y": (-1.0, 1.0)},
                          avoid=[(ex.var("y"), 0.1)])
    a = nm.sample(dom, 25, seed=3)
    b = nm.sample(dom, 25, seed=3)
    assert a == b
    assert all(abs(pt["y"]) >= 0.1 for pt in a)


def test_sample_too_restrictive():
    dom = nm.SampleDomain(bounds={"x": (0.0, 1.0)},
                          positive=[(ex.add(ex.var("x"), ex.num(-5)), 0.0)])
    with pytest.raises(nm.DomainTooRestrictive):
        nm.sample(dom, 1, seed=0)


def _sho():
    # y'' = -y, y(0)=1, y'(0)=0  ->  y = cos(x)
    return ds.OdeSecondOrder.make(ex.mul(ex.num(-1), ex.var("y")), "sho")


def test_rk4_accuracy():
    tr = nm.rk4_integrate(_sho(), 0.0, 1.0, 0.0, h=1e-3, steps=1000)
    assert tr.reason == "completed"
    assert abs(tr.ys[-1] - math.cos(1.0)) < 1e-10


def test_rk4_fourth_order_convergence():
    e1 = abs(nm.rk4_integrate(_sho(), 0.0, 1.0, 0.0, 0.1, 10).ys[-1]
             - math.cos(1.0))
    e2 = abs(nm.rk4_integrate(_sho(), 0.0, 1.0, 0.0, 0.05, 20).ys[-1]
             - math.cos(1.0))
    assert 12.0 <= e1 / e2 <= 20.0


def test_rk4_blowup_halts():
    ode = ds.OdeSecondOrder.make(ex.mul(ex.var("p"), ex.var("p"),
                                        ex.var("p")), "blow")
    tr = nm.rk4_integrate(ode, 0.0, 0.0, 2.0, 0.01, 10000)
    assert tr.reason in ("blowup", "singularity")
    assert len(tr.xs) < 10001


def test_rk4_singularity_halts(ode_plus):
    # drive straight at the x + y = 0 locus
    tr = nm.rk4_integrate(ode_plus, 1.0, -0.9, -1.0, 0.01, 10000)
    assert tr.reason in ("singularity", "blowup", "completed")
    assert len(tr.xs) == len(tr.ys) == len(tr.ps)


def test_finite_diff_known():
    e = ex.parse("x^3 + exp(2*x)")
    rep = nm.finite_diff_check(e, "x", [{"x": 0.7}, {"x": 1.3}], tol=1e-6)
    assert rep.passed


def test_finite_diff_random_trees():
    rng = random.Random(23)
    checked = 0
    for _ in range(200):
        e = rand_expr(rng, 3)
        pts = [{"x": rng.uniform(0.6, 1.4), "y": rng.uniform(0.6, 1.4)}
               for _ in range(3)]
        try:
            rep = nm.finite_diff_check(e, rng.choice(("x", "y")), pts, 1e-6)
        except (ex.DomainError, ex.DivisionByZero, OverflowError):
            continue
        if math.isfinite(rep.max_abs_error) and rep.max_abs_error < 1e30:
            assert rep.passed, ex.render(e)
            checked += 1
    assert checked >= 100
