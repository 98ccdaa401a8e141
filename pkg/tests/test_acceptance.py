"""End-to-end acceptance checks, one per headline claim of the pipeline.

Each test prints exactly one ``[criterion N] PASS/FAIL`` line.
"""

import json
import math
import random
import time
from fractions import Fraction

from liesym import fixture_path, cli
from liesym import exprcore as ex
from liesym import linalg as la
from liesym import detsolve as ds
from liesym import liealg as lg
from liesym import optimal as op
from liesym import invariant as iv
from liesym import noether as no
from liesym import numeric as nm
from liesym.cli import paper_basis, combine, span_matches_paper
from conftest import rand_expr

F = Fraction


from conftest import CRITERION_LINES


def report(n, ok, detail):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    CRITERION_LINES[n] = line
    assert ok, detail


def z(a, b):
    return ex.is_zero(ex.add(a, ex.mul(ex.num(-1), b)))


def test_criterion_1_symmetries_of_fixture(ode_plus):
    t0 = time.monotonic()
    gens = ds.solve_symmetries(ode_plus, degree=2)
    dt = time.monotonic() - t0
    ok = len(gens) == 3 and span_matches_paper(gens) and dt < 5.0
    report(1, ok, f"dim={len(gens)}, span matches printed basis, {dt:.2f}s")


def test_criterion_2_free_particle_dimension():
    ode = ds.OdeSecondOrder.make(ex.ZERO, "free")
    gens = ds.solve_symmetries(ode, degree=2)
    audits = [ds.is_symmetry(ode, g, samples=50, tol=1e-9, seed=0)
              for g in gens]
    ok = len(gens) == 8 and all(a.passed for a in audits)
    report(2, ok, f"dim={len(gens)}, max residual "
                  f"{max(a.max_residual for a in audits):.2e} < 1e-9")


def test_criterion_3_commutator_table(algebra):
    C = algebra.C
    expect = {(0, 1): (0, 0, 0), (0, 2): (0, 0, 1), (1, 2): (0, 0, -1)}
    ok = True
    for (i, j), want in expect.items():
        got = tuple(C[i][j][k] for k in range(3))
        ok = ok and got == tuple(F(v) for v in want)
        got_ji = tuple(C[j][i][k] for k in range(3))
        ok = ok and got_ji == tuple(-F(v) for v in want)
    report(3, ok, "all 9 commutator cells match the printed table")


def test_criterion_4_adjoint_table(algebra):
    expect = {
        0: [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "exp(-lambda)"]],
        1: [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "exp(lambda)"]],
        2: [["1", "0", "0"], ["0", "1", "0"], ["lambda", "-lambda", "1"]],
    }
    ok = True
    for i, rows in expect.items():
        M = lg.adjoint_exp(algebra, i)
        for r in range(3):
            for c in range(3):
                ok = ok and z(M[r][c], ex.parse(rows[r][c]))
    report(4, ok, "all 9 adjoint entries symbolically exact")


def test_criterion_5_classification_and_errata(algebra):
    rep = lg.classify(algebra)
    K = lg.killing_form(algebra)
    ok = (rep.solvable and not rep.nilpotent and not rep.semisimple
          and rep.bianchi == "III"
          and rep.derived_dims == [3, 1, 0]
          and rep.lower_central_dims == [3, 1])
    # errata: the printed diag(1,0,0) Killing form, center {Pi2} and
    # nilradical {Pi2,Pi3} are all corrected by the computation
    ok = ok and K == [[F(1), F(-1), F(0)], [F(-1), F(1), F(0)],
                      [F(0), F(0), F(0)]]
    ok = ok and rep.center_basis == [[F(1), F(1), F(0)]]
    ok = ok and rep.nilradical_basis == [[F(1), F(1), F(0)],
                                         [F(0), F(0), F(1)]]
    report(5, ok, "Bianchi III solvable; Killing/center/nilradical errata "
                  "confirmed")


def test_criterion_6_optimal_system_audit(algebra):
    t0 = time.monotonic()
    rng = random.Random(42)
    ok = True
    for _ in range(1000):
        v = op.random_vector(rng)
        rep, _ = op.canonical_form(algebra, v)
        rep2, _ = op.canonical_form(algebra, rep)
        ok = ok and rep2 == rep
        out = op.adjoint_act(algebra, v, i=3,
                             lam=F(rng.randint(-4, 4), rng.randint(1, 3)))
        vals = op._as_rationals(out)
        ok = ok and vals[0] == v[0] and vals[1] == v[1]
        if any(vals):
            rep3, _ = op.canonical_form(algebra, vals)
            ok = ok and rep3 == rep
    fams = op.load_representatives(fixture_path("representatives.json"))
    cov = op.verify_representatives(algebra, fams, samples=1000, seed=42)
    dt = time.monotonic() - t0
    ok = ok and cov.full_coverage and cov.overlap_counts and dt < 10.0
    report(6, ok, f"1000 vectors: invariants, idempotence, "
                  f"{cov.covered}/1000 covered, "
                  f"{len(cov.overlap_counts)} overlap pairs, {dt:.2f}s")


def test_criterion_7_invariant_solutions(basis, ode_printed, ode_plus,
                                         ode_minus):
    with open(fixture_path("table3.json")) as fh:
        rows = json.load(fh)
    ok = True
    for row in rows:
        gen = combine(basis, [F(c) for c in row["generator"]])
        ok = ok and z(iv.invariant_condition(gen), ex.parse(row["Q"]))
    for row in rows[1:4]:
        gen = combine(basis, [F(c) for c in row["generator"]])
        sol = iv.solve_first_order(iv.reduce(gen))
        ok = ok and sol.kind == "explicit"
        ok = ok and z(sol.expr, ex.parse(row["solution"]))
    expected = {
        "row2": {"ode_printed": False, "ode_plus": True, "ode_minus": True},
        "row3": {"ode_printed": False, "ode_plus": False, "ode_minus": True},
        "row4": {"ode_printed": False, "ode_plus": True, "ode_minus": False},
        "row5": {"ode_printed": False, "ode_plus": False, "ode_minus": True},
    }
    variants = {"ode_printed": ode_printed, "ode_plus": ode_plus,
                "ode_minus": ode_minus}
    for row in rows[1:]:
        gen = combine(basis, [F(c) for c in row["generator"]])
        sol = iv.SolutionForm("explicit", expr=ex.parse(row["solution"]))
        dom = tuple(row["domain"])
        ok = ok and iv.verify_invariance(gen, sol, tol=1e-9, seed=0,
                                         domain=dom).passed
        for name, ode in variants.items():
            got = iv.verify_on_ode(ode, sol, tol=1e-9, samples=100, seed=0,
                                   domain=dom).passed
            ok = ok and got == expected[row["name"]][name]
    # row 4 must pass the fixture equation itself
    row4 = iv.SolutionForm("explicit", expr=ex.parse(rows[3]["solution"]))
    r4 = iv.verify_on_ode(ode_plus, row4, tol=1e-9, samples=100, seed=0,
                          domain=tuple(rows[3]["domain"]))
    ok = ok and r4.passed and r4.samples == 100
    report(7, ok, "Q exact (5 rows), rows 2-4 re-derived, invariance 1e-9, "
                  "pass/fail matrix as computed, row 4 on fixture at 1e-9")


def test_criterion_8_lagrangian_and_el_diagnosis(ode_printed, ode_plus,
                                                 ode_minus):
    with open(fixture_path("noether.json")) as fh:
        fx = json.load(fh)
    M = ex.parse(fx["multiplier"])
    L = no.lagrangian_from_multiplier(M)
    ok = z(ex.diff(ex.diff(L.L, "p"), "p"), M)
    ok = ok and z(L.L, ex.parse(fx["lagrangian"]))
    matrix = {}
    for ode in (ode_printed, ode_plus, ode_minus):
        matrix[ode.name] = no.el_matches_ode(L, ode, tol=1e-9, samples=40,
                                             seed=2).passed
    ok = ok and not any(matrix.values())
    report(8, ok, f"L_pp == multiplier exactly; Euler-Lagrange matrix "
                  f"{matrix} (no variant matches)")


def test_criterion_9_conservation_controls(ode_printed, ode_plus, ode_minus):
    with open(fixture_path("noether.json")) as fh:
        fx = json.load(fh)
    L = no.lagrangian_from_multiplier(ex.parse(fx["multiplier"]))
    passing = [ode.name for ode in (ode_printed, ode_plus, ode_minus)
               if no.el_matches_ode(L, ode, tol=1e-9, samples=40,
                                    seed=2).passed]
    skipped = not passing  # no variant admits the printed Lagrangian
    free = ds.OdeSecondOrder.make(ex.ZERO, "free")
    pfree = no.lagrangian_from_multiplier(ex.ONE)
    ok = skipped
    for gen in (ds.VectorFieldGen(ex.ZERO, ex.ONE),
                ds.VectorFieldGen(ex.ONE, ex.ZERO)):
        I = no.conserved_quantity(pfree, gen, ex.ZERO)
        rep = no.check_conserved(free, I, trajectories=5, tol=1e-10, seed=0)
        ok = ok and rep.passed and rep.max_drift <= 1e-10
    report(9, ok, "dynamic audit skipped (no exact variant); free-particle "
                  "momentum and energy conserved at 1e-10")


def test_criterion_10_kernel_properties():
    rng = random.Random(42)
    ok = True
    numeric_checks = 0
    for _ in range(500):
        a = rand_expr(rng, 3)
        b = rand_expr(rng, 3)
        v = rng.choice(("x", "y"))
        ok = ok and z(ex.diff(ex.add(a, b), v),
                      ex.add(ex.diff(a, v), ex.diff(b, v)))
        ok = ok and z(ex.diff(ex.mul(a, b), v),
                      ex.add(ex.mul(ex.diff(a, v), b),
                             ex.mul(a, ex.diff(b, v))))
        r = ex.render(ex.normalize(a))
        ok = ok and ex.render(ex.parse(r)) == r
        pts = [{"x": rng.uniform(0.6, 1.4), "y": rng.uniform(0.6, 1.4)}]
        try:
            fd = nm.finite_diff_check(a, v, pts, tol=1e-6)
        except (ex.DomainError, ex.DivisionByZero, OverflowError):
            continue
        if math.isfinite(fd.max_abs_error) and fd.max_abs_error < 1e30:
            ok = ok and fd.passed
            numeric_checks += 1
    ok = ok and numeric_checks >= 250
    sho = ds.OdeSecondOrder.make(ex.mul(ex.num(-1), ex.var("y")), "sho")
    e1 = abs(nm.rk4_integrate(sho, 0.0, 1.0, 0.0, 0.1, 10).ys[-1]
             - math.cos(1.0))
    e2 = abs(nm.rk4_integrate(sho, 0.0, 1.0, 0.0, 0.05, 20).ys[-1]
             - math.cos(1.0))
    factor = e1 / e2
    ok = ok and 12.0 <= factor <= 20.0
    report(10, ok, f"500 trees: linearity/Leibniz exact, render fixed point, "
                   f"{numeric_checks} finite-diff checks at 1e-6, RK4 halving "
                   f"factor {factor:.1f} in [12, 20]")


def test_criterion_11_deterministic_reports(capsys):
    assert cli.main(["verify-paper", "--format", "json"]) == 0
    a = capsys.readouterr().out
    assert cli.main(["verify-paper", "--format", "json"]) == 0
    b = capsys.readouterr().out
    ok = a == b and len(a) > 0
    report(11, ok, f"two verify-paper runs byte-identical "
                   f"({len(a.encode())} bytes)")
