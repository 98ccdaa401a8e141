import json

from liesym import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr().out
    return code, out


def test_symmetries_json(capsys):
    code, out = run(["symmetries", "--format", "json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["dimension"] == 3
    assert rep["matches_printed_basis"]
    assert all(g["passed"] for g in rep["generators"])


def test_symmetries_inline_ode(capsys):
    code, out = run(["symmetries", "--ode", "0", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["dimension"] == 8


def test_parse_error_exit_code(capsys):
    assert cli.main(["symmetries", "--ode", "x + ("]) == cli.EXIT_PARSE


def test_not_rational_exit_code(capsys):
    assert cli.main(["symmetries", "--ode", "exp(y)"]) == cli.EXIT_NOT_RATIONAL


def test_algebra_markdown(capsys):
    code, out = run(["algebra"], capsys)
    assert code == 0
    assert "| Pi1 | Pi2 | Pi3 |" in out
    assert "ERRATUM" in out


def test_adjoint_table(capsys):
    code, out = run(["adjoint"], capsys)
    assert code == 0
    assert "exp(-lambda)*Pi3" in out
    assert "Pi1 + lambda*Pi3" in out


def test_optimal_coverage(capsys):
    code, out = run(["optimal", "--samples", "150", "--format", "json"],
                    capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["full_coverage"]
    assert rep["families_never_hit"] == ["Pi1+Pi2"]


def test_invariant_report(capsys):
    code, out = run(["invariant", "--format", "json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert len(rep["rows"]) == 5
    assert all(r["Q_matches_printed"] for r in rep["rows"])


def test_noether_report(capsys):
    code, out = run(["noether", "--format", "json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["lagrangian"]["equals_printed"]
    assert rep["conservation_audit"]["status"] == "SKIPPED"
    assert all(c["passed"]
               for c in rep["free_particle_controls"].values())


def test_verify_paper_deterministic(capsys):
    code, a = run(["verify-paper", "--format", "json"], capsys)
    assert code == 0
    code, b = run(["verify-paper", "--format", "json"], capsys)
    assert code == 0
    assert a == b
    rep = json.loads(a)
    statuses = {c["claim"]: c["status"] for c in rep["claims"]}
    assert statuses["Killing form printed as diag(1,0,0)"] == "ERRATUM"
    assert statuses["center printed as span{Pi2}"] == "ERRATUM"
    assert statuses["nilradical printed as span{Pi2, Pi3}"] == "ERRATUM"


def test_out_file(tmp_path, capsys):
    target = tmp_path / "rep.json"
    code = cli.main(["adjoint", "--format", "json", "--out", str(target)])
    assert code == 0
    assert json.loads(target.read_text())["command"] == "adjoint"
