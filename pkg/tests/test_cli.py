from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from quasieinstein import cli

ROOT = Path(__file__).resolve().parents[1]
SPECS = ROOT / "specs"
SCHEMA = json.loads((ROOT / "docs" / "report_schema.json").read_text())

NEGATIVE = """\
[manifold]
generator = flat_torus
n = 2

[grid]
N = 16

[field]
X1 = 2
X2 = 0

[params]
m = 1
lambda = -4

[checks]
qe_residual = 1e-8
"""


def write(tmp_path, text, name="run.spec"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --------------------------------------------------------------- parsing


def test_parse_sections_and_lines():
    spec = cli.parse_spec("# c\n[manifold]\ngenerator = flat_torus  # trailing\n\n[checks]\nqe_residual\n")
    assert spec.items("manifold")[0].value == "flat_torus"
    assert spec.items("checks")[0].line == 6
    assert spec.items("checks")[0].value is None


@pytest.mark.parametrize(
    "text, section, line",
    [
        ("generator = x\n", None, 1),
        ("[manifold]\n[manifold]\n", "manifold", 2),
        ("[mystery]\n", "mystery", 1),
        ("[manifold]\na = 1\na = 2\n", "manifold", 3),
        ("[params]\nm = 1\n", None, None),
        ("[manifold]\ngenerator = flat_torus\n[algebra]\npreset = su2\n", None, None),
    ],
)
def test_parse_errors_locate_problem(text, section, line):
    with pytest.raises(cli.SpecError) as info:
        cli.parse_spec(text)
    assert info.value.section == section and info.value.line == line


@pytest.mark.parametrize(
    "text, section, line",
    [
        ("[manifold]\ngenerator = custom_chart\ng11 = 2 + sin(\ng22 = 1\n", "manifold", 3),
        ("[manifold]\ngenerator = klein\n", "manifold", 2),
        ("[manifold]\ngenerator = flat_torus\n[grid]\nN = 7\n", "grid", 4),
        ("[manifold]\ngenerator = flat_torus\n[field]\nX1 = 1\nX3 = 0\n", "field", 5),
        ("[manifold]\ngenerator = flat_torus\n[params]\nm = 0\nlambda = 1\n", "params", 4),
        ("[manifold]\ngenerator = flat_torus\n[params]\nm = 1\n", "params", 4),
        ("[manifold]\ngenerator = flat_torus\n[params]\nm = 1\nlambda = 0\n[checks]\nfoo\n", "checks", 7),
        ("[manifold]\ngenerator = flat_torus\n[params]\nm = 1\nlambda = 0\n[checks]\nqe_solve\n", "checks", 7),
        ("[manifold]\ngenerator = round_sphere\n[params]\nm = 1\nlambda = 1\ngamma = solve\n", "params", 6),
        ("[manifold]\ngenerator = s1_cross_einstein\nrho = 1\nm = -2\n[field]\nX2 = 1\n", "field", 6),
        ("[manifold]\ngenerator = s1_cross_einstein\nrho = 1\nm = 2\n", "manifold", 2),
        ("[algebra]\npreset = su3\n", "algebra", 2),
        ("[algebra]\nd = 3\nc.1.2.3 = 1\nc.1.3.1 = 1\n", "algebra", 1),
    ],
)
def test_run_errors_locate_problem(text, section, line):
    with pytest.raises(cli.SpecError) as info:
        cli.run(text, grid=16)
    assert (info.value.section, info.value.line) == (section, line)


def test_parse_error_exit_code(tmp_path, capsys):
    code, out, err = run_main(capsys, "run", str(SPECS / "bad_expression.spec"))
    assert code == cli.EXIT_INPUT
    assert "[manifold] line 3" in err and "offset" in err
    assert out == ""


def test_missing_file(capsys):
    code, _, err = run_main(capsys, "run", "/nonexistent.spec")
    assert code == cli.EXIT_INPUT and "nonexistent" in err


# --------------------------------------------------------------- runs


def test_product_solution_passes(capsys):
    code, out, _ = run_main(capsys, "run", str(SPECS / "s1_cross_s2.spec"))
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert [r["check"] for r in doc["reports"]] == ["qe_residual", "theorem11", "killing_integral"]
    verdicts = {e["verdict"] for r in doc["reports"] for e in r["entries"]}
    assert verdicts <= {"pass", "skipped"}


def test_negative_control_exit_code(tmp_path, capsys):
    code, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE))
    assert code == cli.EXIT_FAIL
    entry = json.loads(out)["reports"][0]["entries"][0]
    assert entry["paper_tag"] == "1.1" and abs(entry["linf"] - 4.0) <= 1e-9
    assert entry["tolerance"] == 4e-8  # 1e-8 relative to max(1, |lambda|)


def test_tolerance_flag_overrides_spec(tmp_path, capsys):
    code, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--tol", "qe_residual=10")
    assert code == cli.EXIT_OK
    assert json.loads(out)["options"]["tol"] == {"qe_residual": 10.0}


def test_bad_tolerance_flags(tmp_path, capsys):
    with pytest.raises(SystemExit):
        cli.main(["run", write(tmp_path, NEGATIVE), "--tol", "qe_residual"])
    code, _, err = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--tol", "nothing=1")
    assert code == cli.EXIT_INPUT and "nothing" in err


def test_grid_override(tmp_path, capsys):
    code, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--grid", "8")
    assert code == cli.EXIT_FAIL and json.loads(out)["options"]["grid"] == 8
    code, _, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--grid", "9")
    assert code == cli.EXIT_INPUT


def test_solver_failure_exit_code(tmp_path, capsys):
    text = "[manifold]\ngenerator = flat_torus\nn = 3\n[field]\nX1 = 1\n[params]\nm = 2\nlambda = 0\n[checks]\ngamma\n"
    code, _, err = run_main(capsys, "run", write(tmp_path, text), "--grid", "32")
    assert code == cli.EXIT_SOLVER and "solver error" in err


def test_solved_gamma_run(capsys):
    code, out, _ = run_main(capsys, "run", str(SPECS / "gamma_solve.spec"))
    assert code == cli.EXIT_OK
    gamma = json.loads(out)["reports"][0]
    assert gamma["entries"][0]["paper_tag"] == "3.1"
    assert gamma["scalars"]["min_gamma"] > 0


def test_default_checks_on_exact_solution(tmp_path, capsys):
    text = "[manifold]\ngenerator = s1_cross_einstein\nrho = 1\nm = -4\n"
    code, out, _ = run_main(capsys, "run", write(tmp_path, text))
    assert code == cli.EXIT_OK
    assert [r["check"] for r in json.loads(out)["reports"]] == list(cli.DEFAULT_MANIFOLD_CHECKS)


def test_algebra_run(tmp_path, capsys):
    code, out, _ = run_main(capsys, "run", str(SPECS / "su2.spec"))
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    solve = doc["reports"][-1]
    assert solve["scalars"]["count"] == 2.0
    text = "[algebra]\npreset = su2\n[params]\nm = 1\nlambda = 0.5\n[field]\nX1 = 0\n[checks]\nalgebra_residual\n"
    code, out, _ = run_main(capsys, "run", write(tmp_path, text))
    assert code == cli.EXIT_OK
    assert [e["paper_tag"] for e in json.loads(out)["reports"][0]["entries"]] == ["1.1", "T1.1"]


def test_structure_constants_from_keys(tmp_path, capsys):
    text = "[algebra]\nd = 3\nc.1.2.3 = 1\nc.2.3.1 = 1\nc.3.1.2 = 1\n[checks]\nalgebra_curvature\n"
    code, out, _ = run_main(capsys, "run", write(tmp_path, text))
    assert code == cli.EXIT_OK
    scalars = json.loads(out)["reports"][0]["scalars"]
    assert scalars["ric_11"] == pytest.approx(0.5) and scalars["ric_12"] == pytest.approx(0.0)


# --------------------------------------------------------------- output


def test_csv_output(tmp_path, capsys):
    out_path = tmp_path / "r.csv"
    code, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--format", "csv", "--out", str(out_path))
    assert code == cli.EXIT_FAIL and out == ""
    rows = list(csv.reader(io.StringIO(out_path.read_text())))
    assert tuple(rows[0]) == cli.CSV_COLUMNS
    assert rows[1][:2] == ["qe_residual", "1.1"] and rows[1][-1] == "fail"


def test_csv_single_entry_and_skipped(capsys):
    report = cli.RunReport("0" * 64, "t", {}, [cli.IdentityReport("x", [cli.skipped("x", "2.8", "n", "m = -2")])])
    rows = list(csv.reader(io.StringIO(cli.emit(report, "csv"))))
    assert len(rows) == 2 and rows[1][-1] == "skipped"
    assert cli.exit_code(report) == cli.EXIT_OK


def test_csv_covers_every_requested_check(capsys):
    code, out, _ = run_main(capsys, "run", str(SPECS / "s1_cross_s2.spec"), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sorted({r["check"] for r in rows}) == sorted(["qe_residual", "theorem11", "killing_integral"])


def test_json_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    spec = str(SPECS / "s1_cross_s2.spec")
    assert cli.main(["run", spec, "--out", str(a)]) == cli.main(["run", spec, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_golden_report_matches(capsys):
    golden = json.loads((ROOT / "docs" / "golden_s1_cross_s2.json").read_text())
    jsonschema.validate(golden, SCHEMA)
    _, out, _ = run_main(capsys, "run", str(SPECS / "s1_cross_s2.spec"))
    doc = json.loads(out)
    golden.pop("kernel_backend")
    doc.pop("kernel_backend")
    assert doc == golden


def test_timings_are_opt_in(tmp_path, capsys):
    _, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE))
    assert "timings" not in json.loads(out)
    _, out, _ = run_main(capsys, "run", write(tmp_path, NEGATIVE), "--timings")
    assert set(json.loads(out)["timings"]) == {"qe_residual"}


def test_list_checks(capsys):
    code, out, _ = run_main(capsys, "--list-checks")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == list(cli.REGISTRY)
