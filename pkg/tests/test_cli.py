import io
import json
import subprocess
import sys

import pytest

from perfbayes.cli import run
from perfbayes.ingest import bundled_text


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def table1(tmp_path):
    path = tmp_path / "table1.csv"
    path.write_text(bundled_text("table1.csv"))
    return path


@pytest.fixture
def model_path(tmp_path, table1):
    path = tmp_path / "m.json"
    code, _, err = call("fit", "--tables", str(table1), "--policy", "reference:stream", "--out", str(path))
    assert code == 0, err
    return path


def test_fit_then_predict(model_path):
    code, out, err = call("predict", "--model", str(model_path),
                          "--set", "medium=HINDI", "--set", "caste=OBC", "--set", "stream=BA(NC)")
    assert code == 0 and err == ""
    assert "predicted\tII\t0.568261" in out
    assert out.count("\n") == 6


def test_predict_partial(model_path):
    code, out, _ = call("predict", "--model", str(model_path), "--set", "caste=GEN")
    assert code == 0
    assert "predicted\tII\t0.400000" in out


def test_predict_unknown_value(model_path):
    code, out, err = call("predict", "--model", str(model_path), "--set", "medium=FRENCH")
    assert code == 2
    assert out == ""
    assert err.startswith("error:input:") and "FRENCH" in err


def test_predict_undefined(tmp_path):
    tables = tmp_path / "t.csv"
    tables.write_text("attribute,value,class,count\na,x,p,2\na,y,q,2\nb,z,q,2\nb,w,p,2\n")
    model = tmp_path / "m.json"
    assert call("fit", "--tables", str(tables), "--out", str(model))[0] == 0
    code, _, err = call("predict", "--model", str(model), "--set", "a=x", "--set", "b=z")
    assert code == 3 and err.startswith("error:undefined:")


def test_audit(table1):
    code, out, err = call("audit", "--tables", str(table1))
    assert code == 4
    assert "590" in out and "medium" in out
    assert "inconsistent classes: III, FAIL" in out
    assert err.startswith("error:audit:")


def test_audit_consistent(tmp_path):
    records = tmp_path / "r.csv"
    records.write_text("a,b,class\nx,u,p\ny,u,q\n")
    tables = tmp_path / "t.csv"
    code, out, _ = call("fit", "--records", str(records))
    assert code == 0
    doc = json.loads(out)
    lines = ["attribute,value,class,count"] + [
        f"{a['name']},{v},{c},{n}"
        for a in doc["attributes"] for v, row in zip(a["values"], a["counts"]) for c, n in zip(doc["classes"], row)
    ]
    tables.write_text("\n".join(lines) + "\n")
    code, out, err = call("audit", "--tables", str(tables))
    assert code == 0 and "consistent: true" in out and err == ""


def test_fit_zero_denominator(tmp_path):
    tables = tmp_path / "t.csv"
    tables.write_text("attribute,value,class,count\na,x,p,2\na,x,q,0\n")
    code, _, err = call("fit", "--tables", str(tables))
    assert code == 5 and err.startswith("error:fit:")
    assert call("fit", "--tables", str(tables), "--alpha", "1/2")[0] == 0


def test_parse_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("attribute,value,class,count\ncaste,GEN,I,-5\n")
    code, _, err = call("fit", "--tables", str(bad))
    assert code == 2 and err.startswith("error:parse:") and "negative count" in err
    code, _, err = call("fit", "--tables", str(tmp_path / "missing.csv"))
    assert code == 2 and err.startswith("error:io:")


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["fit", "--tables", "a", "--records", "b"],
    ["fit", "--tables", "a", "--policy", "weird"],
    ["predict"],
    ["grid"],
    ["grid", "--replicate-paper", "--format", "xml"],
    ["grid", "--replicate-paper", "--performer", "I,II,III,FAIL"],
    ["audit"],
])
def test_usage_errors(argv, table1):
    argv = [str(table1) if a == "a" else a for a in argv]
    code, _, err = call(*argv)
    assert code == 1
    assert err.startswith("error:usage:")
    assert err.count("\n") == 1


def test_explicit_policy(tmp_path, table1):
    totals = tmp_path / "totals.csv"
    totals.write_text("class,total\nI,190\nII,248\nIII,91\nFAIL,71\n")
    out_ref, out_exp = tmp_path / "ref.json", tmp_path / "exp.json"
    call("fit", "--tables", str(table1), "--policy", "reference:stream", "--out", str(out_ref))
    assert call("fit", "--tables", str(table1), "--policy", f"explicit:{totals}", "--out", str(out_exp))[0] == 0
    grid_ref = call("grid", "--model", str(out_ref), "--format", "csv")[1]
    grid_exp = call("grid", "--model", str(out_exp), "--format", "csv")[1]
    assert grid_ref == grid_exp


def test_grid_diff_against_bundled(model_path):
    code, out, _ = call("grid", "--model", str(model_path), "--format", "csv", "--diff")
    assert code == 0
    assert "discrepancies: 2 of 30" in out
    assert "stream=BCom): expected FAIL 0.456478, got II 0.401030" in out


def test_grid_diff_file(tmp_path, model_path):
    ref = tmp_path / "ref.csv"
    ref.write_text("medium,caste,stream,predicted,probability\nENGLISH,GEN,BA(NC),II,0.549218\n")
    code, out, _ = call("grid", "--model", str(model_path), "--diff", str(ref))
    assert code == 0 and "discrepancies: 0 of 1" in out


def test_grid_outcome_flags(model_path):
    _, out, _ = call("grid", "--model", str(model_path), "--format", "csv",
                     "--risk-class", "FAIL", "--risk-threshold", "0.30")
    assert "HINDI,SC/ST,BCom,II,0.401030,true,true" in out


def test_replicate_paper_matches_explicit_fit(model_path):
    a = call("grid", "--replicate-paper", "--format", "json")[1]
    b = call("grid", "--model", str(model_path), "--format", "json")[1]
    assert a == b
    assert call("fit", "--replicate-paper")[1] == model_path.read_text()


def test_eval(tmp_path, model_path):
    records = tmp_path / "r.csv"
    records.write_text("medium,caste,stream,class\nENGLISH,GEN,BSc(Math),I\nHINDI,SC/ST,BA(NC),FAIL\n")
    code, out, _ = call("eval", "--model", str(model_path), "--records", str(records))
    assert code == 0
    doc = json.loads(out)
    assert doc["accuracy"] == 0.5
    assert doc["evaluated"] == 2


def test_eval_schema_conflict(tmp_path, model_path):
    records = tmp_path / "r.csv"
    records.write_text("medium,caste,stream,class\nFRENCH,GEN,BSc(Math),I\n")
    code, _, err = call("eval", "--model", str(model_path), "--records", str(records))
    assert code == 2 and err.startswith("error:parse:") and "FRENCH" in err


def test_byte_identical_output(model_path):
    runs = [
        subprocess.run([sys.executable, "-m", "perfbayes", "grid", "--model", str(model_path), "--diff"],
                       capture_output=True)
        for _ in range(2)
    ]
    assert runs[0].returncode == 0
    assert runs[0].stdout == runs[1].stdout
