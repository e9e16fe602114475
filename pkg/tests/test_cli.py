import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from conftest import case_dir
from deltaspec import cli
from deltaspec.minilang import parse_unit
from deltaspec.pipeline import InvariantViolation

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"
SCHEMA_OF = {
    "delta.json": "delta",
    "status.pre.json": "status",
    "status.post.json": "status",
    "suite.pre.json": "suite",
    "suite.post.json": "suite",
    "suite.json": "suite",
    "candidates.json": "candidates",
    "manifest.json": "manifest",
    "truth_match.json": "truth_match",
    "mutants.json": "mutants",
    "kills_summary.json": "kills_summary",
}


def validate_dir(out: Path):
    checked = 0
    for f in sorted(out.glob("*.json")):
        schema = json.loads((SCHEMAS / f"{SCHEMA_OF[f.name]}.schema.json").read_text())
        jsonschema.validate(json.loads(f.read_text()), schema)
        checked += 1
    return checked


@pytest.fixture(scope="module")
def sum_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sum_run")
    assert cli.main(["run", str(case_dir("sum_fix")), "--out", str(out)]) == 0
    assert cli.main(["match-truth", str(case_dir("sum_fix")), "--out", str(out)]) == 0
    return out


def test_run_writes_reports(sum_run):
    names = {p.name for p in sum_run.iterdir()}
    assert {"delta.json", "delta.md", "status.pre.json", "status.post.json", "suite.pre.json",
            "suite.post.json", "candidates.json", "manifest.json", "truth_match.json"} <= names
    assert validate_dir(sum_run) >= 8
    delta = json.loads((sum_run / "delta.json").read_text())
    assert delta["mode"] == "strict" and delta["counts"]["added"] > 0


def test_match_truth_output(sum_run):
    m = json.loads((sum_run / "truth_match.json").read_text())
    assert m["recall"] == 1.0 and m["expressible"] == 5


def test_runs_are_byte_identical(sum_run, tmp_path):
    assert cli.main(["run", str(case_dir("sum_fix")), "--out", str(tmp_path)]) == 0
    for f in sorted(tmp_path.iterdir()):
        if f.name == "manifest.json":
            a, b = json.loads(f.read_text()), json.loads((sum_run / f.name).read_text())
            a.pop("timings"), b.pop("timings")
            assert a == b
        else:
            assert f.read_bytes() == (sum_run / f.name).read_bytes(), f.name


def test_missing_directory_is_input_error(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_truth_is_input_error(tmp_path):
    d = tmp_path / "c"
    shutil.copytree(case_dir("refactor_iterator"), d)
    (d / "truth.delta").unlink(missing_ok=True)
    assert cli.main(["match-truth", str(d), "--out", str(tmp_path / "o")]) == 2


def test_bad_source_reports_position(tmp_path, capsys):
    f = tmp_path / "Bad.dl"
    f.write_text("class Bad {\n  field x: int;\n  method m() {\n    x := ;\n  }\n}\n")
    assert cli.main(["parse", str(f)]) == 2
    err = capsys.readouterr().err
    assert "Bad.dl:4:" in err


def test_parse_prints_canonical_form(capsys):
    (src,) = (case_dir("sum_fix") / "post").glob("*.dl")
    assert cli.main(["parse", str(src)]) == 0
    text = capsys.readouterr().out
    assert parse_unit(text) == parse_unit(src.read_text())


def test_testgen_single_file(tmp_path):
    (src,) = (case_dir("sum_fix") / "pre").glob("*.dl")
    assert cli.main(["testgen", str(src), "--out", str(tmp_path), "--seed", "3"]) == 0
    assert validate_dir(tmp_path) == 1
    assert json.loads((tmp_path / "suite.json").read_text())["config"]["seed"] == 3


def test_ini_precedence(tmp_path):
    d = tmp_path / "c"
    shutil.copytree(case_dir("sum_fix"), d)
    (d / "config.ini").write_text("[deltaspec]\nseed = 4\ncandidates = 300\nmin-support = 3\n")
    out = tmp_path / "o"
    assert cli.main(["infer", str(d), "--out", str(out), "--candidates", "250"]) == 0
    status = json.loads((out / "status.post.json").read_text())
    assert status["config"]["min_support"] == 3
    cands = json.loads((out / "candidates.json").read_text())
    assert max(len(v) for v in cands["points"].values()) <= 250
    suite_seed = 4
    other = tmp_path / "other.ini"
    other.write_text("[deltaspec]\nseed = 9\n")
    out2 = tmp_path / "o2"
    assert cli.main(["testgen", str(d), "--out", str(out2), "--config", str(other)]) == 0
    assert json.loads((out2 / "suite.pre.json").read_text())["config"]["seed"] == 9
    out3 = tmp_path / "o3"
    assert cli.main(["run", str(d), "--out", str(out3), "--candidates", "250"]) == 0
    prov = json.loads((out3 / "delta.json").read_text())["provenance"]["options"]
    assert prov["seed"] == suite_seed and prov["candidates"] == 250 and prov["min_support"] == 3


def test_bad_ini_is_input_error(tmp_path):
    d = tmp_path / "c"
    shutil.copytree(case_dir("sum_fix"), d)
    (d / "config.ini").write_text("[deltaspec]\ncolour = blue\n")
    assert cli.main(["run", str(d), "--out", str(tmp_path / "o")]) == 2


def test_bad_option_value(tmp_path):
    assert cli.main(["run", str(case_dir("sum_fix")), "--candidates", "0", "--out", str(tmp_path)]) == 2


def test_invariant_violation_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise InvariantViolation("planted")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert cli.main(["run", str(case_dir("sum_fix")), "--out", str(tmp_path)]) == 3


def test_kills_and_relevance(tmp_path):
    assert cli.main(["kills", str(case_dir("linf_norm")), "--out", str(tmp_path)]) == 0
    assert validate_dir(tmp_path) == 2
    with open(tmp_path / "kills.csv") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "assertion" and len(header) > 1
    muts = json.loads((tmp_path / "mutants.json").read_text())
    assert {m["relevance"] for m in muts} <= {"RELEVANT", "NOT_RELEVANT", "UNTRANSPLANTABLE_IN_CHANGED_CODE"}
    out2 = tmp_path / "m"
    assert cli.main(["mutants", str(case_dir("linf_norm")), "--out", str(out2)]) == 0
    assert len(json.loads((out2 / "mutants.json").read_text())) == len(muts)


def test_rq3_and_rq4(tmp_path):
    out = tmp_path / "rq"
    assert cli.main(["rq3", str(case_dir("sum_fix")), "--out", str(out), "--reps", "10", "--svg"]) == 0
    rows = list(csv.DictReader(open(out / "rq3.csv")))
    assert len(rows) == 2 * 10 * 10
    assert {r["pool"] for r in rows} == {"added", "preserved"}
    assert all(0.0 <= float(r["rms"]) <= 1.0 for r in rows)
    assert len(list(csv.DictReader(open(out / "rq3_stats.csv")))) == 10
    assert (out / "rq3.svg").read_text().startswith("<svg")
    assert cli.main(["rq4", str(case_dir("sum_fix")), "--out", str(out), "--reps", "10"]) == 0
    rows = list(csv.DictReader(open(out / "rq4.csv")))
    assert len(rows) == 3 * 4 * 10
    assert all(r["cost"] == "UNREACHED" or int(r["cost"]) >= 1 for r in rows)
    assert "reach rate" in (out / "summary.md").read_text()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "deltaspec", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("deltaspec ")
