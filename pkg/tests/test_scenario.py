import csv
import io
import json
import shutil
import subprocess
import sys
import time
from pathlib import Path

import pytest

from gcverify import cli
from gcverify.scenario import OPERATIONS, ScenarioError, Scenario, load_text, run_file

ROOT = Path(__file__).resolve().parents[1]
ACCEPTANCE = ROOT / "scenarios" / "acceptance.yaml"

SMALL = """\
seed: 7
models:
  C1: {complex: 1}
functions:
  z: {chart: [0, 1], expr: "z"}
  zbar: {chart: [0, 1], expr: "conj(z)"}
checks:
  - {name: valid, op: validate, args: {model: C1}}
  - {name: gh-z, op: gh_check, args: {function: z, samples: {random: 5, box: [[-1, 1], [-1, 1]]}}}
"""


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_all_operations_are_exercised_by_acceptance_scenario():
    doc = load_text(ACCEPTANCE.read_text())
    used = {c["op"] for c in doc["checks"]}
    assert used == set(OPERATIONS)


def test_exit_zero_when_all_match(tmp_path, capsys):
    p = write(tmp_path, SMALL)
    out = tmp_path / "r.json"
    assert cli.main(["run", str(p), "--report", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["schema"] == "gcverify-report/1" and data["seed"] == 7
    assert data["summary"] == {"checks": 2, "matched": 2, "errors": 0, "all_matched": True}
    assert "2/2 checks matched" in capsys.readouterr().err


def test_exit_one_on_mismatch(tmp_path, capsys):
    bad = SMALL + "  - {name: gh-zbar, op: gh_check, args: {function: zbar, samples: {random: 5, box: [[-1, 1], [-1, 1]]}}}\n"
    p = write(tmp_path, bad)
    assert cli.main(["run", str(p), "--report", str(tmp_path / "r.json")]) == 1
    err = capsys.readouterr().err
    assert "FAIL gh-zbar" in err
    data = json.loads((tmp_path / "r.json").read_text())
    entry = data["checks"][2]
    assert entry["verdict"] is False and entry["status"] == "fail"
    assert entry["residuals"]["zbar"] == pytest.approx(1.0, abs=1e-6)


def test_expected_failure_counts_as_match(tmp_path):
    text = SMALL + "  - {name: gh-zbar, op: gh_check, expect: false, args: {function: zbar, samples: {random: 5, box: [[-1, 1], [-1, 1]]}}}\n"
    assert cli.main(["run", str(write(tmp_path, text)), "--quiet", "--report", str(tmp_path / "r")]) == 0


def test_operation_error_is_recorded_not_fatal(tmp_path):
    text = SMALL + "  - {name: broken, op: fd_agreement, args: {function: z, samples: {bogus: 1}}}\n"
    rep = run_file(write(tmp_path, text))
    assert not rep.ok
    broken = rep.checks[-1]
    assert broken.status == "error" and "unknown sample spec" in broken.error


def test_parse_error_reports_position(tmp_path, capsys):
    p = write(tmp_path, "seed: 1\nchecks:\n  - {name: a, op: validate\n")
    assert cli.main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "s.yaml:" in err and "parse error" in err
    with pytest.raises(ScenarioError) as exc:
        Scenario.from_file(p)
    assert exc.value.line is not None and exc.value.column is not None


def test_unresolved_name_reports_position(tmp_path, capsys):
    text = SMALL + "  - {name: missing, op: validate, args: {model: NOPE}}\n"
    p = write(tmp_path, text)
    assert cli.main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "NOPE" in err and "s.yaml:10:" in err


@pytest.mark.parametrize("text,needle", [
    ("checks: []\n", "nonempty list of checks"),
    ("bogus: 1\nchecks: [{op: validate}]\n", "unknown top-level key"),
    ("checks: [{op: teleport}]\n", "unknown operation"),
    ("- 1\n- 2\n", "mapping at top level"),
])
def test_structural_errors(tmp_path, text, needle):
    with pytest.raises(ScenarioError, match=needle):
        Scenario.from_file(write(tmp_path, text))


def test_missing_file_exits_two(tmp_path):
    assert cli.main(["run", str(tmp_path / "absent.yaml")]) == 2


def test_seed_override_changes_samples(tmp_path):
    p = write(tmp_path, SMALL)
    a = run_file(p).body()
    b = run_file(p, {"seed": 8}).body()
    assert a["seed"] == 7 and b["seed"] == 8
    assert a["checks"][1]["samples"] != b["checks"][1]["samples"]


def test_tolerance_override_is_reported(tmp_path):
    out = tmp_path / "r.json"
    cli.main(["run", str(write(tmp_path, SMALL)), "--tol", "1e-7", "--fd-step", "1e-4",
              "--quiet", "--report", str(out)])
    tols = json.loads(out.read_text())["tolerances"]
    assert tols["tol"] == 1e-7 and tols["fd_step"] == 1e-4


def test_tabular_export(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["run", str(write(tmp_path, SMALL)), "--format", "tabular", "--quiet",
                     "--report", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 5 and {r["check"] for r in rows} == {"gh-z"}
    assert all(float(r["zbar"]) < 1e-6 for r in rows)


def test_report_body_is_byte_identical_across_runs(tmp_path):
    p = write(tmp_path, SMALL)
    first = run_file(p).dumps(include_timings=False)
    second = run_file(p).dumps(include_timings=False)
    assert first == second


def test_full_acceptance_scenario(tmp_path):
    t0 = time.perf_counter()
    rep = run_file(ACCEPTANCE)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    bad = [(c.name, c.verdict, c.expect, c.error) for c in rep.checks if c.status != "pass"]
    assert not bad
    again = run_file(ACCEPTANCE)
    assert rep.dumps(include_timings=False) == again.dumps(include_timings=False)


@pytest.mark.skipif(shutil.which("gcverify") is None, reason="console script not installed")
def test_console_script(tmp_path):
    p = write(tmp_path, SMALL)
    proc = subprocess.run(["gcverify", "run", str(p), "--quiet"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["summary"]["all_matched"]


def test_module_entry_point(tmp_path):
    p = write(tmp_path, SMALL)
    proc = subprocess.run([sys.executable, "-m", "gcverify.cli", "run", str(p), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
