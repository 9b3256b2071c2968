import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from mirrorcyl.cli import main
from mirrorcyl.manifest import OUTPUT_DIR_ENV, canonical_json, sha256_bytes

DOCS = Path(__file__).resolve().parents[1] / "docs"
MANIFEST_SCHEMA = json.loads((DOCS / "manifest.schema.json").read_text())
REPORT_SCHEMA = json.loads((DOCS / "report.schema.json").read_text())

SIM = ["simulate", "--model", "mirror", "--n", "4", "--p", "0.1", "--trials", "600", "--seed", "3"]


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    return code


def manifest_of(d: Path) -> dict:
    data = json.loads((d / "manifest.json").read_text())
    jsonschema.validate(data, MANIFEST_SCHEMA)
    return data


def test_simulate_writes_outputs(tmp_path):
    assert run(SIM + ["--out", tmp_path]) == 0
    m = manifest_of(tmp_path)
    assert m["censor_count"] == 0 and m["n"] == 4 and m["rng"]
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trials.csv").read_text())))
    assert len(rows) == 600
    assert list(rows[0]) == ["trial", "hitting_time", "censored", "tau_at_hit", "w_0", "w_1"]
    agg = json.loads((tmp_path / "aggregate.json").read_text())
    assert agg["manifest_hash"] == m["manifest_hash"]
    raw = (tmp_path / "trials.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    for name, digest in m["outputs"].items():
        assert sha256_bytes((tmp_path / name).read_bytes()) == digest


def test_manifest_hash_definition(tmp_path):
    run(SIM + ["--out", tmp_path])
    m = manifest_of(tmp_path)
    volatile = {"wall_clock_seconds", "threads", "outputs", "censor_count", "manifest_hash"}
    core = {k: v for k, v in m.items() if k not in volatile}
    assert sha256_bytes(canonical_json(core).encode()) == m["manifest_hash"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "mirror", "--n", "3", "--p", "0.1", "--trials", "5", "--seed", "1"],
    ["simulate", "--model", "mirror", "--n", "4", "--p", "1.5", "--trials", "5", "--seed", "1"],
    ["simulate", "--model", "cubic", "--n", "4", "--p", "0.1", "--trials", "5", "--seed", "1"],
    ["simulate", "--model", "mirror", "--n", "4", "--p", "0.1", "--trials", "0", "--seed", "1"],
    ["simulate", "--model", "mirror", "--n", "4", "--p", "0.1", "--trials", "5"],
    ["simulate", "--model", "mirror", "--n", "4", "--p", "1", "--trials", "5", "--seed", "1", "--conditioned"],
    ["tailgrid", "--model", "mirror", "--n", "40", "--p", "0.1", "--C", "1", "--trials", "5", "--seed", "1",
     "--enforce-regime"],
    ["tailgrid", "--model", "mirror", "--n", "4", "--p", "0.1", "--trials", "5", "--seed", "1", "--enforce-regime"],
    ["tailgrid", "--model", "mirror", "--n", "4", "--p", "0", "--trials", "5", "--seed", "1"],
    ["tailgrid", "--model", "mirror", "--n", "4", "--p", "0.1", "--trials", "5", "--seed", "1", "--alphas", "a,b"],
    ["verify", "--only", "nonsense"],
    [],
])
def test_usage_errors(tmp_path, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(run(argv + ["--out", tmp_path] if argv else argv))
    assert exc.value.code == 2


def test_same_flags_same_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(SIM + ["--out", a, "--threads", "1"])
    run(SIM + ["--out", b, "--threads", "8"])
    for name in ("trials.csv", "aggregate.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert manifest_of(a)["manifest_hash"] == manifest_of(b)["manifest_hash"]


@pytest.mark.parametrize("threads", [1, 2, 8])
def test_replay_is_byte_identical(tmp_path, threads):
    src, dst = tmp_path / "src", tmp_path / "dst"
    run(SIM + ["--conditioned", "--out", src])
    assert run(["replay", src / "manifest.json", "--out", dst, "--threads", threads]) == 0
    for name in ("trials.csv", "aggregate.json"):
        assert (src / name).read_bytes() == (dst / name).read_bytes()
    assert run(["check", dst]) == 0


def test_p0_conditioned_all_censored(tmp_path, capsys):
    argv = ["simulate", "--model", "manhattan", "--n", "4", "--p", "0", "--trials", "7", "--seed", "2",
            "--conditioned", "--cap", "40", "--out", tmp_path]
    assert run(argv) == 0
    assert "7 of 7 trials censored" in capsys.readouterr().err
    assert manifest_of(tmp_path)["censor_count"] == 7
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trials.csv").read_text())))
    assert all(r["censored"] == "1" and r["hitting_time"] == "40" and r["w_0"] == "" for r in rows)


def test_exact(tmp_path):
    argv = ["exact", "--model", "mirror", "--n", "2", "--p", "1", "--conditioned", "--i-max", "10", "--out", tmp_path]
    assert run(argv) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "cdf.csv").read_text())))
    assert rows[0] == {"i": "1", "cdf": "0.5"}
    values = [float(r["cdf"]) for r in rows]
    assert values == sorted(values)
    manifest_of(tmp_path)


def test_exact_budget_exit_3(tmp_path):
    assert run(["exact", "--model", "mirror", "--n", "8", "--p", "0.1", "--out", tmp_path]) == 3
    assert run(["exact", "--model", "mirror", "--n", "4", "--p", "0.1", "--budget", "5", "--out", tmp_path]) == 3


def test_tailgrid(tmp_path):
    argv = ["tailgrid", "--model", "manhattan", "--n", "8", "--p", "0.1", "--C", "1", "--trials", "500",
            "--seed", "4", "--alphas", "0,1,4", "--enforce-regime", "--out", tmp_path]
    assert run(argv) == 0
    text = (tmp_path / "tailgrid.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert text.split("\n")[0] == ("alpha,threshold,tail,tail_lower,tail_upper,bound_a,cdf,cdf_lower,cdf_upper,"
                                   "bound_b,geometric_cdf")
    assert float(rows[0]["tail"]) == 1.0 and float(rows[0]["cdf"]) == 0.0
    assert all(float(r["tail_lower"]) <= float(r["tail"]) <= float(r["tail_upper"]) for r in rows)
    assert manifest_of(tmp_path)["alphas"] == [0.0, 1.0, 4.0]


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert run(SIM) == 0
    assert (tmp_path / "env" / "trials.csv").exists()


def test_check_refuses_mismatched_pairs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(SIM + ["--out", a])
    run(SIM[:-1] + ["4", "--out", b])
    assert run(["check", a]) == 0
    (a / "aggregate.json").write_bytes((b / "aggregate.json").read_bytes())
    assert run(["check", a]) == 1
    run(SIM + ["--out", a])
    (a / "trials.csv").write_bytes((b / "trials.csv").read_bytes())
    assert run(["check", a]) == 1


def test_check_refuses_edited_manifest(tmp_path):
    run(SIM + ["--out", tmp_path])
    m = json.loads((tmp_path / "manifest.json").read_text())
    m["p"] = 0.2
    (tmp_path / "manifest.json").write_text(json.dumps(m))
    assert run(["check", tmp_path]) == 1


def test_verify_only_and_report(tmp_path, capsys):
    assert run(["verify", "--only", "bar_increment", "--only", "worked_product", "--out", tmp_path]) == 0
    out = capsys.readouterr().out
    assert "bar_increment" in out and "worked_product" in out and "xlaw" not in out
    rep = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert [c["name"] for c in rep["checks"]] == ["bar_increment", "worked_product"]
    assert rep["passed"]


def test_verify_injected_fault_fails(tmp_path):
    assert run(["verify", "--only", "bar_increment", "--inject-fault", "g", "--out", tmp_path]) == 1
    rep = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert not rep["passed"] and rep["fault"] == "g"


def test_verify_quick_profile(tmp_path):
    assert run(["verify", "--profile", "quick", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert len(rep["checks"]) == 12


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "mirrorcyl", "simulate", "--model", "mirror", "--n", "5",
                           "--p", "0.1", "--trials", "1", "--seed", "0", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "even" in proc.stderr


def test_verify_accepts_interface_check_names(tmp_path):
    assert run(["verify", "--only", "lemma3", "--out", tmp_path]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert [c["name"] for c in rep["checks"]] == ["bar_increment"]


def test_loop_column_only_when_requested(tmp_path):
    run(SIM + ["--count-loops", "--out", tmp_path])
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trials.csv").read_text())))
    assert list(rows[0])[-1] == "loops_total"
    assert sum(int(r["loops_total"]) for r in rows) > 0
