import json
import subprocess
import sys

CLI = [sys.executable, "-m", "steinkit"]

MIXED = {"components": [
    {"kind": "atom", "location": 1.0, "mass": 0.25},
    {"kind": "atom", "location": -1.0, "mass": 0.25},
    {"kind": "uniform", "lo": -1.0, "hi": 1.0, "weight": 0.5},
]}
TWO_BUMP = {"components": [
    {"kind": "uniform", "lo": -2.0, "hi": -1.0, "weight": 0.5},
    {"kind": "uniform", "lo": 1.0, "hi": 2.0, "weight": 0.5},
]}
DIRAC = {"components": [{"kind": "atom", "location": 0.7, "mass": 1.0}]}
EXP1 = {"components": [{"kind": "exponential", "rate": 1.0, "weight": 1.0}]}
NORMAL = {"components": [{"kind": "normal", "mean": 0.0, "sd": 1.0, "weight": 1.0}]}


def run_cli(*args):
    return subprocess.run(CLI + list(args), capture_output=True, text=True)


def write_spec(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_help_exits_zero():
    cp = run_cli("--help")
    assert cp.returncode == 0
    assert "steinkit" in cp.stdout


def test_check_exists(tmp_path):
    cp = run_cli("check", write_spec(tmp_path, "mixed.json", MIXED))
    assert cp.returncode == 0, cp.stderr
    doc = json.loads(cp.stdout)
    assert doc["schema"] == "steinkit/1"
    assert doc["verdict"] == "exists"


def test_check_not_exists_with_failing_region(tmp_path):
    cp = run_cli("check", write_spec(tmp_path, "twobump.json", TWO_BUMP))
    assert cp.returncode == 3
    doc = json.loads(cp.stdout)
    assert doc["verdict"] == "not_exists"
    assert doc["failing_region"] == [-1.0, 1.0]


def test_check_degenerate(tmp_path):
    cp = run_cli("check", write_spec(tmp_path, "dirac.json", DIRAC))
    assert cp.returncode == 4
    assert json.loads(cp.stdout)["verdict"] == "degenerate"


def test_parse_error_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    cp = run_cli("check", str(bad))
    assert cp.returncode == 1
    assert "error" in cp.stderr


def test_missing_file_exits_one():
    cp = run_cli("check", "/nonexistent/spec.json")
    assert cp.returncode == 1


def test_unknown_verb_exits_one():
    cp = run_cli("frobnicate")
    assert cp.returncode == 1


def test_kernel_csv_and_descriptor(tmp_path):
    out = tmp_path / "kernel.csv"
    cp = run_cli("kernel", write_spec(tmp_path, "exp1.json", EXP1),
                 "--out", str(out), "--grid", "32")
    assert cp.returncode == 0, cp.stderr
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,tau"
    assert len(lines) == 33
    descriptor = json.loads((tmp_path / "kernel.csv.json").read_text())
    assert descriptor == {"schema": "steinkit/1", "form": "linear",
                          "params": {"slope": 1.0, "origin": 0.0}}


def test_kernel_atom_rows(tmp_path):
    out = tmp_path / "kernel.csv"
    cp = run_cli("kernel", write_spec(tmp_path, "mixed.json", MIXED),
                 "--out", str(out), "--grid", "16")
    assert cp.returncode == 0, cp.stderr
    lines = out.read_text().strip().split("\n")
    atom_rows = [l for l in lines if l.endswith("# atom")]
    assert len(atom_rows) == 2
    assert all(",0 " in row for row in atom_rows)
    assert not (tmp_path / "kernel.csv.json").exists()


def test_kernel_gate_failure_exit_code(tmp_path):
    cp = run_cli("kernel", write_spec(tmp_path, "twobump.json", TWO_BUMP),
                 "--out", str(tmp_path / "k.csv"))
    assert cp.returncode == 3
    assert "error" in cp.stderr


def test_bound_json(tmp_path):
    cp = run_cli("bound", write_spec(tmp_path, "normal.json", NORMAL), "--grid", "64")
    assert cp.returncode == 0, cp.stderr
    doc = json.loads(cp.stdout)
    assert set(doc) == {"schema", "tv", "bound_l1", "bound_sd"}
    assert doc["tv"] < 1e-7
    assert doc["bound_sd"] < 1e-8


def test_clt_curve_golden_bounds(tmp_path):
    out = tmp_path / "curve.csv"
    cp = run_cli("clt", write_spec(tmp_path, "exp1.json", EXP1),
                 "--n", "4,16,64,256", "--grid", "1024", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "n,bound,empirical"
    bounds = [float(l.split(",")[1]) for l in lines[1:]]
    for got, want in zip(bounds, [1.0, 0.5, 0.25, 0.125]):
        assert abs(got - want) < 1e-10
    doc = json.loads(cp.stdout)
    assert doc["ns"] == [4, 16, 64, 256]
    assert abs(doc["slope_bound"] + 0.5) < 1e-10


def test_clt_rejects_bad_n(tmp_path):
    cp = run_cli("clt", write_spec(tmp_path, "exp1.json", EXP1), "--n", "4,banana")
    assert cp.returncode == 1


def test_recover_density_csv(tmp_path):
    out = tmp_path / "density.csv"
    cp = run_cli("recover", write_spec(tmp_path, "normal.json", NORMAL),
                 "--out", str(out), "--grid", "512")
    assert cp.returncode == 0, cp.stderr
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,p"
    assert len(lines) == 513
    mid = lines[len(lines) // 2].split(",")
    assert abs(float(mid[0])) < 0.1 and float(mid[1]) > 0.35


def test_corpus_verb_passes():
    cp = run_cli("corpus", "--grid", "256")
    assert cp.returncode == 0, cp.stdout + cp.stderr
    assert "FAIL" not in cp.stdout
    lines = cp.stdout.strip().split("\n")
    assert lines[-1].endswith("checks passed")


def test_outputs_are_byte_identical(tmp_path):
    spec = write_spec(tmp_path, "exp1.json", EXP1)
    a = run_cli("bound", spec, "--grid", "64")
    b = run_cli("bound", spec, "--grid", "64")
    assert a.stdout == b.stdout
    out1, out2 = tmp_path / "k1.csv", tmp_path / "k2.csv"
    run_cli("kernel", spec, "--out", str(out1), "--grid", "64")
    run_cli("kernel", spec, "--out", str(out2), "--grid", "64")
    assert out1.read_bytes() == out2.read_bytes()


def test_invalid_tail_quantile_exits_one(tmp_path):
    cp = run_cli("check", write_spec(tmp_path, "exp1.json", EXP1), "--tail", "1e-5")
    assert cp.returncode == 1
    assert "tail_quantile" in cp.stderr


def test_floats_render_17_significant_digits(tmp_path):
    cp = run_cli("check", write_spec(tmp_path, "mixed.json", MIXED))
    # verdict JSON carries no long floats; use the clt bounds instead
    cp = run_cli("clt", write_spec(tmp_path, "exp1.json", EXP1),
                 "--n", "4,16,64,256", "--grid", "1024")
    doc = json.loads(cp.stdout)
    assert doc["bounds"][1] == 0.5 or abs(doc["bounds"][1] - 0.5) < 1e-15
