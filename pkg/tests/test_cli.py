import json
import subprocess
import sys

import pytest

from sptunwind.cli import main
from sptunwind.scenarios import SCENARIOS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cluster_scenario(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "cluster", "--L", "4", "--out", str(tmp_path))
    assert code == 0 and "PASS cluster" in out
    report = json.loads((tmp_path / "cluster.json").read_text())
    assert report["fidelity"] == 1.0 and report["passed"]


def test_cohomology_prints_label(capsys):
    code, out, _ = run(capsys, "run", "cohomology", "--group", "z2z2.json")
    assert code == 0 and out.startswith("H2 = Z2\n")
    code, out, _ = run(capsys, "cohomology", "--group", "z3z3.json")
    assert code == 0 and out.strip() == "H2 = Z3"


def test_cohomology_writes_representatives(capsys, tmp_path):
    code, _, _ = run(capsys, "cohomology", "--group", "d8.json", "--out", str(tmp_path))
    assert code == 0
    assert json.loads((tmp_path / "cohomology.json").read_text())["h2"] == "Z2"


def test_breaking_flags_layers_and_markdown(capsys, tmp_path):
    code, out, _ = run(capsys, "run", "breaking", "--out", str(tmp_path), "--markdown")
    assert code == 0
    report = json.loads((tmp_path / "breaking.json").read_text())
    obs = [o for o in report["observations"] if o["kind"] == "symmetry-breaking"]
    assert obs and obs[0]["layers"]
    assert "Result: PASS" in (tmp_path / "breaking.md").read_text(encoding="utf-8")


def test_fermion_subcommand(capsys):
    code, out, _ = run(capsys, "fermion", "--class", "cii", "--L", "4", "--verify")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "fermion", "--nu", "2", "--class", "aiii", "--verify")
    report = json.loads(out)
    assert code == 0 and report["observations"][0]["obstructed"] == ["S_tilde"]
    code, out, _ = run(capsys, "fermion", "--L", "4")
    assert code == 0 and "A" in json.loads(out)


def test_classify_rep(capsys):
    code, out, _ = run(capsys, "classify-rep", "pauli.json")
    result = json.loads(out)
    assert code == 0 and result["class"] == [1] and not result["trivial"]


def test_table_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "table", "5", "--out", str(tmp_path))
    assert code == 0 and "| Cluster state" in out and "| PASS" in out
    assert (tmp_path / "table5.md").exists()
    code, out, _ = run(capsys, "table", "3")
    assert code == 0 and "reported-only" in out


@pytest.mark.parametrize("argv", [
    ["run", "cluster", "--L", "3"],
    ["run", "cohomology", "--group", "missing.json"],
    ["fermion", "--verify", "--L", "3"],
    ["fermion", "--verify", "--nu", "2", "--class", "cii"],
])
def test_invalid_input_exits_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_unknown_scenario_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "nope"])
    assert exc.value.code == 2


def test_reports_are_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "cohomology", "--group", "z2z2.json", "--out", str(d), "--seed", "3"]) == 0
        assert main(["run", "fermion-nu4", "--out", str(d)]) == 0
    capsys.readouterr()
    for name in ("cohomology.json", "fermion-nu4.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_all_in_parallel(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sptunwind", "run", "all", "--jobs", "4",
                           "--out", str(tmp_path)], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    for name in SCENARIOS:
        assert f"PASS {name}" in proc.stdout
        assert json.loads((tmp_path / f"{name}.json").read_text())["passed"]


def test_dump_state_writes_snapshots(capsys, tmp_path):
    assert main(["run", "cluster", "--out", str(tmp_path), "--dump-state"]) == 0
    assert list(tmp_path.glob("*.npy"))
