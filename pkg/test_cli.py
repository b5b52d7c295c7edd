import json

import pytest

from cli import main
from clifford import load_clifford_dump


def _verify(tmp_path, name, *args):
    out = tmp_path / name
    code = main(["verify", *args, "--output", str(out)])
    return code, out


def test_dump_clifford(tmp_path):
    out = tmp_path / "p.txt"
    assert main(["dump-clifford", "--m", "3", "--k", "2", "--output", str(out)]) == 0
    system = load_clifford_dump(out)
    assert (system.m, system.l) == (3, 8)


def test_dump_clifford_empty_family(tmp_path):
    assert main(["dump-clifford", "--m", "4", "--k", "1", "--output", str(tmp_path / "p.txt")]) == 2


def test_clifford_suite_passes_and_is_reproducible(tmp_path):
    code, first = _verify(tmp_path, "a.json", "--suite", "clifford", "--seed", "3")
    assert code == 0
    _, second = _verify(tmp_path, "b.json", "--suite", "clifford", "--seed", "3")
    assert first.read_bytes() == second.read_bytes()
    tree = json.loads(first.read_text(encoding="utf-8"))
    assert tree["config"]["seed"] == 3
    assert tree["summary"]["failed"] == 0


def test_table_has_one_row_per_check(tmp_path):
    _, tree = _verify(tmp_path, "a.json", "--suite", "clifford", "--pair", "3,4")
    _, table = _verify(tmp_path, "a.csv", "--suite", "clifford", "--pair", "3,4", "--format", "table")
    checks = json.loads(tree.read_text(encoding="utf-8"))["checks"]
    assert len(table.read_text(encoding="utf-8").splitlines()) == len(checks) + 1
    assert any(c["name"] == "split.second.anticommutation" for c in checks)


def test_tolerance_override_fails_a_check(tmp_path):
    code, out = _verify(tmp_path, "a.json", "--suite", "clifford", "--tol", "clifford.delta=0")
    assert code == 1
    checks = {c["name"]: c for c in json.loads(out.read_text(encoding="utf-8"))["checks"]}
    assert checks["clifford.delta_periodicity"]["tolerance"] == 0.0
    assert checks["clifford.symmetry"]["pass"]


@pytest.mark.parametrize("args", [
    ["--suite", "nearly-kahler", "--theta", "0.9"],
    ["--suite", "isomorphisms", "--pair", "3,5"],
    ["--suite", "geometry", "--m", "4", "--k", "1"],
    ["--suite", "spectra"],
    [],
])
def test_usage_errors(tmp_path, args):
    code, out = _verify(tmp_path, "a.json", *args)
    assert code == 2
    assert not out.exists()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf-8")
    assert main(["verify", "--suite", "clifford", "--output", str(blocker / "r.json")]) == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("suite = clifford\nseed = 5\n", encoding="utf-8")
    code, out = _verify(tmp_path, "a.json", "--config", str(cfg), "--seed", "6")
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))["config"]["seed"] == 6


def test_star_ricci_parallel_matches_serial(tmp_path):
    args = ["--suite", "star-ricci", "--pair", "3,4", "--samples", "2", "--seed", "7"]
    code, serial = _verify(tmp_path, "serial.json", *args, "--workers", "1")
    assert code == 0
    _, parallel = _verify(tmp_path, "parallel.json", *args, "--workers", "2")
    assert serial.read_bytes() == parallel.read_bytes()


def test_isomorphisms_with_dual_pair(tmp_path):
    code, out = _verify(tmp_path, "a.json", "--suite", "isomorphisms", "--pair", "3,4", "--samples", "1")
    assert code == 0
    tree = json.loads(out.read_text(encoding="utf-8"))
    names = {c["name"] for c in tree["checks"]}
    assert "iso_d2_d4.q_range_4_7_square" in names
    assert "continuity.jump_ratio" in names
    assert tree["notes"]["isomorphisms"]["configuration"]["full_system"] == "Nine_on_16d"


def test_geometry_outside_fd_band_skips_fd_checks(tmp_path):
    _, out = _verify(tmp_path, "a.json", "--suite", "geometry", "--theta", "0.1", "--samples", "1")
    tree = json.loads(out.read_text(encoding="utf-8"))
    assert "fd_checks" in tree["notes"]["geometry"]
    assert not any(c["name"].startswith("connection.") for c in tree["checks"])


def test_timing_adds_wall_times(tmp_path):
    _, out = _verify(tmp_path, "a.json", "--suite", "clifford", "--timing")
    assert all("wall_time" in c for c in json.loads(out.read_text(encoding="utf-8"))["checks"])
