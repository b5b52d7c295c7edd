import pytest

import suites
from config import build_config
from errors import DegeneratePointError
from report import VerificationReport
from suites import PointResult, control_power_summary, point_task, summarize, task_indices
from verify_graph import route_points, run_suite


@pytest.fixture
def geometry_config():
    return build_config({"suite": "geometry", "samples": 2, "seed": 4})


def test_point_tasks_are_deterministic(geometry_config):
    first = point_task("geometry", geometry_config, 1)
    second = point_task("geometry", geometry_config, 1)
    assert first.skipped is None
    assert [(r.name, r.residual) for r in first.report.records] == [
        (r.name, r.residual) for r in second.report.records
    ]
    assert first.report.passed, first.report.failures()


def test_degenerate_points_are_skipped(monkeypatch, geometry_config):
    def degenerate(ctx, index):
        raise DegeneratePointError("clusters overlap")

    monkeypatch.setitem(suites.POINT_TASKS, "geometry", degenerate)
    result = point_task("geometry", geometry_config, 0)
    assert result.skipped == "clusters overlap"
    assert summarize("geometry", geometry_config, [result]).notes["skipped_samples"] == [0]


def test_isomorphism_continuity_path_uses_fine_steps():
    config = build_config({"suite": "isomorphisms", "samples": 1, "seed": 2})
    result = point_task("isomorphisms", config, 0)
    assert result.report.passed, result.report.failures()
    continuity = result.report.notes["continuity"]
    assert continuity["step"] == suites.CONTINUITY_STEP == 1e-3
    assert continuity["steps"] == suites.CONTINUITY_STEPS


def test_control_power_fraction():
    def results(weak):
        return [PointResult("star-ricci", i, VerificationReport(), {"control_power": i >= weak}) for i in range(10)]

    assert control_power_summary(results(1)).passed
    assert not control_power_summary(results(2)).passed


def test_fan_out_one_task_per_sample():
    config = build_config({"suite": "all", "samples": 3})
    sends = route_points({"config": config, "suites": list(config.suites), "results": [], "report": None})
    assert len(sends) == 1 + 4 * 3
    assert task_indices("clifford", config) == range(1)


def test_run_suite_orders_results():
    config = build_config({"suite": "star-ricci", "samples": 3, "seed": 2})
    report, code = run_suite(config)
    assert code == 0
    assert report.get("star_ricci.star_ricci").points == 3 * suites.STRUCTURES_PER_POINT
    assert "control_power_fraction" in report.notes["star-ricci"]


@pytest.mark.parametrize("fraction, count, allowed", [(0.9, 10, 1), (0.95, 500, 25), (0.9, 3, 0)])
def test_allowed_failures(fraction, count, allowed):
    assert suites.allowed_failures(fraction, count) == allowed
