import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from report import FAILED, INCONCLUSIVE, PASSED, VerificationReport, check, emit_report, merge_records, render_report


def test_merge_takes_max_residual_and_sums_points():
    merged = merge_records([check("a", "x", 1e-12, 1e-10), check("a", "x", 5e-11, 1e-10)])
    assert len(merged) == 1
    assert merged[0].residual == 5e-11
    assert merged[0].points == 2
    assert merged[0].passed


def test_lower_bound_merge_keeps_weakest_point():
    merged = merge_records([check("d", "x", 2.0, 1e-2, comparison="gt"), check("d", "x", 1e-3, 1e-2, comparison="gt")])
    assert merged[0].residual == 1e-3
    assert not merged[0].passed


def test_strict_comparison():
    assert not check("a", "x", 0.0, 0.0).passed
    assert check("a", "x", 0.5, 0.1, comparison="gt").passed
    assert not check("a", "x", 0.1, 0.1, comparison="gt").passed


def test_inconclusive_does_not_fail():
    report = VerificationReport()
    report.add(check("iff", "x", 0.0, 0.5, inconclusive=True))
    report.add(check("ok", "x", 0.0, 0.5))
    assert report.summary() == {PASSED: 1, FAILED: 0, INCONCLUSIVE: 1}
    assert report.passed


def test_table_has_one_row_per_check():
    report = VerificationReport(records=[check(n, "x", 0.0, 1.0) for n in ("b", "a", "b", "c")])
    lines = render_report(report, "table").splitlines()
    assert lines[0] == "name,anchor,residual,tolerance,pass"
    assert len(lines) == 1 + 3


def test_emit_is_byte_identical(tmp_path):
    report = VerificationReport(records=[check("a", "R_0 = P", 1e-13, 1e-12)], config={"seed": 7})
    first = emit_report(report, tmp_path / "a.json").read_bytes()
    second = emit_report(report, tmp_path / "b.json").read_bytes()
    assert first == second
    assert b"wall_time" not in first


@settings(max_examples=20, deadline=None)
@given(st.permutations(range(6)))
def test_aggregation_is_order_independent(order):
    records = [check(name, "x", residual, 1e-3)
               for name, residual in itertools.product(("p", "q"), (1e-5, 2e-4, 3e-6))]
    shuffled = VerificationReport(records=[records[i] for i in order])
    assert render_report(shuffled) == render_report(VerificationReport(records=records))
