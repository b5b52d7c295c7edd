"""
Verification records and reports.

Every check produces a CheckRecord. Records with equal names merge by
max residual and summed point counts, so a report does not depend on the
order in which points or suites were processed.
"""
import csv
import io
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Literal

__version__ = "0.3.0"

PASSED = "passed"
FAILED = "failed"
INCONCLUSIVE = "inconclusive"

Comparison = Literal["lt", "gt"]


# ============================================================
# RECORDS
# ============================================================
@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    residual: float
    tolerance: float
    comparison: Comparison = "lt"
    points: int = 1
    wall_time: float = 0.0
    inconclusive: bool = False

    @property
    def passed(self) -> bool:
        if self.comparison == "gt":
            return self.residual > self.tolerance
        return self.residual < self.tolerance

    @property
    def status(self) -> str:
        if self.inconclusive:
            return INCONCLUSIVE
        return PASSED if self.passed else FAILED

    def merge(self, other: "CheckRecord") -> "CheckRecord":
        return replace(
            self,
            residual=max(self.residual, other.residual) if self.comparison == "lt"
            else min(self.residual, other.residual),
            tolerance=min(self.tolerance, other.tolerance) if self.comparison == "lt"
            else max(self.tolerance, other.tolerance),
            points=self.points + other.points,
            wall_time=self.wall_time + other.wall_time,
            inconclusive=self.inconclusive or other.inconclusive,
        )


def check(name: str, anchor: str, residual: float, tolerance: float,
          comparison: Comparison = "lt", inconclusive: bool = False) -> CheckRecord:
    return CheckRecord(name=name, anchor=anchor, residual=float(residual),
                       tolerance=float(tolerance), comparison=comparison,
                       inconclusive=inconclusive)


def merge_records(records: Iterable[CheckRecord]) -> list[CheckRecord]:
    merged: dict[str, CheckRecord] = {}
    for record in records:
        merged[record.name] = merged[record.name].merge(record) if record.name in merged else record
    return [merged[name] for name in sorted(merged)]


@contextmanager
def timed(sink: list[float]) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        sink.append(time.perf_counter() - start)


# ============================================================
# REPORT
# ============================================================
@dataclass
class VerificationReport:
    records: list[CheckRecord] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def extend(self, records: Iterable[CheckRecord]) -> None:
        self.records.extend(records)

    def include(self, other: "VerificationReport") -> None:
        """Take over the records and notes of a sub-report."""
        self.records.extend(other.records)
        self.notes.update(other.notes)

    def merged(self) -> list[CheckRecord]:
        return merge_records(self.records)

    def get(self, name: str) -> CheckRecord:
        for record in self.merged():
            if record.name == name:
                return record
        raise KeyError(name)

    def summary(self) -> dict[str, int]:
        counts = {PASSED: 0, FAILED: 0, INCONCLUSIVE: 0}
        for record in self.merged():
            counts[record.status] += 1
        return counts

    @property
    def passed(self) -> bool:
        return self.summary()[FAILED] == 0

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.merged() if r.status == FAILED]


# ============================================================
# EMIT
# ============================================================
def report_tree(report: VerificationReport, include_timing: bool = False) -> dict[str, Any]:
    checks = []
    for record in report.merged():
        entry = {
            "name": record.name,
            "anchor": record.anchor,
            "residual": record.residual,
            "tolerance": record.tolerance,
            "comparison": record.comparison,
            "status": record.status,
            "pass": record.passed,
            "points": record.points,
        }
        if include_timing:
            entry["wall_time"] = record.wall_time
        checks.append(entry)
    return {
        "tool_version": report.version,
        "config": report.config,
        "notes": report.notes,
        "checks": checks,
        "summary": report.summary(),
    }


def render_report(report: VerificationReport, fmt: str = "tree", include_timing: bool = False) -> str:
    if fmt == "tree":
        return json.dumps(report_tree(report, include_timing), indent=2, sort_keys=True,
                          ensure_ascii=False) + "\n"
    if fmt == "table":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["name", "anchor", "residual", "tolerance", "pass"])
        for record in report.merged():
            writer.writerow([record.name, record.anchor, repr(record.residual),
                             repr(record.tolerance), record.status])
        return buffer.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: VerificationReport, path: str | Path, fmt: str = "tree",
                include_timing: bool = False) -> Path:
    path = Path(path)
    text = render_report(report, fmt, include_timing)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return path
