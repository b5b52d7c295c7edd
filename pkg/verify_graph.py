"""
LANGGRAPH ORCHESTRATION OF THE VERIFICATION SUITES
configure -> one Send per (suite, sample) to the suite nodes (parallel) -> finalizer
Each suite node returns ONLY its point result; results merge through an operator.add reducer
"""
import logging
import operator
from pathlib import Path
from typing import Annotated, Any, Dict, TypedDict

from langgraph.graph import END, START, StateGraph
from langgraph.types import Send

from config import RunConfig, apply_tolerance_overrides
from report import FAILED, INCONCLUSIVE, PASSED, VerificationReport, emit_report
from suites import PointResult, point_task, summarize, task_indices

logger = logging.getLogger(__name__)

# suite name -> graph node name
SUITE_NODES = {
    "clifford": "clifford",
    "geometry": "geometry",
    "isomorphisms": "isomorphisms",
    "nearly-kahler": "nearly_kahler",
    "star-ricci": "star_ricci",
}

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# ============================================================
# GRAPH STATE
# ============================================================
class VerifyState(TypedDict):
    config: RunConfig
    suites: list[str]
    results: Annotated[list[PointResult], operator.add]
    report: VerificationReport | None


class PointState(TypedDict):
    config: RunConfig
    suite: str
    index: int


# ============================================================
# CONFIGURE NODE
# ============================================================
def configure_node(state: VerifyState) -> Dict:
    config = state["config"]
    suites = list(config.suites)
    tasks = sum(len(task_indices(s, config)) for s in suites)
    print(f"🚀 [Configure] suites: {', '.join(suites)} | theta={config.theta} | "
          f"samples={config.samples} | seed={config.seed} | tasks={tasks}")
    return {"suites": suites}


def route_points(state: VerifyState) -> list[Send]:
    """Fan out one task per (suite, sample); the graph runs them in parallel."""
    config = state["config"]
    return [
        Send(SUITE_NODES[suite], {"config": config, "suite": suite, "index": index})
        for suite in state["suites"]
        for index in task_indices(suite, config)
    ]


# ============================================================
# SUITE NODES
# ============================================================
def make_suite_node(suite: str):
    def suite_node(task: PointState) -> Dict:
        result = point_task(suite, task["config"], task["index"])
        logger.info("[%s] sample %d: %d checks", suite, task["index"], len(result.report.records))
        return {"results": [result]}

    suite_node.__name__ = f"{SUITE_NODES[suite]}_node"
    return suite_node


# ============================================================
# FINALIZER NODE
# ============================================================
def finalizer_node(state: VerifyState) -> Dict:
    """Combine point results in (suite, sample) order into one report."""
    config = state["config"]
    print("\n📊 [Finalizer] Combining point results...")
    order = {suite: rank for rank, suite in enumerate(SUITE_NODES)}
    results = sorted(state["results"], key=lambda r: (order[r.suite], r.index))

    report = VerificationReport(config=config.as_record())
    for suite in state["suites"]:
        own = [r for r in results if r.suite == suite]
        for result in own:
            report.extend(result.report.records)
        first = next((r for r in own if r.skipped is None), None)
        summary = summarize(suite, config, own)
        report.extend(summary.records)
        notes: dict[str, Any] = dict(summary.notes)
        if first is not None and first.report.notes:
            notes["first_sample"] = first.report.notes
        if notes:
            report.notes[suite] = notes

    report.records = apply_tolerance_overrides(report.records, config.tol_overrides)
    counts = report.summary()
    print(f"    ✅ passed: {counts[PASSED]}  ❌ failed: {counts[FAILED]}  ❔ inconclusive: {counts[INCONCLUSIVE]}")
    return {"report": report}


# ============================================================
# BUILD GRAPH
# ============================================================
def build_graph():
    graph = StateGraph(VerifyState)
    graph.add_node("configure", configure_node)
    for suite, node in SUITE_NODES.items():
        graph.add_node(node, make_suite_node(suite))
    graph.add_node("finalizer", finalizer_node)

    graph.add_edge(START, "configure")
    graph.add_conditional_edges("configure", route_points, list(SUITE_NODES.values()))
    for node in SUITE_NODES.values():
        graph.add_edge(node, "finalizer")
    graph.add_edge("finalizer", END)
    return graph.compile()


app = build_graph()


def exit_code(report: VerificationReport) -> int:
    return EXIT_PASSED if report.passed else EXIT_FAILED


def run_suite(config: RunConfig) -> tuple[VerificationReport, int]:
    """Run the configured suite(s); writes the report when ``config.output`` is set."""
    final = app.invoke(
        {"config": config, "suites": [], "results": [], "report": None},
        {"max_concurrency": config.workers},
    )
    report = final["report"]
    if config.output:
        path = emit_report(report, config.output, config.format, config.timing)
        print(f"📄 Report written to {Path(path)}")
    return report, exit_code(report)
