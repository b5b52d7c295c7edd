"""
Verification suites as pure per-point tasks.

A task takes (config, sample index) and returns a PointResult. Each sample
draws its own seed from (base seed, index, suite stream), so tasks can run
in any order or in parallel and still give the same report.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from bundleiso import (
    DualConfiguration,
    continuity_check,
    dual_configuration,
    eigen_split,
    global_section_R1,
    iso_d1_d3,
    iso_d2_d4_dual,
    m1_remark_check,
    sigma_map,
    verify_global_section,
)
from clifford import (
    ANCHOR_SYSTEM,
    FullSquareFlavor,
    build_clifford_system,
    build_full_square_system,
    build_skew_representation,
    clifford_residuals,
    delta,
    split_dual_subsystems,
    sum_of_squares_residual,
    verify_clifford_system,
    verify_skew_representation,
)
from config import RunConfig, in_fd_band
from diffgeo import (
    connection_coefficients,
    covariant_derivative,
    directional_derivative,
    omega_bar_check,
    principal_frame_field,
    projected_constant,
    projected_constant_derivative,
    richardson_ratio,
    torsion_residual,
    verify_connection,
)
from errors import DegeneratePointError
from hermitian import (
    build_closed_form_J,
    d1_d2_swap_structure,
    nearly_kahler_check,
    prop31_witness,
    random_complex_structure,
    random_pairswap_J,
    verify_pairswap,
    witness_is_nonzero,
)
from isoparametric import (
    IsoparametricFamily,
    SurfacePoint,
    cartan_munzner,
    level_residual,
    sample_point,
    sample_points,
    sample_seed,
    tangent_curve,
    tangent_path,
    tangent_projector,
    velocity_richardson_ratio,
)
from report import VerificationReport, check, timed
from shape import (
    DistributionData,
    maurer_cartan_check,
    principal_decomposition,
    verify_focal_normal_frame,
    verify_frame,
    verify_lemma21,
    verify_shape,
)
from starricci import (
    gauss_kronecker_check,
    star_ricci_matrix,
    symmetry_criterion,
    verify_star_ricci,
    weakly_star_einstein_check,
)
from subspaces import max_abs

logger = logging.getLogger(__name__)

# ============================================================
# CONSTANTS
# ============================================================
STREAMS = {"clifford": 1, "geometry": 2, "isomorphisms": 3, "nearly-kahler": 4, "star-ricci": 5}
WITNESS_STREAM = 6

DEFAULT_PAIR = (3, 4)
FULL_SQUARE_SAMPLES = 1000
CONTINUITY_STEPS = 100
CONTINUITY_STEP = 1e-3
STRUCTURES_PER_POINT = 10
CONTROL_POWER = 1e-3
CONTROL_POWER_FRACTION = 0.9
WITNESS_SAMPLES = 500
WITNESS_NONZERO_FRACTION = 0.95
MU_VARIANTS = (0.5, 2.0)
RICHARDSON_BAND = 0.5

ANCHOR_LEVEL = "M = f^{-1}(cos 4θ), f = |x|⁴ − 2 Σ ⟨P_i x, x⟩²"
ANCHOR_NORMAL = "ξ = (sin2θ x − P x) / cos2θ"
ANCHOR_P = "P lies on the Clifford sphere"
ANCHOR_FOCAL = "φ_1(M) = φ_3(M) = M_+, φ_2(M) = φ_4(M) = M_−"
ANCHOR_CURVE = "retraction curve with γ(0) = x, γ'(0) = v"
ANCHOR_FD = "Levi-Civita connection of the induced metric"
ANCHOR_SECOND_ORDER = "central differences are second order: error ratio at h and h/2 in [3.5, 4.5]"
ANCHOR_CONTROL = "non pair-swapping structures have nonzero *Ric"
ANCHOR_NONZERO = "⟨N(e_1, e_2), e_3⟩ ≠ 0 at generic points"


# ============================================================
# TYPES
# ============================================================
@dataclass(frozen=True, eq=False)
class PointResult:
    suite: str
    index: int
    report: VerificationReport
    flags: dict[str, bool] = field(default_factory=dict)
    skipped: str | None = None


@dataclass(frozen=True, eq=False)
class SuiteContext:
    config: RunConfig
    family: IsoparametricFamily | None
    dual: DualConfiguration | None


@lru_cache(maxsize=16)
def suite_context(suite: str, config: RunConfig) -> SuiteContext:
    """Family (and dual configuration) the suite samples from."""
    if suite == "clifford":
        return SuiteContext(config, None, None)
    pair = config.pair or (DEFAULT_PAIR if suite == "nearly-kahler" else None)
    if pair is not None:
        dual = dual_configuration(pair, config.theta)
        return SuiteContext(config, dual.family, dual)
    family = IsoparametricFamily(build_clifford_system(config.m, config.k), config.theta)
    return SuiteContext(config, family, None)


def task_indices(suite: str, config: RunConfig) -> range:
    return range(1) if suite == "clifford" else range(config.samples)


def allowed_failures(fraction: float, count: int) -> int:
    """Largest number of failing samples still meeting the required passing fraction."""
    return math.floor((1.0 - fraction) * count + 1e-9)


def _draw(suite: str, ctx: SuiteContext, index: int) -> tuple[SurfacePoint, np.random.Generator]:
    point_seed, aux_seed = sample_seed(ctx.config.seed, index, STREAMS[suite]).spawn(2)
    return sample_point(ctx.family, point_seed), np.random.default_rng(aux_seed)


def _random_tangent(point: SurfacePoint, rng: np.random.Generator) -> np.ndarray:
    v = tangent_projector(point) @ rng.standard_normal(len(point.x))
    return v / np.linalg.norm(v)


# ============================================================
# CLIFFORD
# ============================================================
def clifford_task(ctx: SuiteContext, index: int) -> tuple[VerificationReport, dict[str, bool]]:
    config = ctx.config
    report = VerificationReport()
    if config.pair is None:
        system = build_clifford_system(config.m, config.k)
        report.include(verify_clifford_system(system))
        report.include(verify_skew_representation(build_skew_representation(config.m - 1, config.k)))
        again = build_clifford_system(config.m, config.k)
        same = all(np.array_equal(a, b) for a, b in zip(system.matrices, again.matrices))
        report.add(check("clifford.determinism", "construction is a pure function of (m, k)",
                         0.0 if same else 1.0, 0.5))

    rng = np.random.default_rng(sample_seed(config.seed, index, STREAMS["clifford"]))
    for flavor in FullSquareFlavor:
        full = build_full_square_system(flavor)
        prefix = f"full_square.{flavor.value}"
        for name, residual in clifford_residuals(full.base.matrices).items():
            report.add(check(f"{prefix}.{name}", ANCHOR_SYSTEM, residual, 1e-12))
        xs = rng.standard_normal((FULL_SQUARE_SAMPLES, full.base.ambient_dim))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        report.add(check(f"{prefix}.sum_of_squares", "Σ ⟨P_i x, x⟩² = |x|⁴",
                         max(sum_of_squares_residual(full.base, x) for x in xs), 1e-12))
        report.add(check(f"{prefix}.cartan_munzner", "f ≡ −1 on the unit sphere for a full system",
                         abs(cartan_munzner(full.base, xs[0]) + 1.0), 1e-12))

    if config.pair is not None:
        dual = dual_configuration(config.pair, config.theta)
        for label, part in zip(("first", "second"), split_dual_subsystems(dual.full, dual.m)):
            for name, residual in clifford_residuals(part.matrices).items():
                report.add(check(f"split.{label}.{name}", ANCHOR_SYSTEM, residual, 1e-12))

    periodicity = max(abs(delta(m + 8) - 16 * delta(m)) for m in range(1, 17))
    report.add(check("clifford.delta_periodicity", "δ(m + 8) = 16 δ(m)", float(periodicity), 0.5))
    return report, {}


# ============================================================
# GEOMETRY
# ============================================================
def _point_invariants(family: IsoparametricFamily, point: SurfacePoint) -> VerificationReport:
    theta = family.theta
    s2, c2 = math.sin(2 * theta), math.cos(2 * theta)
    eye = np.eye(family.ambient_dim)
    report = VerificationReport()
    report.add(check("isoparametric.level", ANCHOR_LEVEL, level_residual(family, point.x), 1e-10))
    report.add(check("isoparametric.normal_unit", ANCHOR_NORMAL, abs(np.linalg.norm(point.xi) - 1.0), 1e-10))
    report.add(check("isoparametric.normal_orthogonal", ANCHOR_NORMAL, abs(point.x @ point.xi), 1e-10))
    report.add(check("isoparametric.normal_closed_form", ANCHOR_NORMAL,
                     max_abs(point.xi - (s2 * point.x - point.p_op @ point.x) / c2), 1e-12))
    report.add(check("isoparametric.p_involution", ANCHOR_P,
                     max(max_abs(point.p_op @ point.p_op - eye), max_abs(point.p_op - point.p_op.T)), 1e-8))
    report.add(check("isoparametric.p_unit_coefficients", ANCHOR_P,
                     abs(np.linalg.norm(point.coefficients / s2) - 1.0), 1e-8))
    focal = max(abs(abs(cartan_munzner(family.system, phi)) - 1.0) for phi in point.phis)
    report.add(check("isoparametric.focal_levels", ANCHOR_FOCAL, focal, 1e-9))
    report.add(check("isoparametric.focal_frames", ANCHOR_FOCAL,
                     max(max(abs(np.linalg.norm(p) - 1.0), abs(np.linalg.norm(q) - 1.0), abs(p @ q))
                         for p, q in zip(point.phis, point.xis)), 1e-10))
    return report


def _fd_checks(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData, rng: np.random.Generator,
               step: float) -> VerificationReport:
    report = VerificationReport()
    v = _random_tangent(point, rng)
    u, w = rng.standard_normal((2, family.ambient_dim))

    conn = connection_coefficients(family, point, principal_frame_field(family, point, data), step)
    report.include(verify_connection(conn))
    report.include(omega_bar_check(family, point, data, v, step))

    fu, fw = projected_constant(u), projected_constant(w)
    report.add(check("connection.projected_constant", ANCHOR_FD,
                     max_abs(covariant_derivative(family, point, fu, v, step)
                             - projected_constant_derivative(family, point, u, v)), 1e-6))
    lhs = directional_derivative(family, point, lambda y: np.array(fu(y) @ fw(y)), v, step)
    rhs = (covariant_derivative(family, point, fu, v, step) @ fw(point)
           + fu(point) @ covariant_derivative(family, point, fw, v, step))
    report.add(check("connection.metric_compatibility", ANCHOR_FD, abs(float(lhs) - float(rhs)), 1e-6))
    report.add(check("connection.torsion_free", ANCHOR_FD, torsion_residual(family, point, u, w, step), 1e-6))

    forward, backward = tangent_curve(family, point, v, step), tangent_curve(family, point, v, -step)
    report.add(check("isoparametric.tangent_curve_velocity", ANCHOR_CURVE,
                     max_abs((forward.x - backward.x) / (2 * step) - v), 1e-6))
    report.add(check("diffgeo.richardson_ratio", ANCHOR_SECOND_ORDER,
                     abs(richardson_ratio(family, point, v) - 4.0), RICHARDSON_BAND))
    report.add(check("isoparametric.tangent_curve_richardson", ANCHOR_SECOND_ORDER,
                     abs(velocity_richardson_ratio(family, point, v) - 4.0), RICHARDSON_BAND))
    return report


def geometry_task(ctx: SuiteContext, index: int) -> tuple[VerificationReport, dict[str, bool]]:
    family, config = ctx.family, ctx.config
    point, rng = _draw("geometry", ctx, index)
    data = principal_decomposition(family, point)
    report = _point_invariants(family, point)
    report.include(verify_shape(family, data))
    report.include(verify_frame(family, point, data))
    report.include(verify_lemma21(family, point, data))
    report.include(verify_focal_normal_frame(family, point, data))
    report.include(maurer_cartan_check(family, point, data, _random_tangent(point, rng)))

    moved = tangent_curve(family, point, _random_tangent(point, rng), 0.1)
    report.add(check("isoparametric.tangent_curve_level", ANCHOR_CURVE, level_residual(family, moved.x), 1e-10))
    if in_fd_band(family.theta):
        report.include(_fd_checks(family, point, data, rng, config.fd_step))
    return report, {}


# ============================================================
# ISOMORPHISMS
# ============================================================
def isomorphisms_task(ctx: SuiteContext, index: int) -> tuple[VerificationReport, dict[str, bool]]:
    family = ctx.family
    point, rng = _draw("isomorphisms", ctx, index)
    data = principal_decomposition(family, point)
    report = VerificationReport()
    report.extend(iso_d1_d3(family, point, data).checks)
    report.extend(eigen_split(family, point, data).checks)

    if family.system.m % 2 == 1:
        r1 = global_section_R1(family, point)
        report.include(verify_global_section(family, point, r1))
        report.extend(sigma_map(family, point, data, r1).checks)
        if family.system.m == 1:
            report.include(m1_remark_check(family, point, data))
        path = tangent_path(family, point, _random_tangent(point, rng), CONTINUITY_STEP, CONTINUITY_STEPS)
        continuity = continuity_check(family, path, CONTINUITY_STEP)
        report.include(continuity)

    if ctx.dual is not None:
        report.extend(iso_d2_d4_dual(ctx.dual, point, data).checks)
    return report, {}


# ============================================================
# NEARLY KÄHLER
# ============================================================
def nearly_kahler_task(ctx: SuiteContext, index: int) -> tuple[VerificationReport, dict[str, bool]]:
    dual, step = ctx.dual, ctx.config.fd_step
    family = dual.family
    point, rng = _draw("nearly-kahler", ctx, index)
    data = principal_decomposition(family, point)
    structure = build_closed_form_J(dual, point)

    report = VerificationReport()
    report.include(verify_pairswap(structure.matrix, data, prefix="acs"))
    report.include(nearly_kahler_check(dual, point, structure, step, data, rng))
    conn = connection_coefficients(family, point, principal_frame_field(family, point, data), step)
    report.include(verify_connection(conn))
    if dual.m == 3:
        report.include(prop31_witness(dual, point, 1.0, step, data, MU_VARIANTS))
    return report, {}


def witness_nonzero_summary(ctx: SuiteContext) -> VerificationReport:
    """The witness ⟨N(e_1, e_2), e_3⟩ is nonzero at almost every point (closed form, cheap)."""
    dual = ctx.dual
    points = sample_points(dual.family, ctx.config.seed, WITNESS_SAMPLES, WITNESS_STREAM)
    nonzero = sum(witness_is_nonzero(dual, p, principal_decomposition(dual.family, p)) for p in points)
    vanishing = len(points) - nonzero
    allowed = allowed_failures(WITNESS_NONZERO_FRACTION, len(points))
    report = VerificationReport(notes={"witness_nonzero_fraction": nonzero / len(points)})
    report.add(check("witness.vanishing_points", ANCHOR_NONZERO, float(vanishing), allowed + 0.5))
    return report


# ============================================================
# *-RICCI
# ============================================================
def star_ricci_task(ctx: SuiteContext, index: int) -> tuple[VerificationReport, dict[str, bool]]:
    family = ctx.family
    point, rng = _draw("star-ricci", ctx, index)
    data = principal_decomposition(family, point)
    report = VerificationReport()
    for _ in range(STRUCTURES_PER_POINT):
        j = random_pairswap_J(point, data, rng)
        report.include(verify_pairswap(j.matrix, data, prefix="star_ricci.acs"))
        report.include(verify_star_ricci(family, point, j))
        report.include(symmetry_criterion(family, point, j, data))
        report.include(weakly_star_einstein_check(family, point, j, data))
        report.include(gauss_kronecker_check(family, point, j, data))

    controls = {"control.random": random_complex_structure(point, rng)}
    m1, m2 = family.multiplicities
    if m2 >= m1:
        controls["control.d1_d2"] = d1_d2_swap_structure(data)
    for prefix, j in controls.items():
        report.include(verify_star_ricci(family, point, j, prefix=prefix, expect_zero=False))
        report.include(symmetry_criterion(family, point, j, data))
        report.include(weakly_star_einstein_check(family, point, j, data, expect_einstein=False))

    power = max_abs(star_ricci_matrix(family, point, controls["control.random"]).matrix)
    return report, {"control_power": power > CONTROL_POWER}


def control_power_summary(results: list[PointResult]) -> VerificationReport:
    counted = [r for r in results if r.skipped is None]
    weak = sum(not r.flags.get("control_power", False) for r in counted)
    allowed = allowed_failures(CONTROL_POWER_FRACTION, len(counted))
    fraction = (len(counted) - weak) / len(counted) if counted else 0.0
    report = VerificationReport(notes={"control_power_fraction": fraction})
    report.add(check("control.power", ANCHOR_CONTROL, float(weak), allowed + 0.5))
    return report


# ============================================================
# DISPATCH
# ============================================================
PointTask = Callable[[SuiteContext, int], tuple[VerificationReport, dict[str, bool]]]

POINT_TASKS: dict[str, PointTask] = {
    "clifford": clifford_task,
    "geometry": geometry_task,
    "isomorphisms": isomorphisms_task,
    "nearly-kahler": nearly_kahler_task,
    "star-ricci": star_ricci_task,
}


def point_task(suite: str, config: RunConfig, index: int) -> PointResult:
    ctx = suite_context(suite, config)
    sink: list[float] = []
    try:
        with timed(sink):
            report, flags = POINT_TASKS[suite](ctx, index)
    except DegeneratePointError as exc:
        logger.warning("%s sample %d skipped: %s", suite, index, exc)
        return PointResult(suite, index, VerificationReport(), skipped=str(exc))
    share = sink[0] / max(len(report.records), 1)
    report.records = [replace(r, wall_time=share) for r in report.records]
    logger.debug("%s sample %d: %d records in %.3fs", suite, index, len(report.records), sink[0])
    return PointResult(suite, index, report, flags)


def summarize(suite: str, config: RunConfig, results: list[PointResult]) -> VerificationReport:
    """Suite-level records that need every sample (fractions), plus bookkeeping notes."""
    ctx = suite_context(suite, config)
    report = VerificationReport()
    if suite == "star-ricci":
        report = control_power_summary(results)
    elif suite == "nearly-kahler" and ctx.dual.m == 3:
        report = witness_nonzero_summary(ctx)
    skipped = sorted(r.index for r in results if r.skipped is not None)
    if skipped:
        report.notes["skipped_samples"] = skipped
    if suite == "geometry" and not in_fd_band(config.theta):
        report.notes["fd_checks"] = "skipped: theta outside the finite-difference band"
    if ctx.dual is not None:
        report.notes["configuration"] = {
            "pair": list(ctx.dual.pair),
            "full_system": ctx.dual.full.flavor.value,
            "split": ctx.dual.m,
        }
    return report
