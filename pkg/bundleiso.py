"""
Bundle isomorphisms between principal distributions.

    R_0 = P      : D_1 → D_3
    Q            : D_2 → D_4   (dual Clifford subsystem, full-square configurations)
    σ, σ̃         : D_1 ⊕ D_2 → D_1 ⊕ D_4   (odd m, global section of the Clifford sphere)

Every isomorphism is returned together with the check records that certify
it at the point.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from clifford import FullSquareSystem, pair_configuration
from errors import DomainError, PreconditionError
from isoparametric import IsoparametricFamily, SurfacePoint, clifford_projection_P, dual_family, level_residual, surface_point
from report import CheckRecord, VerificationReport, check
from shape import DistributionData, principal_decomposition
from subspaces import Matrix, complete_orthonormal, containment_residual, gram_residual, max_abs, orthonormalize, projector, subspace_distance

logger = logging.getLogger(__name__)

ANCHOR_D1_D3 = "D_1 ≅ D_3 via R_0 = P"
ANCHOR_D2_D4 = "D_2 ≅ D_4 via the dual operator Q"
ANCHOR_SPLIT = "orthogonal decompositions of E_±(P)"
ANCHOR_SECTION = "nowhere-vanishing vector field on the odd Clifford sphere"
ANCHOR_SIGMA = "global isomorphism σ̃ : D_1 ⊕ D_2 → D_1 ⊕ D_4"
ANCHOR_M1 = "m = 1: σ|_{D_2} = P_0 P_1"


# ============================================================
# TYPES
# ============================================================
@dataclass(frozen=True, eq=False)
class FiberIsomorphism:
    source: str
    target: str
    matrix: Matrix
    checks: tuple[CheckRecord, ...] = ()

    def report(self) -> VerificationReport:
        return VerificationReport(records=list(self.checks))


@dataclass(frozen=True, eq=False)
class EigenSplit:
    plus_projector: Matrix
    minus_projector: Matrix
    plus_basis: Matrix
    minus_basis: Matrix
    checks: tuple[CheckRecord, ...] = ()


@dataclass(frozen=True, eq=False)
class SigmaMap:
    sigma: Matrix
    sigma_tilde: Matrix
    checks: tuple[CheckRecord, ...] = ()


@dataclass(frozen=True)
class DualConfiguration:
    """A full-square system split at m: the family at θ and its dual at π/4 − θ on the same hypersurface."""
    full: FullSquareSystem
    m: int
    family: IsoparametricFamily
    dual: IsoparametricFamily
    pair: tuple[int, int] = field(default=(0, 0))


def dual_configuration(pair: str | tuple[int, int], theta: float) -> DualConfiguration:
    full, m = pair_configuration(pair)
    family, dual = dual_family(full, m, theta)
    return DualConfiguration(full=full, m=m, family=family, dual=dual, pair=family.multiplicities)


def _isometry_checks(prefix: str, anchor: str, images: Matrix, target: Matrix,
                     gram_tol: float = 1e-10, image_tol: float = 1e-8) -> list[CheckRecord]:
    return [
        check(f"{prefix}.gram", anchor, gram_residual(images), gram_tol),
        check(f"{prefix}.image", anchor, subspace_distance(orthonormalize(images), target), image_tol),
    ]


# ============================================================
# D1 → D3
# ============================================================
def iso_d1_d3(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData) -> FiberIsomorphism:
    r0 = data.r0
    records = _isometry_checks("iso_d1_d3.d1_to_d3", ANCHOR_D1_D3, r0 @ data.basis(1), data.basis(3))
    phi1, phi3 = point.phis[0], point.phis[2]
    commute = max(float(np.linalg.norm(r0 @ r @ phi1 - r @ phi3)) for r in data.frame[1:])
    records.append(check("iso_d1_d3.r_a_phi3", "R_a φ_3 = R_0 R_a φ_1", commute, 1e-10))
    return FiberIsomorphism("D1", "D3", r0, tuple(records))


# ============================================================
# D2 → D4
# ============================================================
def dual_operator_Q(config: DualConfiguration, point: SurfacePoint) -> Matrix:
    """Q = (1/cos2θ) Σ_{i>m} ⟨P_i x, x⟩ P_i, which is the P operator of the dual family."""
    return clifford_projection_P(config.dual, point.x)


def truncated_dual_operator(config: DualConfiguration, point: SurfacePoint) -> Matrix:
    """Q with the last matrix left out of the sum."""
    matrices = config.dual.system.matrices[:-1]
    coefficients = np.array([point.x @ (p @ point.x) for p in matrices])
    scale = math.cos(2 * config.family.theta)
    return np.einsum("i,ijk->jk", coefficients / scale, np.array(matrices))


def iso_d2_d4_dual(config: DualConfiguration, point: SurfacePoint,
                   data: DistributionData | None = None) -> FiberIsomorphism:
    family, dual = config.family, config.dual
    data = data or principal_decomposition(family, point)
    q = dual_operator_Q(config, point)
    eye = np.eye(family.ambient_dim)
    b2, b4 = data.basis(2), data.basis(4)

    records = [check("iso_d2_d4.q_involution", ANCHOR_D2_D4, max_abs(q @ q - eye), 1e-10)]
    records += _isometry_checks("iso_d2_d4.d2_to_d4", ANCHOR_D2_D4, q @ b2, b4)
    records.append(check("iso_d2_d4.q_roundtrip_on_d2", ANCHOR_D2_D4, max_abs(q @ (q @ b2) - b2), 1e-10))

    records.append(check("iso_d2_d4.dual_level", "M' = (f')^{-1}(cos 4(π/4 − θ))",
                         level_residual(dual, point.x), 1e-10))
    dual_point = surface_point(dual, point.x)
    records.append(check("iso_d2_d4.dual_normal", "ξ' = −ξ", max_abs(dual_point.xi + point.xi), 1e-10))
    dual_data = principal_decomposition(dual, dual_point)
    spectrum = max(abs(data.eigenvalues[k] + dual_data.eigenvalues[3 - k]) for k in range(4))
    records.append(check("iso_d2_d4.dual_spectrum", "λ_k = −λ'_{5−k}", spectrum, 1e-8))
    records.append(check("iso_d2_d4.d2_is_dual_d3", "principal distributions of M and M' correspond",
                         subspace_distance(b2, dual_data.basis(3)), 1e-8))
    records.append(check("iso_d2_d4.d4_is_dual_d1", "principal distributions of M and M' correspond",
                         subspace_distance(b4, dual_data.basis(1)), 1e-8))

    if len(dual.system.matrices) > 2:
        truncated = truncated_dual_operator(config, point)
        first, last = config.m + 1, config.m + len(dual.system.matrices)
        records.append(check(f"iso_d2_d4.q_range_{first}_{last - 1}_square", ANCHOR_D2_D4,
                             max_abs(truncated @ truncated - eye), 1e-6, comparison="gt"))
    return FiberIsomorphism("D2", "D4", q, tuple(records))


# ============================================================
# E±(P)
# ============================================================
def eigen_split(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData) -> EigenSplit:
    p = point.p_op
    eye = np.eye(family.ambient_dim)
    values, vectors = np.linalg.eigh((p + p.T) / 2)
    plus, minus = vectors[:, values > 0], vectors[:, values <= 0]
    l = family.system.l
    r2 = math.sqrt(2.0)
    phi1 = point.phis[0]
    b1, b2, b4 = data.basis(1), data.basis(2), data.basis(4)

    plus_parts = np.column_stack([(eye + p) @ phi1 / r2, (eye + p) @ b1 / r2, b2])
    minus_parts = np.column_stack([(eye - p) @ phi1 / r2, (eye - p) @ b1 / r2, b4])

    records = [
        check("eigen_split.dimensions", ANCHOR_SPLIT,
              abs(plus.shape[1] - l) + abs(minus.shape[1] - l), 0.5),
        check("eigen_split.spectrum", ANCHOR_SPLIT, max_abs(np.abs(values) - 1.0), 1e-8),
        check("eigen_split.plus_orthogonal", ANCHOR_SPLIT, gram_residual(plus_parts), 1e-10),
        check("eigen_split.minus_orthogonal", ANCHOR_SPLIT, gram_residual(minus_parts), 1e-10),
        check("eigen_split.plus_decomposition", ANCHOR_SPLIT, subspace_distance(plus_parts, plus), 1e-8),
        check("eigen_split.minus_decomposition", ANCHOR_SPLIT, subspace_distance(minus_parts, minus), 1e-8),
        check("eigen_split.xi2", "ξ_2 = −((I + P)/√2) φ_1",
              max_abs((eye + p) @ phi1 / r2 + point.xis[1]), 1e-10),
    ]
    d2_inside = containment_residual(b2, plus)
    d2_orthogonal = max(max_abs(b2.T @ ((eye + p) @ b1)), max_abs(b2.T @ ((eye + p) @ phi1)))
    records.append(check("eigen_split.d2_characterization", "D_2 inside E_+(P), orthogonal to (I+P)(φ_1 ⊕ D_1)",
                         max(d2_inside, d2_orthogonal), 1e-8))
    return EigenSplit((eye + p) / 2, (eye - p) / 2, plus, minus, tuple(records))


# ============================================================
# GLOBAL SECTION AND σ
# ============================================================
def rotate_pairs(a: np.ndarray) -> np.ndarray:
    """V(a_0, a_1, ..., a_{m-1}, a_m) = (−a_1, a_0, ..., −a_m, a_{m−1})."""
    v = np.empty_like(a)
    v[0::2] = -a[1::2]
    v[1::2] = a[0::2]
    return v


def global_section_R1(family: IsoparametricFamily, point: SurfacePoint) -> Matrix:
    if family.system.m % 2 == 0:
        raise DomainError(f"the Clifford sphere S^{family.system.m} carries no nowhere-vanishing field for even m")
    a = point.coefficients / math.sin(2 * family.theta)
    return family.system.combine(rotate_pairs(a / np.linalg.norm(a)))


def verify_global_section(family: IsoparametricFamily, point: SurfacePoint, r1: Matrix) -> VerificationReport:
    a = point.coefficients / math.sin(2 * family.theta)
    v = rotate_pairs(a / np.linalg.norm(a))
    report = VerificationReport()
    report.add(check("section.unit", ANCHOR_SECTION, abs(np.linalg.norm(v) - 1.0), 1e-12))
    report.add(check("section.tangent", ANCHOR_SECTION, abs(v @ a), 1e-12))
    report.add(check("section.anticommutes_with_p", ANCHOR_SECTION,
                     max_abs(r1 @ point.p_op + point.p_op @ r1), 1e-12))
    return report


def sigma_map(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData, r1: Matrix) -> SigmaMap:
    p = point.p_op
    anticommutation = max_abs(r1 @ p + p @ r1)
    if anticommutation >= 1e-10:
        raise PreconditionError(f"R_1 does not anticommute with P (residual {anticommutation:.3e})")

    eye = np.eye(family.ambient_dim)
    r2 = math.sqrt(2.0)
    phi1 = point.phis[0]
    b1, b2, b4 = data.basis(1), data.basis(2), data.basis(4)
    head = projector(np.column_stack([phi1, b1]))
    rho_plus = (eye + p) / r2 @ head + projector(b2)
    rho_minus = (eye - p) / r2 @ head + projector(b4)
    sigma = rho_minus.T @ r1 @ rho_plus

    r1phi1 = r1 @ phi1
    fixed = np.outer(r1phi1, r1phi1)
    sigma_tilde = sigma @ (projector(b1) - fixed + projector(b2)) + fixed

    domain = np.column_stack([b1, b2])
    target = np.column_stack([b1, b4])
    images = sigma_tilde @ domain
    along = b1.T @ r1phi1
    d1_rest = b1 @ complete_orthonormal(along / np.linalg.norm(along), b1.shape[1])
    rest = np.column_stack([d1_rest, b2])
    records = [
        check("sigma.phi1", "σ(φ_1) = R_1 φ_1", max_abs(sigma @ phi1 - r1phi1), 1e-10),
        check("sigma.r1phi1", "σ(R_1 φ_1) = φ_1", max_abs(sigma @ r1phi1 - phi1), 1e-10),
        check("sigma_tilde.gram", ANCHOR_SIGMA, gram_residual(images), 1e-10),
        check("sigma_tilde.image", ANCHOR_SIGMA,
              max(containment_residual(images, target), subspace_distance(orthonormalize(images), target)), 1e-8),
        check("sigma_tilde.fixes_r1phi1", ANCHOR_SIGMA, max_abs(sigma_tilde @ r1phi1 - r1phi1), 1e-10),
        check("sigma_tilde.agrees_with_sigma", ANCHOR_SIGMA, max_abs((sigma_tilde - sigma) @ rest), 1e-10),
    ]
    return SigmaMap(sigma, sigma_tilde, tuple(records))


def m1_remark_check(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData) -> VerificationReport:
    """For m = 1, σ|_{D_2} is ∓P_0 P_1 for the section V and for its negative."""
    if family.system.m != 1:
        raise DomainError("the constant σ|_{D_2} remark applies to m = 1 only")
    p0p1 = family.system.matrices[0] @ family.system.matrices[1]
    b2 = data.basis(2)
    r1 = global_section_R1(family, point)
    v_section = sigma_map(family, point, data, r1).sigma
    remark = sigma_map(family, point, data, -r1).sigma
    report = VerificationReport(notes={"m1_section": "R_1 = −sinα P_0 + cosα P_1 gives σ|_{D_2} = −P_0 P_1"})
    report.add(check("sigma.m1_v_section", ANCHOR_M1, max_abs(v_section @ b2 + p0p1 @ b2), 1e-10))
    report.add(check("sigma.m1_remark", ANCHOR_M1, max_abs(remark @ b2 - p0p1 @ b2), 1e-10))
    return report


def sigma_tilde_at(family: IsoparametricFamily, point: SurfacePoint) -> Matrix:
    data = principal_decomposition(family, point)
    return sigma_map(family, point, data, global_section_R1(family, point)).sigma_tilde


def continuity_check(family: IsoparametricFamily, path: list[SurfacePoint], step: float) -> VerificationReport:
    """Consecutive σ̃ matrices along the path differ by at most C·Δt, with no isolated jumps."""
    if family.system.m % 2 == 0:
        raise DomainError("continuity of σ̃ is only defined for odd m")
    operators = [sigma_tilde_at(family, p) for p in path]
    diffs = np.array([max_abs(b - a) for a, b in zip(operators, operators[1:])])
    report = VerificationReport()
    if diffs.size == 0:
        report.add(check("continuity.jump_ratio", ANCHOR_SIGMA, 0.0, 10.0))
        return report
    worst, median = float(np.max(diffs)), float(np.median(diffs))
    if median > 0.0:
        ratio = worst / median
    else:
        ratio = 0.0 if worst == 0.0 else math.inf
    report.notes["continuity"] = {
        "lipschitz": worst / step,
        "worst_step": int(np.argmax(diffs)),
        "steps": int(diffs.size),
        "step": step,
    }
    report.add(check("continuity.jump_ratio", ANCHOR_SIGMA, ratio, 10.0))
    return report
