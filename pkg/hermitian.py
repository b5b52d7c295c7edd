"""
Pair-swapping almost complex structures (J(D_1) = D_3, J(D_2) = D_4), the
fundamental 2-form, the nearly Kähler check and the non-integrability
witness for the (3, 4) configuration.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import ortho_group

from bundleiso import DualConfiguration, dual_operator_Q
from diffgeo import (
    DEFAULT_STEP,
    LocalFrameField,
    connection_coefficients,
    directional_derivative,
    endomorphism_derivative,
    nijenhuis,
)
from errors import DomainError, NumericalIntegrityError, PreconditionError
from isoparametric import SurfacePoint, tangent_projector
from report import VerificationReport, check
from shape import DistributionData, clifford_frame, eigenprojectors, principal_decomposition, tangent_basis
from subspaces import Matrix, align_to, containment_residual, gram_residual, max_abs, orthonormalize

logger = logging.getLogger(__name__)

NEARLY_KAHLER_TOL = 1e-4
OFF_FRAME_FLOOR = 1e-2
WITNESS_TOL = 1e-3

ANCHOR_ACS = "pair-swapping almost complex structure −R_0 | −Q_0 | R_0 | Q_0"
ANCHOR_PHI = "fundamental 2-form Φ(X, Y) = g(JX, Y)"
ANCHOR_NK = "G_iij = (∇_{e_i} Φ)(e_i, e_j) = 0 in the adapted frame"
ANCHOR_OFF_FRAME = "(∇_X J)X ≠ 0 for generic X: ∇Φ is not totally skew-symmetric"
ANCHOR_WITNESS = "⟨N(e_1, e_2), e_3⟩ = −2/(sinθ cos2θ) ⟨P_0 P_1 P_2 P_3 x, x⟩"


class PairSwapMode(enum.Enum):
    CLOSED_FORM = "closed_form"
    GENERIC_BLOCKS = "generic_blocks"


OperatorField = Callable[[SurfacePoint], Matrix]


@dataclass(frozen=True, eq=False)
class PairSwapJ:
    mode: PairSwapMode
    point: SurfacePoint
    matrix: Matrix
    evaluator: OperatorField | None = None

    def at(self, point: SurfacePoint) -> Matrix:
        if point is self.point:
            return self.matrix
        if self.evaluator is None:
            raise PreconditionError("a generic pair-swap structure is only defined at its base point")
        return self.evaluator(point)


@dataclass(frozen=True, eq=False)
class FundamentalForm:
    matrix: Matrix

    def skew_residual(self) -> float:
        return max_abs(self.matrix + self.matrix.T)


def fundamental_form(j: Matrix, basis: Matrix) -> FundamentalForm:
    """Φ_ik = ⟨J e_i, e_k⟩."""
    return FundamentalForm((basis.T @ j @ basis).T)


# ============================================================
# CLOSED FORM
# ============================================================
def closed_form_operator(config: DualConfiguration, mu: float = 1.0) -> OperatorField:
    """y ↦ −μ R_0 Π_1 − Q_0 Π_2 + (1/μ) R_0 Π_3 + Q_0 Π_4 (eigenprojectors Π_k at y)."""
    if mu == 0.0:
        raise DomainError("μ must be nonzero")
    family = config.family

    def operator(y: SurfacePoint) -> Matrix:
        r0, q0 = y.p_op, dual_operator_Q(config, y)
        p1, p2, p3, p4 = eigenprojectors(family, y)
        return -mu * r0 @ p1 - q0 @ p2 + (r0 @ p3) / mu + q0 @ p4

    return operator


def build_closed_form_J(config: DualConfiguration, point: SurfacePoint, mu: float = 1.0) -> PairSwapJ:
    operator = closed_form_operator(config, mu)
    return PairSwapJ(PairSwapMode.CLOSED_FORM, point, operator(point), operator)


# ============================================================
# GENERIC AND CONTROL STRUCTURES
# ============================================================
def _block_map(u: Matrix, source: Matrix, target: Matrix, label: str) -> Matrix:
    """Ambient operator of u: source fiber → target fiber (coordinate matrix or ambient operator)."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != source.shape[0]:
        images = target @ u
    else:
        images = u @ source
    inside = containment_residual(images, target)
    isometry = gram_residual(images)
    if inside >= 1e-8 or isometry >= 1e-8:
        raise PreconditionError(
            f"{label} is not a fiber isometry (image residual {inside:.2e}, Gram residual {isometry:.2e})"
        )
    return images @ source.T


def build_generic_pairswap_J(point: SurfacePoint, data: DistributionData, u: Matrix, w: Matrix) -> PairSwapJ:
    """J = u on D_1, −u⁻¹ on D_3, w on D_2, −w⁻¹ on D_4."""
    u_map = _block_map(u, data.basis(1), data.basis(3), "u: D1 -> D3")
    w_map = _block_map(w, data.basis(2), data.basis(4), "w: D2 -> D4")
    return PairSwapJ(PairSwapMode.GENERIC_BLOCKS, point, u_map - u_map.T + w_map - w_map.T)


def random_pairswap_J(point: SurfacePoint, data: DistributionData, rng: np.random.Generator) -> PairSwapJ:
    m1, m2 = data.basis(1).shape[1], data.basis(2).shape[1]
    u = _random_orthogonal(m1, rng)
    w = _random_orthogonal(m2, rng)
    return build_generic_pairswap_J(point, data, data.basis(3) @ u @ data.basis(1).T,
                                    data.basis(4) @ w @ data.basis(2).T)


def _random_orthogonal(n: int, rng: np.random.Generator) -> Matrix:
    if n == 1:
        return np.array([[1.0 if rng.random() < 0.5 else -1.0]])
    return ortho_group.rvs(dim=n, random_state=rng)


def block_swap_structure(pairs: list[tuple[Matrix, Matrix]]) -> Matrix:
    """Orthogonal complex structure sending each column of B_a to B_b and B_b to −B_a."""
    dim = pairs[0][0].shape[0]
    j = np.zeros((dim, dim))
    for a, b in pairs:
        if a.shape != b.shape:
            raise PreconditionError(f"swapped blocks must have equal size, got {a.shape} and {b.shape}")
        j += b @ a.T - a @ b.T
    return j


def d1_d2_swap_structure(data: DistributionData) -> Matrix:
    """A non pair-swapping control: D_1 ↔ part of D_2, D_3 ↔ part of D_4, remainders paired."""
    m1 = data.basis(1).shape[1]
    b2, b4 = data.basis(2), data.basis(4)
    pairs = [(data.basis(1), b2[:, :m1]), (data.basis(3), b4[:, :m1])]
    if b2.shape[1] > m1:
        pairs.append((b2[:, m1:], b4[:, m1:]))
    return block_swap_structure(pairs)


def random_complex_structure(point: SurfacePoint, rng: np.random.Generator) -> Matrix:
    """O J_0 Oᵀ on T_xM for a Haar-random orthogonal O."""
    basis = tangent_basis(point).vectors
    n = basis.shape[1] // 2
    j0 = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    o = ortho_group.rvs(dim=2 * n, random_state=rng)
    return basis @ (o @ j0 @ o.T) @ basis.T


# ============================================================
# INVARIANTS
# ============================================================
def verify_pairswap(j: Matrix, data: DistributionData, prefix: str = "acs", swap_tol: float = 1e-8) -> VerificationReport:
    basis = data.span(1, 2, 3, 4)
    jt = basis.T @ j @ basis
    eye = np.eye(basis.shape[1])
    phi = fundamental_form(j, basis)
    swap = max(containment_residual(j @ data.basis(k), data.basis((k + 1) % 4 + 1)) for k in range(1, 5))
    report = VerificationReport()
    report.add(check(f"{prefix}.square", ANCHOR_ACS, max_abs(jt @ jt + eye), 1e-10))
    report.add(check(f"{prefix}.orthogonal", ANCHOR_ACS, max_abs(jt.T @ jt - eye), 1e-10))
    report.add(check(f"{prefix}.swap", ANCHOR_ACS, swap, swap_tol))
    report.add(check(f"{prefix}.phi_skew", ANCHOR_PHI, phi.skew_residual(), 1e-10))
    report.add(check(f"{prefix}.phi_invariant", ANCHOR_PHI,
                     max_abs(jt.T @ phi.matrix @ jt - phi.matrix), 1e-10))
    return report


# ============================================================
# ADAPTED FRAME
# ============================================================
def adapted_frame_field(config: DualConfiguration, point: SurfacePoint, data: DistributionData) -> LocalFrameField:
    """
    Frame e_a = R_a φ_1, e_α (D_2, Procrustes-continued), e_ā = −R_0 e_a,
    e_ᾱ = −Q_0 e_α. The closed-form J (μ = 1) is constant in this frame.
    """
    family = config.family
    reference = data.coefficient_matrix[:, 1:]
    b2 = data.basis(2)
    m1, m2 = family.multiplicities

    def recipe(y: SurfacePoint) -> Matrix:
        _, frame = clifford_frame(family, y, reference)
        e1 = np.column_stack([r @ y.phis[0] for r in frame[1:]])
        e2 = align_to(orthonormalize(eigenprojectors(family, y)[1] @ b2), b2)
        return np.column_stack([e1, e2, -y.p_op @ e1, -dual_operator_Q(config, y) @ e2])

    labels = (1,) * m1 + (2,) * m2 + (3,) * m1 + (4,) * m2
    return LocalFrameField(point, recipe(point), labels, recipe)


# ============================================================
# NEARLY KÄHLER
# ============================================================
def nearly_kahler_tensor(config: DualConfiguration, point: SurfacePoint, structure: PairSwapJ,
                         frame_field: LocalFrameField, step: float = DEFAULT_STEP) -> np.ndarray:
    """G[i, j, k] = (∇_{e_i} Φ)(e_j, e_k) from connection coefficients ω_jli = ⟨∇_{e_i} e_j, e_l⟩."""
    family = config.family
    conn = connection_coefficients(family, point, frame_field, step)
    frame = conn.frame
    n = frame.shape[1]

    def phi_at(y: SurfacePoint) -> Matrix:
        f = frame_field(y)
        return (f.T @ structure.at(y) @ f).T

    phi0 = phi_at(point)
    tensor = np.zeros((n, n, n))
    for i in range(n):
        d_phi = directional_derivative(family, point, phi_at, frame[:, i], step)
        gamma = conn.omega[:, :, i]
        tensor[i] = d_phi - gamma @ phi0 - phi0 @ gamma.T
    return tensor


def nearly_kahler_direct(config: DualConfiguration, point: SurfacePoint, structure: PairSwapJ,
                         frame: Matrix, step: float = DEFAULT_STEP) -> Matrix:
    """D[i, j] = ⟨(∇_{e_i} J) e_i, e_j⟩ with projected-constant extensions."""
    rows = []
    for e in frame.T:
        rows.append(frame.T @ endomorphism_derivative(config.family, point, structure.at, e, e, step))
    return np.array(rows)


def off_frame_defect(config: DualConfiguration, point: SurfacePoint, structure: PairSwapJ,
                     rng: np.random.Generator, step: float = DEFAULT_STEP, samples: int = 4) -> float:
    """max |(∇_X J)X| over random unit tangent X. Tensorial in X, so neither frame nor gauge enters."""
    projector = tangent_projector(point)
    worst = 0.0
    for _ in range(samples):
        x = projector @ rng.standard_normal(len(point.x))
        x /= np.linalg.norm(x)
        moved = endomorphism_derivative(config.family, point, structure.at, x, x, step)
        worst = max(worst, float(np.linalg.norm(moved)))
    return worst


def nearly_kahler_check(config: DualConfiguration, point: SurfacePoint, structure: PairSwapJ,
                        step: float = DEFAULT_STEP, data: DistributionData | None = None,
                        rng: np.random.Generator | None = None) -> VerificationReport:
    if structure.evaluator is None:
        raise PreconditionError("the nearly Kähler check differentiates J and needs the closed form")
    data = data or principal_decomposition(config.family, point)
    field = adapted_frame_field(config, point, data)
    tensor = nearly_kahler_tensor(config, point, structure, field, step)
    direct = nearly_kahler_direct(config, point, structure, field(point), step)

    n = tensor.shape[0]
    via_connection = np.array([tensor[i, i, :] for i in range(n)])
    discrepancy = max_abs(via_connection - direct)
    logger.debug("nearly Kähler: connection vs direct G_iij differ by %.3e", discrepancy)
    if discrepancy > NEARLY_KAHLER_TOL:
        raise NumericalIntegrityError("nearly_kahler.g_iij", discrepancy, NEARLY_KAHLER_TOL)

    rng = rng or np.random.default_rng(0)
    triples = [tuple(rng.integers(0, n, size=3)) for _ in range(4 * n)]
    skew = max(abs(tensor[i, j, k] + tensor[j, i, k]) for i, j, k in triples)
    defect = off_frame_defect(config, point, structure, rng, step)
    logger.debug("nearly Kähler: G_ijk + G_jik up to %.3e, |(∇_X J)X| up to %.3e", skew, defect)

    report = VerificationReport(notes={"nearly_kahler_gauge": "e_a = R_a φ_1, e_ā = −R_0 e_a, e_ᾱ = −Q_0 e_α"})
    report.add(check("nearly_kahler.g_iij", ANCHOR_NK,
                     max(max_abs(via_connection), max_abs(direct)), NEARLY_KAHLER_TOL))
    report.add(check("nearly_kahler.method_agreement", ANCHOR_NK, discrepancy, NEARLY_KAHLER_TOL))
    report.add(check("nearly_kahler.off_frame_defect", ANCHOR_OFF_FRAME, defect, OFF_FRAME_FLOOR, comparison="gt"))
    report.add(check("nearly_kahler.phi_skew_in_last_pair", ANCHOR_PHI,
                     max_abs(tensor + tensor.transpose(0, 2, 1)), NEARLY_KAHLER_TOL))
    return report


# ============================================================
# NON-INTEGRABILITY WITNESS
# ============================================================
def witness_closed_form(config: DualConfiguration, point: SurfacePoint, data: DistributionData) -> tuple[float, float]:
    """(closed form of ⟨N(e_1, e_2), e_3⟩, factor ⟨R_0 R_1 R_2 R_3 x, x⟩)."""
    theta = config.family.theta
    r0, r1, r2, r3 = data.frame[:4]
    factor = float(point.x @ (r0 @ r1 @ r2 @ r3 @ point.x))
    return -2.0 / (math.sin(theta) * math.cos(2 * theta)) * factor, factor


def witness_value(config: DualConfiguration, point: SurfacePoint, data: DistributionData,
                  mu: float = 1.0, step: float = DEFAULT_STEP) -> float:
    e = [r @ point.phis[0] for r in data.frame[1:4]]
    n12 = nijenhuis(config.family, point, closed_form_operator(config, mu), e[0], e[1], step)
    return float(n12 @ e[2])


def witness_scale(theta: float) -> float:
    return 2.0 / (math.sin(theta) * math.cos(2 * theta))


def prop31_witness(config: DualConfiguration, point: SurfacePoint, mu: float = 1.0,
                   step: float = DEFAULT_STEP, data: DistributionData | None = None,
                   mu_variants: tuple[float, ...] = ()) -> VerificationReport:
    family = config.family
    if family.system.m != 3:
        raise DomainError(f"the non-integrability witness needs m = 3, got m = {family.system.m}")
    data = data or principal_decomposition(family, point)
    theta = family.theta
    closed, factor = witness_closed_form(config, point, data)
    numeric = witness_value(config, point, data, mu, step)
    scale = witness_scale(theta)
    relative = abs(numeric - closed) / max(abs(closed), WITNESS_TOL * scale)

    p = family.system.matrices
    phi1 = point.phis[0]
    r = data.frame
    volume = r[0] @ r[1] @ r[2] @ r[3]
    report = VerificationReport(notes={"witness": {"closed_form": closed, "numeric": numeric, "mu": mu}})
    report.add(check("witness.relative_error", ANCHOR_WITNESS, relative, WITNESS_TOL))
    report.add(check("witness.volume_element", "R_0 R_1 R_2 R_3 = det A(x) P_0 P_1 P_2 P_3",
                     max_abs(volume - p[0] @ p[1] @ p[2] @ p[3]), 1e-10))
    report.add(check("witness.factor_on_phi1", "⟨ω x, x⟩ = cos2θ ⟨ω φ_1, φ_1⟩",
                     abs(factor - math.cos(2 * theta) * float(phi1 @ (volume @ phi1))), 1e-10))
    report.add(check("witness.factor_range", "image of the witness factor is [−cos2θ, cos2θ]",
                     max(0.0, abs(factor) - math.cos(2 * theta)), 1e-6))
    if mu_variants:
        spread = max(abs(witness_value(config, point, data, other, step) - numeric) for other in mu_variants)
        report.add(check("witness.mu_independence", ANCHOR_WITNESS,
                         spread / max(abs(closed), WITNESS_TOL * scale), WITNESS_TOL))
    return report


def witness_is_nonzero(config: DualConfiguration, point: SurfacePoint, data: DistributionData) -> bool:
    closed, _ = witness_closed_form(config, point, data)
    return abs(closed) > WITNESS_TOL * witness_scale(config.family.theta)

