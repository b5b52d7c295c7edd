"""
Finite-difference covariant derivatives on M.

Fields are plain callables ``SurfacePoint -> ambient vector`` and are
differentiated along the retraction curves of ``isoparametric.tangent_curve``
with central differences, then projected to T_xM.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from errors import NumericalIntegrityError
from isoparametric import IsoparametricFamily, SurfacePoint, normal_differential, tangent_curve, tangent_projector
from report import VerificationReport, check
from shape import DistributionData, ambient_shape_operator, clifford_frame, eigenprojectors
from subspaces import Matrix, align_to, max_abs, orthonormalize

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
NIJENHUIS_AGREEMENT = 1e-4

VectorField = Callable[[SurfacePoint], np.ndarray]
OperatorField = Callable[[SurfacePoint], Matrix]

ANCHOR_CODAZZI = "(λ_i − λ_j) ω_ijk = (λ_i − λ_k) ω_ikj"
ANCHOR_OMEGA = "ω_ij = Σ_k ω_ijk ω_k"
ANCHOR_OMEGA_BAR = "ω_{āb̄} − ω_{ab} = Σ_c τ_c0 ⟨R_c R_a φ_1, R_0 R_b φ_1⟩"


# ============================================================
# FRAME FIELDS
# ============================================================
@dataclass(frozen=True, eq=False)
class LocalFrameField:
    """A frame at the base point together with a recipe extending it to nearby points."""
    base_point: SurfacePoint
    base_frame: Matrix
    labels: tuple[int, ...]
    recipe: OperatorField

    def __call__(self, point: SurfacePoint) -> Matrix:
        if point is self.base_point:
            return self.base_frame
        return self.recipe(point)

    @property
    def size(self) -> int:
        return self.base_frame.shape[1]


def principal_frame_field(family: IsoparametricFamily, point: SurfacePoint,
                          data: DistributionData) -> LocalFrameField:
    """Eigenprojector of each λ_k applied to the base block, re-orthonormalised and Procrustes-aligned."""
    blocks = data.bases
    labels = tuple(k for k, b in enumerate(blocks, start=1) for _ in range(b.shape[1]))

    def recipe(y: SurfacePoint) -> Matrix:
        projectors = eigenprojectors(family, y)
        return np.column_stack([
            align_to(orthonormalize(proj @ block), block) for proj, block in zip(projectors, blocks)
        ])

    return LocalFrameField(point, np.column_stack(blocks), labels, recipe)


def clifford_d1_frame_field(family: IsoparametricFamily, point: SurfacePoint,
                            data: DistributionData) -> LocalFrameField:
    """e_a = R_a φ_1 and e_ā = −R_0 e_a with R smoothly continued from the base frame."""
    reference = data.coefficient_matrix[:, 1:]
    m = family.system.m

    def recipe(y: SurfacePoint) -> Matrix:
        _, frame = clifford_frame(family, y, reference)
        e = np.column_stack([r @ y.phis[0] for r in frame[1:]])
        return np.column_stack([e, -frame[0] @ e])

    return LocalFrameField(point, recipe(point), (1,) * m + (3,) * m, recipe)


# ============================================================
# DERIVATIVES
# ============================================================
def directional_derivative(family: IsoparametricFamily, point: SurfacePoint, field: Callable,
                           direction: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Ambient central difference (F(γ(h)) − F(γ(−h))) / 2h along the tangent curve with γ'(0) = direction."""
    direction = np.asarray(direction, dtype=float)
    forward = field(tangent_curve(family, point, direction, step))
    backward = field(tangent_curve(family, point, direction, -step))
    return (forward - backward) / (2.0 * step)


def covariant_derivative(family: IsoparametricFamily, point: SurfacePoint, field: VectorField,
                         direction: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """∇_direction field at the point: tangential part of the ambient derivative."""
    if not np.any(direction):
        return np.zeros_like(point.x)
    return tangent_projector(point) @ directional_derivative(family, point, field, direction, step)


def projected_constant(u: np.ndarray) -> VectorField:
    """The field y ↦ Π_{T_y M} u."""
    u = np.asarray(u, dtype=float)
    return lambda y: tangent_projector(y) @ u


def projected_constant_derivative(family: IsoparametricFamily, point: SurfacePoint,
                                  u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Exact ∇_v(Π u) = −⟨u, x⟩ v + ⟨u, ξ⟩ A_ξ v."""
    shape = ambient_shape_operator(family, point)
    return -(u @ point.x) * v + (u @ point.xi) * (shape @ v)


def endomorphism_derivative(family: IsoparametricFamily, point: SurfacePoint, operator: OperatorField,
                            u: np.ndarray, w: np.ndarray, step: float = DEFAULT_STEP,
                            extension: VectorField | None = None) -> np.ndarray:
    """(∇_u J) w = ∇_u(J W) − J ∇_u W for any extension W of w (projected constant by default)."""
    extension = extension or projected_constant(w)
    moved = covariant_derivative(family, point, lambda y: operator(y) @ extension(y), u, step)
    return moved - operator(point) @ covariant_derivative(family, point, extension, u, step)


def lie_bracket(family: IsoparametricFamily, point: SurfacePoint, field1: VectorField,
                field2: VectorField, step: float = DEFAULT_STEP) -> np.ndarray:
    """[X, Y] = D_X Y − D_Y X from ambient directional derivatives, projected to T_xM."""
    zero = np.zeros_like(point.x)
    x_val, y_val = field1(point), field2(point)
    dxy = directional_derivative(family, point, field2, x_val, step) if np.any(x_val) else zero
    dyx = directional_derivative(family, point, field1, y_val, step) if np.any(y_val) else zero
    return tangent_projector(point) @ (dxy - dyx)


def exact_bracket(family: IsoparametricFamily, point: SurfacePoint, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """∇_{Πu}(Πw) − ∇_{Πw}(Πu) from the closed-form derivative of projected constants."""
    pu, pw = projected_constant(u)(point), projected_constant(w)(point)
    return (projected_constant_derivative(family, point, w, pu)
            - projected_constant_derivative(family, point, u, pw))


def torsion_residual(family: IsoparametricFamily, point: SurfacePoint, u: np.ndarray, w: np.ndarray,
                     step: float = DEFAULT_STEP) -> float:
    """Finite-difference bracket [Πu, Πw] against the exact torsion-free expression."""
    bracket = lie_bracket(family, point, projected_constant(u), projected_constant(w), step)
    return max_abs(bracket - exact_bracket(family, point, u, w))


# ============================================================
# CONNECTION COEFFICIENTS
# ============================================================
@dataclass(frozen=True, eq=False)
class ConnectionCoefficients:
    """omega[i, j, k] = ⟨∇_{e_k} e_i, e_j⟩ in the frame of ``frame``."""
    omega: np.ndarray
    frame: Matrix
    curvatures: tuple[float, ...]

    def antisymmetry_residual(self) -> float:
        return max_abs(self.omega + self.omega.transpose(1, 0, 2))


def frame_derivative(family: IsoparametricFamily, point: SurfacePoint, frame_field: LocalFrameField,
                     direction: np.ndarray, step: float = DEFAULT_STEP) -> Matrix:
    """W[j, i] = ⟨D_direction e_i, e_j⟩."""
    derivative = directional_derivative(family, point, frame_field, direction, step)
    return frame_field(point).T @ derivative


def connection_coefficients(family: IsoparametricFamily, point: SurfacePoint, frame_field: LocalFrameField,
                            step: float = DEFAULT_STEP) -> ConnectionCoefficients:
    frame = frame_field(point)
    n = frame.shape[1]
    omega = np.zeros((n, n, n))
    for k in range(n):
        omega[:, :, k] = frame_derivative(family, point, frame_field, frame[:, k], step).T
    curvatures = tuple(family.lambdas[label - 1] for label in frame_field.labels)
    return ConnectionCoefficients(omega=omega, frame=frame, curvatures=curvatures)


def codazzi_residuals(conn: ConnectionCoefficients) -> tuple[float, float]:
    """(max Codazzi residual over distinct triples, max |ω_ijk| over λ_i = λ_k ≠ λ_j)."""
    lam = conn.curvatures
    omega = conn.omega
    codazzi = same_type = 0.0
    for i, j, k in itertools.permutations(range(len(lam)), 3):
        residual = (lam[i] - lam[j]) * omega[i, j, k] - (lam[i] - lam[k]) * omega[i, k, j]
        codazzi = max(codazzi, abs(residual))
        if lam[i] == lam[k] != lam[j]:
            same_type = max(same_type, abs(omega[i, j, k]))
    return codazzi, same_type


def verify_connection(conn: ConnectionCoefficients, tol: float = 5e-5) -> VerificationReport:
    report = VerificationReport()
    codazzi, same_type = codazzi_residuals(conn)
    report.add(check("connection.metric_antisymmetry", ANCHOR_OMEGA, conn.antisymmetry_residual(), 5e-6))
    report.add(check("connection.codazzi", ANCHOR_CODAZZI, codazzi, tol))
    report.add(check("connection.codazzi_same_curvature", ANCHOR_CODAZZI, same_type, tol))
    return report


def omega_bar_check(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData,
                    v: np.ndarray, step: float = DEFAULT_STEP, tol: float = 5e-6) -> VerificationReport:
    """Compare ω_{āb̄}(v) − ω_{ab}(v) with the τ expansion in the gauge e_a = R_a φ_1, e_ā = −R_0 e_a."""
    m = family.system.m
    field = clifford_d1_frame_field(family, point, data)
    w = frame_derivative(family, point, field, v, step)
    omega = w[:m, :m].T
    omega_bar = w[m:, m:].T

    frame = data.frame
    phi1 = point.phis[0]
    tau = np.array([2.0 / math.sin(2 * family.theta) * ((r @ point.x) @ v) for r in frame[1:]])
    expected = np.zeros((m, m))
    for a, b in itertools.product(range(m), repeat=2):
        left = [frame[c + 1] @ frame[a + 1] @ phi1 for c in range(m)]
        right = frame[0] @ frame[b + 1] @ phi1
        expected[a, b] = sum(tau[c] * (left[c] @ right) for c in range(m))

    report = VerificationReport(notes={"omega_bar_gauge": "e_a = R_a φ_1, e_ā = −R_0 e_a"})
    report.add(check("connection.omega_bar", ANCHOR_OMEGA_BAR, max_abs(omega_bar - omega - expected), tol))
    return report


# ============================================================
# CALIBRATION
# ============================================================
def normal_field(y: SurfacePoint) -> np.ndarray:
    return y.xi


def richardson_ratio(family: IsoparametricFamily, point: SurfacePoint, v: np.ndarray,
                     step: float = 1e-2) -> float:
    """Error ratio of ∇_v ξ against the exact −A_ξ v at steps h and h/2 (≈ 4 for a second-order scheme)."""
    exact = tangent_projector(point) @ normal_differential(family, point.x) @ v
    coarse = max_abs(covariant_derivative(family, point, normal_field, v, step) - exact)
    fine = max_abs(covariant_derivative(family, point, normal_field, v, step / 2) - exact)
    return coarse / fine if fine > 0 else math.inf


# ============================================================
# NIJENHUIS TENSOR
# ============================================================
def nijenhuis_bracket_form(family: IsoparametricFamily, point: SurfacePoint, operator: OperatorField,
                           x: np.ndarray, y: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """[JX, JY] − J[JX, Y] − J[X, JY] − [X, Y] with projected-constant X, Y."""
    fx, fy = projected_constant(x), projected_constant(y)

    def jfx(p: SurfacePoint) -> np.ndarray:
        return operator(p) @ fx(p)

    def jfy(p: SurfacePoint) -> np.ndarray:
        return operator(p) @ fy(p)

    j = operator(point)
    return (lie_bracket(family, point, jfx, jfy, step)
            - j @ lie_bracket(family, point, jfx, fy, step)
            - j @ lie_bracket(family, point, fx, jfy, step)
            - lie_bracket(family, point, fx, fy, step))


def nijenhuis_connection_form(family: IsoparametricFamily, point: SurfacePoint, operator: OperatorField,
                              x: np.ndarray, y: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """(∇_{JX}J)Y − (∇_{JY}J)X − J(∇_X J)Y + J(∇_Y J)X."""
    j = operator(point)

    def dj(u: np.ndarray, w: np.ndarray) -> np.ndarray:
        if not np.any(u):
            return np.zeros_like(point.x)
        return endomorphism_derivative(family, point, operator, u, w, step)

    return dj(j @ x, y) - dj(j @ y, x) - j @ dj(x, y) + j @ dj(y, x)


def nijenhuis(family: IsoparametricFamily, point: SurfacePoint, operator: OperatorField,
              x: np.ndarray, y: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """N(X, Y), computed from brackets and cross-checked against the connection form."""
    bracket = nijenhuis_bracket_form(family, point, operator, x, y, step)
    connection = nijenhuis_connection_form(family, point, operator, x, y, step)
    discrepancy = max_abs(bracket - connection)
    logger.debug("nijenhuis: bracket vs connection form differ by %.3e", discrepancy)
    if discrepancy > NIJENHUIS_AGREEMENT:
        raise NumericalIntegrityError("nijenhuis", discrepancy, NIJENHUIS_AGREEMENT)
    return bracket
