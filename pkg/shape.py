"""
Shape operator, principal distributions D1..D4 and the Clifford frame R_0..R_m.

The shape operator comes from the exact derivative of the normal field, so
pointwise quantities here carry no finite-difference error.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import DegeneratePointError
from isoparametric import (
    IsoparametricFamily,
    SurfacePoint,
    focal_differential,
    focal_normal_frame,
    normal_differential,
    tangent_projector,
)
from report import VerificationReport, check
from subspaces import Matrix, complete_orthonormal, gram_residual, max_abs, orthonormalize, subspace_distance

logger = logging.getLogger(__name__)

MIN_CLUSTER_GAP = 1e-4

ANCHOR_SHAPE = "dξ = −λ_i ω_i e_i (constant principal curvatures)"
ANCHOR_FRAME = "(R_0, ..., R_m) = (P_0, ..., P_m) A(x), R_0 = P"
ANCHOR_D1 = "D_1 = span{R_a φ_1}, D_3 = span{R_a φ_3}"
ANCHOR_FOCAL_NORMAL = "normal spaces of the focal submanifolds"
ANCHOR_TAU = "τ_a0 = ω^a / sinθ + ω^ā / cosθ"


# ============================================================
# TYPES
# ============================================================
@dataclass(frozen=True, eq=False)
class TangentBasis:
    vectors: Matrix

    @property
    def size(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True, eq=False)
class ShapeOperator:
    matrix: Matrix
    basis: TangentBasis

    def ambient(self) -> Matrix:
        b = self.basis.vectors
        return b @ self.matrix @ b.T


@dataclass(frozen=True, eq=False)
class DistributionData:
    bases: tuple[Matrix, Matrix, Matrix, Matrix]
    eigenvalues: tuple[float, float, float, float]
    frame: tuple[Matrix, ...]
    coefficient_matrix: Matrix
    shape: ShapeOperator

    def basis(self, k: int) -> Matrix:
        """Orthonormal basis of D_k, k = 1..4."""
        return self.bases[k - 1]

    def span(self, *ks: int) -> Matrix:
        return np.column_stack([self.bases[k - 1] for k in ks])

    @property
    def r0(self) -> Matrix:
        return self.frame[0]


# ============================================================
# SHAPE OPERATOR
# ============================================================
def tangent_basis(point: SurfacePoint) -> TangentBasis:
    """Deterministic orthonormal completion of {x, ξ}."""
    seed = np.column_stack([point.x, point.xi])
    return TangentBasis(vectors=complete_orthonormal(seed, len(point.x)))


def ambient_shape_operator(family: IsoparametricFamily, point: SurfacePoint) -> Matrix:
    """A_ξ = −Π_T dξ Π_T as a 2l×2l matrix vanishing on span{x, ξ}."""
    proj = tangent_projector(point)
    return -proj @ normal_differential(family, point.x) @ proj


def shape_operator(family: IsoparametricFamily, point: SurfacePoint, basis: TangentBasis) -> ShapeOperator:
    b = basis.vectors
    return ShapeOperator(matrix=b.T @ ambient_shape_operator(family, point) @ b, basis=basis)


def eigenprojectors(family: IsoparametricFamily, point: SurfacePoint) -> tuple[Matrix, ...]:
    """Ambient projectors onto D_1..D_4 as Lagrange polynomials in A_ξ (smooth in the point)."""
    shape = ambient_shape_operator(family, point)
    proj = tangent_projector(point)
    eye = np.eye(len(point.x))
    lambdas = family.lambdas
    projectors = []
    for k, lam in enumerate(lambdas):
        out = proj
        for j, other in enumerate(lambdas):
            if j != k:
                out = out @ (shape - other * eye) / (lam - other)
        projectors.append(out)
    return tuple(projectors)


# ============================================================
# CLIFFORD FRAME
# ============================================================
def clifford_frame(family: IsoparametricFamily, point: SurfacePoint,
                   reference: Matrix | None = None) -> tuple[Matrix, tuple[Matrix, ...]]:
    """
    A(x) ∈ SO(m+1) with first column the unit coefficient vector of P, and
    R_j = Σ_i A_ij P_i.

    Without ``reference`` the remaining columns come from a pivoted
    completion over the standard basis. With ``reference`` (m+1)×m they are
    the Gram-Schmidt orthonormalisation of the reference columns against
    the coefficient vector, which varies smoothly with the point.
    """
    system = family.system
    a = point.coefficients / math.sin(2 * family.theta)
    a = a / np.linalg.norm(a)
    if reference is None:
        rest = complete_orthonormal(a[:, None], system.m + 1)
    else:
        rest = orthonormalize(reference - np.outer(a, a @ reference))
    coefficient_matrix = np.column_stack([a, rest])
    if np.linalg.det(coefficient_matrix) < 0:
        coefficient_matrix[:, -1] *= -1.0
    frame = tuple(system.combine(coefficient_matrix[:, j]) for j in range(system.m + 1))
    return coefficient_matrix, frame


# ============================================================
# PRINCIPAL DECOMPOSITION
# ============================================================
def principal_decomposition(family: IsoparametricFamily, point: SurfacePoint,
                            basis: TangentBasis | None = None) -> DistributionData:
    basis = basis or tangent_basis(point)
    shape = shape_operator(family, point, basis)
    values, vectors = np.linalg.eigh((shape.matrix + shape.matrix.T) / 2)

    expected = np.array(family.lambdas)
    distances = np.abs(values[:, None] - expected[None, :])
    labels = np.argmin(distances, axis=1)
    ordered = np.sort(distances, axis=1)
    gap = float(np.min(ordered[:, 1] - ordered[:, 0]))
    if gap < MIN_CLUSTER_GAP:
        raise DegeneratePointError(f"principal curvature clusters overlap (gap {gap:.2e})")

    bases, eigenvalues = [], []
    for k, size in enumerate(family.block_sizes):
        members = np.flatnonzero(labels == k)
        if len(members) != size:
            raise DegeneratePointError(
                f"D_{k + 1} has {len(members)} eigenvectors, expected {size}"
            )
        bases.append(basis.vectors @ vectors[:, members])
        eigenvalues.append(float(np.mean(values[members])))

    coefficient_matrix, frame = clifford_frame(family, point)
    return DistributionData(
        bases=tuple(bases),
        eigenvalues=tuple(eigenvalues),
        frame=frame,
        coefficient_matrix=coefficient_matrix,
        shape=shape,
    )


def d1_span(data: DistributionData, point: SurfacePoint) -> Matrix:
    """e_a = R_a φ_1, a = 1..m."""
    return np.column_stack([r @ point.phis[0] for r in data.frame[1:]])


def d3_span(data: DistributionData, point: SurfacePoint) -> Matrix:
    """e_ā = −R_0 e_a (equivalently −R_a φ_3)."""
    return -data.r0 @ d1_span(data, point)


# ============================================================
# CHECKS
# ============================================================
def verify_shape(family: IsoparametricFamily, data: DistributionData, tol: float = 1e-8) -> VerificationReport:
    report = VerificationReport()
    matrix = data.shape.matrix
    report.add(check("shape.symmetry", ANCHOR_SHAPE, max_abs(matrix - matrix.T), 1e-12))

    values = np.sort(np.linalg.eigvalsh((matrix + matrix.T) / 2))
    expected = np.sort(np.repeat(family.lambdas, family.block_sizes))
    report.add(check("shape.spectrum", ANCHOR_SHAPE, max_abs(values - expected), tol))

    l1, l2, l3, l4 = data.eigenvalues
    report.add(check("shape.lambda_products", "λ_1 λ_3 = λ_2 λ_4 = −1",
                     max(abs(l1 * l3 + 1), abs(l2 * l4 + 1)), 1e-10))

    ambient = data.shape.ambient()
    residual = 0.0
    for k in range(1, 5):
        b = data.basis(k)
        residual = max(residual, max_abs(ambient @ b - data.eigenvalues[k - 1] * b))
    report.add(check("shape.eigenvectors", ANCHOR_SHAPE, residual, tol))
    report.add(check("shape.distribution_orthogonality", ANCHOR_SHAPE,
                     gram_residual(data.span(1, 2, 3, 4)), 1e-10))
    return report


def verify_frame(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData) -> VerificationReport:
    report = VerificationReport()
    eye = np.eye(family.ambient_dim)
    a = data.coefficient_matrix
    report.add(check("frame.coefficients_orthogonal", ANCHOR_FRAME,
                     max_abs(a.T @ a - np.eye(a.shape[0])), 1e-12))
    report.add(check("frame.r0_equals_p", ANCHOR_FRAME, max_abs(data.r0 - point.p_op), 1e-12))
    report.add(check("frame.symmetric_orthogonal", ANCHOR_FRAME,
                     max(max(max_abs(r - r.T), max_abs(r @ r - eye)) for r in data.frame), 1e-12))
    anticommutation = max(max_abs(r @ data.r0 + data.r0 @ r) for r in data.frame[1:])
    report.add(check("frame.anticommute_with_r0", ANCHOR_FRAME, anticommutation, 1e-12))
    report.add(check("frame.d1_span", ANCHOR_D1,
                     subspace_distance(data.basis(1), d1_span(data, point)), 1e-8))
    report.add(check("frame.d3_span", ANCHOR_D1,
                     subspace_distance(data.basis(3), d3_span(data, point)), 1e-8))
    return report


def verify_lemma21(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData,
                   tol: float = 1e-8) -> VerificationReport:
    """
    For each k the fiber D_k|_x is orthogonal to ξ_k and to the tangent space
    of the focal submanifold at φ_k(x), which is the image of dφ_k; dφ_k
    vanishes on D_k. At the M_+ points φ_1 and φ_3 the normal space is also
    compared with the Clifford frame {P_i φ_k}.
    """
    report = VerificationReport()
    normal_to_xi = focal_tangent = kernel = 0.0
    for k in range(1, 5):
        dk = data.basis(k)
        normal_to_xi = max(normal_to_xi, max_abs(dk.T @ point.xis[k - 1]))
        images = [focal_differential(family, point, v)[k - 1]
                  for j in range(1, 5) if j != k for v in data.basis(j).T]
        tangent = orthonormalize(np.column_stack(images))
        focal_tangent = max(focal_tangent, max_abs(dk.T @ tangent))
        kernel = max(kernel, max(np.linalg.norm(focal_differential(family, point, v)[k - 1]) for v in dk.T))
    report.add(check("focal_spaces.xi_k_orthogonal", ANCHOR_FOCAL_NORMAL, normal_to_xi, tol))
    report.add(check("focal_spaces.focal_tangent_orthogonal", ANCHOR_FOCAL_NORMAL, focal_tangent, tol))
    report.add(check("focal_spaces.kernel_of_focal_map", ANCHOR_FOCAL_NORMAL, kernel, tol))

    frame_distance = 0.0
    for k in (1, 3):
        phi = point.phis[k - 1]
        clifford_normal = orthonormalize(np.column_stack([p @ phi for p in family.system.matrices]))
        normal = np.column_stack([point.xis[k - 1], data.basis(k)])
        frame_distance = max(frame_distance, subspace_distance(clifford_normal, normal))
    report.add(check("focal_spaces.clifford_normal_space", ANCHOR_FOCAL_NORMAL, frame_distance, tol))

    report.add(check("focal_spaces.normal_rank", "dim D_1 + 1 = number of Clifford matrices",
                     abs(data.basis(1).shape[1] + 1 - len(family.system.matrices)), 0.5))
    report.add(check("focal_spaces.xi1_along_r0_phi1", "ξ_1 = −P φ_1",
                     abs(point.xis[0] @ (data.r0 @ point.phis[0]) + 1.0), 1e-10))
    return report


def verify_focal_normal_frame(family: IsoparametricFamily, point: SurfacePoint,
                              data: DistributionData) -> VerificationReport:
    frame = focal_normal_frame(family, point)
    report = VerificationReport()
    report.add(check("focal.normal_frame_orthonormal", "global orthonormal normal frame of M_+",
                     gram_residual(frame), 1e-12))
    report.add(check("focal.normal_frame_vs_tangent", "T_{φ_1} M_+ = D_2 ⊕ D_3 ⊕ D_4",
                     max_abs(frame.T @ data.span(2, 3, 4)), 1e-8))
    return report


def maurer_cartan_residuals(family: IsoparametricFamily, point: SurfacePoint,
                            data: DistributionData, v: np.ndarray) -> np.ndarray:
    """(2/sin2θ)⟨R_a x, v⟩ − ⟨v, e_a⟩/sinθ − ⟨v, e_ā⟩/cosθ for a = 1..m."""
    theta = family.theta
    e = d1_span(data, point)
    e_bar = d3_span(data, point)
    lhs = np.array([2.0 / math.sin(2 * theta) * ((r @ point.x) @ v) for r in data.frame[1:]])
    rhs = (e.T @ v) / math.sin(theta) + (e_bar.T @ v) / math.cos(theta)
    return lhs - rhs


def maurer_cartan_check(family: IsoparametricFamily, point: SurfacePoint, data: DistributionData,
                        v: np.ndarray, tol: float = 1e-9) -> VerificationReport:
    report = VerificationReport(notes={"gauge": "e_a = R_a φ_1, e_ā = −R_0 e_a"})
    residual = max_abs(maurer_cartan_residuals(family, point, data, v))
    report.add(check("maurer_cartan.tau_a0", ANCHOR_TAU, residual, tol))
    return report
