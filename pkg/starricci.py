"""
*-Ricci curvature of almost Hermitian hypersurfaces in the unit sphere.

Closed form:  *Ric(X, Y) = ⟨X, Y⟩ − ⟨J A J A X, Y⟩
Oracle:       *Ric(X, Y) = Σ_i R(X, JY, f_i, J f_i) over a J-adapted basis,
              with R from the Gauss equation (ambient curvature 1).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import PreconditionError
from isoparametric import IsoparametricFamily, SurfacePoint
from report import VerificationReport, check
from shape import DistributionData, ambient_shape_operator, tangent_basis
from subspaces import Matrix, containment_residual, max_abs

logger = logging.getLogger(__name__)

PASS_BELOW = 1e-8
FAIL_ABOVE = 1e-6

ANCHOR_STAR = "*Ric(X, Y) = ⟨X, Y⟩ − ⟨J A J A X, Y⟩"
ANCHOR_VANISH = "*-Ricci of a pair-swapping structure vanishes"
ANCHOR_SYMMETRY = "*Ric symmetric iff J A J preserves every E_λ"
ANCHOR_EINSTEIN = "weakly *-Einstein: J(E_λ) = E_{−c/λ}"
ANCHOR_KRONECKER = "Gauss-Kronecker curvature K = (ρ − 1)^n"


@dataclass(frozen=True, eq=False)
class StarRicciForm:
    matrix: Matrix
    basis: Matrix

    @property
    def scalar(self) -> float:
        return star_scalar(self)


def star_scalar(form: StarRicciForm) -> float:
    """*-scalar curvature: trace of *Ric in an orthonormal basis."""
    return float(np.trace(form.matrix))


def _operator(j) -> Matrix:
    return np.asarray(getattr(j, "matrix", j), dtype=float)


# ============================================================
# CLOSED FORM
# ============================================================
def star_ricci_closed_form(family: IsoparametricFamily, point: SurfacePoint, j, x: np.ndarray, y: np.ndarray) -> float:
    j = _operator(j)
    a = ambient_shape_operator(family, point)
    return float(x @ y - (j @ a @ j @ a @ x) @ y)


def star_ricci_matrix(family: IsoparametricFamily, point: SurfacePoint, j, basis: Matrix | None = None) -> StarRicciForm:
    """Closed form in a tangent basis: F = I − (J_b A_b J_b A_b)ᵀ."""
    j = _operator(j)
    basis = tangent_basis(point).vectors if basis is None else basis
    a = ambient_shape_operator(family, point)
    product = basis.T @ j @ a @ j @ a @ basis
    return StarRicciForm(np.eye(basis.shape[1]) - product.T, basis)


# ============================================================
# GAUSS EQUATION ORACLE
# ============================================================
def j_adapted_basis(j: Matrix, basis: Matrix, tol: float = 1e-8) -> tuple[Matrix, Matrix]:
    """{f_i} with {f_i, J f_i} orthonormal: at each step the column of ``basis`` farthest from the current span."""
    jt = basis.T @ j @ basis
    eye = np.eye(basis.shape[1])
    if max_abs(jt @ jt + eye) >= tol or max_abs(jt.T @ jt - eye) >= tol:
        raise PreconditionError("J is not an orthogonal complex structure on the tangent space")
    chosen: list[np.ndarray] = []
    span = np.zeros((basis.shape[0], 0))
    for _ in range(basis.shape[1] // 2):
        rest = basis - span @ (span.T @ basis)
        norms = np.linalg.norm(rest, axis=0)
        best = int(np.argmax(norms))
        if norms[best] < tol:
            raise PreconditionError("could not complete a J-adapted basis")
        f = rest[:, best] / norms[best]
        chosen.append(f)
        span = np.column_stack([span, f, j @ f])
    f = np.column_stack(chosen)
    return f, j @ f


def star_ricci_gauss_oracle(family: IsoparametricFamily, point: SurfacePoint, j,
                            basis: Matrix | None = None) -> StarRicciForm:
    """
    Σ_i R(X, JY, f_i, J f_i) with
    R(X, Y, Z, W) = ⟨X,Z⟩⟨Y,W⟩ − ⟨X,W⟩⟨Y,Z⟩ + ⟨AX,Z⟩⟨AY,W⟩ − ⟨AX,W⟩⟨AY,Z⟩.
    """
    j = _operator(j)
    t = tangent_basis(point).vectors if basis is None else basis
    f, g = j_adapted_basis(j, t)
    a = ambient_shape_operator(family, point)
    jt = j @ t
    matrix = ((t.T @ f) @ (g.T @ jt) - (t.T @ g) @ (f.T @ jt)
              + (t.T @ a @ f) @ (g.T @ a @ jt) - (t.T @ a @ g) @ (f.T @ a @ jt))
    return StarRicciForm(matrix, t)


def verify_star_ricci(family: IsoparametricFamily, point: SurfacePoint, j, prefix: str = "star_ricci",
                      expect_zero: bool = True, tol: float = 1e-10) -> VerificationReport:
    closed = star_ricci_matrix(family, point, j)
    oracle = star_ricci_gauss_oracle(family, point, j, closed.basis)
    report = VerificationReport()
    report.add(check(f"{prefix}.oracle_agreement", ANCHOR_STAR, max_abs(closed.matrix - oracle.matrix), tol))
    if expect_zero:
        report.add(check(f"{prefix}.star_ricci", ANCHOR_VANISH, max_abs(closed.matrix), tol))
        report.add(check(f"{prefix}.star_scalar", ANCHOR_VANISH, abs(oracle.scalar), 1e-9))
    return report


# ============================================================
# SYMMETRY, WEAK EINSTEIN AND GAUSS-KRONECKER
# ============================================================
def eigenspace_preservation(j: Matrix, data: DistributionData) -> float:
    a = data.shape.ambient()
    jaj = j @ a @ j
    return max(containment_residual(jaj @ data.basis(k), data.basis(k)) for k in range(1, 5))


def symmetry_criterion(family: IsoparametricFamily, point: SurfacePoint, j, data: DistributionData) -> VerificationReport:
    j = _operator(j)
    form = star_ricci_matrix(family, point, j)
    asymmetry = max_abs(form.matrix - form.matrix.T)
    preservation = eigenspace_preservation(j, data)

    def side(value: float) -> int:
        return 1 if value < PASS_BELOW else -1 if value > FAIL_ABOVE else 0

    left, right = side(asymmetry), side(preservation)
    inconclusive = left == 0 or right == 0
    contradiction = (not inconclusive) and left != right
    report = VerificationReport(notes={"symmetry_criterion": {"asymmetry": asymmetry, "preservation": preservation}})
    report.add(check("star_einstein.symmetry_iff", ANCHOR_SYMMETRY, 1.0 if contradiction else 0.0, 0.5,
                     inconclusive=inconclusive))
    return report


def einstein_fit(form: StarRicciForm) -> tuple[float, float]:
    """(ρ, ‖*Ric − ρ g‖_max) with ρ = tr(*Ric) / dim."""
    rho = star_scalar(form) / form.matrix.shape[0]
    return rho, max_abs(form.matrix - rho * np.eye(form.matrix.shape[0]))


def weakly_star_einstein_check(family: IsoparametricFamily, point: SurfacePoint, j, data: DistributionData,
                               expect_einstein: bool = True) -> VerificationReport:
    j = _operator(j)
    rho, residual = einstein_fit(star_ricci_matrix(family, point, j))
    report = VerificationReport(notes={"weakly_star_einstein": {"rho": rho, "residual": residual}})
    if expect_einstein:
        report.add(check("star_einstein.einstein_fit", ANCHOR_EINSTEIN, residual, PASS_BELOW))
    if residual >= PASS_BELOW:
        return report

    c = 1.0 - rho
    lambdas = data.eigenvalues
    if abs(c) < PASS_BELOW:
        report.add(check("star_einstein.zero_curvature", ANCHOR_EINSTEIN, min(abs(v) for v in lambdas), PASS_BELOW))
        return report
    mapping = multiplicity = 0.0
    for k, lam in enumerate(lambdas, start=1):
        target = -c / lam
        t = int(np.argmin([abs(v - target) for v in lambdas])) + 1
        mapping = max(mapping, abs(lambdas[t - 1] - target), containment_residual(j @ data.basis(k), data.basis(t)))
        multiplicity = max(multiplicity, abs(data.basis(k).shape[1] - data.basis(t).shape[1]))
    report.add(check("star_einstein.eigenspace_map", ANCHOR_EINSTEIN, mapping, PASS_BELOW))
    report.add(check("star_einstein.multiplicity_match", ANCHOR_EINSTEIN, multiplicity, 0.5))
    return report


def gauss_kronecker_check(family: IsoparametricFamily, point: SurfacePoint, j, data: DistributionData) -> VerificationReport:
    j = _operator(j)
    rho, residual = einstein_fit(star_ricci_matrix(family, point, j))
    if residual >= PASS_BELOW:
        raise PreconditionError(f"J is not weakly *-Einstein here (residual {residual:.2e})")
    shape = data.shape.matrix
    n = family.system.l - 1
    determinant = float(np.linalg.det(shape))
    product = float(np.prod(np.linalg.eigvalsh((shape + shape.T) / 2)))
    predicted = (rho - 1.0) ** n
    report = VerificationReport()
    report.add(check("star_einstein.kronecker", ANCHOR_KRONECKER,
                     abs(determinant - predicted) / max(abs(predicted), math.ulp(1.0)), 1e-8))
    report.add(check("star_einstein.kronecker_det_vs_eigenvalues", ANCHOR_KRONECKER,
                     abs(determinant - product), 1e-9))
    return report
