"""
OT-FKM isoparametric families: the Cartan-Münzner polynomial, the level set
M = f^{-1}(cos 4θ), its unit normal, the operator P and the focal maps.

Points are sampled by drawing a unit vector and sliding it along its normal
geodesic onto the requested level (level sets are parallel, so one closed
form step lands on M up to rounding).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from clifford import CliffordSystem, FullSquareSystem, split_dual_subsystems
from errors import DomainError, InconsistencyError, PreconditionError, SamplingError, StalePointError
from subspaces import Matrix, max_abs

logger = logging.getLogger(__name__)

LEVEL_TOL = 1e-10
FOCAL_MARGIN = 1e-6
CLOSED_FORM_TOL = 1e-10
TANGENCY_TOL = 1e-10
MAX_CORRECTIONS = 3
MAX_REJECTIONS = 1000


# ============================================================
# FAMILY
# ============================================================
@dataclass(frozen=True)
class IsoparametricFamily:
    system: CliffordSystem
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi / 4:
            raise DomainError(f"theta must lie in (0, pi/4), got {self.theta}")
        if self.system.m2 < 1:
            raise DomainError(f"system m={self.system.m}, l={self.system.l} carries no family")

    @property
    def lambdas(self) -> tuple[float, float, float, float]:
        """Principal curvatures cot(θ + (k-1)π/4), k = 1..4, in decreasing order."""
        return tuple(1.0 / math.tan(t) for t in self.focal_angles)

    @property
    def focal_angles(self) -> tuple[float, float, float, float]:
        return tuple(self.theta + k * math.pi / 4 for k in range(4))

    @property
    def multiplicities(self) -> tuple[int, int]:
        return self.system.m, self.system.m2

    @property
    def block_sizes(self) -> tuple[int, int, int, int]:
        m1, m2 = self.multiplicities
        return m1, m2, m1, m2

    @property
    def dimension(self) -> int:
        return 2 * self.system.l - 2

    @property
    def ambient_dim(self) -> int:
        return 2 * self.system.l

    @property
    def level(self) -> float:
        return math.cos(4 * self.theta)


def dual_family(full: FullSquareSystem, m: int, theta: float) -> tuple[IsoparametricFamily, IsoparametricFamily]:
    """The family of {P_0..P_m} at θ and the one of {P_{m+1}..} at π/4 - θ (same hypersurface)."""
    first, second = split_dual_subsystems(full, m)
    return IsoparametricFamily(first, theta), IsoparametricFamily(second, math.pi / 4 - theta)


# ============================================================
# POLYNOMIAL AND NORMAL
# ============================================================
def cartan_munzner(system: CliffordSystem, x: np.ndarray) -> float:
    """|x|⁴ − 2 Σ ⟨P_i x, x⟩²."""
    x = np.asarray(x, dtype=float)
    return float((x @ x) ** 2 - 2.0 * np.sum(system.coefficients(x) ** 2))


def _raw_normal(system: CliffordSystem, x: np.ndarray, theta: float) -> np.ndarray:
    s2, c2 = math.sin(2 * theta), math.cos(2 * theta)
    weighted = sum(c * (p @ x) for c, p in zip(system.coefficients(x), system.matrices))
    return (s2 * x - weighted / s2) / c2


def level_residual(family: IsoparametricFamily, x: np.ndarray) -> float:
    return abs(cartan_munzner(family.system, x) - family.level)


def _require_level(family: IsoparametricFamily, x: np.ndarray) -> None:
    residual = level_residual(family, x)
    if residual >= LEVEL_TOL or abs(float(x @ x) - 1.0) >= LEVEL_TOL:
        raise StalePointError(
            f"point is off the level f = cos4θ (θ={family.theta:.6g}): residual {residual:.3e}"
        )


def normal_xi(family: IsoparametricFamily, x: np.ndarray) -> np.ndarray:
    """Unit normal (1/cos2θ)(x sin2θ − (1/sin2θ) Σ⟨P_i x, x⟩ P_i x)."""
    x = np.asarray(x, dtype=float)
    _require_level(family, x)
    return _raw_normal(family.system, x, family.theta)


def clifford_projection_P(family: IsoparametricFamily, x: np.ndarray) -> Matrix:
    """P = (1/sin2θ) Σ⟨P_i x, x⟩ P_i, a point of the Clifford sphere."""
    x = np.asarray(x, dtype=float)
    _require_level(family, x)
    return family.system.combine(family.system.coefficients(x) / math.sin(2 * family.theta))


def normal_differential(family: IsoparametricFamily, x: np.ndarray) -> Matrix:
    """Matrix D with dξ(v) = D v for v tangent at x (exact derivative of the normal field)."""
    system = family.system
    s2, c2 = math.sin(2 * family.theta), math.cos(2 * family.theta)
    coefficients = system.coefficients(x)
    total = np.zeros((system.ambient_dim, system.ambient_dim))
    for c, p in zip(coefficients, system.matrices):
        px = p @ x
        total += 2.0 * np.outer(px, px) + c * p
    return (s2 * np.eye(system.ambient_dim) - total / s2) / c2


# ============================================================
# FOCAL MAPS
# ============================================================
def focal_maps(family: IsoparametricFamily, x: np.ndarray, xi: np.ndarray) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """φ_k = x cos t_k + ξ sin t_k and ξ_k = −x sin t_k + ξ cos t_k, checked against their closed forms."""
    phis = tuple(x * math.cos(t) + xi * math.sin(t) for t in family.focal_angles)
    xis = tuple(-x * math.sin(t) + xi * math.cos(t) for t in family.focal_angles)

    p_op = clifford_projection_P(family, x)
    theta = family.theta
    eye = np.eye(family.ambient_dim)
    r2 = math.sqrt(2.0)
    phi1 = (x * math.cos(theta) - (p_op @ x) * math.sin(theta)) / math.cos(2 * theta)
    closed_phis = (phi1, (eye - p_op) @ phi1 / r2, -p_op @ phi1, -(eye + p_op) @ phi1 / r2)
    closed_xis = (-p_op @ phi1, -(eye + p_op) @ phi1 / r2, -phi1, -(eye - p_op) @ phi1 / r2)

    for k in range(4):
        for label, value, closed in (("phi", phis[k], closed_phis[k]), ("xi", xis[k], closed_xis[k])):
            residual = max_abs(value - closed)
            if residual >= CLOSED_FORM_TOL:
                raise InconsistencyError(f"{label}_{k + 1}", closed, value, residual)
    return phis, xis


# ============================================================
# SURFACE POINTS
# ============================================================
@dataclass(frozen=True, eq=False)
class SurfacePoint:
    x: np.ndarray
    xi: np.ndarray
    p_op: Matrix
    coefficients: np.ndarray
    phis: tuple[np.ndarray, ...]
    xis: tuple[np.ndarray, ...]
    seed: tuple[int, ...] = field(default=(), compare=False)

    def as_record(self) -> dict:
        return {"x": [float(v) for v in self.x], "seed": list(self.seed)}


def surface_point(family: IsoparametricFamily, x: np.ndarray, seed: tuple[int, ...] = ()) -> SurfacePoint:
    x = np.asarray(x, dtype=float)
    xi = normal_xi(family, x)
    phis, xis = focal_maps(family, x, xi)
    return SurfacePoint(
        x=x,
        xi=xi,
        p_op=clifford_projection_P(family, x),
        coefficients=family.system.coefficients(x),
        phis=phis,
        xis=xis,
        seed=seed,
    )


def ensure_on_family(family: IsoparametricFamily, point: SurfacePoint) -> None:
    _require_level(family, point.x)


def _retract(family: IsoparametricFamily, y: np.ndarray) -> np.ndarray:
    """Slide the unit vector y along its normal geodesic onto f = cos 4θ."""
    x = y / np.linalg.norm(y)
    for iteration in range(MAX_CORRECTIONS + 1):
        f = cartan_munzner(family.system, x)
        if abs(f - family.level) < LEVEL_TOL * 1e-2 and iteration > 0:
            break
        if iteration == MAX_CORRECTIONS:
            break
        f = min(max(f, -1.0 + FOCAL_MARGIN), 1.0 - FOCAL_MARGIN)
        theta_y = math.acos(f) / 4
        t = theta_y - family.theta
        x = x * math.cos(t) + _raw_normal(family.system, x, theta_y) * math.sin(t)
        x = x / np.linalg.norm(x)
        logger.debug("retraction step %d: level residual %.3e", iteration, level_residual(family, x))
    return x


def sample_seed(base_seed: int, index: int, stream: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(base_seed), int(index), int(stream)])


def sample_point(family: IsoparametricFamily, seed: int | np.random.SeedSequence) -> SurfacePoint:
    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(sequence)
    for attempt in range(MAX_REJECTIONS):
        y = rng.standard_normal(family.ambient_dim)
        y /= np.linalg.norm(y)
        f = cartan_munzner(family.system, y)
        if abs(f) > 1.0 - FOCAL_MARGIN:
            logger.debug("rejected sample %d near a focal set (f=%.8f)", attempt, f)
            continue
        x = _retract(family, y)
        if level_residual(family, x) < LEVEL_TOL:
            entropy = sequence.entropy
            seed_tag = tuple(int(v) for v in np.atleast_1d(entropy)) + tuple(sequence.spawn_key)
            return surface_point(family, x, seed=seed_tag)
        logger.debug("sample %d did not settle on the level set", attempt)
    raise SamplingError(f"no admissible point after {MAX_REJECTIONS} draws")


def sample_points(family: IsoparametricFamily, base_seed: int, count: int, stream: int = 0) -> list[SurfacePoint]:
    return [sample_point(family, sample_seed(base_seed, i, stream)) for i in range(count)]


# ============================================================
# CURVES
# ============================================================
def tangent_projector(point: SurfacePoint) -> Matrix:
    """Orthogonal projector of R^{2l} onto T_xM = {x, ξ}^⊥."""
    return np.eye(len(point.x)) - np.outer(point.x, point.x) - np.outer(point.xi, point.xi)


def require_tangent(point: SurfacePoint, v: np.ndarray) -> None:
    scale = max(1.0, float(np.linalg.norm(v)))
    if abs(point.x @ v) >= TANGENCY_TOL * scale or abs(point.xi @ v) >= TANGENCY_TOL * scale:
        raise PreconditionError(
            f"vector is not tangent: <v,x>={point.x @ v:.3e}, <v,xi>={point.xi @ v:.3e}"
        )


def tangent_curve(family: IsoparametricFamily, point: SurfacePoint, v: np.ndarray, t: float) -> SurfacePoint:
    """Retraction of (x + t v)/|x + t v| onto M; γ(0) = x and γ'(0) = v."""
    v = np.asarray(v, dtype=float)
    require_tangent(point, v)
    if t == 0.0:
        return point
    y = point.x + t * v
    return surface_point(family, _retract(family, y / np.linalg.norm(y)))


def tangent_path(family: IsoparametricFamily, point: SurfacePoint, v: np.ndarray,
                 step: float, count: int) -> list[SurfacePoint]:
    """count steps of length ``step``, re-projecting the direction onto each new tangent space."""
    path = [point]
    direction = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(direction))
    for _ in range(count):
        current = path[-1]
        nxt = tangent_curve(family, current, direction, step)
        direction = tangent_projector(nxt) @ direction
        norm = float(np.linalg.norm(direction))
        if norm > 0.0:
            direction *= speed / norm
        path.append(nxt)
    return path


def velocity_richardson_ratio(family: IsoparametricFamily, point: SurfacePoint, v: np.ndarray,
                              step: float = 1e-2) -> float:
    """Central-difference velocity error of the curve at h over the error at h/2 (≈ 4 when second order)."""

    def error(h: float) -> float:
        forward, backward = tangent_curve(family, point, v, h), tangent_curve(family, point, v, -h)
        return max_abs((forward.x - backward.x) / (2.0 * h) - v)

    coarse, fine = error(step), error(step / 2)
    return coarse / fine if fine > 0 else math.inf


# ============================================================
# FOCAL SUBMANIFOLDS
# ============================================================
def focal_normal_frame(family: IsoparametricFamily, point: SurfacePoint) -> Matrix:
    """Columns P_0 φ_1, ..., P_m φ_1: the Clifford normal frame of M_+ at φ_1(x)."""
    phi1 = point.phis[0]
    return np.column_stack([p @ phi1 for p in family.system.matrices])


def focal_differential(family: IsoparametricFamily, point: SurfacePoint, v: np.ndarray) -> np.ndarray:
    """dφ_k(v) = cos t_k v + sin t_k dξ(v), for k = 1..4 (stacked as rows)."""
    dxi = normal_differential(family, point.x) @ v
    return np.array([math.cos(t) * v + math.sin(t) * dxi for t in family.focal_angles])
