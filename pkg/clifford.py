"""
Symmetric Clifford systems {P_0, ..., P_m} on R^{2l}.

Skew generators come from left multiplication in the Cayley-Dickson
algebras (complex numbers, quaternions, octonions) and, past seven
generators, from the period-8 tensor step. Doubling turns m-1 skew
generators into the m+1 symmetric matrices of the system:

    P_0(u, v) = (u, -v),  P_1(u, v) = (v, u),  P_{1+i}(u, v) = (E_i v, -E_i u).
"""
import enum
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from errors import DomainError, EmptyFamilyError, NumericalIntegrityError, PreconditionError
from report import VerificationReport, check
from subspaces import Matrix, max_abs

logger = logging.getLogger(__name__)

# delta(m) for m = 1..8; delta(m + 8) = 16 delta(m)
DELTA_TABLE = (1, 2, 4, 4, 8, 8, 8, 8)
SUM_OF_SQUARES_TOL = 1e-12
SUM_OF_SQUARES_SAMPLES = 64


def delta(m: int) -> int:
    """Dimension of the irreducible module underlying an m-generator Clifford system."""
    if m < 1:
        raise DomainError(f"delta(m) needs m >= 1, got {m}")
    period, rest = divmod(m - 1, 8)
    return 16 ** period * DELTA_TABLE[rest]


def minimal_multiplicity(m: int) -> int:
    """Smallest k with k·delta(m) - m - 1 >= 1."""
    return -(-(m + 2) // delta(m))


# ============================================================
# TYPES
# ============================================================
def _frozen(matrix: Matrix) -> Matrix:
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class SkewRepresentation:
    count: int
    dim: int
    generators: tuple[Matrix, ...]


@dataclass(frozen=True)
class CliffordSystem:
    m: int
    l: int
    matrices: tuple[Matrix, ...]

    @property
    def ambient_dim(self) -> int:
        return 2 * self.l

    @property
    def m2(self) -> int:
        return self.l - self.m - 1

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """(⟨P_i x, x⟩)_i."""
        return np.array([x @ (p @ x) for p in self.matrices])

    def combine(self, coefficients: np.ndarray) -> Matrix:
        """Σ a_i P_i."""
        return np.einsum("i,ijk->jk", np.asarray(coefficients, dtype=float), np.array(self.matrices))


class FullSquareFlavor(enum.Enum):
    FIVE_ON_8D = "Five_on_8d"
    NINE_ON_16D = "Nine_on_16d"


@dataclass(frozen=True)
class FullSquareSystem:
    base: CliffordSystem
    flavor: FullSquareFlavor

    @property
    def count(self) -> int:
        return len(self.base.matrices)


# ============================================================
# CAYLEY-DICKSON GENERATORS
# ============================================================
def _conjugate(a: np.ndarray) -> np.ndarray:
    out = -a
    out[0] = a[0]
    return out


def _cd_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(p, q)(r, s) = (pr - s̄q, sp + qr̄)."""
    n = len(a)
    if n == 1:
        return a * b
    h = n // 2
    p, q = a[:h], a[h:]
    r, s = b[:h], b[h:]
    return np.concatenate([
        _cd_product(p, r) - _cd_product(_conjugate(s), q),
        _cd_product(s, p) + _cd_product(q, _conjugate(r)),
    ])


def left_multiplication(unit: int, dim: int) -> Matrix:
    """Matrix of x ↦ e_unit · x in the Cayley-Dickson algebra of dimension ``dim``."""
    e = np.zeros(dim)
    e[unit] = 1.0
    basis = np.eye(dim)
    return np.column_stack([_cd_product(e, basis[:, j]) for j in range(dim)])


@lru_cache(maxsize=None)
def _irreducible_generators(count: int) -> tuple[Matrix, ...]:
    if count == 0:
        return ()
    if count <= 7:
        dim = delta(count + 1)
        return tuple(_frozen(left_multiplication(u, dim)) for u in range(1, count + 1))
    # period-8 step: E_i ⊗ ω together with I ⊗ G_a, where G_a = S_0 S_a
    # are skew on R^16 and ω = G_1 ... G_8 is a symmetric involution
    # anticommuting with every G_a
    lower = _irreducible_generators(count - 8)
    dim = delta(count - 7)
    octo = _double(_irreducible_generators(7))
    g = [octo[0] @ octo[a] for a in range(1, 9)]
    omega = np.eye(16)
    for ga in g:
        omega = omega @ ga
    generators = [np.kron(e, omega) for e in lower]
    generators += [np.kron(np.eye(dim), ga) for ga in g]
    return tuple(_frozen(e) for e in generators)


def build_skew_representation(generator_count: int, multiplicity: int) -> SkewRepresentation:
    if generator_count < 0:
        raise DomainError(f"generator count must be >= 0, got {generator_count}")
    if multiplicity < 1:
        raise DomainError(f"multiplicity must be >= 1, got {multiplicity}")
    irreducible = _irreducible_generators(generator_count)
    dim = multiplicity * delta(generator_count + 1)
    generators = tuple(_frozen(np.kron(np.eye(multiplicity), e)) for e in irreducible)
    return SkewRepresentation(count=generator_count, dim=dim, generators=generators)


def _double(generators: tuple[Matrix, ...], dim: int | None = None) -> list[Matrix]:
    l = generators[0].shape[0] if generators else int(dim)
    eye, zero = np.eye(l), np.zeros((l, l))
    matrices = [np.block([[eye, zero], [zero, -eye]]), np.block([[zero, eye], [eye, zero]])]
    matrices += [np.block([[zero, e], [-e, zero]]) for e in generators]
    return matrices


# ============================================================
# SYSTEMS
# ============================================================
def build_clifford_system(m: int, multiplicity: int) -> CliffordSystem:
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    rep = build_skew_representation(m - 1, multiplicity)
    l = rep.dim
    if l - m - 1 < 1:
        raise EmptyFamilyError(m, multiplicity, minimal_multiplicity(m))
    matrices = tuple(_frozen(p) for p in _double(rep.generators, dim=l))
    logger.debug("built Clifford system m=%d k=%d l=%d", m, multiplicity, l)
    return CliffordSystem(m=m, l=l, matrices=matrices)


def sum_of_squares_residual(system: CliffordSystem, x: np.ndarray) -> float:
    """| Σ⟨P_i x, x⟩² − |x|⁴ |."""
    return float(abs(np.sum(system.coefficients(x) ** 2) - (x @ x) ** 2))


def build_full_square_system(flavor: FullSquareFlavor | str) -> FullSquareSystem:
    try:
        flavor = FullSquareFlavor(flavor)
    except ValueError as exc:
        raise DomainError(f"unknown full-square flavor {flavor!r}") from exc
    count = 3 if flavor is FullSquareFlavor.FIVE_ON_8D else 7
    generators = _irreducible_generators(count)
    l = generators[0].shape[0]
    matrices = tuple(_frozen(p) for p in _double(generators))
    base = CliffordSystem(m=len(matrices) - 1, l=l, matrices=matrices)

    rng = np.random.default_rng(SUM_OF_SQUARES_SAMPLES)
    worst = 0.0
    for _ in range(SUM_OF_SQUARES_SAMPLES):
        x = rng.standard_normal(2 * l)
        worst = max(worst, sum_of_squares_residual(base, x / np.linalg.norm(x)))
    if worst >= SUM_OF_SQUARES_TOL:
        raise NumericalIntegrityError(f"{flavor.value}.sum_of_squares", worst, SUM_OF_SQUARES_TOL)
    return FullSquareSystem(base=base, flavor=flavor)


def split_dual_subsystems(full: FullSquareSystem, m: int) -> tuple[CliffordSystem, CliffordSystem]:
    """{P_0..P_m} and {P_{m+1}..P_last} on the same ambient space."""
    if not 1 <= m <= full.count - 3:
        raise DomainError(f"split index m={m} outside 1..{full.count - 3} for {full.flavor.value}")
    matrices = full.base.matrices
    first = CliffordSystem(m=m, l=full.base.l, matrices=matrices[: m + 1])
    second = CliffordSystem(m=full.count - m - 2, l=full.base.l, matrices=matrices[m + 1:])
    return first, second


# multiplicity pair -> (full system, split index)
DUAL_PAIRS: dict[tuple[int, int], tuple[FullSquareFlavor, int]] = {
    (1, 2): (FullSquareFlavor.FIVE_ON_8D, 1),
    (1, 6): (FullSquareFlavor.NINE_ON_16D, 1),
    (2, 5): (FullSquareFlavor.NINE_ON_16D, 2),
    (3, 4): (FullSquareFlavor.NINE_ON_16D, 3),
}


def parse_pair(pair: str | tuple[int, int]) -> tuple[int, int]:
    if isinstance(pair, str):
        try:
            first, second = (int(part) for part in pair.split(","))
        except ValueError as exc:
            raise DomainError(f"pair must look like 'm1,m2', got {pair!r}") from exc
        pair = (first, second)
    pair = (int(pair[0]), int(pair[1]))
    if pair not in DUAL_PAIRS:
        supported = ", ".join(f"{a},{b}" for a, b in DUAL_PAIRS)
        raise DomainError(f"unsupported multiplicity pair {pair}; supported: {supported}")
    return pair


def pair_configuration(pair: str | tuple[int, int]) -> tuple[FullSquareSystem, int]:
    """Full-square system and split index realising a supported multiplicity pair."""
    flavor, m = DUAL_PAIRS[parse_pair(pair)]
    return build_full_square_system(flavor), m


# ============================================================
# VERIFICATION
# ============================================================
ANCHOR_SYSTEM = "symmetric Clifford system relations"


def clifford_residuals(matrices: tuple[Matrix, ...] | list[Matrix]) -> dict[str, float]:
    eye = np.eye(matrices[0].shape[0])
    symmetry = max(max_abs(p - p.T) for p in matrices)
    orthogonality = max(max_abs(p @ p - eye) for p in matrices)
    anticommutation = 0.0
    for i, p in enumerate(matrices):
        for q in matrices[i + 1:]:
            anticommutation = max(anticommutation, max_abs(p @ q + q @ p))
    return {"symmetry": symmetry, "orthogonality": orthogonality, "anticommutation": anticommutation}


def verify_clifford_system(system: CliffordSystem, tol: float = 1e-12) -> VerificationReport:
    report = VerificationReport(config={"m": system.m, "l": system.l})
    for name, residual in clifford_residuals(system.matrices).items():
        report.add(check(f"clifford.{name}", ANCHOR_SYSTEM, residual, tol))
    return report


def verify_skew_representation(rep: SkewRepresentation, tol: float = 1e-12) -> VerificationReport:
    report = VerificationReport(config={"count": rep.count, "dim": rep.dim})
    eye = np.eye(rep.dim)
    worst_skew = max((max_abs(e + e.T) for e in rep.generators), default=0.0)
    worst_square = max((max_abs(e @ e + eye) for e in rep.generators), default=0.0)
    worst_anti = 0.0
    for i, e in enumerate(rep.generators):
        for f in rep.generators[i + 1:]:
            worst_anti = max(worst_anti, max_abs(e @ f + f @ e))
    report.add(check("skew.skew_symmetry", ANCHOR_SYSTEM, worst_skew, tol))
    report.add(check("skew.square_minus_identity", ANCHOR_SYSTEM, worst_square, tol))
    report.add(check("skew.anticommutation", ANCHOR_SYSTEM, worst_anti, tol))
    report.add(check("skew.module_dimension", "irreducible module dimension delta(m)",
                     float(rep.dim % delta(rep.count + 1)), 0.5))
    return report


# ============================================================
# MATRIX DUMP
# ============================================================
def dump_clifford_system(system: CliffordSystem, path: str | Path) -> Path:
    path = Path(path)
    lines = [f"clifford m={system.m} l={system.l}"]
    for p in system.matrices:
        lines.extend(" ".join(f"{v:.17g}" for v in row) for row in p)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_clifford_dump(path: str | Path) -> CliffordSystem:
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    header = dict(token.split("=") for token in rows[0].split()[1:])
    m, l = int(header["m"]), int(header["l"])
    values = np.array([[float(v) for v in row.split()] for row in rows[1:] if row.strip()])
    if values.shape != ((m + 1) * 2 * l, 2 * l):
        raise PreconditionError(f"{path}: expected {(m + 1)} blocks of {2 * l}x{2 * l}")
    matrices = tuple(_frozen(block) for block in np.split(values, m + 1))
    return CliffordSystem(m=m, l=l, matrices=matrices)
