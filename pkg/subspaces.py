"""
Subspace utilities shared by the geometry modules.

Subspaces are passed around as matrices whose columns form an orthonormal
basis. Comparisons are basis-invariant (projectors and principal angles).
"""
import numpy as np
from numpy.typing import NDArray
from scipy.linalg import orthogonal_procrustes, subspace_angles

Matrix = NDArray[np.float64]


# ============================================================
# CONSTRUCTION
# ============================================================
def complete_orthonormal(seed: Matrix, dim: int) -> Matrix:
    """
    Extend the orthonormal columns of ``seed`` to a basis of R^dim.

    Candidates are the standard basis vectors; at every step the candidate
    with the largest residual against the current span is taken (lowest
    index on ties), and each new vector is re-orthogonalised once more.
    Returns only the new columns, shape (dim, dim - seed.shape[1]).
    """
    basis = np.array(seed, dtype=float).reshape(dim, -1)
    extra = []
    for _ in range(dim - basis.shape[1]):
        residual = np.eye(dim) - basis @ basis.T
        j = int(np.argmax(np.linalg.norm(residual, axis=0)))
        v = residual[:, j]
        v = v - basis @ (basis.T @ v)
        v = v / np.linalg.norm(v)
        basis = np.column_stack([basis, v])
        extra.append(v)
    if not extra:
        return np.zeros((dim, 0))
    return np.column_stack(extra)


def orthonormalize(vectors: Matrix) -> Matrix:
    """QR-based orthonormal basis for the span of the columns (full column rank)."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[1] == 0:
        return vectors.copy()
    q, r = np.linalg.qr(vectors)
    # fix the sign so the result does not depend on LAPACK conventions
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def align_to(basis: Matrix, reference: Matrix) -> Matrix:
    """Rotate the orthonormal ``basis`` within its span to best match ``reference``."""
    if basis.shape[1] == 0:
        return basis
    rotation, _ = orthogonal_procrustes(basis, reference)
    return basis @ rotation


def projector(basis: Matrix) -> Matrix:
    return basis @ basis.T


# ============================================================
# COMPARISON
# ============================================================
def containment_residual(vectors: Matrix, basis: Matrix) -> float:
    """Largest norm of a column of ``vectors`` after removing its part in span(basis)."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[1] == 0:
        return 0.0
    rest = vectors - basis @ (basis.T @ vectors)
    return float(np.max(np.linalg.norm(rest, axis=0)))


def subspace_distance(a: Matrix, b: Matrix) -> float:
    """Largest principal angle between span(a) and span(b); pi/2 if dimensions differ."""
    if a.shape[1] != b.shape[1]:
        return float(np.pi / 2)
    if a.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(a, b)))


def gram_residual(vectors: Matrix, reference: Matrix | None = None) -> float:
    """max |VᵀV − RᵀR|, with R = identity-producing basis when omitted."""
    gram = vectors.T @ vectors
    target = np.eye(vectors.shape[1]) if reference is None else reference.T @ reference
    if gram.size == 0:
        return 0.0
    return float(np.max(np.abs(gram - target)))


def max_abs(matrix: NDArray) -> float:
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0
