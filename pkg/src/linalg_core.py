"""
Dense complex matrix toolbox: Hermitian spectral calculus, geometric means,
polar decomposition, unitarily invariant norms, pinchings and Kronecker products.

Matrices are numpy ``complex128`` arrays. Every function is pure and never
mutates its arguments.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from src.exceptions import (
    BlockMismatchError,
    DimensionMismatchError,
    InvalidKError,
    InvalidPError,
    InvalidWeightError,
    MatrixError,
    NotHermitianError,
    NotPositiveDefiniteError,
    NotPSDError,
    NotSquareError,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-8
PSD_TOL = 1e-10
PD_FLOOR = 1e-12
EIG_TOL = 1e-10
REGULARIZATION_SCALE = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition H = V diag(eigenvalues) V*, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


@dataclass(frozen=True)
class BlockStructure:
    """Sizes of the diagonal blocks used by a pinching."""

    block_sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise BlockMismatchError(f"Block sizes must be positive: {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @classmethod
    def uniform(cls, num_blocks: int, block_size: int) -> "BlockStructure":
        return cls(tuple([block_size] * num_blocks))

    @property
    def dimension(self) -> int:
        return sum(self.block_sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    def offsets(self) -> List[int]:
        return [0] + list(np.cumsum(self.block_sizes))


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a 2-D complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D matrix, got shape {M.shape}")
    return M


def _require_square(A: np.ndarray) -> np.ndarray:
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise NotSquareError(f"Matrix of shape {M.shape} is not square")
    return M


def _require_same_shape(*mats: np.ndarray):
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"Dimension mismatch: {sorted(shapes)}")


def hermitian_part(A) -> np.ndarray:
    M = as_matrix(A)
    return (M + M.conj().T) / 2


def hermitian_deviation(A) -> float:
    """Relative Frobenius distance ||A - A*||_F / ||A||_F (0 for the zero matrix)."""
    M = _require_square(A)
    scale = np.linalg.norm(M)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(M - M.conj().T) / scale)


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_deviation(A) <= tol


def _near_hermitian(M: np.ndarray, tol: float) -> bool:
    """||M - M*||_F <= tol * max(1, ||M||_F); rounding-level matrices pass."""
    return bool(np.linalg.norm(M - M.conj().T) <= tol * max(1.0, np.linalg.norm(M)))


def _require_hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    M = _require_square(A)
    if not _near_hermitian(M, tol):
        raise NotHermitianError(
            f"Hermiticity deviation {hermitian_deviation(M):.3e} exceeds tolerance {tol:.1e}"
        )
    return hermitian_part(M)


def eigh(
    H, hermitian_tol: float = HERMITIAN_TOL, eig_tol: float = EIG_TOL
) -> EigenDecomposition:
    """
    Eigendecomposition of a Hermitian matrix.

    Args:
        H: Hermitian matrix
        hermitian_tol: Allowed relative deviation from Hermiticity
        eig_tol: Allowed residual ||HV - V diag(w)||_F relative to max(1, ||H||_F)

    Returns:
        EigenDecomposition with ascending real eigenvalues and unitary eigenvectors

    Raises:
        NotSquareError, NotHermitianError, MatrixError (residual above eig_tol)
    """
    M = _require_hermitian(H, hermitian_tol)
    eigenvalues, eigenvectors = sla.eigh(M)
    residual = np.linalg.norm(M @ eigenvectors - eigenvectors * eigenvalues)
    if residual > eig_tol * max(1.0, np.linalg.norm(M)):
        raise MatrixError(f"Eigendecomposition residual {residual:.3e} exceeds {eig_tol:.1e}")
    return EigenDecomposition(np.asarray(eigenvalues, dtype=float), eigenvectors)


def eigvalsh(H) -> np.ndarray:
    return np.asarray(sla.eigvalsh(_require_hermitian(H)), dtype=float)


def min_eigenvalue(H) -> float:
    return float(eigvalsh(H)[0])


def matrix_function(H, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply ``f`` to the spectrum of Hermitian ``H``: V f(λ) V*."""
    decomposition = eigh(H)
    V = decomposition.eigenvectors
    values = np.asarray(f(decomposition.eigenvalues))
    return (V * values) @ V.conj().T


def _psd_floor(eigenvalues: np.ndarray, tol: float) -> float:
    scale = max(1.0, float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0)
    return -tol * scale


def _clipped_spectrum(H, tol: float = PSD_TOL) -> EigenDecomposition:
    decomposition = eigh(H)
    w = decomposition.eigenvalues
    if w[0] < _psd_floor(w, tol):
        raise NotPSDError(f"Minimum eigenvalue {w[0]:.3e} is below the PSD tolerance")
    return EigenDecomposition(np.clip(w, 0.0, None), decomposition.eigenvectors)


def matrix_sqrt(A, tol: float = PSD_TOL) -> np.ndarray:
    """
    Principal square root of a PSD matrix. Small negative eigenvalues
    produced by rounding are clipped to zero.

    Raises:
        NotHermitianError, NotPSDError
    """
    decomposition = _clipped_spectrum(A, tol)
    V = decomposition.eigenvectors
    return (V * np.sqrt(decomposition.eigenvalues)) @ V.conj().T


def _require_pd(A, pd_floor: float = PD_FLOOR) -> EigenDecomposition:
    decomposition = eigh(A)
    if decomposition.eigenvalues[0] <= pd_floor:
        raise NotPositiveDefiniteError(
            f"Minimum eigenvalue {decomposition.eigenvalues[0]:.3e} <= {pd_floor:.1e}"
        )
    return decomposition


def matrix_power(A, t: float, pd_floor: float = PD_FLOOR) -> np.ndarray:
    """Real power A^t of a positive definite matrix."""
    decomposition = _require_pd(A, pd_floor)
    V = decomposition.eigenvectors
    return (V * np.power(decomposition.eigenvalues, t)) @ V.conj().T


def inv_sqrt(A, pd_floor: float = PD_FLOOR) -> np.ndarray:
    return matrix_power(A, -0.5, pd_floor)


def geometric_mean_flagged(
    A, B, t: float = 0.5, pd_floor: float = PD_FLOOR
) -> Tuple[np.ndarray, bool]:
    """
    Weighted geometric mean A #_t B = A^{1/2}(A^{-1/2} B A^{-1/2})^t A^{1/2}.

    If either operand is singular (minimum eigenvalue below ``pd_floor``) both
    are shifted by eps*I with eps = 1e-12 * max(1, tr A + tr B).

    Args:
        A: PSD matrix
        B: PSD matrix of the same dimension
        t: Position on the geodesic, 0 gives A and 1 gives B
        pd_floor: Eigenvalue floor below which regularization kicks in

    Returns:
        Tuple of the mean and a flag telling whether regularization was applied
    """
    A = _require_hermitian(A)
    B = _require_hermitian(B)
    _require_same_shape(A, B)
    if not 0.0 <= t <= 1.0:
        raise InvalidWeightError(f"Weight t={t} is outside [0, 1]")

    spectrum_a = _clipped_spectrum(A)
    spectrum_b = _clipped_spectrum(B)
    regularized = bool(
        min(spectrum_a.eigenvalues[0], spectrum_b.eigenvalues[0]) < pd_floor
    )
    if regularized:
        A = spectrum_a.reconstruct()
        B = spectrum_b.reconstruct()
        eps = REGULARIZATION_SCALE * max(1.0, float(np.trace(A).real + np.trace(B).real))
        logger.debug("Regularizing singular geometric mean operands by %.3e", eps)
        identity = np.eye(A.shape[0])
        A = A + eps * identity
        B = B + eps * identity

    a_half = matrix_sqrt(A)
    a_inv_half = inv_sqrt(A, pd_floor=0.0)
    inner = hermitian_part(a_inv_half @ B @ a_inv_half)
    inner_t = matrix_function(inner, lambda w: np.power(np.clip(w, 0.0, None), t))
    return hermitian_part(a_half @ inner_t @ a_half), regularized


def geometric_mean(A, B, t: float = 0.5) -> np.ndarray:
    """Weighted geometric mean; see :func:`geometric_mean_flagged`."""
    return geometric_mean_flagged(A, B, t)[0]


def geodesic(A, B, ts: Sequence[float]) -> List[np.ndarray]:
    """Points A #_t B of the geodesic joining A and B for each weight in ``ts``."""
    return [geometric_mean(A, B, t) for t in ts]


def riemannian_inner(A, H, K) -> float:
    """Riemannian metric tr(A^{-1} H A^{-1} K) at the positive definite point A."""
    _require_pd(A)
    A = hermitian_part(A)
    H = _require_hermitian(H)
    K = _require_hermitian(K)
    _require_same_shape(A, H, K)
    return float(np.trace(sla.solve(A, H) @ sla.solve(A, K)).real)


def riemannian_distance(A, B) -> float:
    """Geodesic distance ||log(A^{-1/2} B A^{-1/2})||_F between PD matrices."""
    a_inv_half = inv_sqrt(A)
    _require_pd(B)
    w = eigvalsh(hermitian_part(a_inv_half @ as_matrix(B) @ a_inv_half))
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


def polar_hermitian(S) -> Tuple[np.ndarray, np.ndarray]:
    """
    Polar decomposition S = U |S| of a Hermitian matrix.

    U = sign(S) computed in the eigenbasis with sign(0) := +1, so U is a
    Hermitian unitary commuting with S and |S|.

    Returns:
        Tuple (U, P) with P = |S|
    """
    decomposition = eigh(S)
    V = decomposition.eigenvectors
    w = decomposition.eigenvalues
    signs = np.where(w >= 0, 1.0, -1.0)
    U = (V * signs) @ V.conj().T
    P = (V * np.abs(w)) @ V.conj().T
    return U, P


def abs_matrix(S) -> np.ndarray:
    return matrix_function(S, np.abs)


def singular_values(A) -> np.ndarray:
    """Singular values in descending order."""
    return np.asarray(sla.svdvals(as_matrix(A)), dtype=float)


def schatten_norm(A, p: float) -> float:
    """
    Schatten p-norm (sum of sigma_i^p)^(1/p); ``p=np.inf`` gives the operator norm.

    Raises:
        InvalidPError: if p < 1
    """
    if not p >= 1:
        raise InvalidPError(f"Schatten index p={p} must be >= 1")
    sigma = singular_values(A)
    if np.isinf(p):
        return float(sigma[0]) if sigma.size else 0.0
    return float(np.sum(sigma**p) ** (1.0 / p))


def trace_norm(A) -> float:
    return schatten_norm(A, 1)


def frobenius_norm(A) -> float:
    return schatten_norm(A, 2)


def operator_norm(A) -> float:
    return schatten_norm(A, np.inf)


def ky_fan_norm(A, k: int) -> float:
    """Sum of the ``k`` largest singular values."""
    M = as_matrix(A)
    if not 1 <= k <= min(M.shape):
        raise InvalidKError(f"Ky Fan index k={k} outside [1, {min(M.shape)}]")
    return float(np.sum(singular_values(M)[:k]))


def is_psd(A, tol: float = PSD_TOL, hermitian_tol: float = HERMITIAN_TOL) -> bool:
    """
    True iff A is Hermitian and its minimum eigenvalue is at least
    -tol * max(1, ||A||_op).

    Hermiticity is measured against max(1, ||A||_F).
    """
    M = _require_square(A)
    if not _near_hermitian(M, hermitian_tol):
        return False
    w = np.asarray(sla.eigvalsh(hermitian_part(M)), dtype=float)
    return bool(w[0] >= _psd_floor(w, tol))


def loewner_leq(A, B, tol: float = PSD_TOL) -> bool:
    """A <= B in the Loewner order."""
    A = as_matrix(A)
    B = as_matrix(B)
    _require_same_shape(A, B)
    return is_psd(B - A, tol)


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def tensor_power(A, n: int) -> np.ndarray:
    """n-fold Kronecker power of A."""
    if n < 1:
        raise ValueError(f"Tensor power order must be >= 1, got {n}")
    return reduce(kron, [as_matrix(A)] * n)


def _check_blocks(A: np.ndarray, blocks: BlockStructure) -> np.ndarray:
    M = _require_square(A)
    if M.shape[0] != blocks.dimension:
        raise BlockMismatchError(
            f"Matrix dimension {M.shape[0]} != sum of block sizes {blocks.dimension}"
        )
    return M


def pinch_block_diagonal(A, blocks: BlockStructure) -> np.ndarray:
    """Keep the diagonal blocks of A and zero every off-diagonal block."""
    M = _check_blocks(A, blocks)
    pinched = np.zeros_like(M)
    offsets = blocks.offsets()
    for start, stop in zip(offsets[:-1], offsets[1:]):
        pinched[start:stop, start:stop] = M[start:stop, start:stop]
    return pinched


def fourier_unitaries(blocks: BlockStructure) -> List[np.ndarray]:
    """U_m = blockdiag(omega^{jm} I) for m = 0..k-1, omega = exp(2 pi i / k)."""
    k = blocks.num_blocks
    block_index = np.repeat(np.arange(k), blocks.block_sizes)
    omega = np.exp(2j * np.pi / k)
    return [np.diag(omega ** (block_index * m)) for m in range(k)]


def fourier_pinch_average(A, blocks: BlockStructure) -> np.ndarray:
    """(1/k) sum_m U_m A U_m*; equals the pinching by orthogonality of characters."""
    M = _check_blocks(A, blocks)
    unitaries = fourier_unitaries(blocks)
    return sum(U @ M @ U.conj().T for U in unitaries) / len(unitaries)


def block_matrix(blocks: Sequence[Sequence]) -> np.ndarray:
    """Assemble a k x k array of equal-size square blocks into one kn x kn matrix."""
    k = len(blocks)
    if k == 0 or any(len(row) != k for row in blocks):
        raise BlockMismatchError("Block layout must be a non-empty k x k array")
    mats = [[as_matrix(b) for b in row] for row in blocks]
    shapes = {m.shape for row in mats for m in row}
    if len(shapes) != 1:
        raise BlockMismatchError(f"Blocks have differing shapes: {sorted(shapes)}")
    (shape,) = shapes
    if shape[0] != shape[1]:
        raise BlockMismatchError(f"Blocks must be square, got {shape}")
    return np.block(mats)


def det(A) -> complex:
    """Determinant; product of eigenvalues for Hermitian input."""
    M = _require_square(A)
    if is_hermitian(M, tol=1e-12):
        return complex(np.prod(sla.eigvalsh(hermitian_part(M))))
    return complex(sla.det(M))


def matrix_to_dict(A) -> dict:
    """Serialize as {"rows", "cols", "data": [[re, im], ...]} in row-major order."""
    M = as_matrix(A)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in M.reshape(-1)],
    }


def matrix_from_dict(payload: dict) -> np.ndarray:
    """Inverse of :func:`matrix_to_dict`. Entries may be [re, im] pairs or reals."""
    rows = int(payload["rows"])
    cols = int(payload["cols"])
    data = payload["data"]
    if rows <= 0 or cols <= 0 or len(data) != rows * cols:
        raise DimensionMismatchError(
            f"Matrix payload has {len(data)} entries for shape ({rows}, {cols})"
        )
    values = np.array([complex_from_json(z) for z in data], dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        raise DimensionMismatchError("Matrix payload contains NaN or Inf")
    return values.reshape(rows, cols)


def complex_from_json(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise DimensionMismatchError(f"Complex entry must be [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value), 0.0)
