"""
Density-matrix states, observable tuples and the moment matrices
(Gram matrix M, covariance M + M^T, commutator matrix M - M^T) they define.
"""

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from src.exceptions import (
    DimensionMismatchError,
    InvalidStateError,
    NotHermitianError,
    UncertaintyError,
)
from src.linalg_core import (
    HERMITIAN_TOL,
    as_matrix,
    hermitian_deviation,
    hermitian_part,
    is_psd,
)

TRACE_TOL = 1e-10
CENTER_TOL = 1e-12
SYMMETRY_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _frozen(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=np.complex128, copy=True)
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix. Inputs within HERMITIAN_TOL of Hermitian are symmetrized."""

    matrix: np.ndarray

    def __post_init__(self):
        M = as_matrix(self.matrix)
        if M.shape[0] != M.shape[1]:
            raise DimensionMismatchError(f"Observable of shape {M.shape} is not square")
        deviation = hermitian_deviation(M)
        if deviation > HERMITIAN_TOL:
            raise NotHermitianError(
                f"Observable deviates from Hermitian by {deviation:.3e}"
            )
        object.__setattr__(self, "matrix", _frozen(hermitian_part(M)))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityState:
    """PSD unit-trace matrix rho defining the state phi(x) = tr(rho x)."""

    rho: np.ndarray

    def __post_init__(self):
        R = as_matrix(self.rho)
        if R.shape[0] != R.shape[1]:
            raise InvalidStateError(f"Density matrix of shape {R.shape} is not square")
        if hermitian_deviation(R) > HERMITIAN_TOL:
            raise InvalidStateError("Density matrix is not Hermitian")
        R = hermitian_part(R)
        trace = np.trace(R).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"Density matrix trace {trace:.12f} != 1")
        if not is_psd(R):
            raise InvalidStateError("Density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", _frozen(R))

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "DensityState":
        """Rank-one state |psi><psi| for a (not necessarily normalized) vector."""
        psi = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidStateError("Pure state vector is zero")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityState":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def basis(cls, dim: int, k: int = 0) -> "DensityState":
        vector = np.zeros(dim, dtype=np.complex128)
        vector[k] = 1.0
        return cls.pure(vector)


@dataclass(frozen=True)
class ObservableTuple:
    """Ordered, nonempty list of observables of a common dimension."""

    observables: Tuple[Observable, ...]

    def __post_init__(self):
        items = tuple(
            o if isinstance(o, Observable) else Observable(o) for o in self.observables
        )
        if not items:
            raise DimensionMismatchError("Observable tuple must be nonempty")
        dims = {o.dimension for o in items}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Observables have differing dimensions {dims}")
        object.__setattr__(self, "observables", items)

    @classmethod
    def of(cls, *matrices) -> "ObservableTuple":
        return cls(tuple(Observable(m) for m in matrices))

    @property
    def dimension(self) -> int:
        return self.observables[0].dimension

    @property
    def matrices(self) -> List[np.ndarray]:
        return [o.matrix for o in self.observables]

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self) -> Iterator[Observable]:
        return iter(self.observables)


@dataclass(frozen=True)
class MomentMatrices:
    """
    Moment matrices of a centered tuple under a state.

    Attributes:
        gram: M_ij = phi(x_i x_j) / 2, Hermitian PSD
        covariance: M + M^T = 2 Re(M), real symmetric PSD
        commutator: M - M^T = 2i Im(M) = (phi[x_i, x_j] / 2)
        centered: True when the input tuple had to be centered first
    """

    gram: np.ndarray
    covariance: np.ndarray
    commutator: np.ndarray
    centered: bool

    @property
    def size(self) -> int:
        return self.gram.shape[0]


def _check_dims(state: DensityState, dim: int):
    if state.dimension != dim:
        raise DimensionMismatchError(
            f"State dimension {state.dimension} != observable dimension {dim}"
        )


def expectation(state: DensityState, x) -> complex:
    """phi(x) = tr(rho x)."""
    X = as_matrix(x)
    _check_dims(state, X.shape[0])
    if X.shape[0] != X.shape[1]:
        raise DimensionMismatchError(f"Operand of shape {X.shape} is not square")
    return complex(np.einsum("ij,ji->", state.rho, X))


def center(state: DensityState, observables: ObservableTuple) -> ObservableTuple:
    """Replace each x_j by x_j - phi(x_j) I."""
    _check_dims(state, observables.dimension)
    identity = np.eye(observables.dimension)
    shifted = [
        x - expectation(state, x).real * identity for x in observables.matrices
    ]
    return ObservableTuple.of(*shifted)


def is_centered(
    state: DensityState, observables: ObservableTuple, tol: float = CENTER_TOL
) -> bool:
    return all(abs(expectation(state, x)) <= tol for x in observables.matrices)


def commutator(x, y) -> np.ndarray:
    X, Y = as_matrix(x), as_matrix(y)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"Shapes {X.shape} and {Y.shape} differ")
    return X @ Y - Y @ X


def anticommutator(x, y) -> np.ndarray:
    X, Y = as_matrix(x), as_matrix(y)
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"Shapes {X.shape} and {Y.shape} differ")
    return X @ Y + Y @ X


def moment_matrices(state: DensityState, observables: ObservableTuple) -> MomentMatrices:
    """
    Gram, covariance and commutator matrices of a tuple under a state.

    Uncentered tuples are centered first and the result records it.

    Raises:
        DimensionMismatchError: state and observables differ in dimension
        UncertaintyError: covariance has a non-negligible imaginary part
    """
    _check_dims(state, observables.dimension)
    was_centered = is_centered(state, observables)
    if not was_centered:
        observables = center(state, observables)

    stack = np.stack(observables.matrices)
    # phi(x_i x_j) = tr(rho x_i x_j)
    gram = 0.5 * np.einsum("ab,ibc,jca->ij", state.rho, stack, stack)
    gram = hermitian_part(gram)

    covariance = gram + gram.T
    scale = max(1.0, float(np.linalg.norm(covariance)))
    if np.max(np.abs(covariance.imag), initial=0.0) > SYMMETRY_TOL * scale:
        raise UncertaintyError("Covariance matrix has a non-negligible imaginary part")
    covariance = covariance.real.copy()
    commutator_matrix = gram - gram.T
    # M - M^T has purely imaginary entries
    commutator_matrix = 1j * commutator_matrix.imag

    for mat in (gram, covariance, commutator_matrix):
        mat.setflags(write=False)
    return MomentMatrices(
        gram=gram,
        covariance=covariance,
        commutator=commutator_matrix,
        centered=not was_centered,
    )


def variances(state: DensityState, observables: ObservableTuple) -> np.ndarray:
    """sigma^2(x_j) = phi(x_j^2) of the centered observables."""
    _check_dims(state, observables.dimension)
    if not is_centered(state, observables):
        observables = center(state, observables)
    values = [expectation(state, x @ x).real for x in observables.matrices]
    return np.clip(np.array(values, dtype=float), 0.0, None)


def standard_deviations(state: DensityState, observables: ObservableTuple) -> np.ndarray:
    return np.sqrt(variances(state, observables))


def conjugate(
    state: DensityState, observables: ObservableTuple, unitary
) -> Tuple[DensityState, ObservableTuple]:
    """Apply x -> U x U* to the state and every observable."""
    U = as_matrix(unitary)
    _check_dims(state, U.shape[0])
    Uh = U.conj().T
    new_state = DensityState(U @ state.rho @ Uh)
    new_observables = ObservableTuple.of(*(U @ x @ Uh for x in observables.matrices))
    return new_state, new_observables
