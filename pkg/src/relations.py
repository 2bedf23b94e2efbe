"""
Evaluators for uncertainty relations and the matrix inequalities behind them.

Each evaluator computes both sides of one inequality and returns a
BoundReport (or ChainReport for monotone chains) with a tolerance verdict.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.exceptions import (
    DimensionMismatchError,
    NotHermitianError,
    NotPSDError,
    UnknownRelationError,
)
from src.linalg_core import (
    BlockStructure,
    abs_matrix,
    as_matrix,
    block_matrix,
    det,
    fourier_pinch_average,
    geometric_mean_flagged,
    is_hermitian,
    is_psd,
    ky_fan_norm,
    loewner_leq,
    matrix_sqrt,
    matrix_to_dict,
    min_eigenvalue,
    operator_norm,
    pinch_block_diagonal,
    polar_hermitian,
    schatten_norm,
    tensor_power,
    trace_norm,
)
from src.quantum_model import (
    DensityState,
    ObservableTuple,
    anticommutator,
    center,
    commutator,
    moment_matrices,
    variances,
)
from src.sampling import SeedLike, as_rng, random_psd

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEGENERATE_TOL = 1e-12
SCHATTEN_INDICES = (1, 2, 3, np.inf)

# Relations evaluated on a (state, observable tuple) instance
STATE_RELATIONS = (
    "robertson_sup",
    "schrodinger_heisenberg",
    "norm_bound",
    "frobenius_chain",
    "hadamard_commutator_bound",
    "variance_product_bound",
    "variance_mean_bound",
    "row_sum_bound",
)
# Relations evaluated on a pair of PSD matrices
PAIR_RELATIONS = (
    "det_sum_difference",
    "geometric_mean_majorization",
    "geometric_arithmetic_mean_order",
    "tensor_power_majorization",
    "diagonal_product_bound",
)
# Relations evaluated on the bare Hermitian matrices of the tuple
BLOCK_RELATIONS = (
    "block_commutator_trace_bound",
    "two_observable_trace_bound",
    "pinching_trace_step",
    "trace_state_refinement",
)
RELATION_IDS = STATE_RELATIONS + PAIR_RELATIONS + BLOCK_RELATIONS


def _verdict(lhs: float, rhs: float, tol: float) -> bool:
    return bool(lhs <= rhs + tol * max(1.0, abs(rhs)))


@dataclass(frozen=True)
class BoundReport:
    """
    Both sides of one inequality lhs <= rhs and the tolerance verdict
    lhs <= rhs + tol * max(1, |rhs|).
    """

    relation_id: str
    lhs: float
    rhs: float
    tol: float
    satisfied: bool
    witness: Dict[str, Any] = field(default_factory=dict)
    degenerate: bool = False

    @classmethod
    def evaluate(
        cls,
        relation_id: str,
        lhs: float,
        rhs: float,
        tol: float = DEFAULT_TOL,
        witness: Optional[Dict[str, Any]] = None,
        degenerate: bool = False,
    ) -> "BoundReport":
        lhs, rhs = float(lhs), float(rhs)
        satisfied = True if degenerate else _verdict(lhs, rhs, tol)
        return cls(relation_id, lhs, rhs, tol, satisfied, witness or {}, degenerate)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def tightness(self) -> float:
        """lhs / rhs; 1 means the inequality is saturated."""
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs <= 0 else float("inf")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "satisfied": self.satisfied,
            "tol": self.tol,
            "degenerate": self.degenerate,
            "witness": _jsonable(self.witness),
        }


@dataclass(frozen=True)
class ChainReport:
    """
    Ordered named values that must be nondecreasing within tolerance.

    With ``equal_tail`` the last two values must also agree within
    tol * max(1, |last|).
    """

    relation_id: str
    values: Tuple[Tuple[str, float], ...]
    tol: float
    satisfied: bool
    equal_tail: bool = False

    @classmethod
    def evaluate(
        cls,
        relation_id: str,
        values: Sequence[Tuple[str, float]],
        tol: float = DEFAULT_TOL,
        equal_tail: bool = False,
    ) -> "ChainReport":
        values = tuple((name, float(v)) for name, v in values)
        numbers = [v for _, v in values]
        satisfied = all(_verdict(a, b, tol) for a, b in zip(numbers, numbers[1:]))
        if equal_tail and len(numbers) > 1:
            last, previous = numbers[-1], numbers[-2]
            satisfied = satisfied and abs(last - previous) <= tol * max(1.0, abs(last))
        return cls(relation_id, values, tol, satisfied, equal_tail)

    @property
    def tail_deviation(self) -> float:
        """|last - previous|; zero for chains of fewer than two values."""
        if len(self.values) < 2:
            return 0.0
        return abs(self.values[-1][1] - self.values[-2][1])

    @property
    def lhs(self) -> float:
        return self.values[0][1]

    @property
    def rhs(self) -> float:
        return self.values[-1][1]

    @property
    def margin(self) -> float:
        numbers = [v for _, v in self.values]
        return min(b - a for a, b in zip(numbers, numbers[1:]))

    @property
    def tightness(self) -> float:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs <= 0 else float("inf")

    def value(self, name: str) -> float:
        return dict(self.values)[name]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "relation": self.relation_id,
            "values": [[name, v] for name, v in self.values],
            "margin": self.margin,
            "satisfied": self.satisfied,
            "tol": self.tol,
            "equal_tail": self.equal_tail,
            "tail_deviation": self.tail_deviation,
        }


Report = Union[BoundReport, ChainReport]


def _jsonable(value):
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return matrix_to_dict(value)
        return [float(v) for v in np.real_if_close(value)]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _require_psd_pair(A, B) -> Tuple[np.ndarray, np.ndarray]:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"Shapes {A.shape} and {B.shape} differ")
    for name, M in (("A", A), ("B", B)):
        if not is_psd(M):
            raise NotPSDError(f"{name} is not positive semidefinite")
    return A, B


def _geometric_mean_of(values: np.ndarray, power: float) -> float:
    """(prod values)^power for nonnegative values, computed stably."""
    values = np.clip(np.asarray(values, dtype=float), 0.0, None)
    if np.any(values == 0):
        return 0.0
    return float(np.exp(power * np.sum(np.log(values))))


def _polar_conjugate(A: np.ndarray, B: np.ndarray):
    """X = A + B, the polar unitary U of A - B, |A - B| and Y = U X U*."""
    X = A + B
    U, P = polar_hermitian(A - B)
    Y = U @ X @ U.conj().T
    return X, U, P, Y


def _psd_gap_report(
    relation_id: str, gap: np.ndarray, scale_matrix: np.ndarray, tol: float, witness
) -> BoundReport:
    # lhs is the negated minimum eigenvalue of the gap relative to the scale
    scale = max(1.0, operator_norm(scale_matrix))
    lowest = min_eigenvalue((gap + gap.conj().T) / 2)
    witness = dict(witness, gap_min_eigenvalue=lowest, scale=scale)
    return BoundReport.evaluate(relation_id, -lowest / scale, 0.0, tol, witness)


class RelationEvaluator:
    """Evaluates uncertainty relations and their supporting matrix inequalities."""

    def __init__(self, tol: float = DEFAULT_TOL):
        """
        Args:
            tol: Verdict tolerance, lhs <= rhs + tol * max(1, |rhs|)
        """
        self.tol = tol

    # Matrix pair inequalities

    def det_sum_difference(self, A, B) -> BoundReport:
        """det(A - B)^2 <= det(A + B)^2 for PSD A, B."""
        A, B = _require_psd_pair(A, B)
        det_difference = det(A - B).real
        det_sum = det(A + B).real
        return BoundReport.evaluate(
            "det_sum_difference",
            det_difference**2,
            det_sum**2,
            self.tol,
            {"det_difference": det_difference, "det_sum": det_sum},
        )

    def geometric_mean_majorization(self, A, B) -> BoundReport:
        """
        |A - B| <= (A + B) # U(A + B)U* with U the polar unitary of A - B.

        lhs is minus the smallest eigenvalue of the gap, scaled by
        max(1, ||A + B||), and rhs is 0.
        """
        A, B = _require_psd_pair(A, B)
        X, U, P, Y = _polar_conjugate(A, B)
        mean, regularized = geometric_mean_flagged(X, Y)
        block = block_matrix([[X, P], [P, Y]])
        witness = {
            "unitary": U,
            "regularized": regularized,
            "block_min_eigenvalue": min_eigenvalue(block),
        }
        return _psd_gap_report(
            "geometric_mean_majorization", mean - P, X, self.tol, witness
        )

    def geometric_arithmetic_mean_order(self, A, B) -> BoundReport:
        """X # Y <= (X + Y) / 2 for X = A + B and Y = U X U*."""
        A, B = _require_psd_pair(A, B)
        X, U, _, Y = _polar_conjugate(A, B)
        mean, regularized = geometric_mean_flagged(X, Y)
        return _psd_gap_report(
            "geometric_arithmetic_mean_order",
            (X + Y) / 2 - mean,
            X,
            self.tol,
            {"regularized": regularized},
        )

    def tensor_power_majorization(self, A, B, n: int = 2) -> BoundReport:
        """Tensor powers preserve the geometric mean bound: n-fold Kronecker version."""
        A, B = _require_psd_pair(A, B)
        X, _, P, Y = _polar_conjugate(A, B)
        big_x = tensor_power(X, n)
        mean, regularized = geometric_mean_flagged(big_x, tensor_power(Y, n))
        return _psd_gap_report(
            "tensor_power_majorization",
            mean - tensor_power(P, n),
            big_x,
            self.tol,
            {"order": n, "regularized": regularized},
        )

    def diagonal_product_bound(self, A, B) -> BoundReport:
        """
        [prod_j <|A-B| e_j, e_j>]^{2/n} <= (tr A + tr B)/n * [prod_j <(A+B) e_j, e_j>]^{1/n}
        """
        A, B = _require_psd_pair(A, B)
        n = A.shape[0]
        abs_diagonal = np.diag(abs_matrix(A - B)).real
        sum_diagonal = np.diag(A + B).real
        lhs = _geometric_mean_of(abs_diagonal, 2.0 / n)
        rhs = (np.trace(A).real + np.trace(B).real) / n * _geometric_mean_of(
            sum_diagonal, 1.0 / n
        )
        return BoundReport.evaluate(
            "diagonal_product_bound",
            lhs,
            rhs,
            self.tol,
            {"abs_difference_diagonal": abs_diagonal, "sum_diagonal": sum_diagonal},
        )

    # State and observable inequalities

    def robertson_sup(self, state: DensityState, observables: ObservableTuple) -> BoundReport:
        """det(phi[x_i, x_j] / 2)^2 <= det(Cov)^2, i.e. det_sum_difference(M, M^T)."""
        moments = moment_matrices(state, observables)
        inner = self.det_sum_difference(moments.gram, moments.gram.T)
        return BoundReport.evaluate(
            "robertson_sup",
            inner.lhs,
            inner.rhs,
            self.tol,
            {
                "det_commutator": inner.witness["det_difference"],
                "det_covariance": inner.witness["det_sum"],
                "odd": len(observables) % 2 == 1,
            },
        )

    def schrodinger_heisenberg(self, state: DensityState, x, y) -> BoundReport:
        """|phi[x, y]|^2 / 4 <= phi(x^2) phi(y^2) - (Re phi(yx))^2."""
        pair = center(state, ObservableTuple.of(x, y))
        moments = moment_matrices(state, pair)
        commutator_entry = 2 * moments.commutator[0, 1]
        sigma_sq = np.diag(moments.covariance)
        # Re phi(yx) = Cov_{12}
        correlation = moments.covariance[1, 0]
        lhs = abs(commutator_entry) ** 2 / 4
        rhs = sigma_sq[0] * sigma_sq[1] - correlation**2
        return BoundReport.evaluate(
            "schrodinger_heisenberg",
            lhs,
            rhs,
            self.tol,
            {"commutator_expectation": commutator_entry, "correlation": correlation},
        )

    def norm_bound(
        self,
        state: DensityState,
        observables: ObservableTuple,
        families: Sequence[str] = ("ky_fan", "schatten"),
    ) -> List[BoundReport]:
        """
        |||(phi[x_i, x_j] / 2)||| <= |||Cov||| for unitarily invariant norms.

        The Ky Fan family k = 1..n certifies every unitarily invariant norm;
        Schatten norms are reported alongside.
        """
        moments = moment_matrices(state, observables)
        C, cov = moments.commutator, moments.covariance
        norms = []
        if "ky_fan" in families:
            for k in range(1, moments.size + 1):
                norms.append((f"ky_fan_{k}", lambda M, k=k: ky_fan_norm(M, k)))
        if "schatten" in families:
            for p in SCHATTEN_INDICES:
                label = "inf" if np.isinf(p) else str(p)
                norms.append((f"schatten_{label}", lambda M, p=p: schatten_norm(M, p)))
        return [
            BoundReport.evaluate(
                "norm_bound", norm(C), norm(cov), self.tol, {"norm": name}
            )
            for name, norm in norms
        ]

    def frobenius_chain(
        self, state: DensityState, observables: ObservableTuple
    ) -> ChainReport:
        moments = moment_matrices(state, observables)
        expectations = 2 * moments.commutator
        upper = np.triu_indices(moments.size, k=1)
        sigma_sq = variances(state, observables)
        return ChainReport.evaluate(
            "frobenius_chain",
            [
                ("commutator_sum", 0.5 * np.sum(np.abs(expectations[upper]) ** 2)),
                ("covariance_frobenius_sq", np.linalg.norm(moments.covariance) ** 2),
                ("covariance_trace_sq", np.trace(moments.covariance) ** 2),
                ("variance_sum_sq", np.sum(sigma_sq) ** 2),
            ],
            self.tol,
            equal_tail=True,
        )

    def hadamard_commutator_bound(
        self, state: DensityState, observables: ObservableTuple
    ) -> BoundReport:
        """det|M - M^T| <= prod_j <|M - M^T| e_j, e_j>."""
        moments = moment_matrices(state, observables)
        absolute = abs_matrix(moments.commutator)
        return BoundReport.evaluate(
            "hadamard_commutator_bound",
            abs(det(absolute).real),
            np.prod(np.clip(np.diag(absolute).real, 0.0, None)),
            self.tol,
        )

    def _variance_data(self, state: DensityState, observables: ObservableTuple):
        if len(observables) < 2:
            raise DimensionMismatchError("At least two observables are required")
        moments = moment_matrices(state, observables)
        sigma_sq = np.diag(moments.covariance).copy()
        scale = max(1.0, float(np.sum(sigma_sq)))
        degenerate = bool(np.min(sigma_sq) <= DEGENERATE_TOL * scale)
        # |(phi[x_i, x_j])| = 2 |M - M^T|
        abs_diagonal = 2 * np.diag(abs_matrix(moments.commutator)).real
        return moments, np.clip(sigma_sq, 0.0, None), abs_diagonal, degenerate

    def variance_product_bound(
        self, state: DensityState, observables: ObservableTuple
    ) -> BoundReport:
        """
        (1/4) prod_k <|(phi[x_i,x_j])| e_k, e_k>^{2/n}
            <= (sum sigma^2 / n) (prod sigma^2)^{1/n}
        """
        moments, sigma_sq, abs_diagonal, degenerate = self._variance_data(
            state, observables
        )
        n = moments.size
        lhs = 0.25 * _geometric_mean_of(abs_diagonal, 2.0 / n)
        rhs = np.sum(sigma_sq) / n * _geometric_mean_of(sigma_sq, 1.0 / n)
        pair = self.diagonal_product_bound(moments.gram, moments.gram.T)
        return BoundReport.evaluate(
            "variance_product_bound",
            lhs,
            rhs,
            self.tol,
            {
                "pair_lhs": pair.lhs,
                "pair_rhs": pair.rhs,
                "consistency_deviation": max(
                    abs(pair.lhs - lhs), abs(pair.rhs - rhs)
                ),
            },
            degenerate=degenerate,
        )

    def variance_mean_bound(
        self, state: DensityState, observables: ObservableTuple
    ) -> BoundReport:
        """(1/2) prod_k <|(phi[x_i,x_j])| e_k, e_k>^{1/n} <= sum sigma^2 / n"""
        moments, sigma_sq, abs_diagonal, degenerate = self._variance_data(
            state, observables
        )
        n = moments.size
        return BoundReport.evaluate(
            "variance_mean_bound",
            0.5 * _geometric_mean_of(abs_diagonal, 1.0 / n),
            np.sum(sigma_sq) / n,
            self.tol,
            degenerate=degenerate,
        )

    def row_sum_bound(
        self, state: DensityState, observables: ObservableTuple
    ) -> BoundReport:
        """
        (1/4) prod_k [sum_{i != k} |phi[x_i, x_k]|^2]^{1/n}
            <= ||Cov|| (sum sigma^2 / n)^{1/2} (prod sigma)^{1/n}

        ||Cov|| is the operator norm.
        """
        moments, sigma_sq, _, degenerate = self._variance_data(state, observables)
        n = moments.size
        expectations = 2 * moments.commutator
        row_sums = np.sum(np.abs(expectations) ** 2, axis=0)
        lhs = 0.25 * _geometric_mean_of(row_sums, 1.0 / n)
        rhs = (
            operator_norm(moments.covariance)
            * np.sqrt(np.sum(sigma_sq) / n)
            * _geometric_mean_of(np.sqrt(sigma_sq), 1.0 / n)
        )
        return BoundReport.evaluate(
            "row_sum_bound",
            lhs,
            rhs,
            self.tol,
            {"covariance_norm": "operator"},
            degenerate=degenerate,
        )

    # Block commutator inequalities

    @staticmethod
    def _hermitian_list(matrices: Sequence) -> List[np.ndarray]:
        mats = [as_matrix(H) for H in matrices]
        if len(mats) < 2:
            raise DimensionMismatchError("At least two Hermitian matrices are required")
        if len({M.shape for M in mats}) != 1:
            raise DimensionMismatchError("Matrices have differing dimensions")
        for M in mats:
            if not is_hermitian(M):
                raise NotHermitianError("Block inequalities need Hermitian matrices")
        return mats

    @staticmethod
    def _commutator_block(mats: List[np.ndarray]) -> np.ndarray:
        A = block_matrix([[commutator(Hi, Hj) for Hj in mats] for Hi in mats])
        if not is_hermitian(A):
            raise NotHermitianError("Block commutator matrix is not Hermitian")
        return A

    def block_commutator_trace_bound(self, matrices: Sequence) -> BoundReport:
        """||([H_i, H_j])||_1 <= (k - 1) tr({H_i, H_j}) = 2(k - 1) sum tr H_i^2."""
        mats = self._hermitian_list(matrices)
        k = len(mats)
        A = self._commutator_block(mats)
        anti = block_matrix([[anticommutator(Hi, Hj) for Hj in mats] for Hi in mats])
        return BoundReport.evaluate(
            "block_commutator_trace_bound",
            trace_norm(A),
            (k - 1) * np.trace(anti).real,
            self.tol,
            {"squared_trace_sum": float(sum(np.trace(H @ H).real for H in mats))},
        )

    def two_observable_trace_bound(self, H1, H2) -> ChainReport:
        H1, H2 = self._hermitian_list([H1, H2])
        tr1 = np.trace(H1 @ H1).real
        tr2 = np.trace(H2 @ H2).real
        return ChainReport.evaluate(
            "two_observable_trace_bound",
            [
                ("commutator_trace_norm", 2 * trace_norm(commutator(H1, H2))),
                ("product_trace_norms", 2 * (trace_norm(H1 @ H2) + trace_norm(H2 @ H1))),
                ("cauchy_schwarz", 4 * np.sqrt(tr1 * tr2)),
                ("squared_trace_sum", 2 * (tr1 + tr2)),
            ],
            self.tol,
        )

    def pinching_trace_step(self, matrices: Sequence) -> BoundReport:
        """
        ||A||_1 <= sum_i tr(-sum_j [H_i, H_j]^2)^{1/2} for A = ([H_i, H_j]).

        Also checks that pinching A^2 gives blockdiag(-sum_j [H_i, H_j]^2) and
        that D^{1/2} dominates the Fourier average of |A|.
        """
        mats = self._hermitian_list(matrices)
        n = mats[0].shape[0]
        blocks = BlockStructure.uniform(len(mats), n)
        A = self._commutator_block(mats)
        D = pinch_block_diagonal(A @ A, blocks)
        expected = np.zeros_like(D)
        for i, Hi in enumerate(mats):
            expected[i * n:(i + 1) * n, i * n:(i + 1) * n] = -sum(
                commutator(Hi, Hj) @ commutator(Hi, Hj) for Hj in mats
            )
        root = matrix_sqrt(D)
        averaged_abs = fourier_pinch_average(abs_matrix(A), blocks)
        concavity_gap = root - averaged_abs
        pinching_deviation = float(np.max(np.abs(D - expected)))
        pinching_exact = pinching_deviation <= self.tol * max(1.0, float(np.max(np.abs(D))))
        concavity_holds = loewner_leq(averaged_abs, root, self.tol)
        report = BoundReport.evaluate(
            "pinching_trace_step",
            trace_norm(A),
            np.trace(root).real,
            self.tol,
            {
                "pinching_deviation": pinching_deviation,
                "pinching_exact": pinching_exact,
                "concavity_min_eigenvalue": min_eigenvalue(
                    (concavity_gap + concavity_gap.conj().T) / 2
                ),
                "concavity_holds": concavity_holds,
            },
        )
        return replace(
            report, satisfied=report.satisfied and pinching_exact and concavity_holds
        )

    def trace_state_refinement(self, matrices: Sequence) -> ChainReport:
        """
        Under the normalized trace state the trace-norm commutator bound has a
        vanishing left side, while the block commutator trace norm does not.
        """
        mats = self._hermitian_list(matrices)
        state = DensityState.maximally_mixed(mats[0].shape[0])
        moments = moment_matrices(state, ObservableTuple.of(*mats))
        return ChainReport.evaluate(
            "trace_state_refinement",
            [
                ("trace_state_commutator_norm", trace_norm(moments.commutator)),
                ("block_commutator_norm", trace_norm(self._commutator_block(mats))),
            ],
            self.tol,
        )

    # Dispatch

    def evaluate(
        self,
        relation_id: str,
        state: Optional[DensityState] = None,
        observables: Optional[ObservableTuple] = None,
        pair: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> List[Report]:
        """
        Evaluate one relation by id on whichever inputs it consumes.

        Returns:
            List of reports; empty if the relation does not apply (for
            example two-observable relations on a single observable)
        """
        if relation_id not in RELATION_IDS:
            raise UnknownRelationError(f"Unknown relation '{relation_id}'")

        if relation_id in PAIR_RELATIONS:
            if pair is None:
                return []
            A, B = pair
            if relation_id == "tensor_power_majorization":
                return [self.tensor_power_majorization(A, B)]
            return [getattr(self, relation_id)(A, B)]

        if observables is None:
            return []
        n = len(observables)
        if relation_id in BLOCK_RELATIONS:
            if n < 2:
                return []
            if relation_id == "two_observable_trace_bound":
                return [self.two_observable_trace_bound(*observables.matrices[:2])]
            return [getattr(self, relation_id)(observables.matrices)]

        if state is None:
            return []
        if relation_id == "norm_bound":
            return self.norm_bound(state, observables)
        if relation_id == "schrodinger_heisenberg":
            if n < 2:
                return []
            x, y = observables.matrices[:2]
            return [self.schrodinger_heisenberg(state, x, y)]
        if relation_id in ("variance_product_bound", "variance_mean_bound", "row_sum_bound"):
            if n < 2:
                return []
        return [getattr(self, relation_id)(state, observables)]


def square_order_counterexample(
    dim: int,
    trials: int = 1000,
    seed: SeedLike = None,
    threshold: float = 1e-6,
    commutator_floor: float = 0.1,
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Search for PSD A, B with (A - B)^2 <= (A + B)^2 failing.

    Wishart pairs are sampled and pairs that nearly commute
    (||AB - BA||_F < commutator_floor ||A||_F ||B||_F) are skipped.

    Returns:
        (A, B) with min eigenvalue of (A+B)^2 - (A-B)^2 below -threshold,
        or None when no witness was found
    """
    if dim < 2:
        return None
    rng = as_rng(seed)
    for trial in range(trials):
        A = random_psd(dim, rng)
        B = random_psd(dim, rng)
        floor = commutator_floor * np.linalg.norm(A) * np.linalg.norm(B)
        if np.linalg.norm(A @ B - B @ A) < floor:
            continue
        gap = (A + B) @ (A + B) - (A - B) @ (A - B)
        lowest = min_eigenvalue((gap + gap.conj().T) / 2)
        if lowest < -threshold and not is_psd(gap):
            logger.info(
                "Square order counterexample after %d trials, min eigenvalue %.3e",
                trial + 1,
                lowest,
            )
            return A, B
    logger.info("No square order counterexample in %d trials", trials)
    return None


def gram_negative_example(theta: float) -> Tuple[np.ndarray, float]:
    """
    The 2 x 2 matrix (<H_i e_j, H_j e_i>) for the theta-parametrized pair
    H_1, H_2, together with its (negative) determinant.
    """
    s, c = np.sin(theta), np.cos(theta)
    H = [
        np.array([[s / 2, c], [c, s]], dtype=np.complex128),
        np.array([[c, s], [s, c / 2]], dtype=np.complex128),
    ]
    e = np.eye(2, dtype=np.complex128)
    G = np.empty((2, 2), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            # <u, v> = sum u_k conj(v_k)
            G[i, j] = np.vdot(H[j] @ e[i], H[i] @ e[j])
    return G, float(np.linalg.det(G).real)


def gram_negative_scan(thetas: Sequence[float]) -> List[Tuple[float, float]]:
    """(theta, det) for each grid point."""
    return [(float(t), gram_negative_example(t)[1]) for t in thetas]
