"""
Demo cases that reproduce specific phenomena and print the certifying numbers.
"""

import logging
from typing import Callable, Dict, List

import numpy as np

from src.exceptions import UnknownCaseError
from src.linalg_core import (
    BlockStructure,
    fourier_pinch_average,
    min_eigenvalue,
    pinch_block_diagonal,
)
from src.quantum_model import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityState, ObservableTuple
from src.relations import (
    RelationEvaluator,
    gram_negative_example,
    gram_negative_scan,
    square_order_counterexample,
)
from src.sampling import as_rng, random_hermitian

logger = logging.getLogger(__name__)

GRID_POINTS = 64
RULE = "=" * 60


def _format_matrix(M: np.ndarray) -> List[str]:
    M = np.real_if_close(M)
    return ["  " + np.array2string(row, precision=6, suppress_small=True) for row in M]


def gram_example(theta: float = 0.0, **_) -> str:
    G, determinant = gram_negative_example(theta)
    grid = gram_negative_scan(np.linspace(0.0, 2 * np.pi, GRID_POINTS, endpoint=False))
    negative = sum(1 for _, d in grid if d < 0)
    lines = [
        f"Gram example at theta = {theta:.6g}",
        RULE,
        "G = (<H_i e_j, H_j e_i>)",
        *_format_matrix(G),
        f"det = {determinant:.6g}",
        f"min eigenvalue = {min_eigenvalue((G + G.conj().T) / 2):.6g}",
        f"negative determinant on {negative}/{len(grid)} grid points over [0, 2pi)",
        f"max determinant on grid = {max(d for _, d in grid):.6g}",
    ]
    return "\n".join(lines)


def pauli_equalities(**_) -> str:
    """Equality cases for sigma_x, sigma_y under |0><0|."""
    state = DensityState.basis(2, 0)
    pair = ObservableTuple.of(SIGMA_X, SIGMA_Y)
    evaluator = RelationEvaluator()
    lines = ["Pauli equalities: state |0><0|, observables (sigma_x, sigma_y)", RULE]
    for name in (
        "robertson_sup",
        "variance_product_bound",
        "variance_mean_bound",
        "row_sum_bound",
    ):
        report = evaluator.evaluate(name, state, pair)[0]
        lines.append(f"{name:<24} lhs = {report.lhs:.6g}  rhs = {report.rhs:.6g}")
    chain = evaluator.frobenius_chain(state, pair)
    values = ", ".join(f"{v:.6g}" for _, v in chain.values)
    lines.append(f"{'frobenius_chain':<24} [{values}]")
    return "\n".join(lines)


def square_order(seed: int = 0, **_) -> str:
    result = square_order_counterexample(2, trials=1000, seed=seed)
    lines = [f"Square order counterexample search (dim 2, seed {seed})", RULE]
    if result is None:
        lines.append("no counterexample found in 1000 trials")
        return "\n".join(lines)
    A, B = result
    gap = (A + B) @ (A + B) - (A - B) @ (A - B)
    lines += [
        "A =",
        *_format_matrix(A),
        "B =",
        *_format_matrix(B),
        f"min eigenvalue of (A+B)^2 - (A-B)^2 = {min_eigenvalue((gap + gap.conj().T) / 2):.6g}",
        f"min eigenvalue of A = {min_eigenvalue(A):.6g}, of B = {min_eigenvalue(B):.6g}",
    ]
    return "\n".join(lines)


def pinching_identity(seed: int = 0, **_) -> str:
    rng = as_rng(seed)
    blocks = BlockStructure((2, 2, 2))
    A = random_hermitian(blocks.dimension, rng)
    deviation = float(np.max(np.abs(pinch_block_diagonal(A, blocks) - fourier_pinch_average(A, blocks))))

    matrices = [random_hermitian(2, rng) for _ in range(3)]
    report = RelationEvaluator().pinching_trace_step(matrices)
    lines = [
        f"Pinching identity (blocks 2,2,2, seed {seed})",
        RULE,
        f"max |pinch(A) - Fourier average| = {deviation:.3e}",
        f"pinch(A^2) deviation from blockdiag(-sum_j [H_i,H_j]^2) = "
        f"{report.witness['pinching_deviation']:.3e}",
        f"D^(1/2) >= average of |A|: {report.witness['concavity_holds']} "
        f"(min eigenvalue {report.witness['concavity_min_eigenvalue']:.3e})",
        f"||A||_1 = {report.lhs:.6g} <= sum tr(D_i^(1/2)) = {report.rhs:.6g}",
    ]
    return "\n".join(lines)


DEMO_CASES: Dict[str, Callable[..., str]] = {
    "gram-example": gram_example,
    "pauli-equalities": pauli_equalities,
    "square-order-counterexample": square_order,
    "pinching-identity": pinching_identity,
}


def run_demo(case: str, theta: float = 0.0, seed: int = 0) -> str:
    """
    Run a demo case and return its formatted report.

    Args:
        case: One of DEMO_CASES
        theta: Angle for gram-example
        seed: Seed for the randomized cases

    Returns:
        Multi-line report text

    Raises:
        UnknownCaseError: case is not a known demo
    """
    if case not in DEMO_CASES:
        raise UnknownCaseError(
            f"Unknown demo case '{case}'; choose from {', '.join(DEMO_CASES)}"
        )
    logger.debug("Running demo %s", case)
    return DEMO_CASES[case](theta=theta, seed=seed)
