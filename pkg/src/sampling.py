"""
Random instance generation with reproducible per-trial streams.
"""

from enum import Enum
from typing import Optional, Union

import numpy as np

from src.quantum_model import DensityState, ObservableTuple

SeedLike = Union[int, np.random.Generator, None]


class StateKind(str, Enum):
    PURE = "pure"
    MIXED_FULL_RANK = "mixed-full-rank"
    MIXED_RANDOM_RANK = "mixed-random-rank"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """
    Independent PCG64 stream for one trial, derived from the campaign seed
    and the trial index only, so results do not depend on scheduling.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """Standard complex normal samples, E|z|^2 = 1."""
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def random_hermitian(dim: int, rng: SeedLike = None) -> np.ndarray:
    """(G + G*) / 2 with G entrywise standard complex Gaussian."""
    G = complex_gaussian((dim, dim), as_rng(rng))
    return (G + G.conj().T) / 2


def random_psd(dim: int, rng: SeedLike = None, rank: Optional[int] = None) -> np.ndarray:
    """Wishart-type PSD matrix G G* with G of shape (dim, rank)."""
    G = complex_gaussian((dim, rank or dim), as_rng(rng))
    return G @ G.conj().T


def random_pd(dim: int, rng: SeedLike = None, shift: float = 0.5) -> np.ndarray:
    """Wishart matrix plus ``shift`` * I, keeping the condition number moderate."""
    return random_psd(dim, rng) + shift * np.eye(dim)


def random_unitary(dim: int, rng: SeedLike = None) -> np.ndarray:
    """Haar-distributed unitary via QR with the phases of R's diagonal removed."""
    Q, R = np.linalg.qr(complex_gaussian((dim, dim), as_rng(rng)))
    phases = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * phases


def random_density(
    dim: int, rng: SeedLike = None, kind: Union[StateKind, str] = StateKind.MIXED_FULL_RANK
) -> DensityState:
    """
    Random density matrix.

    Args:
        dim: Hilbert space dimension
        rng: Generator or seed
        kind: ``pure`` (normalized Gaussian vector), ``mixed-full-rank``
            (G G* / tr with square G) or ``mixed-random-rank`` (rank drawn
            uniformly from 1..dim)

    Returns:
        DensityState
    """
    rng = as_rng(rng)
    kind = StateKind(kind)
    if kind is StateKind.PURE:
        return DensityState.pure(complex_gaussian(dim, rng))
    rank = dim if kind is StateKind.MIXED_FULL_RANK else int(rng.integers(1, dim + 1))
    rho = random_psd(dim, rng, rank=rank)
    return DensityState(rho / np.trace(rho).real)


def random_observables(dim: int, count: int, rng: SeedLike = None) -> ObservableTuple:
    rng = as_rng(rng)
    return ObservableTuple.of(*(random_hermitian(dim, rng) for _ in range(count)))
