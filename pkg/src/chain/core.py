"""Stationary distributions, k-step transitions and the gamma series."""
import logging

import numpy as np
import scipy.linalg

from ..utils.errors import InvalidSpec, NotAperiodic, NotIrreducible, Singular
from .types import GammaMatrices, StationaryDistribution, TransitionMatrix

logger = logging.getLogger(__name__)

SERIES_TOL = 1e-13
SERIES_MAX_TERMS = 1_000_000


def _require_irreducible(P: TransitionMatrix) -> None:
    if not P.is_irreducible:
        raise NotIrreducible(
            "Positive-entry digraph of the transition matrix is not strongly connected"
        )


def stationary_distribution(P: TransitionMatrix) -> StationaryDistribution:
    """Solve pi P = pi, sum(pi) = 1 as a square linear system."""
    _require_irreducible(P)
    S = P.size
    # (P^T - I) has rank S-1; its last equation is replaced by the normalisation row.
    system = P.p.T - np.eye(S)
    system[-1, :] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    try:
        pi = scipy.linalg.solve(system, rhs)
    except scipy.linalg.LinAlgError as e:
        raise Singular(f"Stationary system is singular: {e}") from e
    if not np.all(np.isfinite(pi)):
        raise Singular("Stationary solve returned non-finite values")
    pi = np.clip(pi, 0.0, None)
    return StationaryDistribution(pi / pi.sum())


def k_step(P: TransitionMatrix, k: int) -> TransitionMatrix:
    """P^k by repeated squaring; P^0 is the identity."""
    if k < 0:
        raise InvalidSpec(f"k must be non-negative, got {k}")
    return TransitionMatrix(P.states, np.linalg.matrix_power(P.p, k))


def fundamental_matrix(P: TransitionMatrix, pi: np.ndarray | None = None) -> np.ndarray:
    """Z = (I - P + 1 pi^T)^-1; exists for every irreducible chain."""
    if pi is None:
        pi = stationary_distribution(P).pi
    S = P.size
    A = np.eye(S) - P.p + np.outer(np.ones(S), pi)
    try:
        return scipy.linalg.solve(A, np.eye(S))
    except scipy.linalg.LinAlgError as e:
        raise Singular(f"Fundamental matrix solve failed: {e}") from e


def gamma_matrices(P: TransitionMatrix, allow_periodic: bool = False) -> GammaMatrices:
    """gamma = sum_k (P^k - 1 pi^T) via the fundamental matrix.

    Periodic chains are rejected unless `allow_periodic` is set, in which case
    the Cesaro value of the series is returned.
    """
    _require_irreducible(P)
    if not allow_periodic and not P.is_aperiodic:
        raise NotAperiodic(
            f"Second eigenvalue modulus {P.second_eigenvalue_modulus:.3g} is 1; chain is periodic"
        )
    pi = stationary_distribution(P).pi
    S = P.size
    limit = np.outer(np.ones(S), pi)
    gamma = fundamental_matrix(P, pi) - limit
    return GammaMatrices(gamma=gamma, gamma_bar=gamma - (np.eye(S) - limit))


def gamma_series(
    P: TransitionMatrix, tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS
) -> GammaMatrices:
    """Truncated evaluation of the defining series; a test oracle for gamma_matrices."""
    _require_irreducible(P)
    if not P.is_aperiodic:
        raise NotAperiodic("Series diverges for periodic chains")
    pi = stationary_distribution(P).pi
    S = P.size
    limit = np.outer(np.ones(S), pi)
    power = np.eye(S)
    gamma = np.zeros((S, S))
    for k in range(max_terms):
        term = power - limit
        gamma += term
        if k > 0 and np.abs(term).max() < tol:
            break
        power = power @ P.p
    else:
        logger.warning(f"gamma series stopped after {max_terms} terms")
    return GammaMatrices(gamma=gamma, gamma_bar=gamma - (np.eye(S) - limit))
