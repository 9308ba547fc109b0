"""Ingredient matrices of the ML, QL and PL limit distributions."""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..chain import gamma_matrices
from ..models import ParametricModel

logger = logging.getLogger(__name__)

CROSS_CHECK_TOL = 1e-8


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class MLIngredients:
    J: np.ndarray
    J_a: np.ndarray


@dataclass(frozen=True)
class QLIngredients:
    """H, G, L and kappa plus the order-k sandwich pieces J_k and K_k.

    kappa is built from gamma and G from gamma_bar.
    """

    J: np.ndarray
    H: np.ndarray
    G: np.ndarray
    L: np.ndarray
    kappa: np.ndarray
    k: int
    J_k: np.ndarray
    K_k: np.ndarray


@dataclass(frozen=True)
class PLIngredients:
    J: np.ndarray
    w: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    J_0: np.ndarray
    K_0: np.ndarray


def info_J(model: ParametricModel, theta: Sequence[float] | np.ndarray) -> MLIngredients:
    """J = sum_a p_a sum_b p_{a,b} u_{a,b} u_{a,b}^T."""
    cells = model.log_derivatives(theta)
    P, u = cells.P.p, cells.u
    pi = model.stationary(theta)
    J_a = np.einsum("ab,abj,abk->ajk", P, u, u)
    J = np.einsum("a,ajk->jk", pi, J_a)

    # Same matrix written through dP: sum_b dp dp^T / p.
    dP = model.transition_jacobian(theta)
    safe = np.where(P > 0.0, P, 1.0)
    alternative = np.einsum("a,abj,abk->jk", pi, dP / safe[..., None], dP)
    scale = max(1.0, float(np.abs(J).max()))
    if np.abs(alternative - J).max() > CROSS_CHECK_TOL * scale:
        logger.warning(
            f"{model.name}: information cross-check differs by {np.abs(alternative - J).max():.3g}"
        )
    return MLIngredients(J=_sym(J), J_a=J_a)


def ql_ingredients(
    model: ParametricModel, theta: Sequence[float] | np.ndarray, k: int = 2
) -> QLIngredients:
    theta = model.check(theta)
    cells = model.log_derivatives(theta)
    P, u = cells.P.p, cells.u
    pi = model.stationary(theta)
    v = model.stationary_scores(theta).v
    g = gamma_matrices(cells.P, allow_periodic=model.periodic)
    J = info_J(model, theta).J

    H = np.einsum("a,aj,ak->jk", pi, v, v)
    G = np.einsum("a,ab,aj,bk->jk", pi, g.gamma_bar, v, v)
    kappa = g.gamma @ v
    L = np.einsum("a,ab,abj,bk->jk", pi, P, u, kappa)

    J_k = (k - 1) * J + H
    K_k = (k - 1) ** 2 * J + H + G + G.T + (k - 1) * (L + L.T)
    return QLIngredients(J=J, H=_sym(H), G=G, L=L, kappa=kappa, k=k, J_k=_sym(J_k), K_k=_sym(K_k))


def two_step_scores(model: ParametricModel, theta: Sequence[float] | np.ndarray) -> np.ndarray:
    """w_{a,c} = d log p^{(2)}_{a,c} / d theta, zero where p^{(2)} vanishes."""
    P = model.transition(theta).p
    dP = model.transition_jacobian(theta)
    P2 = P @ P
    dP2 = np.einsum("abj,bc->acj", dP, P) + np.einsum("ab,bcj->acj", P, dP)
    safe = np.where(P2 > 0.0, P2, 1.0)
    w = dP2 / safe[..., None]
    w[P2 <= 0.0] = 0.0
    return w


def pl_quadruple_literal(
    pi: np.ndarray, P: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """Q by the literal sum over (a, c, d, f)."""
    S, p = P.shape[0], w.shape[-1]
    Q = np.zeros((p, p))
    for a in range(S):
        for c in range(S):
            for d in range(S):
                for f in range(S):
                    weight = pi[a] * P[a, d] * P[d, c] * P[c, f]
                    if weight != 0.0:
                        Q += weight * np.outer(w[a, c], w[d, f])
    return Q


def pl_ingredients(model: ParametricModel, theta: Sequence[float] | np.ndarray) -> PLIngredients:
    theta = model.check(theta)
    cells = model.log_derivatives(theta)
    P, u = cells.P.p, cells.u
    pi = model.stationary(theta)
    P2 = P @ P
    w = two_step_scores(model, theta)
    J = info_J(model, theta).J

    M = np.einsum("a,ac,acj,ack->jk", pi, P2, w, w)
    # Sum over d first: sum_d p_{a,d} p_{d,c} w_{d,f} for each (a, c, f).
    inner = np.einsum("ad,dc,dfk->acfk", P, P, w)
    Q = np.einsum("a,cf,acj,acfk->jk", pi, P, w, inner)
    pair_sum = u[:, :, None, :] + u[None, :, :, :]
    R = np.einsum("a,ab,bc,abcj,ack->jk", pi, P, P, pair_sum, w)

    J_0 = 2.0 * J - M
    K_0 = 4.0 * J - 3.0 * M + Q + Q.T
    return PLIngredients(J=J, w=w, M=_sym(M), Q=Q, R=R, J_0=_sym(J_0), K_0=_sym(K_0))
