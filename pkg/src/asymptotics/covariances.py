"""Limit covariances of normalised pair and triplet counters.

Z_{a,b} = sqrt(n)(N_{a,b}/n - p_a p_{a,b}) and the triplet analogue. Arrays
are indexed cov[a, b, c, d] and cov[a, b, c, d, e, f].
"""
import numpy as np

from ..chain import TransitionMatrix, gamma_matrices, stationary_distribution


def _chain_quantities(P: TransitionMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gamma = gamma_matrices(P).gamma
    pi = stationary_distribution(P).pi
    return pi, P.p, gamma


def pair_cov(P: TransitionMatrix) -> np.ndarray:
    pi, p, gamma = _chain_quantities(P)
    S = p.shape[0]
    I = np.eye(S)
    F = pi[:, None] * p
    out = np.einsum("ab,ac,bd->abcd", F, I, I) - np.einsum("ab,cd->abcd", F, F)
    out += np.einsum("ab,cd,a,bc->abcd", p, p, pi, gamma)
    out += np.einsum("ab,cd,c,da->abcd", p, p, pi, gamma)
    return out


def triplet_cov(P: TransitionMatrix) -> np.ndarray:
    pi, p, gamma = _chain_quantities(P)
    S = p.shape[0]
    I = np.eye(S)
    T = np.einsum("a,ab,bc->abc", pi, p, p)
    F = pi[:, None] * p

    same = np.einsum("abc,ad,be,cf->abcdef", T, I, I, I) - np.einsum("abc,def->abcdef", T, T)
    ahead = np.einsum("abc,bd,ce,ef->abcdef", T, I, I, p) - np.einsum(
        "abc,de,ef->abcdef", T, F, p
    )
    behind = np.einsum("def,ea,fb,bc->abcdef", T, I, I, p) - np.einsum(
        "def,ab,bc->abcdef", T, F, p
    )
    later = np.einsum("abc,cd,de,ef->abcdef", T, gamma, p, p)
    earlier = np.einsum("def,fa,ab,bc->abcdef", T, gamma, p, p)
    return same + ahead + behind + later + earlier


def marginal_triplet_cov(P: TransitionMatrix) -> np.ndarray:
    """cov(Z_{a,.,c}, Z_{d,.,f}) from its own closed form, indexed [a, c, d, f]."""
    pi, p, gamma = _chain_quantities(P)
    S = p.shape[0]
    I = np.eye(S)
    p2 = p @ p
    F2 = pi[:, None] * p2
    out = np.einsum("ac,ad,cf->acdf", F2, I, I) - np.einsum("ac,df->acdf", F2, F2)
    out += np.einsum("a,ad,dc,cf->acdf", pi, p, p, p)
    out += np.einsum("d,da,af,fc->acdf", pi, p, p, p)
    out -= 2.0 * np.einsum("ac,df->acdf", F2, F2)
    out += np.einsum("ac,cd,df->acdf", F2, gamma, p2)
    out += np.einsum("df,fa,ac->acdf", F2, gamma, p2)
    return out
