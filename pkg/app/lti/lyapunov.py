"""Lyapunov and Stein equations, Gramians and H2 inner products.

All H2 quantities in the project are exact: they come from the Gramians
computed here, never from frequency quadrature.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from .exceptions import DimensionMismatchError
from .exceptions import UnstableSystemError
from .systems import STABILITY_MARGIN
from .systems import Matrix
from .systems import StateSpace

logger = logging.getLogger(__name__)


def _check_stable(A: Matrix, what: str) -> None:
    if A.size and np.max(np.abs(np.linalg.eigvals(A))) >= 1.0 - STABILITY_MARGIN:
        msg = f"{what} is not stable"
        raise UnstableSystemError(msg)


def dlyap(A: ArrayLike, Q: ArrayLike) -> Matrix:
    """Solve ``A P A^T - P + Q = 0`` for stable ``A``.

    One step of iterative refinement is applied to the scipy solution; the
    result is symmetrized when ``Q`` is symmetric.
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = A.shape[0] if A.size else 0
    if Q.shape != (n, n):
        msg = f"dlyap: A is {A.shape}, Q is {Q.shape}"
        raise DimensionMismatchError(msg)
    if n == 0:
        return np.zeros((0, 0))
    _check_stable(A, "dlyap: A")
    P = linalg.solve_discrete_lyapunov(A, Q)
    residual = A @ P @ A.T - P + Q
    P = P + linalg.solve_discrete_lyapunov(A, residual)
    if np.allclose(Q, Q.T, rtol=0.0, atol=1e-14 * max(1.0, np.linalg.norm(Q))):
        P = (P + P.T) / 2
    return P


def stein(A1: ArrayLike, A2: ArrayLike, Q: ArrayLike) -> Matrix:
    """Solve ``X = A1 X A2^T + Q`` with both ``A1`` and ``A2`` stable."""
    A1 = np.asarray(A1, dtype=float)
    A2 = np.asarray(A2, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n1 = A1.shape[0] if A1.size else 0
    n2 = A2.shape[0] if A2.size else 0
    if Q.shape != (n1, n2):
        msg = f"stein: expected Q of shape {(n1, n2)}, got {Q.shape}"
        raise DimensionMismatchError(msg)
    if n1 == 0 or n2 == 0:
        return np.zeros((n1, n2))
    _check_stable(A1, "stein: A1")
    _check_stable(A2, "stein: A2")
    # The (1,2) block of the Lyapunov solution for diag(A1, A2) decouples.
    big_a = linalg.block_diag(A1, A2)
    big_q = np.zeros((n1 + n2, n1 + n2))
    big_q[:n1, n1:] = Q
    X = linalg.solve_discrete_lyapunov(big_a, big_q)[:n1, n1:]
    residual = A1 @ X @ A2.T - X + Q
    big_q[:n1, n1:] = residual
    return X + linalg.solve_discrete_lyapunov(big_a, big_q)[:n1, n1:]


def controllability_gramian(system: StateSpace) -> Matrix:
    return dlyap(system.A, system.B @ system.B.T)


def observability_gramian(system: StateSpace) -> Matrix:
    return dlyap(system.A.T, system.C.T @ system.C)


def input_gram(system: StateSpace) -> Matrix:
    """``sum_k F_k^T F_k`` (m x m)."""
    system.require_stable()
    gram = system.D.T @ system.D
    if system.is_static:
        return gram
    return gram + system.B.T @ observability_gramian(system) @ system.B


def output_gram(system: StateSpace) -> Matrix:
    """``sum_k F_k F_k^T`` (p x p)."""
    system.require_stable()
    gram = system.D @ system.D.T
    if system.is_static:
        return gram
    return gram + system.C @ controllability_gramian(system) @ system.C.T


def cross_gram(F: StateSpace, G: StateSpace) -> Matrix:
    """``sum_k F_k^T G_k`` for systems with the same number of outputs."""
    if F.n_outputs != G.n_outputs:
        msg = f"cross_gram: {F.n_outputs} vs {G.n_outputs} outputs"
        raise DimensionMismatchError(msg)
    F.require_stable()
    G.require_stable()
    gram = F.D.T @ G.D
    if F.is_static or G.is_static:
        return gram
    Y = stein(F.A.T, G.A.T, F.C.T @ G.C)
    return gram + F.B.T @ Y @ G.B


def h2_inner(F: StateSpace, G: StateSpace) -> float:
    """``<F, G> = (2 pi)^{-1} int tr(F* G) d theta``."""
    if F.shape != G.shape:
        msg = f"h2_inner: shapes {F.shape} and {G.shape} differ"
        raise DimensionMismatchError(msg)
    return float(np.trace(cross_gram(F, G)))


def h2_norm_squared(F: StateSpace) -> float:
    if F.n_inputs <= F.n_outputs:
        return float(max(np.trace(input_gram(F)), 0.0))
    return float(max(np.trace(output_gram(F)), 0.0))


def h2_norm(F: StateSpace) -> float:
    return float(np.sqrt(h2_norm_squared(F)))
