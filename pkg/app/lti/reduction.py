import logging

import numpy as np
from django.conf import settings
from numpy.typing import ArrayLike
from scipy import linalg

from .linalg import psd_factor
from .lyapunov import controllability_gramian
from .lyapunov import observability_gramian
from .systems import StateSpace

logger = logging.getLogger(__name__)


def hankel_singular_values(system: StateSpace) -> np.ndarray:
    if system.is_static:
        return np.zeros(0)
    U_c = psd_factor(controllability_gramian(system))
    U_o = psd_factor(observability_gramian(system))
    return linalg.svdvals(U_o.T @ U_c)


def minimal_realization(system: StateSpace, tol: float | None = None) -> StateSpace:
    """Square-root balanced truncation keeping Hankel singular values above ``tol * max``.

    For a stable system this removes exactly the uncontrollable and
    unobservable parts (to tolerance) and returns a balanced realization.
    """
    if tol is None:
        tol = settings.LTI_MINREAL_TOL
    if system.is_static:
        return system
    system.require_stable()
    U_c = psd_factor(controllability_gramian(system))
    U_o = psd_factor(observability_gramian(system))
    Z, hsv, Vt = linalg.svd(U_o.T @ U_c)
    if hsv.size == 0 or hsv[0] <= 0.0:
        return StateSpace.static(system.D)
    keep = int(np.sum(hsv > tol * hsv[0]))
    scale = 1.0 / np.sqrt(hsv[:keep])
    T = U_c @ Vt[:keep].T * scale
    T_inv = (scale[:, None] * Z[:, :keep].T) @ U_o.T
    logger.debug("minimal_realization: %d -> %d states", system.n_states, keep)
    return StateSpace(T_inv @ system.A @ T, T_inv @ system.B, system.C @ T, system.D)


def reachable_subspace(A: ArrayLike, B: ArrayLike, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``span[B, AB, A^2 B, ...]`` by a staircase iteration."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if n == 0 or B.size == 0:
        return np.zeros((n, 0))
    basis = linalg.orth(B, rcond=tol)
    while basis.shape[1] < n:
        grown = linalg.orth(np.hstack([basis, A @ basis]), rcond=tol)
        if grown.shape[1] == basis.shape[1]:
            break
        basis = grown
    return basis


def is_controllable(A: ArrayLike, B: ArrayLike, tol: float = 1e-8) -> bool:
    n = np.asarray(A).shape[0] if np.asarray(A).size else 0
    return reachable_subspace(A, B, tol).shape[1] == n


def is_observable(A: ArrayLike, C: ArrayLike, tol: float = 1e-8) -> bool:
    return is_controllable(np.asarray(A).T, np.asarray(C).T, tol)
