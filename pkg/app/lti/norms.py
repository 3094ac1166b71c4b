import logging

import numpy as np
from django.conf import settings
from numpy.typing import NDArray
from scipy import linalg

from .systems import StateSpace
from .systems import frequency_grid

logger = logging.getLogger(__name__)

# Generalized eigenvalues within this band of |z| = 1 are treated as crossings.
UNIT_CIRCLE_BAND = 1e-6
MAX_LEVEL_ITERATIONS = 60


def sigma_max(responses: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Largest singular value of each matrix in a ``(N, p, m)`` stack."""
    if responses.shape[-1] == 0 or responses.shape[-2] == 0:
        return np.zeros(responses.shape[0])
    return np.linalg.svd(responses, compute_uv=False)[..., 0]


def sup_singular_value(system: StateSpace, n_points: int | None = None) -> float:
    thetas = frequency_grid(n_points or settings.LTI_SUP_GRID)
    return float(np.max(sigma_max(system.freq_responses(thetas))))


def sup_hermitian_eigenvalue(responses: NDArray[np.complex128]) -> tuple[float, int]:
    """``max_k lambda_max(R_k)`` over a stack of Hermitian matrices, and its index."""
    hermitian = (responses + np.conj(np.swapaxes(responses, -1, -2))) / 2
    top = np.linalg.eigvalsh(hermitian)[..., -1]
    index = int(np.argmax(top))
    return float(top[index]), index


def _crossing_angles(system: StateSpace, gamma: float) -> NDArray[np.float64]:
    """Angles where ``gamma`` is a singular value of the response.

    They are the unit-circle generalized eigenvalues of the pencil built from
    ``gamma^2 I - F* F``.
    """
    A, B, C, D = system.A, system.B, system.C, system.D
    n = system.n_states
    R = gamma**2 * np.eye(system.n_inputs) - D.T @ D
    R_inv = np.linalg.inv(R)
    A_r = A + B @ R_inv @ D.T @ C
    Q = C.T @ (np.eye(system.n_outputs) + D @ R_inv @ D.T) @ C
    M = np.block([[A_r, B @ R_inv @ B.T], [np.zeros((n, n)), np.eye(n)]])
    N = np.block([[np.eye(n), np.zeros((n, n))], [Q, A_r.T]])
    eigenvalues = linalg.eig(M, N, right=False)
    finite = eigenvalues[np.isfinite(eigenvalues)]
    on_circle = finite[np.abs(np.abs(finite) - 1.0) < UNIT_CIRCLE_BAND]
    return np.sort(np.abs(np.angle(on_circle)))


def hinf_norm(system: StateSpace, tol: float = 1e-8) -> float:
    """``sup_theta sigma_max(F(e^{j theta}))`` to absolute accuracy ``tol``.

    Level-set iteration: a candidate level ``lo + tol`` is tested by looking for
    unit-circle crossings of the pencil; crossings raise ``lo`` by evaluating
    the response between them, no crossing brackets the norm in
    ``[lo, lo + tol)``.
    """
    system.require_stable()
    d_norm = float(np.linalg.norm(system.D, 2)) if system.D.size else 0.0
    if system.is_static:
        return d_norm
    lo = max(d_norm, sup_singular_value(system, 64))
    for iteration in range(MAX_LEVEL_ITERATIONS):
        level = lo + tol
        angles = _crossing_angles(system, level)
        if angles.size == 0:
            break
        edges = np.unique(np.concatenate([[0.0], angles, [np.pi]]))
        points = np.concatenate([edges, (edges[:-1] + edges[1:]) / 2])
        best = float(np.max(sigma_max(system.freq_responses(points))))
        logger.debug("hinf_norm level %d: lo=%.10g best=%.10g", iteration, lo, best)
        if best <= lo:
            break
        lo = best
    return lo + tol / 2
