import numpy as np
from numpy.typing import ArrayLike

from .exceptions import NotPositiveSemidefiniteError
from .systems import Matrix

PSD_CLIP = 1e-10


def symmetrize(matrix: ArrayLike) -> Matrix:
    m = np.asarray(matrix, dtype=float)
    return (m + m.T) / 2


def psd_sqrt(matrix: ArrayLike, clip: float = PSD_CLIP) -> Matrix:
    """Symmetric square root of a PSD matrix.

    Eigenvalues down to ``-clip * max(1, ||M||)`` are treated as zero; anything
    more negative raises :class:`NotPositiveSemidefiniteError`.
    """
    m = symmetrize(matrix)
    if m.size == 0:
        return m
    w, v = np.linalg.eigh(m)
    floor = -clip * max(1.0, float(np.max(np.abs(w))))
    if w[0] < floor:
        msg = f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})"
        raise NotPositiveSemidefiniteError(msg)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return symmetrize(root)


def psd_factor(matrix: ArrayLike, clip: float = PSD_CLIP) -> Matrix:
    """``U`` with ``M = U U^T`` and no more columns than the numerical rank needs."""
    m = symmetrize(matrix)
    if m.size == 0:
        return m
    w, v = np.linalg.eigh(m)
    floor = -clip * max(1.0, float(np.max(np.abs(w))))
    if w[0] < floor:
        msg = f"matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})"
        raise NotPositiveSemidefiniteError(msg)
    return v * np.sqrt(np.clip(w, 0.0, None))


def min_eigenvalue(matrix: ArrayLike) -> float:
    m = symmetrize(matrix)
    if m.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(m)[0])
