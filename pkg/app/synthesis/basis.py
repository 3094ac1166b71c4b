"""Linear estimator classes ``G(beta) = beta Y_a``.

``Y_a = [(zI - A_G)^{-1} B_G ; I]`` so that ``beta = [C_G  D_G]`` picks one
estimator with state matrices ``(A_G, B_G)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike

from app.lti.factorization import wiener_nominal
from app.lti.reduction import is_controllable
from app.lti.reduction import minimal_realization
from app.lti.systems import StateSpace
from app.lti.systems import as_matrix
from app.lti.systems import frequency_grid

from .exceptions import BasisError
from .setup import EstimationSetup

logger = logging.getLogger(__name__)

CONTROLLABILITY_TOL = 1e-8
CONTAINMENT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EstimatorBasis:
    A_G: np.ndarray
    B_G: np.ndarray

    def __post_init__(self) -> None:
        A = as_matrix(self.A_G, "A_G")
        n = A.shape[0]
        B = np.asarray(self.B_G, dtype=float)
        if A.shape != (n, n):
            msg = f"A_G must be square, got shape {A.shape}"
            raise BasisError(msg)
        if B.ndim != 2 or B.shape[0] != n:
            msg = f"B_G must have {n} rows, got shape {B.shape}"
            raise BasisError(msg)
        object.__setattr__(self, "A_G", A)
        object.__setattr__(self, "B_G", B)
        if n and np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
            msg = "A_G is not stable"
            raise BasisError(msg)
        if n and not is_controllable(A, B, tol=CONTROLLABILITY_TOL):
            msg = "(A_G, B_G) is not controllable"
            raise BasisError(msg)

    @classmethod
    def static(cls, m_v: int) -> EstimatorBasis:
        return cls(np.zeros((0, 0)), np.zeros((0, m_v)))

    @property
    def n_G(self) -> int:
        return self.A_G.shape[0]

    @property
    def m_v(self) -> int:
        return self.B_G.shape[1]

    @property
    def n_beta_cols(self) -> int:
        return self.n_G + self.m_v

    @cached_property
    def Y_a(self) -> StateSpace:
        n, m = self.n_G, self.m_v
        return StateSpace(
            self.A_G,
            self.B_G,
            np.vstack([np.eye(n), np.zeros((m, n))]),
            np.vstack([np.zeros((n, m)), np.eye(m)]),
        )

    def estimator(self, beta: ArrayLike) -> StateSpace:
        beta = as_matrix(beta, "beta")
        if beta.shape[1] != self.n_beta_cols:
            msg = f"beta must have {self.n_beta_cols} columns, got {beta.shape[1]}"
            raise BasisError(msg)
        return StateSpace(self.A_G, self.B_G, beta[:, : self.n_G], beta[:, self.n_G :])

    def fit(self, G: StateSpace, n_points: int = 256) -> tuple[np.ndarray, float]:
        """Least-squares ``beta`` with ``beta Y_a ~ G`` on a grid, and the relative residual."""
        thetas = frequency_grid(n_points)
        y = self.Y_a.freq_responses(thetas)
        g = G.freq_responses(thetas)
        lhs = y.transpose(0, 2, 1).reshape(-1, self.n_beta_cols)
        rhs = g.transpose(0, 2, 1).reshape(-1, G.n_outputs)
        stacked_lhs = np.vstack([lhs.real, lhs.imag])
        stacked_rhs = np.vstack([rhs.real, rhs.imag])
        solution, *_ = np.linalg.lstsq(stacked_lhs, stacked_rhs, rcond=None)
        beta = solution.T
        residual = np.linalg.norm(stacked_lhs @ solution - stacked_rhs)
        scale = max(np.linalg.norm(stacked_rhs), 1.0)
        return beta, float(residual / scale)


def basis_from_estimator(G: StateSpace) -> tuple[EstimatorBasis, np.ndarray]:
    """The class spanned by ``G``'s own ``(A, B)`` and the ``beta`` reproducing ``G``."""
    G.require_stable("estimator")
    reduced = G if G.is_static else minimal_realization(G)
    basis = EstimatorBasis(reduced.A, reduced.B) if reduced.n_states else EstimatorBasis.static(G.n_inputs)
    return basis, np.hstack([reduced.C, reduced.D])


def make_nominal_basis(setup: EstimationSetup) -> EstimatorBasis:
    """Class generated by the nominal Wiener estimator's minimal realization."""
    setup.require_spectra()
    G_o = wiener_nominal(setup)  # type: ignore[arg-type]
    basis, _ = basis_from_estimator(G_o)
    _, residual = basis.fit(G_o)
    if residual > CONTAINMENT_TOL:
        msg = f"nominal estimator is not reproduced by its basis (residual {residual:.2e})"
        raise BasisError(msg)
    logger.info("nominal basis: n_G=%d, m_v=%d", basis.n_G, basis.m_v)
    return basis
