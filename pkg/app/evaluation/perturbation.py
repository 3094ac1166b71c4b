"""FIR channel perturbations and the exact quadratic MSE along them.

For an FIR perturbation ``X = sum_{k=0}^{L} X_k z^{-k}`` with coordinates
``theta = [rvec(X_0); ...; rvec(X_L)]`` the H2 norm of ``X`` is the Euclidean
norm of ``theta``, and

    J(G; H0 + X W^{-1}) = J0 - 2 l' theta + theta' Q theta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from app.lti.algebra import kron_with_factor
from app.lti.algebra import product
from app.lti.algebra import rvec
from app.lti.algebra import subtract
from app.lti.lyapunov import cross_gram
from app.lti.lyapunov import input_gram
from app.lti.systems import FIR
from app.lti.systems import StateSpace
from app.synthesis.criteria import error_mse
from app.synthesis.setup import EstimationSetup


def coordinate_bank(n_channels: int, length: int) -> StateSpace:
    """``[I, z^{-1} I, ..., z^{-L} I]``: maps tap-major coordinates to a signal."""
    width = n_channels * (length + 1)
    taps = []
    for k in range(length + 1):
        tap = np.zeros((n_channels, width))
        tap[:, k * n_channels : (k + 1) * n_channels] = np.eye(n_channels)
        taps.append(tap)
    return FIR(taps).to_state_space()


def fir_perturbation(theta: np.ndarray, m_v: int, m_y: int) -> FIR:
    taps = np.asarray(theta, dtype=float).reshape(-1, m_v, m_y)
    return FIR(taps)


@dataclass(frozen=True)
class PerturbationQuadratic:
    J0: float
    l: np.ndarray  # noqa: E741
    Q: np.ndarray

    @property
    def dim(self) -> int:
        return self.l.shape[0]

    def __call__(self, thetas: np.ndarray) -> np.ndarray:
        """``J`` at each row of ``thetas`` (or at a single vector)."""
        thetas = np.atleast_2d(thetas)
        return self.J0 - 2.0 * thetas @ self.l + np.einsum("ij,jk,ik->i", thetas, self.Q, thetas)

    def __sub__(self, other: PerturbationQuadratic) -> PerturbationQuadratic:
        return PerturbationQuadratic(self.J0 - other.J0, self.l - other.l, self.Q - other.Q)

    def to_payload(self) -> dict[str, Any]:
        return {"J0": self.J0, "l": self.l.tolist(), "Q": self.Q.tolist()}

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> PerturbationQuadratic:
        return cls(float(payload["J0"]), np.asarray(payload["l"], dtype=float), np.asarray(payload["Q"], dtype=float))


def perturbation_quadratic(G: StateSpace, setup: EstimationSetup, L: int) -> PerturbationQuadratic:
    """Exact MSE of ``G`` over FIR perturbations with ``L + 1`` taps."""
    phi_y, phi_v = setup.require_spectra()
    J0 = error_mse(G, setup.H0, setup, phi_y, phi_v)
    K = product(kron_with_factor(G, setup.phi_y1), coordinate_bank(setup.m_v * setup.m_y, L))
    nominal_error = rvec(product(subtract(setup.H_I, product(G, setup.H0)), phi_y.factor))
    Q = input_gram(K)
    l = cross_gram(K, nominal_error)[:, 0]  # noqa: E741
    return PerturbationQuadratic(J0, l, (Q + Q.T) / 2)


def sample_ball(dim: int, radius: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform samples from ``{theta: ||theta|| <= radius}``: Gaussian direction, radius ``r U^{1/dim}``."""
    count = 1 if size is None else size
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / dim)
    samples = directions * radii
    return samples[0] if size is None else samples
