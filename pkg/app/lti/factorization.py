"""Spectral factorization and the nominal (causal Wiener) estimator."""

import logging
from collections.abc import Sequence
from typing import Protocol

import numpy as np
from django.conf import settings
from numpy.typing import ArrayLike
from scipy import linalg

from .algebra import causal_part_product
from .algebra import hcat
from .algebra import product
from .exceptions import DimensionMismatchError
from .exceptions import NonCoerciveSpectrumError
from .exceptions import RiccatiError
from .linalg import psd_sqrt
from .reduction import minimal_realization
from .systems import SpectralFactorForm
from .systems import StateSpace
from .systems import frequency_grid

logger = logging.getLogger(__name__)

COERCIVITY_MARGIN = 1e-8
FACTOR_RESIDUAL_TOL = 1e-7
RICCATI_RESIDUAL_TOL = 1e-10

Weight = SpectralFactorForm | StateSpace | ArrayLike | None
Term = tuple[StateSpace, Weight]


def _weight_factor(weight: Weight, size: int) -> StateSpace:
    """A causal ``phi`` with ``phi phi*`` equal to the term's inner density."""
    if weight is None:
        return StateSpace.identity(size)
    if isinstance(weight, SpectralFactorForm):
        return weight.factor
    if isinstance(weight, StateSpace):
        return weight
    density = np.atleast_2d(np.asarray(weight, dtype=float))
    return StateSpace.static(psd_sqrt(density))


def density_realization(terms: Sequence[Term]) -> StateSpace:
    """``T`` with ``sum_i F_i Gamma_i F_i* = T T*``."""
    blocks = []
    for system, weight in terms:
        phi = _weight_factor(weight, system.n_inputs)
        if phi.n_outputs != system.n_inputs:
            msg = f"density term: weight has {phi.n_outputs} rows, system {system.n_inputs} inputs"
            raise DimensionMismatchError(msg)
        blocks.append(product(system, phi))
    return hcat(*blocks)


def _factor_residual(psi: StateSpace, T: StateSpace, R0: np.ndarray, n_points: int) -> float:
    thetas = frequency_grid(n_points)
    psi_f = psi.freq_responses(thetas)
    t_f = T.freq_responses(thetas)
    gamma = t_f @ np.conj(np.swapaxes(t_f, -1, -2)) + R0
    product_f = psi_f @ np.conj(np.swapaxes(psi_f, -1, -2))
    scale = max(float(np.max(np.linalg.norm(gamma, axis=(1, 2)))), 1.0)
    return float(np.max(np.linalg.norm(product_f - gamma, axis=(1, 2)))) / scale


def spectral_factor(
    terms: Sequence[Term],
    r0: ArrayLike | None = None,
    n_points: int | None = None,
) -> SpectralFactorForm:
    """Factor ``Gamma = sum_i F_i Gamma_i F_i* + R0`` as ``psi psi*``.

    ``psi`` is causal with a causal inverse and a lower-triangular feedthrough
    with positive diagonal. The density is first checked for coercivity on the
    validation grid; the factor comes from the stabilizing solution of the
    filtering Riccati equation of the stacked realization ``T`` with
    ``T T* + R0 = Gamma``.
    """
    n_points = n_points or settings.LTI_VALIDATION_GRID
    T = density_realization(terms)
    p = T.n_outputs
    R0 = np.zeros((p, p)) if r0 is None else np.atleast_2d(np.asarray(r0, dtype=float))
    T.require_stable("density term")

    thetas = frequency_grid(n_points)
    t_f = T.freq_responses(thetas)
    gamma = t_f @ np.conj(np.swapaxes(t_f, -1, -2)) + R0
    gamma = (gamma + np.conj(np.swapaxes(gamma, -1, -2))) / 2
    lowest = float(np.min(np.linalg.eigvalsh(gamma)[:, 0]))
    scale = max(float(np.max(np.linalg.norm(gamma, 2, axis=(1, 2)))), 1.0)
    if lowest <= COERCIVITY_MARGIN * scale:
        msg = f"density is not coercive on the unit circle (min eigenvalue {lowest:.3e})"
        raise NonCoerciveSpectrumError(msg)

    R = T.D @ T.D.T + R0
    if T.is_static:
        return SpectralFactorForm(StateSpace.static(np.linalg.cholesky((R + R.T) / 2)))

    A, B, C = T.A, T.B, T.C
    S = B @ T.D.T
    try:
        P = linalg.solve_discrete_are(A.T, C.T, B @ B.T, R, s=S)
    except (ValueError, np.linalg.LinAlgError) as exc:
        msg = f"filtering Riccati equation failed: {exc}"
        raise RiccatiError(msg) from exc
    P = (P + P.T) / 2
    R_e = C @ P @ C.T + R
    gain = (A @ P @ C.T + S) @ np.linalg.inv(R_e)
    residual = A @ P @ A.T - P + B @ B.T - gain @ R_e @ gain.T
    relative = np.linalg.norm(residual) / max(1.0, np.linalg.norm(P))
    if relative > RICCATI_RESIDUAL_TOL:
        msg = f"Riccati residual {relative:.3e} exceeds {RICCATI_RESIDUAL_TOL:.0e}"
        raise RiccatiError(msg)
    L = np.linalg.cholesky((R_e + R_e.T) / 2)
    psi = StateSpace(A, gain @ L, C, L)

    mismatch = _factor_residual(psi, T, R0, n_points)
    logger.debug("spectral_factor: order %d, residual %.3e", psi.n_states, mismatch)
    if mismatch > FACTOR_RESIDUAL_TOL:
        msg = f"spectral factor residual {mismatch:.3e} exceeds {FACTOR_RESIDUAL_TOL:.0e}"
        raise RiccatiError(msg)
    return SpectralFactorForm(minimal_realization(psi))


class WienerProblem(Protocol):
    H_I: StateSpace
    H0: StateSpace
    phi_y: SpectralFactorForm
    phi_v: SpectralFactorForm


def wiener_nominal(setup: WienerProblem) -> StateSpace:
    """Causal Wiener estimator ``G_o = {H_I Gamma_y H0* psi_o^{-*}}_ca psi_o^{-1}``.

    ``psi_o`` factors ``Gamma_v + H0 Gamma_y H0*``.
    """
    psi_o = spectral_factor(
        [(setup.H0, setup.phi_y), (StateSpace.identity(setup.H0.n_outputs), setup.phi_v)],
    )
    psi_inv = psi_o.inverse()
    target = product(setup.H_I, setup.phi_y.factor)
    whitened = product(psi_inv, setup.H0, setup.phi_y.factor)
    G_o = product(causal_part_product(target, whitened), psi_inv)
    return minimal_realization(G_o)
