"""Average performance criteria and the Gramians behind their convex forms.

Each criterion is the limit of a uniform average over balls of FIR
perturbations (channel) or FIR signals, and splits into a nominal term plus
a nonnegative uncertainty term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np

from app.lti.algebra import hcat
from app.lti.algebra import identity_kron
from app.lti.algebra import kron_with_factor
from app.lti.algebra import product
from app.lti.algebra import rvec
from app.lti.algebra import scale
from app.lti.algebra import subtract
from app.lti.algebra import transpose
from app.lti.algebra import vcat
from app.lti.factorization import spectral_factor
from app.lti.linalg import symmetrize
from app.lti.lyapunov import h2_norm_squared
from app.lti.lyapunov import output_gram
from app.lti.systems import SpectralFactorForm
from app.lti.systems import StateSpace

from .basis import EstimatorBasis
from .setup import EstimationSetup

Factor = SpectralFactorForm | StateSpace


class CriterionKind(StrEnum):
    ETA_AV = "eta_av"
    ETA_A = "eta_a"
    ETA_B = "eta_b"
    ETA_FIR = "eta_fir"


@dataclass(frozen=True)
class AverageCriterion:
    kind: CriterionKind
    nominal: float
    uncertainty: float

    @property
    def value(self) -> float:
        return self.nominal + self.uncertainty

    def to_dict(self) -> dict[str, float | str]:
        return {
            "kind": str(self.kind),
            "value": self.value,
            "nominal": self.nominal,
            "uncertainty": self.uncertainty,
        }


def _as_system(phi: Factor) -> StateSpace:
    return phi.factor if isinstance(phi, SpectralFactorForm) else phi


def error_mse(G: StateSpace, H: StateSpace, setup: EstimationSetup, phi_y: Factor, phi_v: Factor) -> float:
    """``||(H_I - G H) phi_y||^2 + ||G phi_v||^2``."""
    signal = product(subtract(setup.H_I, product(G, H)), _as_system(phi_y))
    noise = product(G, _as_system(phi_v))
    return h2_norm_squared(hcat(signal, noise))


def average_signal_factors(setup: EstimationSetup) -> tuple[StateSpace, StateSpace]:
    """``phi_y^a = gamma_y / sqrt(m_y) W_y^{-1}`` and ``phi_v^a = gamma_v / sqrt(m_v) W_v^{-1}``."""
    return (
        scale(setup.W_y_inv, setup.gamma_y / math.sqrt(setup.m_y)),
        scale(setup.W_v_inv, setup.gamma_v / math.sqrt(setup.m_v)),
    )


def channel_uncertainty_factor(setup: EstimationSetup) -> StateSpace:
    """Scalar spectral factor of ``tr{[W_H^{-1} phi_y^a]* [W_H^{-1} phi_y^a]}``."""
    phi_y_a, _ = average_signal_factors(setup)
    row = transpose(rvec(product(setup.W_H_inv, phi_y_a)))
    return spectral_factor([(row, None)]).factor


def eta_av(G: StateSpace, setup: EstimationSetup) -> AverageCriterion:
    phi_y, phi_v = setup.require_spectra()
    nominal = error_mse(G, setup.H0, setup, phi_y, phi_v)
    uncertainty = 0.0
    if setup.gamma > 0:
        K = kron_with_factor(G, setup.phi_y1)
        uncertainty = setup.gamma**2 / (setup.m_v * setup.m_y) * h2_norm_squared(K)
    return AverageCriterion(CriterionKind.ETA_AV, nominal, uncertainty)


def eta_a(G: StateSpace, setup: EstimationSetup) -> AverageCriterion:
    phi_y_a, phi_v_a = average_signal_factors(setup)
    return AverageCriterion(CriterionKind.ETA_A, error_mse(G, setup.H0, setup, phi_y_a, phi_v_a), 0.0)


def eta_b(G: StateSpace, setup: EstimationSetup) -> AverageCriterion:
    nominal = eta_a(G, setup).value
    uncertainty = 0.0
    if setup.gamma_H > 0 and setup.gamma_y > 0:
        weighted = product(G, identity_kron(setup.m_v, channel_uncertainty_factor(setup)))
        uncertainty = setup.gamma_H**2 / setup.m_v * h2_norm_squared(weighted)
    return AverageCriterion(CriterionKind.ETA_B, nominal, uncertainty)


def eta_fir(G: StateSpace, setup: EstimationSetup, n_taps: int) -> AverageCriterion:
    """Uniform average of ``J(G; H0 + X W^{-1})`` over FIR ``X`` with ``n_taps`` taps and ``||X||_2 <= gamma``."""
    from app.evaluation.perturbation import perturbation_quadratic

    quadratic = perturbation_quadratic(G, setup, n_taps - 1)
    n = quadratic.dim
    uncertainty = setup.gamma**2 / (n + 2) * float(np.trace(quadratic.Q))
    return AverageCriterion(CriterionKind.ETA_FIR, quadratic.J0, uncertainty)


# Gramians of the basis form: J(G(beta)) = tr([I, -beta] Q [I, -beta]')


def build_Qc(setup: EstimationSetup, basis: EstimatorBasis, phi_y: Factor, phi_v: Factor) -> np.ndarray:
    phi_y, phi_v = _as_system(phi_y), _as_system(phi_v)
    Y_a = basis.Y_a
    stacked = vcat(
        hcat(product(setup.H_I, phi_y), StateSpace.zeros(setup.m_e, phi_v.n_inputs)),
        hcat(product(Y_a, setup.H0, phi_y), product(Y_a, phi_v)),
    )
    return symmetrize(output_gram(stacked))


def build_QGc(basis: EstimatorBasis, phi: Factor) -> np.ndarray:
    """``Q`` with ``||G(beta) (x) phi'||^2 = tr((beta (x) I) Q (beta (x) I)')``."""
    return symmetrize(output_gram(kron_with_factor(basis.Y_a, _as_system(phi))))


def eta_a_gram(setup: EstimationSetup, basis: EstimatorBasis) -> np.ndarray:
    phi_y_a, phi_v_a = average_signal_factors(setup)
    return build_Qc(setup, basis, phi_y_a, phi_v_a)


def eta_b_gram(setup: EstimationSetup, basis: EstimatorBasis) -> np.ndarray:
    """``Gamma_eta^b = Q_c(phi^a) + diag(0, gamma_H^2 / m_v Q_GW)``."""
    gram = eta_a_gram(setup, basis)
    if setup.gamma_H > 0 and setup.gamma_y > 0:
        weighted = product(basis.Y_a, identity_kron(setup.m_v, channel_uncertainty_factor(setup)))
        m_e = setup.m_e
        gram[m_e:, m_e:] += setup.gamma_H**2 / setup.m_v * symmetrize(output_gram(weighted))
    return gram


def quadratic_cost(gram: np.ndarray, beta: np.ndarray) -> float:
    """``tr([I, -beta] gram [I, -beta]')``."""
    beta = np.atleast_2d(beta)
    selector = np.hstack([np.eye(beta.shape[0]), -beta])
    return float(np.trace(selector @ gram @ selector.T))
