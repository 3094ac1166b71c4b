import numpy as np
import pytest

from app.lti.systems import StateSpace
from app.synthesis.basis import EstimatorBasis
from app.synthesis.criteria import CriterionKind
from app.synthesis.criteria import build_Qc
from app.synthesis.criteria import error_mse
from app.synthesis.criteria import eta_a
from app.synthesis.criteria import eta_a_gram
from app.synthesis.criteria import eta_av
from app.synthesis.criteria import eta_b
from app.synthesis.criteria import eta_fir
from app.synthesis.criteria import quadratic_cost

from .factories import EstimationSetupFactory
from .factories import StaticSetupFactory

GAIN = 0.4


@pytest.fixture
def static_setup():
    return StaticSetupFactory(gamma_y=1.2, gamma_v=0.7)


@pytest.fixture
def gain():
    return StateSpace.static([[GAIN]])


def test_eta_av_static_closed_form(static_setup, gain):
    criterion = eta_av(gain, static_setup)
    nominal = (1 - GAIN * 1.5) ** 2 * 2.0**2 + GAIN**2 * 0.5**2
    assert criterion.kind is CriterionKind.ETA_AV
    assert criterion.nominal == pytest.approx(nominal, rel=1e-10)
    assert criterion.uncertainty == pytest.approx(0.3**2 * GAIN**2 * 2.0**2, rel=1e-10)
    assert criterion.value == pytest.approx(criterion.nominal + criterion.uncertainty)


def test_eta_av_without_uncertainty_is_the_nominal_mse(gain):
    setup = EstimationSetupFactory(gamma=0.0)
    criterion = eta_av(gain, setup)
    assert criterion.uncertainty == 0
    assert criterion.nominal == pytest.approx(error_mse(gain, setup.H0, setup, setup.phi_y, setup.phi_v))


@pytest.mark.parametrize("n_taps", [1, 3, 10])
def test_eta_fir_static_closed_form(static_setup, gain, n_taps):
    criterion = eta_fir(gain, static_setup, n_taps)
    expected = 0.3**2 * n_taps / (n_taps + 2) * GAIN**2 * 2.0**2
    assert criterion.uncertainty == pytest.approx(expected, rel=1e-8)
    assert criterion.nominal == pytest.approx(eta_av(gain, static_setup).nominal, rel=1e-10)


def test_eta_fir_approaches_eta_av(gain):
    setup = EstimationSetupFactory()
    limit = eta_av(gain, setup).value
    short, long = eta_fir(gain, setup, 4).value, eta_fir(gain, setup, 200).value
    assert short < long <= limit * (1 + 1e-9)
    assert long == pytest.approx(limit, rel=1e-2)


def test_eta_a_static_closed_form(static_setup, gain):
    criterion = eta_a(gain, static_setup)
    expected = (1 - GAIN * 1.5) ** 2 * 1.2**2 + GAIN**2 * 0.7**2
    assert criterion.value == pytest.approx(expected, rel=1e-10)
    assert criterion.uncertainty == 0


def test_eta_b_reduces_to_eta_a_without_channel_radius(static_setup, gain):
    assert eta_b(gain, static_setup).value == pytest.approx(eta_a(gain, static_setup).value)


def test_eta_b_grows_with_channel_radius(static_setup, gain):
    robust = static_setup.with_radii(gamma_H=0.2)
    criterion = eta_b(gain, robust)
    # ||W_H^{-1} phi_y^a||^2 = gamma_y^2 for scalar identity weights
    assert criterion.uncertainty == pytest.approx(0.2**2 * GAIN**2 * 1.2**2, rel=1e-6)


def test_basis_gram_reproduces_mse():
    setup = EstimationSetupFactory()
    basis = EstimatorBasis(np.array([[0.5, 0.1], [0.0, -0.3]]), np.array([[1.0], [1.0]]))
    gram = build_Qc(setup, basis, setup.phi_y, setup.phi_v)
    beta = np.array([[0.3, -0.2, 0.7]])
    G = basis.estimator(beta)
    assert quadratic_cost(gram, beta) == pytest.approx(
        error_mse(G, setup.H0, setup, setup.phi_y, setup.phi_v),
        rel=1e-9,
    )


def test_eta_a_gram_reproduces_eta_a(static_setup):
    basis = EstimatorBasis(np.array([[0.4]]), np.array([[1.0]]))
    beta = np.array([[0.5, 0.3]])
    assert quadratic_cost(eta_a_gram(static_setup, basis), beta) == pytest.approx(
        eta_a(basis.estimator(beta), static_setup).value,
        rel=1e-9,
    )


def test_to_dict(static_setup, gain):
    data = eta_av(gain, static_setup).to_dict()
    assert data["kind"] == "eta_av"
    assert data["value"] == pytest.approx(data["nominal"] + data["uncertainty"])
