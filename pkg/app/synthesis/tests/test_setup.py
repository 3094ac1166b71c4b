import numpy as np
import pytest

from app.lti.systems import SpectralFactorForm
from app.lti.systems import StateSpace
from app.synthesis.exceptions import InvalidSetupError

from .factories import EstimationSetupFactory
from .factories import SignalBallSetupFactory


def test_dimensions():
    setup = EstimationSetupFactory()
    assert (setup.m_y, setup.m_v, setup.m_e) == (1, 1, 1)
    assert setup.has_signal_spectra


def test_rejects_unstable_channel():
    with pytest.raises(InvalidSetupError, match="H0 is not stable"):
        EstimationSetupFactory(H0=StateSpace([[1.1]], [[1.0]], [[1.0]], [[0.0]]))


@pytest.mark.parametrize("name", ["gamma", "gamma_y", "gamma_v", "gamma_H"])
@pytest.mark.parametrize("value", [-0.1, float("inf"), float("nan")])
def test_rejects_bad_radius(name, value):
    with pytest.raises(InvalidSetupError, match=name):
        EstimationSetupFactory(**{name: value})


def test_rejects_wrongly_sized_spectrum():
    with pytest.raises(InvalidSetupError, match="phi_y"):
        EstimationSetupFactory(phi_y=SpectralFactorForm.white(1.0, size=2))


def test_rejects_reference_with_other_inputs():
    with pytest.raises(InvalidSetupError, match="inputs"):
        EstimationSetupFactory(H_I=StateSpace.identity(2))


def test_rejects_weight_without_stable_inverse():
    # zero at z = 2
    W = StateSpace([[0.0]], [[1.0]], [[-2.0]], [[1.0]])
    with pytest.raises(InvalidSetupError, match="W"):
        EstimationSetupFactory(W=W)


def test_signal_ball_setup_has_no_spectra():
    setup = SignalBallSetupFactory()
    assert not setup.has_signal_spectra
    with pytest.raises(InvalidSetupError, match="phi_y and phi_v"):
        setup.require_spectra()


def test_missing_weights_default_to_identity():
    setup = EstimationSetupFactory()
    for weight in (setup.W_inv, setup.W_y_inv, setup.W_v_inv, setup.W_H_inv):
        assert weight.is_static
        assert np.allclose(weight.D, np.eye(1))


def test_nominal_drops_channel_radii_only():
    setup = EstimationSetupFactory(gamma=0.4, gamma_y=2.0, gamma_H=0.1)
    nominal = setup.nominal()
    assert nominal.gamma == 0
    assert nominal.gamma_H == 0
    assert nominal.gamma_y == 2.0
    assert nominal.H0 is setup.H0


def test_phi_y1_applies_inverse_weight():
    W = StateSpace.static([[2.0]])
    setup = EstimationSetupFactory(W=W, sigma_y=3.0)
    assert setup.phi_y1.D[0, 0] == pytest.approx(1.5)
