import numpy as np
import pytest

from app.lti.exceptions import DimensionMismatchError
from app.lti.exceptions import NonFiniteError
from app.lti.exceptions import NotInvertibleError
from app.lti.exceptions import SingularResolventError
from app.lti.systems import FIR
from app.lti.systems import SpectralFactorForm
from app.lti.systems import StateSpace
from app.lti.systems import adjoint
from app.lti.systems import frequency_grid

from .factories import FIRFactory
from .factories import StateSpaceFactory

SISO_TAPS = [1.0, -1.3963, 0.9638, -0.8713, 0.5593, -0.1389]


def test_static_gain_response():
    system = StateSpace.static([[2.5, -1.0]])
    assert np.allclose(system.freq_response(0.7), [[2.5, -1.0]])
    assert system.n_states == 0
    assert system.shape == (1, 2)


def test_fir_dc_value_is_tap_sum():
    system = FIR(SISO_TAPS).to_state_space()
    assert system.freq_response(0.0)[0, 0] == pytest.approx(sum(SISO_TAPS))


def test_response_matches_truncated_impulse_response():
    system = StateSpaceFactory(n_states=4)
    thetas = frequency_grid(64)
    taps = system.impulse_response(10_000)[:, 0, 0]
    powers = np.exp(-1j * np.outer(thetas, np.arange(taps.size)))
    expected = powers @ taps
    assert np.allclose(system.freq_responses(thetas)[:, 0, 0], expected, atol=1e-8)


def test_pole_on_unit_circle_is_rejected():
    system = StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(SingularResolventError):
        system.freq_response(0.0)


def test_incompatible_realization_is_rejected():
    with pytest.raises(DimensionMismatchError):
        StateSpace(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), [[0.0]])


def test_non_finite_entries_are_rejected():
    with pytest.raises(NonFiniteError):
        StateSpace.static([[np.nan]])


def test_arrays_are_read_only():
    system = StateSpaceFactory()
    with pytest.raises(ValueError, match="read-only"):
        system.A[0, 0] = 1.0


@pytest.mark.parametrize(("n_inputs", "n_outputs"), [(1, 1), (1, 3), (3, 1), (2, 2)])
def test_fir_realization_matches_taps(n_inputs, n_outputs):
    fir = FIRFactory(length=4, n_inputs=n_inputs, n_outputs=n_outputs)
    system = fir.to_state_space()
    thetas = frequency_grid(32)
    assert np.allclose(system.freq_responses(thetas), fir.freq_responses(thetas), atol=1e-12)
    assert system.n_states == 4 * min(n_inputs, n_outputs)


def test_fir_of_length_zero_is_static():
    assert FIR([[[1.0, 2.0]]]).to_state_space().is_static


def test_inverse_realization():
    system = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=2)
    thetas = frequency_grid(16)
    forward = system.freq_responses(thetas)
    backward = system.inverse().freq_responses(thetas)
    assert np.allclose(forward @ backward, np.eye(2), atol=1e-9)


def test_spectral_factor_form_requires_minimum_phase():
    with pytest.raises(NotInvertibleError):
        SpectralFactorForm(FIR([1.0, 2.0]).to_state_space())
    factor = SpectralFactorForm(FIR([1.0, 0.5]).to_state_space())
    density = factor.densities([0.0])[0, 0, 0]
    assert density.real == pytest.approx(2.25)


def test_constant_factor_is_cholesky():
    factor = SpectralFactorForm.constant([[4.0, 2.0], [2.0, 5.0]])
    assert np.allclose(factor.factor.D @ factor.factor.D.T, [[4.0, 2.0], [2.0, 5.0]])


def test_adjoint_evaluates_conjugate_transpose():
    system = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=1)
    thetas = frequency_grid(8)
    expected = np.conj(np.swapaxes(system.freq_responses(thetas), 1, 2))
    assert np.allclose(adjoint(system).freq_responses(thetas), expected)
    mirrored = np.swapaxes(system.freq_responses(-thetas), 1, 2)
    assert np.allclose(adjoint(system).freq_responses(thetas), mirrored)


def test_round_trip_through_dict():
    system = StateSpaceFactory(n_states=2)
    restored = StateSpace.from_dict(system.to_dict())
    assert np.array_equal(restored.A, system.A)
    fir = StateSpace.from_dict({"type": "fir", "taps": [[[1.0]], [[0.5]]]})
    assert fir.n_states == 1
