import numpy as np
import pytest

from app.lti.lyapunov import h2_norm_squared
from app.lti.simulation import simulate
from app.lti.simulation import white_noise_mse
from app.lti.systems import FIR
from app.lti.systems import StateSpace

from .factories import StateSpaceFactory


def test_fir_simulation_is_convolution():
    taps = [1.0, -0.5, 0.25]
    u = np.random.default_rng(1).standard_normal(50)
    y = simulate(FIR(taps).to_state_space(), u)[:, 0]
    assert np.allclose(y, np.convolve(u, taps)[:50])


def test_static_simulation():
    y = simulate(StateSpace.static([[2.0, 1.0]]), np.ones((4, 2)))
    assert np.allclose(y, 3.0)


@pytest.mark.parametrize("seed", range(5))
def test_white_noise_mse_approaches_h2_norm(seed):
    error_system = StateSpaceFactory(seed=200 + seed, n_states=3, n_inputs=2, n_outputs=2, radius=0.7)
    rng = np.random.default_rng(seed)
    sampled = white_noise_mse(error_system, 100_000, rng)
    assert sampled == pytest.approx(h2_norm_squared(error_system), rel=0.05)
