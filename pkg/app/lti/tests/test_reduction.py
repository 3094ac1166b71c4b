import numpy as np
import pytest
from scipy import linalg

from app.lti.algebra import hcat
from app.lti.algebra import parallel
from app.lti.algebra import scale
from app.lti.reduction import hankel_singular_values
from app.lti.reduction import is_controllable
from app.lti.reduction import is_observable
from app.lti.reduction import minimal_realization
from app.lti.systems import StateSpace
from app.lti.systems import frequency_grid

from .factories import FIRFactory
from .factories import StateSpaceFactory

GRID = frequency_grid(256)


def pad_with_unreachable_states(system: StateSpace, extra: int) -> StateSpace:
    rng = np.random.default_rng(extra)
    A_extra = 0.5 * np.eye(extra)
    return StateSpace(
        linalg.block_diag(system.A, A_extra),
        np.vstack([system.B, np.zeros((extra, system.n_inputs))]),
        np.hstack([system.C, rng.standard_normal((system.n_outputs, extra))]),
        system.D,
    )


def test_padded_system_recovers_original_order():
    system = StateSpaceFactory(n_states=3, n_inputs=2, n_outputs=2)
    padded = pad_with_unreachable_states(system, 4)
    reduced = minimal_realization(padded)
    assert reduced.n_states == 3
    assert np.allclose(reduced.freq_responses(GRID), system.freq_responses(GRID), atol=1e-8)


def test_cancelling_copies_reduce():
    system = StateSpaceFactory(n_states=2)
    doubled = parallel(system, scale(system, -1.0), system)
    reduced = minimal_realization(doubled)
    assert reduced.n_states == 2
    assert np.allclose(reduced.freq_responses(GRID), system.freq_responses(GRID), atol=1e-8)


def test_fir_order_bound():
    fir = FIRFactory(length=5, n_inputs=2, n_outputs=3)
    reduced = minimal_realization(hcat(fir.to_state_space(), fir.to_state_space()))
    assert reduced.n_states <= 5 * 4


def test_zero_dynamics_become_static():
    system = StateSpace(0.3 * np.eye(2), np.zeros((2, 1)), np.ones((1, 2)), [[1.5]])
    reduced = minimal_realization(system)
    assert reduced.is_static
    assert reduced.D[0, 0] == pytest.approx(1.5)


def test_balanced_realization_is_controllable_and_observable():
    system = StateSpaceFactory(n_states=4, n_inputs=1, n_outputs=2)
    reduced = minimal_realization(pad_with_unreachable_states(system, 2))
    assert is_controllable(reduced.A, reduced.B)
    assert is_observable(reduced.A, reduced.C)
    hsv = hankel_singular_values(reduced)
    assert hsv[-1] > 1e-8 * hsv[0]


def test_staircase_detects_uncontrollable_pair():
    A = np.diag([0.5, 0.2])
    assert not is_controllable(A, np.array([[1.0], [0.0]]))
    assert is_controllable(A, np.array([[1.0], [1.0]]))
