import numpy as np
import pytest

from app.lti.algebra import series
from app.lti.exceptions import UnstableSystemError
from app.lti.lyapunov import cross_gram
from app.lti.lyapunov import dlyap
from app.lti.lyapunov import h2_inner
from app.lti.lyapunov import h2_norm
from app.lti.lyapunov import stein
from app.lti.systems import FIR
from app.lti.systems import StateSpace
from app.lti.systems import frequency_grid

from .factories import FIRFactory
from .factories import StateSpaceFactory
from .factories import random_stable_matrix


def test_dlyap_with_zero_dynamics_returns_q():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.allclose(dlyap(np.zeros((2, 2)), Q), Q)


def test_dlyap_scalar_closed_form():
    assert dlyap([[0.5]], [[1.0]])[0, 0] == pytest.approx(4 / 3, rel=1e-14)


def test_dlyap_matches_series_and_has_small_residual():
    rng = np.random.default_rng(7)
    A = random_stable_matrix(rng, 5, 0.8)
    M = rng.standard_normal((5, 5))
    Q = M @ M.T
    P = dlyap(A, Q)
    residual = np.linalg.norm(A @ P @ A.T - P + Q)
    assert residual <= 1e-10 * (1 + np.linalg.norm(Q))
    assert np.allclose(P, P.T)
    series_sum = np.zeros((5, 5))
    power = np.eye(5)
    for _ in range(500):
        series_sum += power @ Q @ power.T
        power = A @ power
    assert np.allclose(P, series_sum, atol=1e-8)


def test_dlyap_rejects_unstable():
    with pytest.raises(UnstableSystemError):
        dlyap([[1.2]], [[1.0]])


def test_stein_solves_rectangular_equation():
    rng = np.random.default_rng(3)
    A1 = random_stable_matrix(rng, 3, 0.7)
    A2 = random_stable_matrix(rng, 2, 0.6)
    Q = rng.standard_normal((3, 2))
    X = stein(A1, A2, Q)
    assert np.allclose(X, A1 @ X @ A2.T + Q, atol=1e-12)


def test_parseval_on_fir():
    fir = FIRFactory(length=5, n_inputs=2, n_outputs=3)
    system = fir.to_state_space()
    assert h2_inner(system, system) == pytest.approx(fir.energy, rel=1e-12)


def test_inner_product_with_delayed_copy():
    taps = FIR([1.0, 2.0, 3.0]).to_state_space()
    delayed = FIR([0.0, 1.0, 2.0, 3.0]).to_state_space()
    assert h2_inner(taps, delayed) == pytest.approx(8.0, rel=1e-12)
    assert h2_inner(series(taps, StateSpace.identity(1)), taps) == pytest.approx(14.0)


def test_inner_product_matches_quadrature():
    F = StateSpaceFactory(n_states=3, n_inputs=2, n_outputs=2)
    G = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=2)
    thetas = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
    integrand = np.einsum(
        "tij,tij->t",
        np.conj(F.freq_responses(thetas)),
        G.freq_responses(thetas),
    ).real
    assert h2_inner(F, G) == pytest.approx(np.mean(integrand), rel=1e-6)


def test_cross_gram_trace_is_inner_product():
    F = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=3)
    G = StateSpaceFactory(n_states=4, n_inputs=2, n_outputs=3)
    assert np.trace(cross_gram(F, G)) == pytest.approx(h2_inner(F, G))


def test_norm_of_static_gain():
    assert h2_norm(StateSpace.static([[3.0, 4.0]])) == pytest.approx(5.0)


def test_norm_uses_either_gramian():
    wide = StateSpaceFactory(n_states=3, n_inputs=3, n_outputs=1)
    thetas = frequency_grid(4096)
    responses = wide.freq_responses(np.concatenate([thetas, -thetas[1:-1]]))
    quadrature = np.mean(np.sum(np.abs(responses) ** 2, axis=(1, 2)))
    assert h2_norm(wide) ** 2 == pytest.approx(quadrature, rel=1e-6)
