import numpy as np
import pytest

from app.lti.algebra import causal_part
from app.lti.algebra import causal_part_adjoint_product
from app.lti.algebra import causal_part_product
from app.lti.algebra import hcat
from app.lti.algebra import kron_identity
from app.lti.algebra import kron_with_factor
from app.lti.algebra import parallel
from app.lti.algebra import product
from app.lti.algebra import rvec
from app.lti.algebra import scale
from app.lti.algebra import series
from app.lti.algebra import transpose
from app.lti.algebra import vcat
from app.lti.exceptions import DimensionMismatchError
from app.lti.systems import FIR
from app.lti.systems import StateSpace
from app.lti.systems import adjoint
from app.lti.systems import frequency_grid

from .factories import StateSpaceFactory

GRID = frequency_grid(128)


def response(system):
    return system.freq_responses(GRID)


def test_series_with_identity():
    H = StateSpaceFactory(n_states=3)
    assert np.allclose(response(series(StateSpace.identity(1), H)), response(H))


def test_parallel_with_negation_vanishes():
    H = StateSpaceFactory(n_states=3)
    assert np.allclose(response(parallel(H, scale(H, -1.0))), 0.0, atol=1e-12)


def test_series_matches_pointwise_product():
    F = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=3)
    G = StateSpaceFactory(n_states=2, n_inputs=3, n_outputs=2)
    expected = response(G) @ response(F)
    assert np.allclose(response(series(F, G)), expected, rtol=1e-10, atol=1e-10)
    assert np.allclose(response(product(G, F)), expected, rtol=1e-10, atol=1e-10)


def test_series_rejects_mismatch():
    with pytest.raises(DimensionMismatchError):
        series(StateSpaceFactory(n_outputs=2), StateSpaceFactory(n_inputs=3))


def test_concatenations():
    F = StateSpaceFactory(n_states=1, n_inputs=1, n_outputs=2)
    G = StateSpaceFactory(n_states=2, n_inputs=3, n_outputs=2)
    assert np.allclose(response(hcat(F, G)), np.concatenate([response(F), response(G)], axis=2))
    K = StateSpaceFactory(n_states=2, n_inputs=1, n_outputs=1)
    assert np.allclose(response(vcat(F, K)), np.concatenate([response(F), response(K)], axis=1))


def test_transpose():
    F = StateSpaceFactory(n_states=2, n_inputs=3, n_outputs=2)
    assert np.allclose(response(transpose(F)), np.swapaxes(response(F), 1, 2))


def test_rvec_is_row_major():
    F = StateSpaceFactory(n_states=2, n_inputs=3, n_outputs=2)
    expected = response(F).reshape(GRID.size, 6, 1)
    assert np.allclose(response(rvec(F)), expected)


def test_kron_identity():
    F = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=1)
    expected = np.stack([np.kron(r, np.eye(3)) for r in response(F)])
    assert np.allclose(response(kron_identity(F, 3)), expected)


def test_kron_with_factor_scalar_case_is_product():
    G = StateSpaceFactory(n_states=2)
    phi = StateSpaceFactory(n_states=1)
    assert np.allclose(response(kron_with_factor(G, phi)), response(G) * response(phi))


def test_kron_with_factor_identity_gives_block_diagonal():
    phi = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=2)
    result = response(kron_with_factor(StateSpace.identity(2), phi))
    phi_t = np.swapaxes(response(phi), 1, 2)
    assert np.allclose(result[:, :2, :2], phi_t)
    assert np.allclose(result[:, 2:, 2:], phi_t)
    assert np.allclose(result[:, :2, 2:], 0.0)


def test_kron_with_factor_matches_grid_kronecker():
    G = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=2)
    phi = StateSpaceFactory(n_states=1, n_inputs=2, n_outputs=2)
    expected = np.stack(
        [np.kron(g, p.T) for g, p in zip(response(G), response(phi), strict=True)],
    )
    assert np.allclose(response(kron_with_factor(G, phi)), expected)


def test_causal_part_of_causal_system_is_itself():
    F = StateSpaceFactory(n_states=2)
    assert np.allclose(response(causal_part(F)), response(F))


def test_causal_part_of_strictly_causal_adjoint_vanishes():
    G = FIR([0.0, 1.0, 2.0]).to_state_space()
    assert np.allclose(response(causal_part(adjoint(G))), 0.0)


def test_causal_part_of_adjoint_keeps_leading_tap():
    G = FIR([[[1.0, 2.0]], [[3.0, 4.0]]]).to_state_space()
    result = causal_part(adjoint(G))
    assert result.is_static
    assert np.allclose(result.D, [[1.0], [2.0]])


def test_causal_part_is_linear_and_idempotent():
    F = StateSpaceFactory(n_states=2)
    G = StateSpaceFactory(n_states=3)
    once = causal_part(F, adjoint(G))
    assert np.allclose(response(causal_part(once)), response(once))
    doubled = causal_part(scale(F, 2.0), adjoint(scale(G, 2.0)))
    assert np.allclose(response(doubled), 2 * response(once))


def _truncated_causal_part(f_taps, g_taps, n_out):
    """Markov parameters of {F G*}_ca from impulse responses."""
    n = f_taps.shape[0]
    return np.stack(
        [sum(f_taps[k + j] @ g_taps[j].T for j in range(n - k)) for k in range(n_out)],
    )


def test_causal_part_product_matches_impulse_truncation():
    T1 = StateSpaceFactory(n_states=2, n_inputs=2, n_outputs=1)
    T2 = StateSpaceFactory(n_states=3, n_inputs=2, n_outputs=2)
    n = 400
    expected = _truncated_causal_part(T1.impulse_response(n), T2.impulse_response(n), 20)
    result = causal_part_product(T1, T2).impulse_response(20)
    assert np.allclose(result, expected, atol=1e-9)


def test_causal_part_adjoint_product_matches_impulse_truncation():
    G = StateSpaceFactory(n_states=2, n_inputs=1, n_outputs=2)
    V = StateSpaceFactory(n_states=3, n_inputs=2, n_outputs=2)
    n = 400
    g = G.impulse_response(n)
    v = V.impulse_response(n)
    expected = np.stack(
        [sum(g[j].T @ v[k + j] for j in range(n - k)) for k in range(20)],
    )
    result = causal_part_adjoint_product(G, V).impulse_response(20)
    assert np.allclose(result, expected, atol=1e-9)
