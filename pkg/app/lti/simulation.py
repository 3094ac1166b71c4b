import numpy as np
from numpy.typing import ArrayLike
from scipy import signal

from .exceptions import DimensionMismatchError
from .systems import StateSpace


def simulate(system: StateSpace, inputs: ArrayLike) -> np.ndarray:
    """Zero-state response to ``inputs`` of shape ``(n_steps, m)``; returns ``(n_steps, p)``."""
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != system.n_inputs:
        msg = f"simulate: expected {system.n_inputs} input channels, got {u.shape[1]}"
        raise DimensionMismatchError(msg)
    if system.is_static:
        return u @ system.D.T
    _, y, _ = signal.dlsim((system.A, system.B, system.C, system.D, 1), u)
    return np.asarray(y).reshape(u.shape[0], system.n_outputs)


def white_noise_mse(system: StateSpace, n_steps: int, rng: np.random.Generator) -> float:
    """Sample mean of ``||e(k)||^2`` for unit white Gaussian input."""
    u = rng.standard_normal((n_steps, system.n_inputs))
    e = simulate(system, u)
    return float(np.mean(np.sum(e**2, axis=1)))
