"""Realizations of causal, rational transfer matrices.

Every system in the project is carried as a :class:`StateSpace` with real
matrices ``(A, B, C, D)`` and response ``F(z) = C (zI - A)^{-1} B + D``.
Instances are frozen and their arrays are read-only, so they can be shared
freely between threads and Celery chunks.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from numpy.typing import NDArray

from .exceptions import DimensionMismatchError
from .exceptions import NonFiniteError
from .exceptions import NotInvertibleError
from .exceptions import SingularResolventError
from .exceptions import UnstableSystemError

Matrix = NDArray[np.float64]
ComplexMatrix = NDArray[np.complex128]

STABILITY_MARGIN = 1e-9
RESOLVENT_TOL = 1e-10
INVERTIBILITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12

# Frequency points evaluated per batched solve.
_CHUNK = 512


def as_matrix(value: ArrayLike, name: str = "matrix") -> Matrix:
    """Coerce ``value`` to a finite 2-D float array (scalars become 1x1)."""
    array = np.array(value, dtype=float)
    if array.ndim == 0:
        array = array.reshape(1, 1)
    elif array.ndim == 1:
        array = array.reshape(1, -1) if array.size else array.reshape(0, 0)
    if array.ndim != 2:  # noqa: PLR2004
        msg = f"{name} must be 2-D, got shape {array.shape}"
        raise DimensionMismatchError(msg)
    if not np.all(np.isfinite(array)):
        msg = f"{name} has non-finite entries"
        raise NonFiniteError(msg)
    return array


def is_symmetric(matrix: ArrayLike, tol: float = SYMMETRY_TOL) -> bool:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:  # noqa: PLR2004
        return False
    return bool(np.linalg.norm(m - m.T) <= tol * max(np.linalg.norm(m), 1.0))


def frequency_grid(n_points: int) -> NDArray[np.float64]:
    """Uniform grid on ``[0, pi]``; real systems are conjugate-symmetric on the circle."""
    return np.linspace(0.0, np.pi, n_points)


def _readonly(array: Matrix) -> Matrix:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateSpace:
    A: Matrix
    B: Matrix
    C: Matrix
    D: Matrix

    def __post_init__(self) -> None:
        D = as_matrix(self.D, "D")
        p, m = D.shape
        A = np.array(self.A, dtype=float)
        A = A.reshape(0, 0) if A.size == 0 else as_matrix(A, "A")
        n = A.shape[0]
        B = np.array(self.B, dtype=float)
        B = B.reshape(n, m) if B.size == 0 else as_matrix(B, "B")
        C = np.array(self.C, dtype=float)
        C = C.reshape(p, n) if C.size == 0 else as_matrix(C, "C")
        if A.shape != (n, n) or B.shape != (n, m) or C.shape != (p, n):
            msg = (
                "incompatible realization: "
                f"A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )
            raise DimensionMismatchError(msg)
        object.__setattr__(self, "A", _readonly(A))
        object.__setattr__(self, "B", _readonly(B))
        object.__setattr__(self, "C", _readonly(C))
        object.__setattr__(self, "D", _readonly(D))

    def __repr__(self) -> str:
        return (
            f"StateSpace(n={self.n_states}, inputs={self.n_inputs}, "
            f"outputs={self.n_outputs})"
        )

    # Constructors

    @classmethod
    def static(cls, D: ArrayLike) -> StateSpace:
        D = as_matrix(D, "D")
        p, m = D.shape
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D)

    @classmethod
    def zeros(cls, n_outputs: int, n_inputs: int) -> StateSpace:
        return cls.static(np.zeros((n_outputs, n_inputs)))

    @classmethod
    def identity(cls, size: int) -> StateSpace:
        return cls.static(np.eye(size))

    # Shape

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    @property
    def is_static(self) -> bool:
        return self.n_states == 0

    # Stability

    @property
    def spectral_radius(self) -> float:
        if self.is_static:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    @property
    def is_stable(self) -> bool:
        return self.spectral_radius < 1.0 - STABILITY_MARGIN

    def require_stable(self, what: str = "system") -> StateSpace:
        if not self.is_stable:
            msg = f"{what} is not stable (spectral radius {self.spectral_radius:.6g})"
            raise UnstableSystemError(msg)
        return self

    # Frequency domain

    def freq_response(self, theta: float) -> ComplexMatrix:
        """``C (e^{j theta} I - A)^{-1} B + D``."""
        return self.freq_responses(np.array([theta]))[0]

    def freq_responses(self, thetas: ArrayLike) -> NDArray[np.complex128]:
        """Batched frequency response, shape ``(len(thetas), p, m)``."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        D = self.D.astype(complex)
        if self.is_static:
            return np.broadcast_to(D, (thetas.size, *D.shape)).copy()
        z = np.exp(1j * thetas)
        poles = np.linalg.eigvals(self.A)
        distance = np.min(np.abs(z[:, None] - poles[None, :]))
        if distance < RESOLVENT_TOL:
            msg = "frequency grid hits a pole on the unit circle"
            raise SingularResolventError(msg)
        n = self.n_states
        eye = np.eye(n)
        out = np.empty((thetas.size, *D.shape), dtype=complex)
        for start in range(0, thetas.size, _CHUNK):
            zc = z[start : start + _CHUNK]
            resolvent = zc[:, None, None] * eye[None] - self.A[None]
            rhs = np.broadcast_to(self.B.astype(complex), (zc.size, *self.B.shape))
            out[start : start + zc.size] = self.C @ np.linalg.solve(resolvent, rhs) + D
        return out

    def impulse_response(self, n_taps: int) -> NDArray[np.float64]:
        """Markov parameters ``F_0 .. F_{n_taps-1}`` stacked along axis 0."""
        taps = np.zeros((n_taps, *self.shape))
        if n_taps == 0:
            return taps
        taps[0] = self.D
        if self.is_static:
            return taps
        power_b = np.array(self.B)
        for k in range(1, n_taps):
            taps[k] = self.C @ power_b
            power_b = self.A @ power_b
        return taps

    # Elementary transforms

    def inverse(self) -> StateSpace:
        """Inverse realization ``(A - B D^{-1} C, B D^{-1}, -D^{-1} C, D^{-1})``."""
        p, m = self.shape
        if p != m:
            msg = f"cannot invert a non-square {p}x{m} system"
            raise DimensionMismatchError(msg)
        if m and np.min(np.linalg.svd(self.D, compute_uv=False)) <= INVERTIBILITY_TOL:
            msg = "feedthrough matrix is singular"
            raise NotInvertibleError(msg)
        D_inv = np.linalg.inv(self.D) if m else self.D
        return StateSpace(
            self.A - self.B @ D_inv @ self.C,
            self.B @ D_inv,
            -D_inv @ self.C,
            D_inv,
        )

    # Serialization

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "ss",
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> StateSpace:
        if data.get("type", "ss") == "fir":
            return FIR(data["taps"]).to_state_space()
        D = as_matrix(data["D"], "D")
        p, m = D.shape
        A = np.array(data.get("A", []), dtype=float)
        n = A.shape[0] if A.size else 0
        B = np.array(data.get("B", []), dtype=float).reshape(n, m)
        C = np.array(data.get("C", []), dtype=float).reshape(p, n)
        return cls(A.reshape(n, n), B, C, D)


@dataclass(frozen=True, eq=False)
class SpectralFactorForm:
    """A causal, causally invertible factor ``phi`` of a density ``Gamma = phi phi*``."""

    factor: StateSpace

    def __post_init__(self) -> None:
        p, m = self.factor.shape
        if p != m:
            msg = f"spectral factor must be square, got {p}x{m}"
            raise DimensionMismatchError(msg)
        if m and np.min(np.linalg.svd(self.factor.D, compute_uv=False)) <= INVERTIBILITY_TOL:
            msg = "spectral factor has a singular feedthrough"
            raise NotInvertibleError(msg)
        self.factor.require_stable("spectral factor")
        if not self.factor.inverse().is_stable:
            msg = "spectral factor is not minimum phase (unstable inverse)"
            raise NotInvertibleError(msg)

    @classmethod
    def constant(cls, covariance: ArrayLike) -> SpectralFactorForm:
        """Lower Cholesky factor of a constant positive definite density."""
        cov = as_matrix(covariance, "covariance")
        try:
            chol = np.linalg.cholesky((cov + cov.T) / 2)
        except np.linalg.LinAlgError as exc:
            msg = "constant density is not positive definite"
            raise NotInvertibleError(msg) from exc
        return cls(StateSpace.static(chol))

    @classmethod
    def white(cls, sigma: float, size: int = 1) -> SpectralFactorForm:
        return cls(StateSpace.static(sigma * np.eye(size)))

    @property
    def size(self) -> int:
        return self.factor.n_inputs

    def inverse(self) -> StateSpace:
        return self.factor.inverse()

    def densities(self, thetas: ArrayLike) -> NDArray[np.complex128]:
        phi = self.factor.freq_responses(thetas)
        return phi @ np.conj(np.swapaxes(phi, -1, -2))


@dataclass(frozen=True, eq=False)
class FIR:
    """Finite impulse response ``F(z) = sum_k F_k z^{-k}``, ``k = 0..L``."""

    taps: tuple[Matrix, ...]

    def __init__(self, taps: Sequence[ArrayLike] | NDArray[np.float64]) -> None:
        converted = tuple(_readonly(as_matrix(tap, "tap")) for tap in taps)
        if not converted:
            msg = "an FIR needs at least one tap"
            raise DimensionMismatchError(msg)
        shape = converted[0].shape
        if any(tap.shape != shape for tap in converted):
            msg = "FIR taps must share one shape"
            raise DimensionMismatchError(msg)
        object.__setattr__(self, "taps", converted)

    @property
    def length(self) -> int:
        """``L``: the index of the last tap."""
        return len(self.taps) - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.taps[0].shape

    @property
    def energy(self) -> float:
        return float(sum(np.sum(tap**2) for tap in self.taps))

    def freq_responses(self, thetas: ArrayLike) -> NDArray[np.complex128]:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        powers = np.exp(-1j * np.outer(thetas, np.arange(len(self.taps))))
        return np.einsum("tk,kpm->tpm", powers, np.stack(self.taps))

    def to_state_space(self) -> StateSpace:
        """Shift-register realization on whichever side has fewer channels."""
        p, m = self.shape
        L = self.length
        if L == 0:
            return StateSpace.static(self.taps[0])
        if m <= p:
            # Delayed inputs as state.
            n = L * m
            A = np.zeros((n, n))
            A[m:, :-m] = np.eye(n - m)
            B = np.zeros((n, m))
            B[:m] = np.eye(m)
            C = np.hstack(self.taps[1:])
            return StateSpace(A, B, C, self.taps[0])
        # Partial output sums as state.
        n = L * p
        A = np.zeros((n, n))
        A[:-p, p:] = np.eye(n - p)
        B = np.vstack(self.taps[1:])
        C = np.zeros((p, n))
        C[:, :p] = np.eye(p)
        return StateSpace(A, B, C, self.taps[0])


@dataclass(frozen=True, eq=False)
class Adjoint:
    """Anticausal ``F*``: evaluates to ``F(e^{j theta})^H``; never realized causally."""

    system: StateSpace

    def __post_init__(self) -> None:
        self.system.require_stable("adjoint argument")

    @property
    def shape(self) -> tuple[int, int]:
        p, m = self.system.shape
        return m, p

    def freq_responses(self, thetas: ArrayLike) -> NDArray[np.complex128]:
        return np.conj(np.swapaxes(self.system.freq_responses(thetas), -1, -2))

    def freq_response(self, theta: float) -> ComplexMatrix:
        return self.freq_responses(np.array([theta]))[0]


def adjoint(system: StateSpace) -> Adjoint:
    return Adjoint(system)
