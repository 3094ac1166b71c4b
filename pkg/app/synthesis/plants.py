"""Realizations and LMI blocks shared by synthesis and evaluation.

Two families of constraints live here:

* the MSE dissipation inequality for the H2 channel ball: with the nominal
  error driven by an impulse (folded into the initial state ``x0``) and the
  perturbation ``x = rvec(X)`` entering as an input,
  ``sup ||z||^2 <= lambda gamma^2 + x0' Q x0`` whenever

      [A B]' Q [A B] - diag(Q, 0) - lambda diag(0, I) + R2' R2 < 0;

* the bounded-real inequality for the signal balls, with multipliers
  ``M = diag(sigma_y I, sigma_v I[, sigma_w I])`` and, in the robust case,
  the uncertainty channel ``q`` weighted by ``sigma_w gamma_H^2``.

Both are affine in the estimator coefficients ``beta`` because the state
matrices never depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from app.lmi.program import LMIProgram
from app.lmi.variables import DecisionVar
from app.lmi.variables import Expr
from app.lmi.variables import block
from app.lmi.variables import kron_identity
from app.lmi.variables import zeros
from app.lti.algebra import hcat
from app.lti.algebra import kron_with_factor
from app.lti.algebra import product
from app.lti.algebra import rvec
from app.lti.algebra import scale
from app.lti.algebra import vcat
from app.lti.reduction import minimal_realization
from app.lti.systems import StateSpace

from .basis import EstimatorBasis
from .setup import EstimationSetup

Scalar = cp.Expression | float


def _split_rows(matrix: np.ndarray, sizes: list[int]) -> list[np.ndarray]:
    bounds = np.cumsum([0, *sizes])
    return [matrix[bounds[i] : bounds[i + 1]] for i in range(len(sizes))]


def _minimal(system: StateSpace) -> StateSpace:
    return system if system.is_static else minimal_realization(system)


# MSE over the H2 channel ball


def impulse_augment(F: StateSpace, n_x: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fold the last input of ``F`` (driven by a unit impulse) into an extra state.

    Returns ``(A, B, [C D])`` where ``B`` and ``D`` keep the first ``n_x`` inputs
    and the initial state is the last unit vector.
    """
    n = F.n_states
    A = np.block(
        [
            [F.A, F.B[:, n_x:]],
            [np.zeros((1, n)), np.zeros((1, 1))],
        ],
    )
    B = np.vstack([F.B[:, :n_x], np.zeros((1, n_x))])
    CD = np.hstack([F.C, F.D[:, n_x:], F.D[:, :n_x]])
    return A, B, CD


@dataclass(frozen=True, eq=False)
class ChannelBallPlant:
    """Impulse-augmented realization of the error for ``G(beta)`` and ``H = H0 + X W^{-1}``.

    Output rows come in three groups: the signal branch ``Y_a (X phi_y1 + H0 phi_y)``
    (vectorized, multiplied by ``beta (x) I_{m_y}``), the noise branch
    ``Y_a phi_v`` (multiplied by ``beta (x) I_{m_v}``) and the reference
    ``-H_I phi_y``. The initial state is the last unit vector.
    """

    A: np.ndarray
    B: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    reference: np.ndarray
    m_y: int
    m_v: int
    gamma: float

    @classmethod
    def for_basis(cls, setup: EstimationSetup, basis: EstimatorBasis) -> ChannelBallPlant:
        phi_y, phi_v = setup.require_spectra()
        Y_a = basis.Y_a
        m_y, m_v = setup.m_y, setup.m_v
        c1 = rvec(product(Y_a, setup.H0, phi_y.factor))
        c2 = rvec(product(Y_a, phi_v.factor))
        c3 = scale(rvec(product(setup.H_I, phi_y.factor)), -1.0)
        if setup.gamma > 0:
            n_x = m_v * m_y
            K = kron_with_factor(Y_a, setup.phi_y1)
            stacked = vcat(
                hcat(K, c1),
                hcat(StateSpace.zeros(c2.n_outputs, n_x), c2),
                hcat(StateSpace.zeros(c3.n_outputs, n_x), c3),
            )
        else:
            n_x = 0
            stacked = vcat(c1, c2, c3)
        A, B, CD = impulse_augment(_minimal(stacked), n_x)
        signal, noise, reference = _split_rows(CD, [c1.n_outputs, c2.n_outputs, c3.n_outputs])
        return cls(A, B, signal, noise, reference, m_y, m_v, setup.gamma)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_perturbation_inputs(self) -> int:
        return self.B.shape[1]

    def output(self, beta: Expr) -> Expr:
        """``[C(beta)  D(beta)]`` of the error ``z``."""
        return block(
            [
                [kron_identity(beta, self.m_y) @ self.signal + self.reference],
                [kron_identity(beta, self.m_v) @ self.noise],
            ],
        )


@dataclass
class MSEBound:
    bound: cp.Expression
    Q: DecisionVar
    lam: DecisionVar | None


def add_mse_bound(
    prog: LMIProgram,
    plant: ChannelBallPlant,
    beta: Expr,
    prefix: str = "",
) -> MSEBound:
    """Constrain ``prog`` so that the returned expression bounds the worst-case MSE."""
    n, k = plant.n_states, plant.n_perturbation_inputs
    Q = prog.sym(f"{prefix}Q", n)
    AB = np.hstack([plant.A, plant.B])
    top = AB.T @ Q.expr @ AB - block([[Q, zeros(n, k)], [zeros(k, n), zeros(k, k)]])
    lam = None
    bound = Q.expr[n - 1, n - 1]
    if k:
        lam = prog.scalar(f"{prefix}lambda", lower=0.0, strict=True)
        selector = np.zeros((n + k, n + k))
        selector[n:, n:] = np.eye(k)
        top = top - lam.expr * selector
        bound = bound + plant.gamma**2 * lam.expr
    R2 = plant.output(beta)
    rows = R2.shape[0]
    prog.add_lmi(-block([[top, R2.T], [R2, -np.eye(rows)]]), name=f"{prefix}mse", strict=True)
    return MSEBound(bound, Q, lam)


# Signal balls (nominal and robust H-infinity)


def signal_blocks(setup: EstimationSetup, robust: bool) -> tuple[StateSpace, StateSpace, StateSpace | None]:  # noqa: FBT001
    """``H_Ia``, ``H_oa`` and the uncertainty channel ``q`` on inputs ``(y, v[, w])``."""
    m_y, m_v, m_e = setup.m_y, setup.m_v, setup.m_e
    H_Iy = product(setup.H_I, setup.W_y_inv)
    H0y = product(setup.H0, setup.W_y_inv)
    if not robust:
        return (
            hcat(H_Iy, StateSpace.zeros(m_e, m_v)),
            hcat(H0y, setup.W_v_inv),
            None,
        )
    q = product(setup.W_H_inv, setup.W_y_inv)
    return (
        hcat(H_Iy, StateSpace.zeros(m_e, m_v), StateSpace.zeros(m_e, m_v)),
        hcat(H0y, setup.W_v_inv, StateSpace.identity(m_v)),
        hcat(q, StateSpace.zeros(m_y, m_v), StateSpace.zeros(m_y, m_v)),
    )


def input_sizes(setup: EstimationSetup, robust: bool) -> tuple[int, ...]:  # noqa: FBT001
    return (setup.m_y, setup.m_v, setup.m_v) if robust else (setup.m_y, setup.m_v)


@dataclass(frozen=True, eq=False)
class SignalBallPlant:
    """Generalized plant for full-order synthesis: ``e = H_Ia z - G (H_oa z)``.

    ``(C1, D11)`` is the reference output, ``(C2, D21)`` the measurement the
    estimator sees and ``(Cq, Dq)`` the uncertainty channel (empty when nominal).
    """

    A: np.ndarray
    B: np.ndarray
    C1: np.ndarray
    D11: np.ndarray
    C2: np.ndarray
    D21: np.ndarray
    Cq: np.ndarray
    Dq: np.ndarray
    inputs: tuple[int, ...]
    gamma_H: float

    @classmethod
    def from_setup(cls, setup: EstimationSetup, robust: bool = False) -> SignalBallPlant:  # noqa: FBT001, FBT002
        H_Ia, H_oa, q = signal_blocks(setup, robust)
        outputs = [H_Ia, H_oa] if q is None else [H_Ia, H_oa, q]
        F = _minimal(vcat(*outputs))
        sizes = [system.n_outputs for system in outputs]
        C = _split_rows(F.C, sizes)
        D = _split_rows(F.D, sizes)
        Cq = C[2] if q is not None else np.zeros((0, F.n_states))
        Dq = D[2] if q is not None else np.zeros((0, F.n_inputs))
        return cls(F.A, F.B, C[0], D[0], C[1], D[1], Cq, Dq, input_sizes(setup, robust), setup.gamma_H)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def robust(self) -> bool:
        return len(self.inputs) == 3  # noqa: PLR2004


@dataclass(frozen=True, eq=False)
class ErrorPlant:
    """Error realization for ``G(beta)``: ``[C_ref - beta C_Y,  D_ref - beta D_Y]``."""

    A: np.ndarray
    B: np.ndarray
    reference: np.ndarray
    through_basis: np.ndarray
    Cq: np.ndarray
    Dq: np.ndarray
    inputs: tuple[int, ...]
    gamma_H: float

    @classmethod
    def for_basis(cls, setup: EstimationSetup, basis: EstimatorBasis, robust: bool = False) -> ErrorPlant:  # noqa: FBT001, FBT002
        H_Ia, H_oa, q = signal_blocks(setup, robust)
        Y_H = product(basis.Y_a, H_oa)
        outputs = [H_Ia, Y_H] if q is None else [H_Ia, Y_H, q]
        F = _minimal(vcat(*outputs))
        CD = np.hstack([F.C, F.D])
        parts = _split_rows(CD, [system.n_outputs for system in outputs])
        n = F.n_states
        Cq = parts[2][:, :n] if q is not None else np.zeros((0, n))
        Dq = parts[2][:, n:] if q is not None else np.zeros((0, F.n_inputs))
        return cls(F.A, F.B, parts[0], parts[1], Cq, Dq, input_sizes(setup, robust), setup.gamma_H)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def robust(self) -> bool:
        return len(self.inputs) == 3  # noqa: PLR2004

    def output(self, beta: Expr) -> Expr:
        return self.reference - beta @ self.through_basis


@dataclass
class SignalMultipliers:
    sigma_y: Scalar
    sigma_v: Scalar
    sigma_w: Scalar | None = None

    def as_list(self) -> list[Scalar]:
        items = [self.sigma_y, self.sigma_v]
        return items if self.sigma_w is None else [*items, self.sigma_w]

    def matrix(self, sizes: tuple[int, ...]) -> Expr:
        """``diag(sigma_y I, sigma_v I[, sigma_w I])``."""
        items = self.as_list()
        return block(
            [
                [items[i] * np.eye(sizes[i]) if i == j else zeros(sizes[i], sizes[j]) for j in range(len(sizes))]
                for i in range(len(sizes))
            ],
        )

    def bound(self, setup: EstimationSetup) -> cp.Expression | float:
        return self.sigma_y * setup.gamma_y**2 + self.sigma_v * setup.gamma_v**2

    def values(self) -> dict[str, float]:
        def value(item: Scalar | None) -> float | None:
            if item is None:
                return None
            return float(item.value) if isinstance(item, cp.Expression) else float(item)

        result = {"sigma_y": value(self.sigma_y), "sigma_v": value(self.sigma_v)}
        if self.sigma_w is not None:
            result["sigma_w"] = value(self.sigma_w)
        return result


def declare_multipliers(
    prog: LMIProgram,
    robust: bool,  # noqa: FBT001
    sigma_w: float | None = None,
) -> SignalMultipliers:
    """Positive ``sigma_y``, ``sigma_v``; ``sigma_w`` is a variable unless fixed."""
    sigma_y = prog.scalar("sigma_y", lower=0.0, strict=True).expr
    sigma_v = prog.scalar("sigma_v", lower=0.0, strict=True).expr
    if not robust:
        return SignalMultipliers(sigma_y, sigma_v)
    if sigma_w is None:
        sigma_w = prog.scalar("sigma_w", lower=0.0, strict=True).expr
    return SignalMultipliers(sigma_y, sigma_v, sigma_w)


def uncertainty_term(Cq: np.ndarray, Dq: np.ndarray, multipliers: SignalMultipliers, gamma_H: float) -> Expr:
    """``sigma_w gamma_H^2 [Cq Dq]' [Cq Dq]`` (zero when nominal)."""
    CDq = np.hstack([Cq, Dq])
    gram = CDq.T @ CDq
    if multipliers.sigma_w is None or not gram.size:
        return np.zeros((CDq.shape[1], CDq.shape[1]))
    return (gamma_H**2) * multipliers.sigma_w * gram


def add_bounded_real(
    prog: LMIProgram,
    plant: ErrorPlant,
    beta: Expr,
    multipliers: SignalMultipliers,
) -> DecisionVar | None:
    """``[[diag(P, M) - [A B]'P[A B] - sigma_w gamma_H^2 [Cq Dq]'[Cq Dq], [C D]'], [[C D], I]] > 0``."""
    n = plant.n_states
    k = plant.B.shape[1]
    AB = np.hstack([plant.A, plant.B])
    M = multipliers.matrix(plant.inputs)
    P = prog.sym("P", n) if n else None
    if P is not None:
        storage = block([[P, zeros(n, k)], [zeros(k, n), M]]) - AB.T @ P.expr @ AB
    else:
        storage = M
    top = storage - uncertainty_term(plant.Cq, plant.Dq, multipliers, plant.gamma_H)
    CD = plant.output(beta)
    rows = CD.shape[0]
    prog.add_lmi(block([[top, CD.T], [CD, np.eye(rows)]]), name="bounded_real", strict=True)
    return P
