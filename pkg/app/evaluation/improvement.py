"""How much, and where, an estimator ``G`` improves on a minimax estimator ``G_M``.

H2 channel ball: the pointwise worst improvement ``eta_PW``, the best relative
ratio ``eta_RW`` and the radial lower bound ``mu_I``. Signal balls: grid bounds
on the largest absolute and relative pointwise improvement.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import replace

import numpy as np
from django.conf import settings
from scipy import linalg

from app.lmi.program import LMIProgram
from app.lmi.program import minimize
from app.lti.algebra import causal_part_adjoint_product
from app.lti.algebra import causal_part_product
from app.lti.algebra import hcat
from app.lti.algebra import kron_with_factor
from app.lti.algebra import product
from app.lti.algebra import rvec
from app.lti.algebra import scale
from app.lti.algebra import subtract
from app.lti.algebra import vcat
from app.lti.lyapunov import h2_norm
from app.lti.norms import hinf_norm
from app.lti.norms import sup_hermitian_eigenvalue
from app.lti.reduction import minimal_realization
from app.lti.systems import StateSpace
from app.lti.systems import frequency_grid
from app.synthesis.plants import impulse_augment
from app.synthesis.plants import signal_blocks
from app.synthesis.setup import EstimationSetup

from .exceptions import BracketError
from .exceptions import CertificateSolveError
from .exceptions import MetricNotApplicableError
from .metrics import mse

logger = logging.getLogger(__name__)

ETA_RW_TOL = 1e-3
MAX_DOUBLINGS = 20


@dataclass(frozen=True)
class Bracket:
    value: float
    lower: float
    upper: float


@dataclass(frozen=True)
class ImprovementMetrics:
    delta_Jo: float
    delta_l_bar: float
    delta_q_bar: float
    nu_a: float
    nu_c: float
    nu_beta: float
    mu_I_lower: float
    eta_RW: Bracket | None = None
    eta_PW: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


# Pointwise comparison over the H2 channel ball


def _nominal_error(F: StateSpace, setup: EstimationSetup) -> StateSpace:
    """``(H_I - F H0) phi_y``."""
    phi_y, _ = setup.require_spectra()
    return product(subtract(setup.H_I, product(F, setup.H0)), phi_y.factor)


def f_rw(G: StateSpace, G_M: StateSpace, setup: EstimationSetup, lam: float) -> float:
    """``inf {J(G; H) - lam J(G_M; H)}`` over the channel ball.

    With ``x = rvec(X)`` as input, a storage ``P`` with
    ``[A B]' P [A B] - diag(P, 0) + R' diag(mu, 1, -lam, 1, -lam) R >= 0``
    certifies ``inf >= x0' P x0 - mu gamma^2``; the S-procedure is lossless for
    the single ball constraint.
    """
    _, phi_v = setup.require_spectra()
    if setup.gamma == 0:
        return mse(G, setup.H0, setup) - lam * mse(G_M, setup.H0, setup)
    n_x = setup.m_v * setup.m_y

    def branches(F: StateSpace) -> tuple[StateSpace, StateSpace]:
        signal = hcat(scale(kron_with_factor(F, setup.phi_y1), -1.0), rvec(_nominal_error(F, setup)))
        noise = rvec(product(F, phi_v.factor))
        return signal, hcat(StateSpace.zeros(noise.n_outputs, n_x), noise)

    signal_G, noise_G = branches(G)
    signal_M, noise_M = branches(G_M)
    perturbation = hcat(StateSpace.identity(n_x), StateSpace.zeros(n_x, 1))
    groups = [perturbation, signal_G, signal_M, noise_G, noise_M]
    stacked = vcat(*groups)
    F = stacked if stacked.is_static else minimal_realization(stacked)
    A, B, CD = impulse_augment(F, n_x)
    n = A.shape[0]

    prog = LMIProgram("f_rw")
    P = prog.sym("P", n)
    mu = prog.scalar("mu", lower=0.0)
    bounds = np.cumsum([0] + [group.n_outputs for group in groups])
    rows = [CD[bounds[i] : bounds[i + 1]] for i in range(len(groups))]
    supply = (
        mu.expr * (rows[0].T @ rows[0])
        + rows[1].T @ rows[1]
        - lam * (rows[2].T @ rows[2])
        + rows[3].T @ rows[3]
        - lam * (rows[4].T @ rows[4])
    )
    AB = np.hstack([A, B])
    storage = AB.T @ P.expr @ AB
    selector = np.zeros((n + n_x, n))
    selector[:n] = np.eye(n)
    prog.add_lmi(storage - selector @ P.expr @ selector.T + supply, name="dissipation")
    prog.minimize(setup.gamma**2 * mu.expr - P.expr[n - 1, n - 1])
    solution = minimize(prog)
    if not solution.is_optimal:
        msg = f"f_rw(lam={lam:g}): solver returned {solution.status}"
        raise CertificateSolveError(msg, solution)
    return -solution.objective


def eta_pw(G: StateSpace, G_M: StateSpace, setup: EstimationSetup) -> float:
    """Largest pointwise MSE reduction ``sup_H {J(G_M; H) - J(G; H)}``."""
    return -f_rw(G, G_M, setup, 1.0)


def eta_rw(G: StateSpace, G_M: StateSpace, setup: EstimationSetup, tol: float = ETA_RW_TOL) -> Bracket:
    """Smallest ``lam`` with ``f_rw(lam) <= 0``: the best ratio ``J(G; H) / J(G_M; H)`` over the ball."""

    def f(lam: float) -> float:
        value = f_rw(G, G_M, setup, lam)
        logger.debug("f_rw(%.6g) = %.8g", lam, value)
        return value

    if f(0.0) <= 0.0:
        return Bracket(0.0, 0.0, 0.0)
    lower, upper = 0.0, 1.0
    for _ in range(MAX_DOUBLINGS):
        if f(upper) <= 0.0:
            break
        lower, upper = upper, 2.0 * upper
    else:
        msg = f"f_rw stays positive up to lam={upper:g}"
        raise BracketError(msg)
    while upper - lower > tol:
        middle = (lower + upper) / 2
        if f(middle) > 0.0:
            lower = middle
        else:
            upper = middle
    return Bracket((lower + upper) / 2, lower, upper)


def _supremum_eigenvalue(responses: np.ndarray) -> float:
    value, _ = sup_hermitian_eigenvalue(responses)
    return value


def _gram_responses(F: StateSpace, thetas: np.ndarray) -> np.ndarray:
    """``F(e^{j theta})^H F(e^{j theta})`` on the grid."""
    f = F.freq_responses(thetas)
    return np.conj(np.swapaxes(f, -1, -2)) @ f


def mu_i_lower(G: StateSpace, G_M: StateSpace, setup: EstimationSetup) -> ImprovementMetrics:
    """Lower bound on the improved fraction of every radial segment of the channel ball."""
    delta_Jo = mse(G, setup.H0, setup) - mse(G_M, setup.H0, setup)
    if delta_Jo >= 0:
        msg = f"G does not improve on G_M at the nominal channel (delta_Jo={delta_Jo:.6g})"
        raise MetricNotApplicableError(msg)
    gamma = setup.gamma

    def linear_kernel(F: StateSpace) -> StateSpace:
        return causal_part_adjoint_product(F, causal_part_product(_nominal_error(F, setup), setup.phi_y1))

    delta_l_bar = gamma * h2_norm(subtract(linear_kernel(G), linear_kernel(G_M)))
    thetas = frequency_grid(settings.LTI_SUP_GRID)
    lam_bar = _supremum_eigenvalue(_gram_responses(G, thetas) - _gram_responses(G_M, thetas))
    delta_q_bar = max(lam_bar, 0.0) * hinf_norm(setup.phi_y1) ** 2 * gamma**2

    size = abs(delta_Jo)
    nu_a = 0.5 * size / delta_l_bar if delta_l_bar > 0 else math.inf
    if delta_q_bar > 0:
        nu_c = size / delta_q_bar
        nu_beta = 0.5 * nu_c / math.sqrt((delta_l_bar / delta_q_bar) ** 2 + nu_c)
    else:
        nu_c = nu_beta = math.inf
    mu = min(2.0, 1.0 + nu_a, 1.0 + nu_beta, 2.0 * math.sqrt(nu_c))
    logger.info("mu_I lower bound %.6g (delta_Jo=%.6g)", mu, delta_Jo)
    return ImprovementMetrics(delta_Jo, delta_l_bar, delta_q_bar, nu_a, nu_c, nu_beta, mu)


def improvement_metrics(
    G: StateSpace,
    G_M: StateSpace,
    setup: EstimationSetup,
    tol: float = ETA_RW_TOL,
) -> ImprovementMetrics:
    metrics = mu_i_lower(G, G_M, setup)
    return replace(metrics, eta_RW=eta_rw(G, G_M, setup, tol), eta_PW=eta_pw(G, G_M, setup))


def segment_improvement_length(a: float, b: float, c: float) -> float:
    """Measure of ``{beta in [-1, 1]: a + 2 b beta + c beta^2 < 0}``."""
    roots = np.roots([c, 2.0 * b, a]) if (c or b) else np.array([])
    inner = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-12 and -1.0 < r.real < 1.0)
    points = [-1.0, *inner, 1.0]
    length = 0.0
    for left, right in zip(points[:-1], points[1:], strict=True):
        middle = (left + right) / 2
        if a + 2.0 * b * middle + c * middle**2 < 0:
            length += right - left
    return length


# Pointwise comparison over the signal balls


def _signal_error(F: StateSpace, setup: EstimationSetup) -> StateSpace:
    """``H_ez = H_Iy - F H_oz`` on inputs ``(y, v)``."""
    H_I, H_o, _ = signal_blocks(setup, robust=False)
    return subtract(H_I, product(F, H_o))


def _relative_floor(gram_G: np.ndarray, gram_M: np.ndarray, tol: float) -> float:
    """``inf <gram_G z, z> / <gram_M z, z>`` over ``z`` with ``<gram_M z, z> > 0``, at one frequency.

    The null space of ``gram_M`` is minimized out by a Schur complement of
    ``gram_G``; the infimum is then the smallest generalized eigenvalue on
    the range of ``gram_M``. ``inf`` when ``gram_M`` vanishes.
    """
    w, V = linalg.eigh(gram_M)
    kept = w > tol
    if not kept.any():
        return math.inf
    U, N = V[:, kept], V[:, ~kept]
    S = U.conj().T @ gram_G @ U
    if N.shape[1]:
        cross = U.conj().T @ gram_G @ N
        S = S - cross @ linalg.pinvh(N.conj().T @ gram_G @ N, atol=tol) @ cross.conj().T
    S = (S + S.conj().T) / 2
    return float(linalg.eigh(S, np.diag(w[kept]), eigvals_only=True)[0])


def hinf_improvement_bounds(
    G: StateSpace,
    G_M: StateSpace,
    setup: EstimationSetup,
    n_points: int | None = None,
) -> tuple[float, float]:
    """Grid lower bound on ``eta_P`` and upper bound on ``eta_R`` for the signal balls.

    ``eta_P >= sup lambda_max(M (Gamma_e0 - Gamma_e1) M)`` with
    ``M = diag(gamma_y I, gamma_v I)``. ``eta_R`` is the least ratio
    ``<Gamma_e1 z, z> / <Gamma_e0 z, z>`` over the grid frequencies; it is
    1 for ``G = G_M`` and 0 when ``G`` removes the error of some direction
    that ``G_M`` does not.
    """
    thetas = frequency_grid(n_points or settings.LTI_SUP_GRID)
    weights = np.concatenate([np.full(setup.m_y, setup.gamma_y), np.full(setup.m_v, setup.gamma_v)])
    M = np.diag(weights)
    gram_M = M @ _gram_responses(_signal_error(G_M, setup), thetas) @ M
    gram_G = M @ _gram_responses(_signal_error(G, setup), thetas) @ M
    eta_P = _supremum_eigenvalue(gram_M - gram_G)
    tol = 1e-10 * max(_supremum_eigenvalue(gram_M), 1.0)
    eta_R = min(_relative_floor(g, m, tol) for g, m in zip(gram_G, gram_M, strict=True))
    eta_R = max(eta_R, 0.0)
    logger.info("signal-ball improvement: eta_P >= %.6g, eta_R <= %.6g", eta_P, eta_R)
    return eta_P, eta_R
