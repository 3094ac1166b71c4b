"""Pointwise and worst-case criteria of a fixed estimator."""

from __future__ import annotations

import logging

from app.lmi.program import LMIProgram
from app.lmi.program import SDPSolution
from app.lmi.program import minimize
from app.lti.systems import StateSpace
from app.synthesis.basis import basis_from_estimator
from app.synthesis.criteria import error_mse
from app.synthesis.plants import ChannelBallPlant
from app.synthesis.plants import ErrorPlant
from app.synthesis.plants import add_bounded_real
from app.synthesis.plants import add_mse_bound
from app.synthesis.plants import declare_multipliers
from app.synthesis.setup import EstimationSetup

from .exceptions import CertificateSolveError

logger = logging.getLogger(__name__)


def _require_optimal(solution: SDPSolution, what: str) -> float:
    if not solution.is_optimal:
        msg = f"{what}: solver returned {solution.status} ({solution.message})"
        raise CertificateSolveError(msg, solution)
    return max(solution.objective, 0.0)


def mse(G: StateSpace, H: StateSpace, setup: EstimationSetup) -> float:
    """``J(G; H) = ||(H_I - G H) phi_y||_2^2 + ||G phi_v||_2^2``."""
    phi_y, phi_v = setup.require_spectra()
    return error_mse(G, H, setup, phi_y, phi_v)


def worst_case_mse(G: StateSpace, setup: EstimationSetup) -> float:
    """Sup of ``J(G; H0 + X W^{-1})`` over ``||X||_2 <= gamma``, through the dissipation SDP."""
    if setup.gamma == 0:
        return mse(G, setup.H0, setup)
    basis, beta = basis_from_estimator(G)
    prog = LMIProgram("worst_case_mse")
    bound = add_mse_bound(prog, ChannelBallPlant.for_basis(setup, basis), beta)
    prog.minimize(bound.bound)
    return _require_optimal(minimize(prog), "worst_case_mse")


def _signal_ball_bound(G: StateSpace, setup: EstimationSetup, robust: bool) -> float:  # noqa: FBT001
    basis, beta = basis_from_estimator(G)
    prog = LMIProgram("robust_hinf" if robust else "nominal_hinf")
    multipliers = declare_multipliers(prog, robust)
    add_bounded_real(prog, ErrorPlant.for_basis(setup, basis, robust), beta, multipliers)
    prog.minimize(multipliers.bound(setup))
    return _require_optimal(minimize(prog), prog.name)


def nominal_hinf(G: StateSpace, setup: EstimationSetup) -> float:
    """Worst ``||e||_2^2`` over ``||W_y y|| <= gamma_y``, ``||W_v v|| <= gamma_v`` for the nominal channel."""
    return _signal_ball_bound(G, setup, robust=False)


def robust_hinf(G: StateSpace, setup: EstimationSetup) -> float:
    """Upper bound on the worst ``||e||_2^2`` when also ``||(H - H0) W_H||_inf <= gamma_H``."""
    if setup.gamma_H == 0:
        return nominal_hinf(G, setup)
    return _signal_ball_bound(G, setup, robust=True)
