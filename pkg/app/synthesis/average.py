"""Average-cost / worst-case-constraint ("a/w") estimator design.

Each problem minimizes an average criterion over the estimator class
``G(beta)`` while keeping the matching worst-case bound within ``(1 + alpha)``
times the minimax optimum:

* Problem 4: ``eta_av`` under the H2 channel-ball worst case (Problem 1);
* Problem 5: ``eta_a`` under the nominal signal-ball bound (Problem 2);
* Problem 6: ``eta_b`` under the robust bound (Problem 3).

The quadratic costs enter through ``[[P, M Q^{1/2}], [Q^{1/2} M', I]] >= 0``
so that ``tr P`` bounds ``tr(M Q M')``.
"""

from __future__ import annotations

import logging
import math

import cvxpy as cp
import numpy as np
from django.conf import settings

from app.lmi.program import LMIProgram
from app.lmi.program import SDPSolution
from app.lmi.program import minimize
from app.lmi.variables import Expr
from app.lmi.variables import block
from app.lmi.variables import kron_identity
from app.lti.linalg import psd_sqrt

from .basis import EstimatorBasis
from .basis import basis_from_estimator
from .basis import make_nominal_basis
from .certificates import certify
from .criteria import build_Qc
from .criteria import build_QGc
from .criteria import eta_a_gram
from .criteria import eta_b_gram
from .exceptions import AlphaBelowToleranceError
from .minimax import require_optimal
from .minimax import solve_prob1
from .minimax import solve_prob2
from .minimax import solve_prob3
from .plants import ChannelBallPlant
from .plants import ErrorPlant
from .plants import add_bounded_real
from .plants import add_mse_bound
from .plants import declare_multipliers
from .results import SynthesisReport
from .setup import EstimationSetup

logger = logging.getLogger(__name__)


def check_alpha(alpha: float, minimax: SynthesisReport) -> None:
    """``alpha`` must exceed what the minimax solve actually achieved."""
    gap = minimax.relative_gap
    floor = max(gap if math.isfinite(gap) else 0.0, settings.LMI_SOLVER_TOL)
    if not alpha > floor:
        msg = f"alpha={alpha:g} does not exceed the minimax solve's relative gap {floor:.2e}"
        raise AlphaBelowToleranceError(msg)


def add_quadratic_cost(prog: LMIProgram, name: str, M: Expr, gram: np.ndarray) -> cp.Expression:
    """Declare ``P`` with ``P >= M gram M'`` and return ``tr P``."""
    rows = M.shape[0]
    root = psd_sqrt(gram)
    P = prog.sym(name, rows)
    MR = M @ root
    prog.add_lmi(block([[P, MR], [MR.T, np.eye(root.shape[0])]]), name=f"{name}_cost")
    return cp.trace(P.expr)


def _selector(beta: Expr, m_e: int) -> Expr:
    return block([[np.eye(m_e), -beta]])


def _report(
    problem: str,
    setup: EstimationSetup,
    basis: EstimatorBasis,
    solution: SDPSolution,
    multipliers: dict[str, float],
    budget: float,
    worst_case_bound: float,
) -> SynthesisReport:
    beta = np.atleast_2d(solution["beta"])
    diagnostics = solution.diagnostics()
    diagnostics.update(budget=budget, worst_case_bound=worst_case_bound)
    logger.info(
        "%s: average %.6g, worst-case bound %.6g (budget %.6g)",
        problem,
        solution.objective,
        worst_case_bound,
        budget,
    )
    report = SynthesisReport(
        problem=problem,
        estimator=basis.estimator(beta),
        optimal_value=solution.objective,
        multipliers=multipliers,
        certificate={name: np.atleast_2d(value) for name, value in solution.values.items() if name in ("Q", "P")},
        diagnostics=diagnostics,
        beta=beta,
        basis_order=basis.n_G,
    )
    return certify(report, setup)


# Problem 4


def build_prob4(setup: EstimationSetup, basis: EstimatorBasis, alpha: float, J_o1: float) -> LMIProgram:
    phi_y, phi_v = setup.require_spectra()
    prog = LMIProgram("prob4")
    m_e = setup.m_e
    beta = prog.rect("beta", m_e, basis.n_beta_cols).expr
    objective = add_quadratic_cost(prog, "P_J", _selector(beta, m_e), build_Qc(setup, basis, phi_y, phi_v))
    if setup.gamma > 0:
        Q_Gy = setup.gamma**2 / (setup.m_v * setup.m_y) * build_QGc(basis, setup.phi_y1)
        objective = objective + add_quadratic_cost(prog, "P_eta", kron_identity(beta, setup.m_y), Q_Gy)
    bound = add_mse_bound(prog, ChannelBallPlant.for_basis(setup, basis), beta)
    prog.add_inequality(bound.bound, (1.0 + alpha) * J_o1, name="worst_case_budget")
    prog.minimize(objective)
    return prog


def solve_prob4(
    setup: EstimationSetup,
    alpha: float,
    minimax: SynthesisReport | None = None,
    basis: EstimatorBasis | None = None,
) -> SynthesisReport:
    """``G_av`` over the class the minimax estimator ``G_M`` was designed in."""
    basis = basis or make_nominal_basis(setup)
    minimax = minimax or solve_prob1(setup, basis)
    check_alpha(alpha, minimax)
    budget = (1.0 + alpha) * minimax.optimal_value
    solution = require_optimal(minimize(build_prob4(setup, basis, alpha, minimax.optimal_value)), "prob4")
    Q = np.atleast_2d(solution["Q"])
    lam = solution.values.get("lambda", 0.0)
    worst = float(Q[-1, -1]) + setup.gamma**2 * lam
    multipliers = {"lambda": lam} if "lambda" in solution.values else {}
    return _report("prob4", setup, basis, solution, multipliers, budget, worst)


# Problems 5 and 6


def _build_signal_ball(
    name: str,
    setup: EstimationSetup,
    basis: EstimatorBasis,
    alpha: float,
    J_o: float,
    gram: np.ndarray,
    *,
    robust: bool,
    sigma_w: float | None = None,
) -> LMIProgram:
    prog = LMIProgram(name)
    m_e = setup.m_e
    beta = prog.rect("beta", m_e, basis.n_beta_cols).expr
    objective = add_quadratic_cost(prog, "R_a", _selector(beta, m_e), gram)
    multipliers = declare_multipliers(prog, robust, sigma_w)
    add_bounded_real(prog, ErrorPlant.for_basis(setup, basis, robust), beta, multipliers)
    prog.add_inequality(multipliers.bound(setup), (1.0 + alpha) * J_o, name="worst_case_budget")
    prog.minimize(objective)
    return prog


def build_prob5(setup: EstimationSetup, basis: EstimatorBasis, alpha: float, J_o2: float) -> LMIProgram:
    return _build_signal_ball("prob5", setup, basis, alpha, J_o2, eta_a_gram(setup, basis), robust=False)


def build_prob6(
    setup: EstimationSetup,
    basis: EstimatorBasis,
    alpha: float,
    J_o3: float,
    sigma_w: float | None = None,
) -> LMIProgram:
    """``sigma_w`` is a joint variable unless given; the program is affine either way."""
    gram = eta_b_gram(setup, basis)
    return _build_signal_ball("prob6", setup, basis, alpha, J_o3, gram, robust=True, sigma_w=sigma_w)


def _signal_ball_report(
    problem: str,
    setup: EstimationSetup,
    basis: EstimatorBasis,
    solution: SDPSolution,
    budget: float,
    sigma_w: float | None,
) -> SynthesisReport:
    multipliers = {"sigma_y": solution["sigma_y"], "sigma_v": solution["sigma_v"]}
    if "sigma_w" in solution.values:
        multipliers["sigma_w"] = solution["sigma_w"]
    elif sigma_w is not None:
        multipliers["sigma_w"] = sigma_w
    worst = multipliers["sigma_y"] * setup.gamma_y**2 + multipliers["sigma_v"] * setup.gamma_v**2
    return _report(problem, setup, basis, solution, multipliers, budget, worst)


def solve_prob5(
    setup: EstimationSetup,
    alpha: float,
    minimax: SynthesisReport | None = None,
) -> SynthesisReport:
    """a/w design in the class spanned by the nominal H-infinity minimax estimator."""
    minimax = minimax or solve_prob2(setup)
    check_alpha(alpha, minimax)
    basis, _ = basis_from_estimator(minimax.estimator)
    budget = (1.0 + alpha) * minimax.optimal_value
    solution = require_optimal(minimize(build_prob5(setup, basis, alpha, minimax.optimal_value)), "prob5")
    return _signal_ball_report("prob5", setup, basis, solution, budget, None)


def solve_prob6(
    setup: EstimationSetup,
    alpha: float,
    minimax: SynthesisReport | None = None,
    sigma_w: float | None = None,
) -> SynthesisReport:
    if setup.gamma_H == 0:
        report = solve_prob5(setup, alpha, minimax)
        report.problem = "prob6"
        return report
    minimax = minimax or solve_prob3(setup)
    check_alpha(alpha, minimax)
    basis, _ = basis_from_estimator(minimax.estimator)
    budget = (1.0 + alpha) * minimax.optimal_value
    prog = build_prob6(setup, basis, alpha, minimax.optimal_value, sigma_w)
    solution = require_optimal(minimize(prog), "prob6")
    return _signal_ball_report("prob6", setup, basis, solution, budget, sigma_w)
