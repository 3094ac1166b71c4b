"""Minimax estimator synthesis.

* Problem 1: minimax MSE over the weighted H2 channel ball, over ``G(beta)``.
* Problem 2: nominal H-infinity estimation with independent signal balls,
  full order, through the projected LMIs in ``(R, S, sigma)`` followed by
  reconstruction of the Lyapunov matrix and recovery of the realization.
* Problem 3: the robust variant over a weighted H-infinity channel ball,
  affine for fixed ``sigma_w`` and solved by a line search in ``sigma_w``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

import cvxpy as cp
import numpy as np
from django.conf import settings
from scipy import linalg
from scipy import optimize

from app.lmi.program import LMIProgram
from app.lmi.program import SDPSolution
from app.lmi.program import feasible_point
from app.lmi.program import minimize
from app.lmi.variables import block
from app.lmi.variables import zeros
from app.lti.exceptions import NotPositiveSemidefiniteError
from app.lti.linalg import min_eigenvalue
from app.lti.linalg import psd_sqrt
from app.lti.linalg import symmetrize
from app.lti.systems import StateSpace

from .basis import EstimatorBasis
from .basis import make_nominal_basis
from .certificates import certify
from .exceptions import CouplingViolationError
from .exceptions import RecoveryInfeasibleError
from .exceptions import SolveFailedError
from .plants import ChannelBallPlant
from .plants import SignalBallPlant
from .plants import add_mse_bound
from .plants import declare_multipliers
from .plants import uncertainty_term
from .results import SynthesisReport
from .setup import EstimationSetup

logger = logging.getLogger(__name__)

COUPLING_TOL = 1e-8
# Budget slack for the recovery LMI, relative and absolute.
RECOVERY_SLACK = 1e-5
# Slack on the optimal bound while (R, S) are re-centred; below RECOVERY_SLACK.
CENTERING_SLACK = 1e-7
MAX_BRACKET_EXPANSIONS = 3
INFEASIBLE_PENALTY = 1e30


def require_optimal(solution: SDPSolution, what: str) -> SDPSolution:
    if not solution.is_optimal:
        msg = f"{what}: solver returned {solution.status} ({solution.message})"
        raise SolveFailedError(msg, solution)
    return solution


# Problem 1


def build_prob1(setup: EstimationSetup, basis: EstimatorBasis) -> LMIProgram:
    prog = LMIProgram("prob1")
    plant = ChannelBallPlant.for_basis(setup, basis)
    beta = prog.rect("beta", setup.m_e, basis.n_beta_cols)
    bound = add_mse_bound(prog, plant, beta.expr)
    prog.minimize(bound.bound)
    return prog


def solve_prob1(setup: EstimationSetup, basis: EstimatorBasis | None = None) -> SynthesisReport:
    basis = basis or make_nominal_basis(setup)
    solution = require_optimal(minimize(build_prob1(setup, basis)), "prob1")
    beta = np.atleast_2d(solution["beta"])
    multipliers = {"lambda": solution["lambda"]} if "lambda" in solution.values else {}
    logger.info("prob1: worst-case MSE %.6g with n_G=%d", solution.objective, basis.n_G)
    report = SynthesisReport(
        problem="prob1",
        estimator=basis.estimator(beta),
        optimal_value=solution.objective,
        multipliers=multipliers,
        certificate={"Q": solution["Q"]},
        diagnostics=solution.diagnostics(),
        beta=beta,
        basis_order=basis.n_G,
    )
    return certify(report, setup)


def static_scalar_minimax(
    h0: float,
    sigma_y: float,
    sigma_v: float,
    gamma: float,
    h_I: float = 1.0,
) -> tuple[float, float]:
    """Minimax static gain for scalar static data: ``min_g (|h_I - g h0| s_y + |g| s_y gamma)^2 + g^2 s_v^2``."""

    def worst(g: float) -> float:
        return (abs(h_I - g * h0) * sigma_y + abs(g) * sigma_y * gamma) ** 2 + (g * sigma_v) ** 2

    if h0 == 0:
        return 0.0, worst(0.0)
    ends = sorted((0.0, h_I / h0))
    result = optimize.minimize_scalar(worst, bounds=ends, method="bounded", options={"xatol": 1e-12})
    g = float(result.x)
    return g, worst(g)


# Problems 2 and 3: projected LMIs


def _projection_program(
    name: str,
    setup: EstimationSetup,
    plant: SignalBallPlant,
    sigma_w: float | None,
) -> LMIProgram:
    """Elimination-lemma LMIs ``Q_a(R, sigma) > 0``, ``Q_b(S, sigma) > 0`` and the coupling."""
    prog = LMIProgram(name)
    n = plant.n_states
    multipliers = declare_multipliers(prog, plant.robust, sigma_w)
    M = multipliers.matrix(plant.inputs)
    R = prog.sym("R", n) if n else None
    S = prog.sym("S", n) if n else None
    R_expr = R.expr if R is not None else zeros(0, 0)
    A, B1 = plant.A, plant.B

    if plant.robust:
        weight = sigma_w * plant.gamma_H**2
        m_q = plant.Cq.shape[0]
        Q_a = block(
            [
                [R_expr - A @ R_expr @ A.T, B1, -(A @ R_expr @ plant.Cq.T)],
                [B1.T, M, plant.Dq.T],
                [-(plant.Cq @ R_expr @ A.T), plant.Dq, np.eye(m_q) / weight - plant.Cq @ R_expr @ plant.Cq.T],
            ],
        )
    else:
        Q_a = block([[R_expr - A @ R_expr @ A.T, B1], [B1.T, M]])
    prog.add_lmi(Q_a, name="Q_a", strict=True)

    k = B1.shape[1]
    AB = np.hstack([A, B1])
    CD1 = np.hstack([plant.C1, plant.D11])
    storage = block([[S, zeros(n, k)], [zeros(k, n), M]]) - AB.T @ S.expr @ AB if S is not None else M
    inner = storage - CD1.T @ CD1 - uncertainty_term(plant.Cq, plant.Dq, multipliers, plant.gamma_H)
    N_S = linalg.null_space(np.hstack([plant.C2, plant.D21]))
    if N_S.shape[1]:
        prog.add_lmi(N_S.T @ inner @ N_S, name="Q_b", strict=True)

    if n:
        prog.add_lmi(block([[S, np.eye(n)], [np.eye(n), R]]), name="coupling")
    prog.minimize(multipliers.bound(setup))
    return prog


def build_prob2d(setup: EstimationSetup, plant: SignalBallPlant | None = None) -> LMIProgram:
    plant = plant or SignalBallPlant.from_setup(setup, robust=False)
    return _projection_program("prob2d", setup, plant, None)


def build_prob3a(
    setup: EstimationSetup,
    sigma_w: float,
    plant: SignalBallPlant | None = None,
) -> LMIProgram:
    plant = plant or SignalBallPlant.from_setup(setup, robust=True)
    return _projection_program("prob3a", setup, plant, sigma_w)


def reconstruct_P(S_o: np.ndarray, R_o: np.ndarray) -> np.ndarray:
    """``P = [[S, (S - R^{-1})^{1/2}], [(.)', I]]`` so that ``(P^{-1})_11 = R``."""
    S_o = symmetrize(S_o)
    R_o = symmetrize(R_o)
    n = S_o.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    coupling = np.block([[S_o, np.eye(n)], [np.eye(n), R_o]])
    scale = max(1.0, float(np.linalg.norm(coupling, 2)))
    if min_eigenvalue(coupling) < -COUPLING_TOL * scale:
        msg = f"[[S, I], [I, R]] has eigenvalue {min_eigenvalue(coupling):.3e}"
        raise CouplingViolationError(msg)
    try:
        Q_SR = psd_sqrt(S_o - np.linalg.inv(R_o))
    except (NotPositiveSemidefiniteError, np.linalg.LinAlgError) as exc:
        raise CouplingViolationError(str(exc)) from exc
    P = np.block([[S_o, Q_SR], [Q_SR.T, np.eye(n)]])
    if min_eigenvalue(P) <= 0.0:
        msg = "reconstructed P is not positive definite"
        raise CouplingViolationError(msg)
    return P


def recover_theta(
    setup: EstimationSetup,
    plant: SignalBallPlant,
    P: np.ndarray,
    budget: float,
    sigma_w: float | None = None,
) -> tuple[StateSpace, SDPSolution]:
    """Find ``theta = [[A_G, B_G], [C_G, D_G]]`` making the bounded-real LMI hold with ``P``.

    The LMI is affine in ``theta`` for fixed ``P``; the multipliers are
    re-chosen within ``sigma_y gamma_y^2 + sigma_v gamma_v^2 <= budget``.
    """
    n = plant.n_states
    n_G = P.shape[0] - n
    m_e, m_v, k = plant.C1.shape[0], plant.C2.shape[0], plant.B.shape[1]
    prog = LMIProgram("recover_theta")
    theta = prog.rect("theta", n_G + m_e, n_G + m_v).expr
    multipliers = declare_multipliers(prog, plant.robust, sigma_w)
    prog.add_inequality(multipliers.bound(setup), budget, name="budget")

    B2 = np.vstack([np.zeros((n, n_G + m_e)), np.hstack([np.eye(n_G), np.zeros((n_G, m_e))])])
    C2 = np.vstack([np.hstack([np.zeros((n_G, n)), np.eye(n_G)]), np.hstack([plant.C2, np.zeros((m_v, n_G))])])
    D21 = np.vstack([np.zeros((n_G, k)), plant.D21])
    D12 = np.hstack([np.zeros((m_e, n_G)), -np.eye(m_e)])
    A_cl = linalg.block_diag(plant.A, np.zeros((n_G, n_G))) + B2 @ theta @ C2
    B_cl = np.vstack([plant.B, np.zeros((n_G, k))]) + B2 @ theta @ D21
    C_cl = np.hstack([plant.C1, np.zeros((m_e, n_G))]) + D12 @ theta @ C2
    D_cl = plant.D11 + D12 @ theta @ D21
    N = n + n_G
    P_inv = np.linalg.inv(P) if N else P
    M = multipliers.matrix(plant.inputs)

    rows = [
        [P_inv, A_cl, B_cl, zeros(N, m_e)],
        [A_cl.T, P, zeros(N, k), C_cl.T],
        [B_cl.T, zeros(k, N), M, D_cl.T],
        [zeros(m_e, N), C_cl, D_cl, np.eye(m_e)],
    ]
    if plant.robust:
        m_q = plant.Cq.shape[0]
        Cq_cl = np.hstack([plant.Cq, np.zeros((m_q, n_G))])
        rows[0].append(zeros(N, m_q))
        rows[1].append(Cq_cl.T)
        rows[2].append(plant.Dq.T)
        rows[3].append(zeros(m_e, m_q))
        rows.append([zeros(m_q, N), Cq_cl, plant.Dq, zeros(m_q, m_e), np.eye(m_q) / (sigma_w * plant.gamma_H**2)])
    prog.add_lmi(block(rows), name="bounded_real", strict=True)

    solution = feasible_point(prog)
    if not solution.is_optimal:
        msg = f"estimator recovery failed: {solution.status} (margin {solution.margins.get('t')})"
        raise RecoveryInfeasibleError(msg)
    value = np.atleast_2d(solution["theta"])
    G = StateSpace(value[:n_G, :n_G], value[:n_G, n_G:], value[n_G:, :n_G], value[n_G:, n_G:])
    if not G.is_stable:
        msg = f"recovered estimator is unstable (spectral radius {G.spectral_radius:.6f})"
        raise RecoveryInfeasibleError(msg)
    return G, solution


def _recovery_budget(value: float) -> float:
    return value * (1.0 + RECOVERY_SLACK) + RECOVERY_SLACK


def centered_solution(build: Callable[[], LMIProgram], solution: SDPSolution) -> SDPSolution:
    """Re-solve with the bound held at its optimum, minimizing ``tr R + tr S``.

    The projected LMIs stay feasible as ``R`` grows without limit, so the
    optimal pair can be arbitrarily ill conditioned; recovery needs a
    well-conditioned ``P``.
    """
    prog = build()
    if "R" not in prog.variables:
        return solution
    prog.name = f"{prog.name}_centered"
    value = solution.objective
    prog.add_inequality(prog.objective, value * (1.0 + CENTERING_SLACK) + CENTERING_SLACK, name="optimal_bound")
    prog.minimize(cp.trace(prog.variables["R"].expr) + cp.trace(prog.variables["S"].expr))
    centered = minimize(prog)
    if not centered.is_optimal:
        logger.warning("%s: %s, keeping the uncentred solution", prog.name, centered.status)
        return solution
    return centered


def _finish_projection(
    problem: str,
    setup: EstimationSetup,
    plant: SignalBallPlant,
    solution: SDPSolution,
    sigma_w: float | None,
    build: Callable[[], LMIProgram],
) -> SynthesisReport:
    n = plant.n_states
    first = solution
    value = first.objective
    solution = centered_solution(build, first)
    S_o = np.atleast_2d(solution["S"]) if n else np.zeros((0, 0))
    R_o = np.atleast_2d(solution["R"]) if n else np.zeros((0, 0))
    P = reconstruct_P(S_o, R_o)
    multipliers = {"sigma_y": solution["sigma_y"], "sigma_v": solution["sigma_v"]}
    bound = multipliers["sigma_y"] * setup.gamma_y**2 + multipliers["sigma_v"] * setup.gamma_v**2
    G, recovery = recover_theta(setup, plant, P, _recovery_budget(max(value, bound)), sigma_w)
    if sigma_w is not None:
        multipliers["sigma_w"] = sigma_w
    diagnostics = first.diagnostics()
    diagnostics["centered"] = solution is not first
    diagnostics["recovery_margin"] = recovery.margins.get("t")
    diagnostics["P_condition"] = float(np.linalg.cond(P)) if n else 1.0
    logger.info("%s: bound %.6g, estimator order %d", problem, value, G.n_states)
    report = SynthesisReport(
        problem=problem,
        estimator=G,
        optimal_value=value,
        multipliers=multipliers,
        certificate={"S": S_o, "R": R_o, "P": P},
        diagnostics=diagnostics,
        basis_order=G.n_states,
    )
    return certify(report, setup)


def solve_prob2(setup: EstimationSetup) -> SynthesisReport:
    plant = SignalBallPlant.from_setup(setup, robust=False)

    def build() -> LMIProgram:
        return build_prob2d(setup, plant)

    solution = require_optimal(minimize(build()), "prob2d")
    return _finish_projection("prob2", setup, plant, solution, None, build)


def line_search_sigma_w(evaluate: Callable[[float], SDPSolution]) -> tuple[float, SDPSolution]:
    """Minimize the optimum over ``log10(sigma_w)``: decade grid, then bounded Brent.

    When no decade of the configured bracket is feasible the bracket is widened
    by a decade on each side, up to three times.
    """
    low, high = (math.log10(bound) for bound in settings.SYNTHESIS_SIGMA_W_BOUNDS)
    rtol = settings.SYNTHESIS_SIGMA_W_RTOL
    solutions: dict[float, SDPSolution] = {}

    def objective(log_sigma: float) -> float:
        if log_sigma not in solutions:
            solutions[log_sigma] = evaluate(10.0**log_sigma)
            solution = solutions[log_sigma]
            logger.debug("sigma_w=%.4g: %s %.8g", 10.0**log_sigma, solution.status, solution.objective)
        solution = solutions[log_sigma]
        return solution.objective if solution.is_optimal else INFEASIBLE_PENALTY

    for _ in range(MAX_BRACKET_EXPANSIONS + 1):
        grid = np.arange(math.ceil(low), math.floor(high) + 1, dtype=float)
        values = [objective(float(point)) for point in grid]
        if min(values) < INFEASIBLE_PENALTY:
            break
        low, high = low - 1.0, high + 1.0
    else:
        msg = "no sigma_w in the search bracket gives a feasible program"
        raise SolveFailedError(msg)

    best = float(grid[int(np.argmin(values))])
    bracket = (max(low, best - 1.0), min(high, best + 1.0))
    refined = optimize.minimize_scalar(objective, bounds=bracket, method="bounded", options={"xatol": rtol})
    candidates = [best, float(refined.x)]
    winner = min(candidates, key=objective)
    return 10.0**winner, solutions[winner]


def solve_prob3(setup: EstimationSetup) -> SynthesisReport:
    if setup.gamma_H == 0:
        report = solve_prob2(setup)
        report.problem = "prob3"
        return report
    plant = SignalBallPlant.from_setup(setup, robust=True)
    sigma_w, solution = line_search_sigma_w(lambda sigma: minimize(build_prob3a(setup, sigma, plant)))
    logger.info("prob3: sigma_w=%.6g", sigma_w)

    def build() -> LMIProgram:
        return build_prob3a(setup, sigma_w, plant)

    return _finish_projection("prob3", setup, plant, solution, sigma_w, build)
