"""What each experiment command computes, independent of files and argument parsing.

Every runner returns a :class:`ReportBundle`; the commands write it.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np
from django.conf import settings

from app.evaluation.exceptions import MetricNotApplicableError
from app.evaluation.improvement import eta_rw
from app.evaluation.improvement import hinf_improvement_bounds
from app.evaluation.improvement import improvement_metrics
from app.evaluation.metrics import mse
from app.evaluation.metrics import nominal_hinf
from app.evaluation.metrics import robust_hinf
from app.evaluation.metrics import worst_case_mse
from app.evaluation.montecarlo import mc_improvement
from app.evaluation.montecarlo import path_profile
from app.evaluation.montecarlo import required_samples
from app.evaluation.montecarlo import signal_mc
from app.evaluation.perturbation import perturbation_quadratic
from app.evaluation.perturbation import sample_ball
from app.lti.systems import StateSpace
from app.synthesis.average import solve_prob4
from app.synthesis.average import solve_prob5
from app.synthesis.average import solve_prob6
from app.synthesis.basis import make_nominal_basis
from app.synthesis.certificates import within
from app.synthesis.criteria import AverageCriterion
from app.synthesis.criteria import eta_a
from app.synthesis.criteria import eta_av
from app.synthesis.criteria import eta_b
from app.synthesis.criteria import eta_fir
from app.synthesis.minimax import solve_prob1
from app.synthesis.minimax import solve_prob2
from app.synthesis.minimax import solve_prob3
from app.synthesis.results import SynthesisReport

from .exceptions import ConfigError
from .reports import ReportBundle
from .serializers import ProblemConfig
from .serializers import ProblemKind
from .serializers import SynthesisKind

logger = logging.getLogger(__name__)

MINIMAX = "G_M"
AVERAGE = "G_av"

CERTIFICATE_SAMPLES = 1000
DEFAULT_CHECK_FIR_LENGTH = 4


def _report_dict(report: SynthesisReport) -> dict[str, Any]:
    """Synthesis report without wall-clock fields, so bundles only depend on their inputs."""
    data = report.to_dict()
    data["diagnostics"] = {key: value for key, value in data["diagnostics"].items() if key != "solve_time"}
    return data


# Synthesis


def synthesize(config: ProblemConfig, *, minimax_only: bool = False) -> dict[str, SynthesisReport]:
    """``G_M`` always; ``G_av`` too for a/w configs."""
    setup = config.setup
    want_average = config.synthesis is SynthesisKind.AW and not minimax_only
    reports: dict[str, SynthesisReport] = {}
    if config.problem is ProblemKind.H2:
        basis = make_nominal_basis(setup)
        reports[MINIMAX] = solve_prob1(setup, basis)
        if want_average:
            reports[AVERAGE] = solve_prob4(setup, config.alpha, reports[MINIMAX], basis)
    elif config.problem is ProblemKind.HINF_NOMINAL:
        reports[MINIMAX] = solve_prob2(setup)
        if want_average:
            reports[AVERAGE] = solve_prob5(setup, config.alpha, reports[MINIMAX])
    else:
        reports[MINIMAX] = solve_prob3(setup)
        if want_average:
            reports[AVERAGE] = solve_prob6(setup, config.alpha, reports[MINIMAX])
    return reports


# Pointwise / worst-case / average evaluation


def worst_case(config: ProblemConfig, G: StateSpace) -> float:
    if config.problem is ProblemKind.H2:
        return worst_case_mse(G, config.setup)
    if config.problem is ProblemKind.HINF_NOMINAL:
        return nominal_hinf(G, config.setup)
    return robust_hinf(G, config.setup)


def average(config: ProblemConfig, G: StateSpace) -> AverageCriterion:
    if config.problem is ProblemKind.H2:
        return eta_av(G, config.setup)
    if config.problem is ProblemKind.HINF_NOMINAL:
        return eta_a(G, config.setup)
    return eta_b(G, config.setup)


def nominal(config: ProblemConfig, G: StateSpace, criterion: AverageCriterion) -> float:
    if config.problem is ProblemKind.H2:
        return mse(G, config.setup.H0, config.setup)
    return criterion.nominal


def relative_improvement(config: ProblemConfig, G: StateSpace, G_M: StateSpace) -> float:
    """``eta_RW`` over the channel ball, or the grid bound on ``eta_R`` over the signal balls."""
    if config.problem is ProblemKind.H2:
        return eta_rw(G, G_M, config.setup).value
    _, eta_R = hinf_improvement_bounds(G, G_M, config.setup)
    return eta_R


def evaluate_estimator(
    config: ProblemConfig,
    name: str,
    G: StateSpace,
    G_M: StateSpace | None,
) -> tuple[dict[str, Any], dict[str, Any]]:
    """Table row and full-precision metrics for one estimator."""
    criterion = average(config, G)
    row = {
        "estimator": name,
        "worst_case": worst_case(config, G),
        "average": criterion.value,
        "nominal": nominal(config, G, criterion),
        "eta_RW": 1.0 if G_M is None or G is G_M else relative_improvement(config, G, G_M),
    }
    metrics: dict[str, Any] = {**row, "average_criterion": criterion.to_dict()}
    if config.problem is ProblemKind.H2:
        metrics["eta_a"] = eta_a(G, config.setup).to_dict() if config.setup.gamma_y else None
        metrics["eta_fir"] = {str(L): eta_fir(G, config.setup, L + 1).to_dict() for L in config.mc.fir_lengths}
    logger.info(
        "%s: worst case %.6g, average %.6g, nominal %.6g, eta_RW %.4g",
        name,
        row["worst_case"],
        row["average"],
        row["nominal"],
        row["eta_RW"],
    )
    return row, metrics


def improvement_summary(config: ProblemConfig, G: StateSpace, G_M: StateSpace) -> dict[str, Any]:
    """How ``G`` compares with ``G_M`` beyond the table: ``mu_I``, ``eta_PW`` or the signal-ball bounds."""
    if config.problem is ProblemKind.H2:
        try:
            return improvement_metrics(G, G_M, config.setup).to_dict()
        except MetricNotApplicableError as exc:
            return {"not_applicable": str(exc)}
    eta_P, eta_R = hinf_improvement_bounds(G, G_M, config.setup)
    return {"eta_P_lower": eta_P, "eta_R_upper": eta_R, "grid_points": settings.LTI_SUP_GRID}


# Certificate checks


def _check_fir_length(config: ProblemConfig) -> int:
    lengths = config.mc.fir_lengths or [DEFAULT_CHECK_FIR_LENGTH]
    return min(lengths)


def sampled_dominance(config: ProblemConfig, G: StateSpace, bound: float, seed: int) -> bool:
    """``bound`` is not beaten by the MSE at sampled channels of the ball."""
    setup = config.setup
    quadratic = perturbation_quadratic(G, setup, _check_fir_length(config))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    thetas = sample_ball(quadratic.dim, setup.gamma, rng, size=CERTIFICATE_SAMPLES)
    sampled = float(np.max(quadratic(thetas)))
    return within(sampled, bound)


def certificate_checks(
    config: ProblemConfig,
    name: str,
    report: SynthesisReport,
    worst: float,
    seed: int,
) -> dict[str, bool]:
    """The synthesis checks of ``report`` plus, for H2 balls, sampled dominance of ``worst``."""
    checks = {f"{name}_{key}": value for key, value in report.checks.items()}
    if config.problem is ProblemKind.H2:
        checks[f"{name}_worst_case_dominates_samples"] = sampled_dominance(config, report.estimator, worst, seed)
    return checks


# Runners


def design_bundle(config: ProblemConfig, reports: dict[str, SynthesisReport], seed: int) -> ReportBundle:
    """Table and certificates for the synthesized estimators."""
    bundle = ReportBundle()
    G_M = reports[MINIMAX].estimator
    bundle.metrics["config"] = {"name": config.name, "problem": str(config.problem), "radius_base": config.radius_base}
    bundle.metrics["synthesis"] = {name: _report_dict(report) for name, report in reports.items()}
    bundle.metrics["estimators"] = {}
    for name, report in reports.items():
        row, metrics = evaluate_estimator(config, name, report.estimator, None if name == MINIMAX else G_M)
        bundle.rows.append(row)
        bundle.metrics["estimators"][name] = metrics
        bundle.estimators[name] = report.estimator
        bundle.checks.update(certificate_checks(config, name, report, row["worst_case"], seed))
    if AVERAGE in reports:
        bundle.metrics["improvement"] = improvement_summary(config, reports[AVERAGE].estimator, G_M)
        bundle.metrics["delta_Jo"] = _row(bundle, AVERAGE)["nominal"] - _row(bundle, MINIMAX)["nominal"]
    return bundle


def _row(bundle: ReportBundle, name: str) -> dict[str, Any]:
    return next(row for row in bundle.rows if row["estimator"] == name)


def evaluation_bundle(
    config: ProblemConfig,
    name: str,
    G: StateSpace,
    minimax: SynthesisReport,
) -> ReportBundle:
    """A given estimator against the minimax design of the same config."""
    bundle = ReportBundle()
    G_M = minimax.estimator
    bundle.metrics["config"] = {"name": config.name, "problem": str(config.problem), "radius_base": config.radius_base}
    bundle.metrics["synthesis"] = {MINIMAX: _report_dict(minimax)}
    bundle.metrics["estimators"] = {}
    for label, estimator, reference in ((name, G, G_M), (MINIMAX, G_M, None)):
        row, metrics = evaluate_estimator(config, label, estimator, reference)
        bundle.rows.append(row)
        bundle.metrics["estimators"][label] = metrics
    bundle.metrics["improvement"] = improvement_summary(config, G, G_M)
    return bundle


def mc_bundle(
    config: ProblemConfig,
    reports: dict[str, SynthesisReport],
    seed: int,
    threads: int | None = None,
) -> ReportBundle:
    """Monte-Carlo experiments comparing ``G_av`` with ``G_M``."""
    if AVERAGE not in reports:
        msg = "Monte-Carlo runs compare the a/w estimator with the minimax one; set synthesis.kind to 'aw'"
        raise ConfigError(msg)
    G, G_M = reports[AVERAGE].estimator, reports[MINIMAX].estimator
    options = config.mc
    bundle = ReportBundle()
    if config.problem is ProblemKind.H2:
        n_samples = options.samples or required_samples(options.epsilon, options.delta)
        for fir_length in options.fir_lengths:
            result = mc_improvement(
                G,
                G_M,
                config.setup,
                fir_length,
                n_samples,
                seed,
                epsilon=options.epsilon,
                delta=options.delta,
                threads=threads,
            )
            bundle.mc_rows.append({"experiment": "channel", **result.to_dict()})
        if options.path_points:
            path_length = options.path_fir_length or _check_fir_length(config)
            points = path_profile(G, G_M, config.setup, path_length, options.path_points, seed)
            positions = np.array([point.position for point in points])
            bundle.curves[f"J_{AVERAGE}"] = np.column_stack([positions, [point.J_G for point in points]])
            bundle.curves[f"J_{MINIMAX}"] = np.column_stack([positions, [point.J_M for point in points]])
            bundle.curves["ratio"] = np.column_stack([positions, [point.ratio for point in points]])
            bundle.metrics["path"] = {
                "fir_length": path_length,
                "best_ratio": points[0].ratio,
                "nominal_ratio": points[len(points) // 2].ratio,
                "worst_ratio": points[-1].ratio,
            }
    elif options.signals:
        for fir_length in options.fir_lengths or [DEFAULT_CHECK_FIR_LENGTH]:
            result = signal_mc(G, G_M, config.setup, options.signals, fir_length + 1, seed)
            bundle.mc_rows.append({"experiment": "signals", **result.to_dict()})
    bundle.metrics["monte_carlo"] = bundle.mc_rows
    return bundle
