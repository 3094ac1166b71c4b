"""Post-solve checks that a synthesized estimator meets the bound it was designed for.

Each check re-evaluates the returned estimator with the fixed-estimator
programs of ``app.evaluation.metrics`` and stores the outcome in
``SynthesisReport.checks``.
"""

from __future__ import annotations

import logging

from app.evaluation.metrics import nominal_hinf
from app.evaluation.metrics import robust_hinf
from app.evaluation.metrics import worst_case_mse

from .results import SynthesisReport
from .setup import EstimationSetup

logger = logging.getLogger(__name__)

CERTIFICATE_RTOL = 1e-4


def within(value: float, bound: float, rtol: float = CERTIFICATE_RTOL) -> bool:
    return value <= bound + rtol * (1.0 + abs(bound))


def record_check(report: SynthesisReport, name: str, value: float, bound: float) -> bool:
    """Store ``value <= bound`` (up to ``CERTIFICATE_RTOL``) under ``name``."""
    passed = within(value, bound)
    report.checks[name] = passed
    report.diagnostics[f"{name}_value"] = value
    if not passed:
        logger.warning("%s: check %s failed, %.8g exceeds %.8g", report.problem, name, value, bound)
    return passed


def certified_value(report: SynthesisReport, setup: EstimationSetup) -> float:
    """The worst case of ``report.estimator`` under the criterion its problem certifies."""
    if report.problem in ("prob1", "prob4"):
        return worst_case_mse(report.estimator, setup)
    if report.problem in ("prob3", "prob6") and setup.gamma_H > 0:
        return robust_hinf(report.estimator, setup)
    return nominal_hinf(report.estimator, setup)


def certify(report: SynthesisReport, setup: EstimationSetup) -> SynthesisReport:
    """Minimax problems check the recovered bound, a/w problems the worst-case budget."""
    value = certified_value(report, setup)
    if "budget" in report.diagnostics:
        record_check(report, "within_budget", value, report.diagnostics["budget"])
        record_check(report, "bound_dominates", value, report.diagnostics["worst_case_bound"])
    else:
        record_check(report, "recovered_bound", value, report.optimal_value)
    return report
