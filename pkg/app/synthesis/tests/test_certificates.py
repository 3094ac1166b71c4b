import pytest

from app.synthesis import certificates
from app.synthesis.basis import EstimatorBasis
from app.synthesis.certificates import certify
from app.synthesis.certificates import record_check
from app.synthesis.certificates import within
from app.synthesis.minimax import solve_prob1
from app.synthesis.results import SynthesisReport

from .factories import StaticSetupFactory


@pytest.fixture
def static_report():
    setup = StaticSetupFactory()
    return setup, solve_prob1(setup, EstimatorBasis.static(1))


def _bare(report: SynthesisReport, **diagnostics) -> SynthesisReport:
    return SynthesisReport(
        problem=report.problem,
        estimator=report.estimator,
        optimal_value=report.optimal_value,
        diagnostics=dict(diagnostics),
    )


def test_within_allows_relative_slack():
    assert within(1.0 + 1e-5, 1.0)
    assert not within(1.01, 1.0)


def test_solved_report_carries_passing_checks(static_report):
    _, report = static_report
    assert report.checks
    assert all(report.checks.values())
    assert report.passed


def test_report_without_checks_is_not_passed(static_report):
    _, report = static_report
    assert not _bare(report).passed


def test_failed_check_fails_the_report(static_report):
    _, report = static_report
    assert not record_check(report, "extra", 2.0, 1.0)
    assert report.checks["extra"] is False
    assert report.diagnostics["extra_value"] == 2.0
    assert not report.passed


def test_recovered_bound_fails_when_the_estimator_underperforms(static_report, monkeypatch):
    setup, report = static_report
    monkeypatch.setattr(certificates, "worst_case_mse", lambda G, setup: 10.0 * report.optimal_value + 1.0)
    certified = certify(_bare(report), setup)
    assert certified.checks == {"recovered_bound": False}
    assert not certified.passed


def test_budget_and_bound_are_checked_separately(static_report, monkeypatch):
    setup, report = static_report
    monkeypatch.setattr(certificates, "worst_case_mse", lambda G, setup: 2.0)
    certified = certify(_bare(report, budget=3.0, worst_case_bound=1.0), setup)
    assert certified.checks == {"within_budget": True, "bound_dominates": False}
    assert not certified.passed
