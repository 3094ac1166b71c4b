import pytest

from app.evaluation.metrics import nominal_hinf
from app.evaluation.metrics import robust_hinf
from app.evaluation.metrics import worst_case_mse
from app.lti.systems import StateSpace
from app.synthesis.average import check_alpha
from app.synthesis.average import solve_prob4
from app.synthesis.average import solve_prob5
from app.synthesis.average import solve_prob6
from app.synthesis.basis import make_nominal_basis
from app.synthesis.criteria import eta_a
from app.synthesis.criteria import eta_av
from app.synthesis.criteria import eta_b
from app.synthesis.exceptions import AlphaBelowToleranceError
from app.synthesis.minimax import solve_prob1
from app.synthesis.minimax import solve_prob2
from app.synthesis.minimax import solve_prob3
from app.synthesis.results import SynthesisReport

from .factories import EstimationSetupFactory
from .factories import SignalBallSetupFactory


def _report(gap: float) -> SynthesisReport:
    return SynthesisReport("prob1", StateSpace.static([[0.5]]), 2.0, diagnostics={"gap": gap})


@pytest.mark.parametrize("alpha", [0.0, -0.1, 0.01])
def test_check_alpha_rejects_alpha_within_solver_gap(alpha):
    with pytest.raises(AlphaBelowToleranceError):
        check_alpha(alpha, _report(gap=0.1))


def test_check_alpha_accepts_alpha_above_gap():
    check_alpha(0.1, _report(gap=1e-6))


@pytest.fixture(scope="module")
def h2_designs():
    setup = EstimationSetupFactory(gamma=0.3)
    basis = make_nominal_basis(setup)
    minimax = solve_prob1(setup, basis)
    return setup, minimax, solve_prob4(setup, 0.1, minimax, basis)


def test_prob4_respects_the_worst_case_budget(h2_designs):
    setup, minimax, average = h2_designs
    assert average.problem == "prob4"
    assert average.diagnostics["budget"] == pytest.approx(1.1 * minimax.optimal_value)
    assert average.diagnostics["worst_case_bound"] <= average.diagnostics["budget"] * (1 + 1e-6)
    assert worst_case_mse(average.estimator, setup) <= average.diagnostics["budget"] * (1 + 1e-4)


def test_prob4_improves_the_average(h2_designs):
    setup, minimax, average = h2_designs
    assert average.optimal_value == pytest.approx(eta_av(average.estimator, setup).value, rel=1e-4)
    assert eta_av(average.estimator, setup).value <= eta_av(minimax.estimator, setup).value * (1 + 1e-6)


def test_prob4_with_large_alpha_has_slack_budget(h2_designs):
    setup, minimax, _ = h2_designs
    loose = solve_prob4(setup, 10.0, minimax)
    assert loose.diagnostics["worst_case_bound"] < loose.diagnostics["budget"]


def test_prob5_trades_worst_case_for_average():
    setup = SignalBallSetupFactory()
    minimax = solve_prob2(setup)
    average = solve_prob5(setup, 0.2, minimax)
    assert average.problem == "prob5"
    assert nominal_hinf(average.estimator, setup) <= average.diagnostics["budget"] * (1 + 1e-4)
    assert eta_a(average.estimator, setup).value <= eta_a(minimax.estimator, setup).value * (1 + 1e-4)
    assert average.optimal_value == pytest.approx(eta_a(average.estimator, setup).value, rel=1e-4)


def test_prob6_without_channel_radius_is_prob5():
    setup = SignalBallSetupFactory()
    minimax = solve_prob2(setup)
    robust = solve_prob6(setup, 0.2, minimax)
    nominal = solve_prob5(setup, 0.2, minimax)
    assert robust.problem == "prob6"
    assert robust.optimal_value == pytest.approx(nominal.optimal_value, rel=1e-4)


def test_prob4_report_checks_the_budget(h2_designs):
    _, _, average = h2_designs
    assert set(average.checks) == {"within_budget", "bound_dominates"}
    assert average.passed


@pytest.fixture(scope="module")
def robust_designs():
    setup = SignalBallSetupFactory(gamma_H=0.1)
    minimax = solve_prob3(setup)
    return setup, minimax, solve_prob6(setup, 0.2, minimax)


def test_prob6_certificate_covers_the_robust_criterion(robust_designs):
    setup, _, robust = robust_designs
    value = robust_hinf(robust.estimator, setup)
    assert robust.problem == "prob6"
    assert value <= robust.diagnostics["worst_case_bound"] * (1 + 1e-4) + 1e-6
    assert value <= robust.diagnostics["budget"] * (1 + 1e-4) + 1e-6
    assert robust.passed


def test_prob6_does_not_worsen_the_average(robust_designs):
    setup, minimax, robust = robust_designs
    assert eta_b(robust.estimator, setup).value <= eta_b(minimax.estimator, setup).value * (1 + 1e-4)
    assert robust.optimal_value == pytest.approx(eta_b(robust.estimator, setup).value, rel=1e-4)
