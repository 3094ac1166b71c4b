import math

import numpy as np
import pytest

from app.evaluation.exceptions import EvaluationError
from app.evaluation.exceptions import SampleSizeError
from app.evaluation.montecarlo import chunk_payloads
from app.evaluation.montecarlo import hoeffding_half_width
from app.evaluation.montecarlo import mc_improvement
from app.evaluation.montecarlo import path_profile
from app.evaluation.montecarlo import required_samples
from app.evaluation.montecarlo import signal_error_gram
from app.evaluation.montecarlo import signal_mc
from app.evaluation.perturbation import PerturbationQuadratic
from app.lti.systems import StateSpace
from app.synthesis.tests.factories import EstimationSetupFactory
from app.synthesis.tests.factories import SignalBallSetupFactory

G = StateSpace.static([[0.55]])
G_M = StateSpace([[0.2]], [[1.0]], [[0.1]], [[0.8]])


def test_required_samples():
    assert required_samples(0.01, 0.01) == 26492
    assert required_samples(0.05, 0.05) == 738


@pytest.mark.parametrize(
    ("epsilon", "delta"),
    [(0.01, 0.01), (0.02, 0.01), (0.01, 0.05), (0.05, 0.001)],
)
def test_required_samples_is_the_two_sided_hoeffding_size(epsilon, delta):
    assert required_samples(epsilon, delta) == math.ceil(math.log(2.0 / delta) / (2.0 * epsilon**2))


def test_hoeffding_half_width_inverts_required_samples():
    n = required_samples(0.02, 0.05)
    assert hoeffding_half_width(n, 0.05) <= 0.02
    assert hoeffding_half_width(n - 1, 0.05) > 0.02


def test_chunks_cover_the_samples_with_distinct_streams():
    quadratic = PerturbationQuadratic(1.0, np.zeros(2), np.eye(2))
    payloads = chunk_payloads(quadratic, quadratic, 1.0, n_samples=4500, seed=7, chunk_size=2000)
    assert [payload["count"] for payload in payloads] == [2000, 2000, 500]
    assert len({tuple(payload["spawn_key"]) for payload in payloads}) == 3


def test_too_few_samples_are_rejected():
    with pytest.raises(SampleSizeError):
        mc_improvement(G, G_M, EstimationSetupFactory(), 2, 1000, seed=1)


@pytest.fixture
def mc_result(settings):
    settings.CELERY_TASK_ALWAYS_EAGER = True
    return mc_improvement(G, G_M, EstimationSetupFactory(gamma=0.3), 3, 4000, seed=5, epsilon=0.05, delta=0.05)


def test_mc_improvement_counts(mc_result):
    assert mc_result.samples == 4000
    assert 0 <= mc_result.improved <= 4000
    assert mc_result.frequency == pytest.approx(mc_result.improved / 4000)
    assert mc_result.epsilon == pytest.approx(hoeffding_half_width(4000, 0.05))
    assert mc_result.min_ratio <= mc_result.max_ratio


def test_mc_improvement_is_reproducible(settings, mc_result):
    again = mc_improvement(G, G_M, EstimationSetupFactory(gamma=0.3), 3, 4000, seed=5, epsilon=0.05, delta=0.05)
    assert again == mc_result


def test_mc_improvement_does_not_depend_on_threads(settings, mc_result):
    threaded = mc_improvement(
        G,
        G_M,
        EstimationSetupFactory(gamma=0.3),
        3,
        4000,
        seed=5,
        epsilon=0.05,
        delta=0.05,
        threads=3,
    )
    assert threaded == mc_result


def test_path_profile_runs_from_best_to_worst():
    setup = EstimationSetupFactory(gamma=0.3)
    points = path_profile(G, G_M, setup, 3, 11, seed=2)
    assert len(points) == 11
    assert points[0].position == -1.0
    assert points[5].position == 0.0
    assert points[-1].position == 1.0
    differences = [point.J_G - point.J_M for point in points]
    assert differences[0] <= differences[5] <= differences[-1]


def test_path_profile_needs_odd_point_count():
    with pytest.raises(EvaluationError, match="odd"):
        path_profile(G, G_M, EstimationSetupFactory(), 3, 10)


def test_signal_error_gram_of_identity_reference():
    setup = SignalBallSetupFactory()
    Q = signal_error_gram(StateSpace.zeros(1, 1), setup, 3)
    # e = y when the estimator is zero
    assert np.allclose(Q, np.diag([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]))


def test_signal_mc_against_itself_never_improves():
    setup = SignalBallSetupFactory()
    result = signal_mc(G_M, G_M, setup, 200, 4, seed=1)
    assert result.improved == 0
    assert result.sup_error_G == result.sup_error_M
