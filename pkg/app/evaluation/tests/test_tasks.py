import numpy as np
from celery.result import EagerResult

from app.evaluation.montecarlo import chunk_payloads
from app.evaluation.perturbation import PerturbationQuadratic
from app.evaluation.tasks import chunk_generator
from app.evaluation.tasks import evaluate_mc_chunk
from config.celery_app import app


def _payload(count: int = 500) -> dict:
    better = PerturbationQuadratic(1.0, np.zeros(3), np.eye(3))
    worse = PerturbationQuadratic(2.0, np.zeros(3), np.eye(3))
    return chunk_payloads(better, worse, radius=0.5, n_samples=count, seed=3, chunk_size=count)[0]


def test_evaluate_mc_chunk(settings):
    """Every sample improves when ``G``'s quadratic is uniformly smaller."""
    settings.CELERY_TASK_ALWAYS_EAGER = True
    task_result = evaluate_mc_chunk.delay(_payload())
    assert isinstance(task_result, EagerResult)
    assert task_result.result["count"] == 500
    assert task_result.result["improved"] == 500
    assert 0.5 < task_result.result["min_ratio"] <= task_result.result["max_ratio"] < 1.0


def test_chunk_generator_is_determined_by_the_payload():
    payload = _payload()
    first = chunk_generator(payload).standard_normal(4)
    second = chunk_generator(payload).standard_normal(4)
    assert np.array_equal(first, second)


def test_chunk_task_is_registered_on_the_montecarlo_queue():
    app.loader.import_default_modules()
    assert "app.evaluation.tasks.evaluate_mc_chunk" in app.tasks
    assert app.conf.task_routes["app.evaluation.tasks.*"] == {"queue": "montecarlo"}
