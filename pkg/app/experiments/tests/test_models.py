import pytest

from app.experiments.models import RunStatus

from .factories import ExperimentRunFactory

pytestmark = pytest.mark.django_db


def test_str_uses_label_then_digest():
    run = ExperimentRunFactory(label="siso")
    assert str(run) == "synth siso (running)"
    run.label = ""
    assert str(run) == f"synth {run.config_digest[:12]} (running)"


@pytest.mark.parametrize(("exit_code", "status"), [(0, RunStatus.SUCCEEDED), (1, RunStatus.FAILED), (2, RunStatus.FAILED)])
def test_finish_records_outcome(exit_code, status):
    run = ExperimentRunFactory()
    run.finish(exit_code, {"rows": []})
    run.refresh_from_db()
    assert run.exit_code == exit_code
    assert run.status == status
    assert run.summary == {"rows": []}


def test_finish_keeps_summary_when_not_given():
    run = ExperimentRunFactory(summary={"note": "kept"})
    run.finish(0)
    run.refresh_from_db()
    assert run.summary == {"note": "kept"}