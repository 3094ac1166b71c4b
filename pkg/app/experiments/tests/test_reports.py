import csv
import json

import numpy as np
import pytest

from app.experiments.reports import TABLE_HEADERS
from app.experiments.reports import ReportBundle
from app.experiments.reports import format_number
from app.experiments.reports import gnuplot_script
from app.experiments.reports import to_jsonable
from app.experiments.reports import write_bundle
from app.experiments.reports import write_error
from app.lti.systems import StateSpace


@pytest.fixture
def bundle():
    return ReportBundle(
        rows=[{"estimator": "G_M", "worst_case": 23.3569123, "average": 17.42, "nominal": 16.93, "eta_RW": 1.0}],
        metrics={"delta_Jo": -6.7966, "grid": np.arange(3)},
        curves={"ratio": np.array([[-1.0, 0.5], [0.0, 0.9], [1.0, 1.1]])},
        estimators={"G_M": StateSpace.static([[0.5]])},
        mc_rows=[{"experiment": "channel", "samples": 800, "frequency": 0.97}],
        checks={"G_M_worst_case_dominates_samples": True},
    )


@pytest.mark.parametrize(
    ("value", "expected"),
    [(None, ""), (3, "3"), (True, "True"), ("G_av", "G_av"), (float("nan"), "nan"), (1 / 3, "0.333333")],
)
def test_format_number(settings, value, expected):
    settings.REPORT_SIGNIFICANT_DIGITS = 6
    assert format_number(value) == expected


def test_to_jsonable_handles_numpy_and_non_finite():
    data = to_jsonable({"a": np.float64(1.5), "b": [np.inf, -np.inf], 3: np.eye(2), "G": StateSpace.static([[2.0]])})
    assert data["a"] == 1.5
    assert data["b"] == ["inf", "-inf"]
    assert data["3"] == [[1.0, 0.0], [0.0, 1.0]]
    assert data["G"]["D"] == [[2.0]]
    json.dumps(data, allow_nan=False)


def test_bundle_passes_only_when_every_check_does(bundle):
    assert bundle.passed
    bundle.merge(ReportBundle(checks={"completed": False}))
    assert not bundle.passed


def test_merge_keeps_both_sides(bundle):
    other = ReportBundle(rows=[{"estimator": "G_av"}], metrics={"path": {}}, mc_rows=[{"experiment": "channel"}])
    bundle.merge(other)
    assert [row["estimator"] for row in bundle.rows] == ["G_M", "G_av"]
    assert "path" in bundle.metrics
    assert len(bundle.mc_rows) == 2


def test_write_bundle_layout(bundle, tmp_path):
    out = write_bundle(bundle, tmp_path / "out", "INFO app.synthesis prob1 done\n")
    with (out / "tables.csv").open() as handle:
        rows = list(csv.DictReader(handle))
    assert tuple(rows[0]) == TABLE_HEADERS
    assert rows[0]["worst_case"] == "23.3569"
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["delta_Jo"] == -6.7966
    assert metrics["checks"] == {"G_M_worst_case_dominates_samples": True}
    assert np.allclose(np.loadtxt(out / "plot" / "ratio.dat"), bundle.curves["ratio"])
    assert "'ratio.dat'" in (out / "plot" / "figure.gp").read_text()
    assert (out / "solver.log").read_text().startswith("INFO")
    assert json.loads((out / "estimators" / "G_M.json").read_text())["D"] == [[0.5]]
    assert (out / "mc_samples.csv").read_text().splitlines()[0] == "experiment,samples,frequency"
    assert not (out / "error.json").exists()


def test_write_bundle_is_deterministic(bundle, tmp_path):
    first = write_bundle(bundle, tmp_path / "first")
    second = write_bundle(bundle, tmp_path / "second")
    for name in ("tables.csv", "metrics.json", "plot/ratio.dat", "plot/figure.gp", "mc_samples.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_write_error(tmp_path):
    path = write_error(tmp_path / "rejected", "config failed validation", {"problem": ["not a valid choice"]})
    assert json.loads(path.read_text()) == {
        "error": "config failed validation",
        "details": {"problem": ["not a valid choice"]},
    }


def test_gnuplot_script_without_curves():
    assert "# no curves" in gnuplot_script({})
