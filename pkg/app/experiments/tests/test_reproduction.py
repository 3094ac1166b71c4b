"""End-to-end runs of the shipped examples against their published figures.

These solve the full-size problems and sample tens of thousands of
perturbations; run them with ``pytest -m slow``.
"""

import csv
import json
from io import StringIO

import pytest
from django.core.management import call_command

pytestmark = [pytest.mark.django_db, pytest.mark.slow]

# estimator -> (worst case, average, nominal)
TABLES = {
    "siso": {"G_av": (26.8604, 12.6040, 10.1015), "G_M": (23.3569, 17.4249, 16.9366)},
    "mimo1": {"G_av": (3.8090, 1.961, 1.8027), "G_M": (3.4628, 2.5947, 2.5289)},
    "mimo2": {"G_av": (3.2680, 1.8904, 1.5001), "G_M": (3.0293, 2.0494, 1.6340)},
}
TOLERANCE = {"siso": 0.03, "mimo1": 0.04, "mimo2": 0.04}
IMPROVED_FRACTION = {
    "siso": {6: 0.9673, 9: 0.9822, 13: 0.9923},
    "mimo1": {4: 0.9987, 8: 0.9991, 10: 0.9999},
    "mimo2": {4: 0.9104, 8: 0.9632, 10: 0.9747},
}


def _repro(example: str, out_dir, *flags: str) -> tuple[dict, dict]:
    call_command("repro", example, "--out-dir", str(out_dir), *flags, stdout=StringIO())
    with (out_dir / "tables.csv").open() as handle:
        rows = {row["estimator"]: row for row in csv.DictReader(handle)}
    return rows, json.loads((out_dir / "metrics.json").read_text())


@pytest.mark.parametrize("example", list(TABLES))
def test_design_tables(example, tmp_path):
    rows, metrics = _repro(example, tmp_path / example, "--skip-mc")
    assert all(metrics["checks"].values())
    for name, expected in TABLES[example].items():
        observed = [float(rows[name][column]) for column in ("worst_case", "average", "nominal")]
        assert observed == pytest.approx(list(expected), rel=TOLERANCE[example])


def test_siso_improvement_metrics(tmp_path):
    rows, metrics = _repro("siso", tmp_path / "siso", "--skip-mc")
    improvement = metrics["improvement"]
    assert metrics["delta_Jo"] == pytest.approx(-6.7966, rel=0.03)
    assert improvement["mu_I_lower"] == pytest.approx(1.4684, rel=0.03)
    assert float(rows["G_av"]["eta_RW"]) == pytest.approx(0.25, abs=0.05)


@pytest.mark.parametrize("example", list(IMPROVED_FRACTION))
def test_improved_fraction(example, tmp_path):
    _, metrics = _repro(example, tmp_path / example)
    observed = {row["fir_length"]: row["frequency"] for row in metrics["monte_carlo"]}
    for fir_length, expected in IMPROVED_FRACTION[example].items():
        assert observed[fir_length] == pytest.approx(expected, abs=0.02)


def test_mimo1_path_extremes(tmp_path):
    _, metrics = _repro("mimo1", tmp_path / "mimo1")
    assert metrics["path"]["best_ratio"] == pytest.approx(0.54, abs=0.05)
    assert metrics["path"]["worst_ratio"] == pytest.approx(1.10, abs=0.05)
    assert metrics["path"]["nominal_ratio"] < 1.0


def test_siso_signal_balls(tmp_path):
    rows, metrics = _repro("siso-hinf", tmp_path / "siso-hinf", "--skip-mc")
    assert float(rows["G_M"]["worst_case"]) <= 18.3903 * 1.03
    assert float(rows["G_av"]["worst_case"]) <= 19.7594 * 1.03
    assert float(rows["G_av"]["average"]) < float(rows["G_M"]["average"])
    assert metrics["improvement"]["eta_P_lower"] >= 8.5866 * 0.97
    assert metrics["improvement"]["eta_R_upper"] <= 0.15
