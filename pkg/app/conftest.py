import json

import pytest


@pytest.fixture(autouse=True)
def _experiments_output(settings, tmp_path) -> None:
    settings.EXPERIMENTS_OUTPUT_DIR = str(tmp_path / "reports")


@pytest.fixture
def config_document() -> dict:
    """Small SISO H2 experiment that solves in well under a second."""
    return {
        "version": 1,
        "name": "small",
        "problem": "h2",
        "systems": {
            "H0": {"type": "fir", "taps": [1.0, 0.5]},
            "HI": {"type": "ss", "D": [[1.0]]},
            "phi_y": {"type": "white", "sigma": 1.0},
            "phi_v": {"type": "white", "sigma": 0.4},
        },
        "radii": {"mode": "absolute", "gamma": 0.2},
        "synthesis": {"kind": "aw", "alpha": 0.1},
        "mc": {"L": [2], "N": 800, "epsilon": 0.05, "delta": 0.05, "seed": 3, "path_points": 5},
    }


@pytest.fixture
def config_file(tmp_path, config_document):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(config_document))
    return path
