"""Loading experiment configs, including the ones shipped with the package."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .exceptions import ConfigError
from .serializers import ProblemConfig
from .serializers import ProblemConfigSerializer

CONFIG_DIR = Path(__file__).resolve().parent / "configs"

# repro example name -> shipped config file
EXAMPLES = {
    "siso": "siso.json",
    "mimo1": "mimo1.json",
    "mimo2": "mimo2.json",
    "siso-hinf": "siso_hinf.json",
}


def config_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def example_path(example: str) -> Path:
    try:
        return CONFIG_DIR / EXAMPLES[example]
    except KeyError as exc:
        msg = f"unknown example {example!r}; choose from {', '.join(EXAMPLES)}"
        raise ConfigError(msg) from exc


def parse_config(data: bytes) -> ProblemConfig:
    try:
        document = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        msg = f"config is not valid JSON: {exc}"
        raise ConfigError(msg) from exc
    if not isinstance(document, dict):
        msg = "config must be a JSON object"
        raise ConfigError(msg)
    serializer = ProblemConfigSerializer(data=document)
    if not serializer.is_valid():
        msg = "config failed validation"
        raise ConfigError(msg, errors=serializer.errors)
    config = serializer.to_problem()
    config.raw.update(document)
    return config


def load_config(path: str | Path) -> tuple[ProblemConfig, bytes]:
    """Parsed config plus the exact bytes it came from."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        msg = f"cannot read config {path}: {exc}"
        raise ConfigError(msg) from exc
    return parse_config(data), data
