from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field
from typing import Any

import numpy as np

from app.lti.systems import StateSpace

from .exceptions import SynthesisError

NEGATIVE_VALUE_TOL = 1e-9


@dataclass
class SynthesisReport:
    """Outcome of one synthesis problem.

    ``multipliers`` holds ``lambda`` (H2 ball) or ``sigma_y``, ``sigma_v``
    and ``sigma_w`` (signal balls); ``certificate`` holds the Lyapunov-type
    blocks (``Q``, ``P``, ``S``, ``R``) that prove ``optimal_value``.
    """

    problem: str
    estimator: StateSpace
    optimal_value: float
    multipliers: dict[str, float] = field(default_factory=dict)
    certificate: dict[str, np.ndarray] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    beta: np.ndarray | None = None
    basis_order: int | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.estimator.is_stable:
            msg = f"{self.problem}: synthesized estimator is unstable"
            raise SynthesisError(msg)
        if self.optimal_value < -NEGATIVE_VALUE_TOL * max(1.0, abs(self.optimal_value)):
            msg = f"{self.problem}: negative optimal value {self.optimal_value}"
            raise SynthesisError(msg)
        self.optimal_value = max(self.optimal_value, 0.0)

    @property
    def relative_gap(self) -> float:
        gap = self.diagnostics.get("gap", float("nan"))
        return float(gap) / max(1.0, abs(self.optimal_value))

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem": self.problem,
            "optimal_value": self.optimal_value,
            "estimator": self.estimator.to_dict(),
            "multipliers": self.multipliers,
            "basis_order": self.basis_order,
            "beta": None if self.beta is None else np.asarray(self.beta).tolist(),
            "diagnostics": self.diagnostics,
            "checks": self.checks,
        }
