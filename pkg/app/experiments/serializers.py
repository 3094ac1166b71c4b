"""Schema of the JSON experiment config (version 1).

A config names the problem family, the systems of the estimation set-up, the
uncertainty radii, what to synthesize and how to run the Monte-Carlo part::

    {
      "version": 1,
      "name": "siso",
      "problem": "h2",
      "systems": {"H0": {"type": "fir", "taps": [...], "gain": 2.0},
                  "HI": {"type": "ss", "D": [[1.0]]},
                  "phi_y": {"type": "white", "sigma": 5.0},
                  "phi_v": {"type": "white", "sigma": 0.5}},
      "radii": {"mode": "relative", "base": "H0", "gamma": 0.3},
      "synthesis": {"kind": "aw", "alpha": 0.15},
      "mc": {"L": [6, 9, 13], "N": 65000, "epsilon": 0.01, "delta": 0.01, "seed": 0},
      "solver": {"tol": 1e-9, "max_iter": 200}
    }

Relative radii, and white densities flagged ``relative``, are multiplied by
``||H0||_2`` or ``||H0 phi_y||_2`` depending on ``radii.base``.
"""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any

import numpy as np
from rest_framework import serializers

from app.lti.algebra import product
from app.lti.exceptions import LTIError
from app.lti.lyapunov import h2_norm
from app.lti.systems import FIR
from app.lti.systems import SpectralFactorForm
from app.lti.systems import StateSpace
from app.synthesis.exceptions import SynthesisError
from app.synthesis.setup import EstimationSetup

CONFIG_VERSION = 1


class ProblemKind(StrEnum):
    H2 = "h2"
    HINF_NOMINAL = "hinf-nominal"
    HINF_ROBUST = "hinf-robust"


class SynthesisKind(StrEnum):
    MINIMAX = "minimax"
    AW = "aw"


class RadiusBase(StrEnum):
    H0 = "H0"
    H0_PHI_Y = "H0_phi_y"


@dataclass(frozen=True)
class MonteCarloOptions:
    fir_lengths: list[int]
    samples: int
    epsilon: float
    delta: float
    seed: int
    path_points: int
    path_fir_length: int | None
    signals: int


@dataclass(frozen=True)
class SolverSettings:
    solver: str | None = None
    tol: float | None = None
    max_iter: int | None = None

    def overrides(self) -> dict[str, Any]:
        return {"solver": self.solver, "tol": self.tol, "max_iter": self.max_iter}


@dataclass(frozen=True, eq=False)
class ProblemConfig:
    name: str
    problem: ProblemKind
    setup: EstimationSetup
    synthesis: SynthesisKind
    alpha: float
    mc: MonteCarloOptions
    solver: SolverSettings
    radius_base: float
    version: int = CONFIG_VERSION
    raw: dict[str, Any] = field(default_factory=dict)


def _matrix_field(**kwargs: Any) -> serializers.ListField:
    return serializers.ListField(child=serializers.JSONField(), required=False, **kwargs)


class SystemSerializer(serializers.Serializer):
    """One transfer matrix.

    * ``fir``: ``taps`` (scalars or matrices);
    * ``ss``: ``A``, ``B``, ``C``, ``D`` (``A``, ``B``, ``C`` may be omitted for a static gain);
    * ``white``: ``sigma`` times the identity of ``size`` (spectral factors only);
    * ``modal``: ``A = V diag(eigenvalues) V^{-1}``, ``B = V B``, ``C = C_scale C V^{-1}``.

    ``gain`` scales the whole system.
    """

    type = serializers.ChoiceField(choices=["fir", "ss", "white", "modal"])
    taps = _matrix_field()
    A = _matrix_field()
    B = _matrix_field()
    C = _matrix_field()
    D = _matrix_field()
    V = _matrix_field()
    eigenvalues = serializers.ListField(child=serializers.FloatField(), required=False)
    C_scale = serializers.FloatField(default=1.0)
    sigma = serializers.FloatField(required=False, min_value=0.0)
    size = serializers.IntegerField(default=1, min_value=1)
    gain = serializers.FloatField(default=1.0)
    relative = serializers.BooleanField(default=False)

    REQUIRED = {
        "fir": ("taps",),
        "ss": ("D",),
        "white": ("sigma",),
        "modal": ("eigenvalues", "V", "B", "C", "D"),
    }

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        missing = [name for name in self.REQUIRED[attrs["type"]] if name not in attrs]
        if missing:
            raise serializers.ValidationError({name: "required for this system type" for name in missing})
        if attrs["relative"] and attrs["type"] != "white":
            raise serializers.ValidationError({"relative": "only white densities may be relative"})
        try:
            build_system(attrs)
        except (LTIError, ValueError, np.linalg.LinAlgError) as exc:
            raise serializers.ValidationError(str(exc)) from exc
        return attrs


def build_system(spec: dict[str, Any], scale: float = 1.0) -> StateSpace:
    """Realization of a validated system spec; ``scale`` only affects relative white densities."""
    kind = spec["type"]
    gain = spec.get("gain", 1.0)
    if kind == "fir":
        system = FIR(spec["taps"]).to_state_space()
    elif kind == "ss":
        system = StateSpace.from_dict(spec)
    elif kind == "white":
        sigma = spec["sigma"] * (scale if spec.get("relative") else 1.0)
        system = StateSpace.static(sigma * np.eye(spec.get("size", 1)))
    else:
        V = np.asarray(spec["V"], dtype=float)
        V_inv = np.linalg.inv(V)
        system = StateSpace(
            V @ np.diag(spec["eigenvalues"]) @ V_inv,
            V @ np.asarray(spec["B"], dtype=float),
            spec.get("C_scale", 1.0) * np.asarray(spec["C"], dtype=float) @ V_inv,
            np.asarray(spec["D"], dtype=float),
        )
    return system if gain == 1.0 else StateSpace(system.A, system.B, gain * system.C, gain * system.D)


class SystemsSerializer(serializers.Serializer):
    H0 = SystemSerializer()
    HI = SystemSerializer()
    phi_y = SystemSerializer(required=False)
    phi_v = SystemSerializer(required=False)
    W = SystemSerializer(required=False)
    W_y = SystemSerializer(required=False)
    W_v = SystemSerializer(required=False)
    W_H = SystemSerializer(required=False)


class RadiiSerializer(serializers.Serializer):
    mode = serializers.ChoiceField(choices=["absolute", "relative"], default="absolute")
    base = serializers.ChoiceField(choices=[base.value for base in RadiusBase], default=RadiusBase.H0_PHI_Y.value)
    gamma = serializers.FloatField(default=0.0, min_value=0.0)
    gamma_y = serializers.FloatField(default=0.0, min_value=0.0)
    gamma_v = serializers.FloatField(default=0.0, min_value=0.0)
    gamma_H = serializers.FloatField(default=0.0, min_value=0.0)


class SynthesisSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=[kind.value for kind in SynthesisKind], default=SynthesisKind.AW.value)
    alpha = serializers.FloatField(default=0.1, min_value=0.0)


class MonteCarloSerializer(serializers.Serializer):
    L = serializers.ListField(child=serializers.IntegerField(min_value=0), default=list)
    N = serializers.IntegerField(default=0, min_value=0)
    epsilon = serializers.FloatField(default=1e-2, min_value=0.0)
    delta = serializers.FloatField(default=1e-2, min_value=0.0, max_value=1.0)
    seed = serializers.IntegerField(default=0, min_value=0)
    path_points = serializers.IntegerField(default=0, min_value=0)
    path_L = serializers.IntegerField(required=False, min_value=0)
    signals = serializers.IntegerField(default=0, min_value=0)

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        if attrs["path_points"] and attrs["path_points"] % 2 == 0:
            raise serializers.ValidationError({"path_points": "must be odd"})
        if attrs["N"] and not (attrs["epsilon"] > 0 and 0 < attrs["delta"] < 1):
            raise serializers.ValidationError("epsilon must be positive and delta in (0, 1)")
        return attrs


class SolverSerializer(serializers.Serializer):
    name = serializers.CharField(required=False)
    tol = serializers.FloatField(required=False, min_value=0.0)
    max_iter = serializers.IntegerField(required=False, min_value=1)


class ProblemConfigSerializer(serializers.Serializer):
    version = serializers.IntegerField(default=CONFIG_VERSION)
    name = serializers.CharField(default="experiment", max_length=120)
    problem = serializers.ChoiceField(choices=[kind.value for kind in ProblemKind])
    systems = SystemsSerializer()
    radii = RadiiSerializer(required=False)
    synthesis = SynthesisSerializer(required=False)
    mc = MonteCarloSerializer(required=False)
    solver = SolverSerializer(required=False)

    NEEDS = {
        ProblemKind.H2: ("phi_y", "phi_v"),
        ProblemKind.HINF_NOMINAL: (),
        ProblemKind.HINF_ROBUST: (),
    }

    def validate_version(self, value: int) -> int:
        if value != CONFIG_VERSION:
            msg = f"unsupported config version {value} (this build reads version {CONFIG_VERSION})"
            raise serializers.ValidationError(msg)
        return value

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        problem = ProblemKind(attrs["problem"])
        missing = [name for name in self.NEEDS[problem] if name not in attrs["systems"]]
        if missing:
            raise serializers.ValidationError({"systems": {name: "required for this problem" for name in missing}})
        radii = attrs.get("radii", {})
        if radii.get("base") == RadiusBase.H0_PHI_Y and radii.get("mode") == "relative":
            if "phi_y" not in attrs["systems"]:
                raise serializers.ValidationError({"radii": {"base": "H0_phi_y needs phi_y"}})
        try:
            attrs["_config"] = _to_problem(attrs)
        except (SynthesisError, LTIError, ValueError) as exc:
            raise serializers.ValidationError({"setup": str(exc)}) from exc
        return attrs

    def to_problem(self) -> ProblemConfig:
        return self.validated_data["_config"]


def _factor(spec: dict[str, Any] | None, scale: float) -> SpectralFactorForm | None:
    return None if spec is None else SpectralFactorForm(build_system(spec, scale))


def _weight(spec: dict[str, Any] | None) -> StateSpace | None:
    return None if spec is None else build_system(spec)


def _to_problem(attrs: dict[str, Any]) -> ProblemConfig:
    systems = attrs["systems"]
    radii = dict(RadiiSerializer().to_internal_value({}), **attrs.get("radii", {}))
    synthesis = dict(SynthesisSerializer().to_internal_value({}), **attrs.get("synthesis", {}))
    mc = dict(MonteCarloSerializer().to_internal_value({}), **attrs.get("mc", {}))
    solver = attrs.get("solver", {})

    H0 = build_system(systems["H0"])
    if radii["base"] == RadiusBase.H0 or "phi_y" not in systems:
        base = h2_norm(H0)
    else:
        base = h2_norm(product(H0, build_system(systems["phi_y"])))
    scale = base if radii["mode"] == "relative" else 1.0

    setup = EstimationSetup(
        H_I=build_system(systems["HI"]),
        H0=H0,
        phi_y=_factor(systems.get("phi_y"), base),
        phi_v=_factor(systems.get("phi_v"), base),
        W=_weight(systems.get("W")),
        gamma=radii["gamma"] * scale,
        W_y=_weight(systems.get("W_y")),
        W_v=_weight(systems.get("W_v")),
        gamma_y=radii["gamma_y"] * scale,
        gamma_v=radii["gamma_v"] * scale,
        W_H=_weight(systems.get("W_H")),
        gamma_H=radii["gamma_H"] * scale,
    )
    return ProblemConfig(
        name=attrs.get("name", "experiment"),
        problem=ProblemKind(attrs["problem"]),
        setup=setup,
        synthesis=SynthesisKind(synthesis["kind"]),
        alpha=synthesis["alpha"],
        mc=MonteCarloOptions(
            fir_lengths=list(mc["L"]),
            samples=mc["N"],
            epsilon=mc["epsilon"],
            delta=mc["delta"],
            seed=mc["seed"],
            path_points=mc["path_points"],
            path_fir_length=mc.get("path_L"),
            signals=mc["signals"],
        ),
        solver=SolverSettings(solver.get("name"), solver.get("tol"), solver.get("max_iter")),
        radius_base=base,
        version=attrs.get("version", CONFIG_VERSION),
    )
