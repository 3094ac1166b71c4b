"""Problem instances.

An :class:`EstimationSetup` carries the reference filter ``H_I``, the nominal
channel ``H0`` and whichever uncertainty description the problem needs:

* H2 problems: signal spectral factors ``phi_y``, ``phi_v`` and the channel
  ball ``||(H - H0) W||_2 <= gamma``;
* nominal H-infinity problems: signal balls ``||W_y y||_2 <= gamma_y`` and
  ``||W_v v||_2 <= gamma_v``;
* robust H-infinity problems: additionally ``||(H - H0) W_H||_inf <= gamma_H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import replace
from functools import cached_property

from app.lti.algebra import product
from app.lti.exceptions import LTIError
from app.lti.systems import SpectralFactorForm
from app.lti.systems import StateSpace

from .exceptions import InvalidSetupError


def _check_weight(name: str, weight: StateSpace | None, size: int) -> None:
    if weight is None:
        return
    if weight.shape != (size, size):
        msg = f"{name} must be {size}x{size}, got {weight.shape[0]}x{weight.shape[1]}"
        raise InvalidSetupError(msg)
    if not weight.is_stable:
        msg = f"{name} is not stable"
        raise InvalidSetupError(msg)
    try:
        inverse = weight.inverse()
    except LTIError as exc:
        msg = f"{name} has no causal inverse: {exc}"
        raise InvalidSetupError(msg) from exc
    if not inverse.is_stable:
        msg = f"{name} has an unstable inverse"
        raise InvalidSetupError(msg)


@dataclass(frozen=True, eq=False)
class EstimationSetup:
    H_I: StateSpace
    H0: StateSpace
    phi_y: SpectralFactorForm | None = None
    phi_v: SpectralFactorForm | None = None
    W: StateSpace | None = None
    gamma: float = 0.0
    W_y: StateSpace | None = None
    W_v: StateSpace | None = None
    gamma_y: float = 0.0
    gamma_v: float = 0.0
    W_H: StateSpace | None = None
    gamma_H: float = 0.0

    def __post_init__(self) -> None:
        if self.H_I.n_inputs != self.H0.n_inputs:
            msg = f"H_I has {self.H_I.n_inputs} inputs but H0 has {self.H0.n_inputs}"
            raise InvalidSetupError(msg)
        for name, system in (("H_I", self.H_I), ("H0", self.H0)):
            if not system.is_stable:
                msg = f"{name} is not stable (spectral radius {system.spectral_radius:.4f})"
                raise InvalidSetupError(msg)
        for name in ("gamma", "gamma_y", "gamma_v", "gamma_H"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                msg = f"{name} must be finite and nonnegative, got {value}"
                raise InvalidSetupError(msg)
        if self.phi_y is not None and self.phi_y.size != self.m_y:
            msg = f"phi_y must be {self.m_y}x{self.m_y}"
            raise InvalidSetupError(msg)
        if self.phi_v is not None and self.phi_v.size != self.m_v:
            msg = f"phi_v must be {self.m_v}x{self.m_v}"
            raise InvalidSetupError(msg)
        _check_weight("W", self.W, self.m_y)
        _check_weight("W_y", self.W_y, self.m_y)
        _check_weight("W_v", self.W_v, self.m_v)
        _check_weight("W_H", self.W_H, self.m_y)

    def __repr__(self) -> str:
        return (
            f"EstimationSetup(m_y={self.m_y}, m_v={self.m_v}, m_e={self.m_e}, "
            f"gamma={self.gamma:g}, gamma_y={self.gamma_y:g}, gamma_v={self.gamma_v:g}, "
            f"gamma_H={self.gamma_H:g})"
        )

    @property
    def m_y(self) -> int:
        return self.H0.n_inputs

    @property
    def m_v(self) -> int:
        return self.H0.n_outputs

    @property
    def m_e(self) -> int:
        return self.H_I.n_outputs

    @property
    def has_signal_spectra(self) -> bool:
        return self.phi_y is not None and self.phi_v is not None

    def require_spectra(self) -> tuple[SpectralFactorForm, SpectralFactorForm]:
        if self.phi_y is None or self.phi_v is None:
            msg = "this operation needs the signal spectral factors phi_y and phi_v"
            raise InvalidSetupError(msg)
        return self.phi_y, self.phi_v

    @cached_property
    def W_inv(self) -> StateSpace:
        return StateSpace.identity(self.m_y) if self.W is None else self.W.inverse()

    @cached_property
    def W_y_inv(self) -> StateSpace:
        return StateSpace.identity(self.m_y) if self.W_y is None else self.W_y.inverse()

    @cached_property
    def W_v_inv(self) -> StateSpace:
        return StateSpace.identity(self.m_v) if self.W_v is None else self.W_v.inverse()

    @cached_property
    def W_H_inv(self) -> StateSpace:
        return StateSpace.identity(self.m_y) if self.W_H is None else self.W_H.inverse()

    @cached_property
    def phi_y1(self) -> StateSpace:
        """``W^{-1} phi_y``: the channel perturbation ``X`` acts through it."""
        phi_y, _ = self.require_spectra()
        return product(self.W_inv, phi_y.factor)

    def with_radii(self, **radii: float) -> EstimationSetup:
        return replace(self, **radii)

    def nominal(self) -> EstimationSetup:
        """The same setup with the channel uncertainty removed."""
        return replace(self, gamma=0.0, gamma_H=0.0)
