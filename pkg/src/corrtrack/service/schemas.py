"""Request and response schemas for the HTTP service.

Every request model forbids unknown keys, so a typoed config field
fails loudly with the offending key named instead of being ignored.
Domain rules (parameter ranges, channel ordering) live in the core
dataclasses; these models only shape the payloads and hand off.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from corrtrack.model import (
    ChangeAware,
    ChannelParams,
    ErrorAware,
    ParameterError,
    Policy,
    RandomSampling,
    SemanticsAware,
    SourceParams,
)
from corrtrack.optimize import Budget
from corrtrack.simulate import SimConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SourceModel(_Strict):
    p: float
    q: float

    def build(self) -> SourceParams:
        return SourceParams(self.p, self.q)


class ChannelModel(_Strict):
    ps1_solo: float
    ps1_joint: float
    ps2_solo: float
    ps2_joint: float

    def build(self) -> ChannelParams:
        return ChannelParams(self.ps1_solo, self.ps1_joint,
                             self.ps2_solo, self.ps2_joint)


class PolicyModel(_Strict):
    tag: Literal["RS", "CA", "EA", "SA", "RS-equal"]
    pa1: Optional[float] = None
    pa2: Optional[float] = None
    qa1: Optional[float] = None
    qa2: Optional[float] = None

    def build(self) -> Policy:
        if self.tag == "RS":
            if self.pa1 is None or self.pa2 is None:
                raise ParameterError("RS policy needs pa1 and pa2")
            self._reject("qa1", "qa2")
            return RandomSampling(self.pa1, self.pa2)
        if self.tag == "EA":
            if self.qa1 is None or self.qa2 is None:
                raise ParameterError("EA policy needs qa1 and qa2")
            self._reject("pa1", "pa2")
            return ErrorAware(self.qa1, self.qa2)
        if self.tag == "CA":
            self._reject("pa1", "pa2", "qa1", "qa2")
            return ChangeAware()
        if self.tag == "SA":
            self._reject("pa1", "pa2", "qa1", "qa2")
            return SemanticsAware()
        raise ParameterError(
            "RS-equal is an optimization target, not an evaluable policy"
        )

    def _reject(self, *fields: str) -> None:
        for name in fields:
            if getattr(self, name) is not None:
                raise ParameterError(f"{name} does not apply to a {self.tag} policy")


class BudgetModel(_Strict):
    delta: float = 1.0
    eta: Optional[float] = None
    delta_max: Optional[float] = None

    def build(self) -> Budget:
        eta = self.eta
        if self.delta_max is not None:
            if self.delta <= 0:
                raise ParameterError("delta must be positive to derive eta")
            derived = self.delta_max / self.delta
            if eta is not None and abs(eta - derived) > 1e-12:
                raise ParameterError(
                    f"eta={eta} and delta_max={self.delta_max} disagree"
                )
            eta = derived
        if eta is None:
            raise ParameterError("budget needs eta or delta_max")
        return Budget(self.delta, eta)


class SimModel(_Strict):
    horizon: int
    burn_in: int = 10_000
    replications: int = 16
    seed: int = 0

    def build(self, delta: float = 1.0) -> SimConfig:
        return SimConfig(horizon=self.horizon, burn_in=self.burn_in,
                         replications=self.replications, seed=self.seed,
                         delta=delta)


Backend = Literal["closed-form", "chain", "exact-chain", "sim"]


class ScenarioModel(_Strict):
    """The one config shape every single-point command consumes."""

    source: SourceModel
    channel: ChannelModel
    policy: PolicyModel
    budget: Optional[BudgetModel] = None
    sim: Optional[SimModel] = None
    backend: Optional[Backend] = None

    def delta(self) -> float:
        return self.budget.delta if self.budget is not None else 1.0


class SweepSpecModel(_Strict):
    swept: Literal["p", "eta"]
    start: float
    stop: float
    step: float
    q: float
    channel: ChannelModel
    p: Optional[float] = None
    eta: Optional[float] = None
    policies: Optional[list] = None
    backend: Optional[Backend] = None
    delta: float = 1.0


class SweepRequest(_Strict):
    preset: Optional[str] = None
    spec: Optional[SweepSpecModel] = None
    backend: Optional[Backend] = None


class ValidateRequest(_Strict):
    n_points: int = 200
    seed: int = 0
    include_identity_grid: bool = True
    sim: Optional[SimModel] = None
