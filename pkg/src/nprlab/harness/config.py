"""Experiment configuration models (JSON files map onto these one to one)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator

from ..errors import ConfigError
from ..policies import Hyper, canonical_kind
from ..policies.state import DEFAULT_COV_CAP


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SyntheticSpec(_Strict):
    type: Literal["synthetic"] = "synthetic"
    d: PositiveInt = 10
    K: PositiveInt = 20
    k: PositiveInt = 10
    kind: Literal["H1", "H2"] = "H2"
    xi: float = Field(0.1, ge=0)


class ClassificationSpec(_Strict):
    type: Literal["classification"] = "classification"
    path: Optional[str] = None
    name: Optional[str] = None
    label_column: str = "label"


class PolicySpec(_Strict):
    kind: str = "NPR"
    lam: PositiveFloat = 1.0
    nu: float = Field(0.1, ge=0)
    eta: PositiveFloat = 1.0
    J: int = Field(100, ge=0)
    m: PositiveInt = 32
    L: int = Field(3, ge=2)
    tol: float = Field(1e-8, ge=0)
    cov_cap: PositiveInt = DEFAULT_COV_CAP

    @field_validator("kind")
    @classmethod
    def _kind(cls, v):
        try:
            return canonical_kind(v)
        except ConfigError as exc:
            raise ValueError(str(exc)) from None

    def hyper(self, warm_start: bool = False) -> Hyper:
        return Hyper(lam=self.lam, nu=self.nu, eta=self.eta, J=self.J, m=self.m, L=self.L, tol=self.tol,
                     warm_start=warm_start, cov_cap=self.cov_cap)


class ExperimentConfig(_Strict):
    env: Union[SyntheticSpec, ClassificationSpec] = Field(default_factory=SyntheticSpec, discriminator="type")
    policy: PolicySpec = Field(default_factory=PolicySpec)
    T: PositiveInt = 2000
    num_runs: PositiveInt = 10
    master_seed: int = Field(0, ge=0, lt=2**64)
    output: Optional[str] = None
    warmstart: bool = False
    timing: bool = True

    def with_policy(self, **changes) -> "ExperimentConfig":
        return self.model_copy(update={"policy": self.policy.model_copy(update=changes)})

    def replace(self, **changes) -> "ExperimentConfig":
        return self.model_copy(update=changes)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment config:\n{exc}") from None
    if isinstance(cfg.env, SyntheticSpec) and cfg.env.k > cfg.env.K:
        raise ConfigError(f"env.k={cfg.env.k} exceeds env.K={cfg.env.K}")
    if isinstance(cfg.env, ClassificationSpec) and not (cfg.env.path or cfg.env.name):
        raise ConfigError("classification env needs a 'path' or a 'name'")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)
