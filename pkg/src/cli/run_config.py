"""Run configurations: one YAML document per command invocation."""
import logging
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from ..estimate import FitOptions
from ..likelihood import MethodSpec
from ..models import ModelSpec
from ..utils.errors import InvalidSpec, MarkovInferenceError
from .io import write_atomic

logger = logging.getLogger(__name__)


def _checked_method(text: str) -> str:
    try:
        MethodSpec.parse(text)
    except MarkovInferenceError as e:
        raise ValueError(str(e)) from e
    return text


class RunConfig(BaseModel):
    """Everything a command needs besides its input data."""

    model: ModelSpec
    method: str = Field(default="ml", description="ml, qlK or plM (e.g. ql2, pl)")
    methods: list[str] = Field(default_factory=lambda: ["ml", "ql2", "pl"])
    theta: Optional[list[float]] = None
    n: Optional[int] = Field(default=None, ge=1, description="Transitions to simulate")
    reps: int = Field(default=1000, ge=2)
    seed: int = 0
    init_state: Optional[str] = Field(
        default=None, description="Fixed initial label; equilibrium draw if unset"
    )
    fit: FitOptions = Field(default_factory=FitOptions)
    workers: int = Field(default=1, ge=1)
    grid: Optional[list[list[float]]] = Field(
        default=None, description="Parameter points for sweeps"
    )
    orders: list[int] = Field(default_factory=lambda: [2, 3, 4, 10, 100])
    eps: Optional[list[float]] = None
    base: list[float] = Field(default_factory=lambda: [0.03, 0.04, 0.13, 0.14])
    output: Optional[str] = None

    @field_validator("method")
    @classmethod
    def check_method(cls, v: str) -> str:
        return _checked_method(v)

    @field_validator("orders")
    @classmethod
    def check_orders(cls, v: list[int]) -> list[int]:
        if any(k < 2 for k in v):
            raise ValueError(f"QL orders must be >= 2, got {v}")
        return v

    @field_validator("methods")
    @classmethod
    def check_methods(cls, v: list[str]) -> list[str]:
        return [_checked_method(text) for text in v]

    @property
    def method_spec(self) -> MethodSpec:
        return MethodSpec.parse(self.method)

    @property
    def method_specs(self) -> list[MethodSpec]:
        return [MethodSpec.parse(text) for text in self.methods]

    def require_theta(self) -> list[float]:
        if self.theta is None:
            raise InvalidSpec("This command needs theta in the run configuration")
        return self.theta

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise InvalidSpec(f"Run configuration is not valid YAML: {e}") from e
        try:
            return cls.model_validate(data or {})
        except ValidationError as e:
            raise InvalidSpec(f"Invalid run configuration: {e}") from e

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            with open(path, "r") as f:
                text = f.read()
        except OSError as e:
            raise InvalidSpec(f"Cannot read run configuration {path}: {e}") from e
        config = cls.from_yaml(text)
        logger.debug(f"Loaded run configuration from {path}")
        return config

    def save(self, path: str | Path) -> Path:
        return write_atomic(path, self.to_yaml())
