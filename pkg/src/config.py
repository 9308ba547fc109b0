"""Settings loaded from config/config.yaml with environment overrides."""
import logging
import os
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError

from .estimate import FitOptions
from .utils.errors import InvalidSpec

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "config.yaml"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class ServerSettings(BaseModel):
    host: str = "0.0.0.0"
    port: int = Field(default=8080, ge=1, le=65535)
    debug: bool = False


class InferenceSettings(BaseModel):
    n_starts: int = Field(default=5, ge=1)
    grad_tol: float = Field(default=1e-8, gt=0.0)
    step_tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=500, ge=1)

    def fit_options(self) -> FitOptions:
        return FitOptions(**self.model_dump())


class SimulationSettings(BaseModel):
    seed: int = 20050429
    max_failure_rate: float = Field(default=0.05, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)


class LoggingSettings(BaseModel):
    level: str = "INFO"
    file: Optional[str] = None


class Settings(BaseModel):
    server: ServerSettings = Field(default_factory=ServerSettings)
    inference: InferenceSettings = Field(default_factory=InferenceSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


def _read_yaml(path: Path) -> dict[str, Any]:
    with open(path, "r") as f:
        data = yaml.safe_load(f)
    return data or {}


def load_settings(path: Optional[str | Path] = None) -> Settings:
    """Read settings, then apply MARKOV_PQL_CONFIG, LOG_LEVEL, SERVER_HOST and SERVER_PORT."""
    config_path = Path(path or os.getenv("MARKOV_PQL_CONFIG", str(DEFAULT_CONFIG_PATH)))
    data: dict[str, Any] = {}
    if config_path.exists():
        data = _read_yaml(config_path)
    elif path is not None:
        raise InvalidSpec(f"Settings file not found: {config_path}")

    if level := os.getenv("LOG_LEVEL"):
        data.setdefault("logging", {})["level"] = level
    if host := os.getenv("SERVER_HOST"):
        data.setdefault("server", {})["host"] = host
    if port := os.getenv("SERVER_PORT"):
        data.setdefault("server", {})["port"] = port

    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        raise InvalidSpec(f"Invalid settings in {config_path}: {e}") from e


def configure_logging(settings: Settings) -> None:
    level = getattr(logging, settings.logging.level.upper(), None)
    if not isinstance(level, int):
        raise InvalidSpec(f"Unknown log level: {settings.logging.level}")
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
    if settings.logging.file:
        log_path = Path(settings.logging.file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_path)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)
        logger.info(f"Logging to {log_path}")
