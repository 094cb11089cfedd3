"""
Run configuration: environment settings and JSON/TOML run files.
"""

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import structlog
from pydantic import BaseModel, Field, ValidationError

from .atomkit import THETA_N_MEAN, AtomParams, ApparatusParams, frisch_segre, potassium39, with_overrides
from .errors import ConfigError
from .hyperfine import kappa_for
from .models import KappaChoice, OutputFormat

try:
    import tomllib
except ImportError:  # Python < 3.11
    tomllib = None

logger = structlog.get_logger(__name__)


class Settings(BaseModel):
    """Process-level settings read from the environment."""
    config_path: Optional[str] = Field(default_factory=lambda: os.getenv("CQD_CONFIG"))
    log_level: str = Field(default_factory=lambda: os.getenv("LOG_LEVEL", "WARNING"))
    log_file: Optional[str] = Field(default_factory=lambda: os.getenv("CQD_LOG_FILE"))
    metrics_file: Optional[str] = Field(default_factory=lambda: os.getenv("CQD_METRICS_FILE"))


class AtomOverrides(BaseModel):
    model_config = {"extra": "forbid"}

    gamma_e: Optional[float] = None
    gamma_n: Optional[float] = None
    mu_e: Optional[float] = None
    mu_n: Optional[float] = None
    radius: Optional[float] = None
    b_n: Optional[float] = None
    b_e: Optional[float] = None


class ApparatusOverrides(BaseModel):
    model_config = {"extra": "forbid"}

    z_a: Optional[float] = None
    v: Optional[float] = None
    b_r: Optional[float] = None
    flight_path: Optional[float] = None
    current: Optional[float] = None
    i_min: Optional[float] = None
    i_max: Optional[float] = None


class RunConfig(BaseModel):
    """Resolved configuration of one CLI run; defaults reproduce the published setup."""
    model_config = {"extra": "forbid"}

    atom: AtomOverrides = Field(default_factory=AtomOverrides)
    apparatus: ApparatusOverrides = Field(default_factory=ApparatusOverrides)
    kappa: KappaChoice = KappaChoice.TOPHAT_TORQUE
    contact_convention: str = Field("published", pattern="^(published|scaled)$")
    theta_n_mean: float = Field(THETA_N_MEAN, ge=0.0, le=math.pi)
    k_i: float = Field(0.0, ge=0.0)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    format: Optional[OutputFormat] = None
    out: Optional[str] = None

    def build_atom(self) -> AtomParams:
        kappa = kappa_for(self.kappa, contact_convention=self.contact_convention)
        overrides = self.atom.model_dump(exclude_none=True)
        try:
            return with_overrides(potassium39(kappa), overrides, kappa)
        except ValidationError as e:
            raise ConfigError("invalid atom overrides", {"errors": e.error_count()})

    def build_apparatus(self) -> ApparatusParams:
        try:
            return frisch_segre(self.apparatus.model_dump(exclude_none=True))
        except ValidationError as e:
            raise ConfigError("invalid apparatus overrides", {"errors": e.error_count()})

    def provenance(self) -> Dict[str, Any]:
        """Config echoed ahead of results."""
        return self.model_dump(mode="json", exclude_none=True)


def _read(path: Path) -> Dict[str, Any]:
    try:
        if path.suffix == ".json":
            with open(path, encoding="utf-8") as handle:
                return json.load(handle)
        if path.suffix == ".toml":
            if tomllib is None:
                raise ConfigError("TOML configs need Python 3.11 or newer", {"path": str(path)})
            with open(path, "rb") as handle:
                return tomllib.load(handle)
    except ConfigError:
        raise
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", {"path": str(path)})
    except ValueError as e:
        raise ConfigError(f"malformed config: {e}", {"path": str(path)})
    raise ConfigError("config must be a .json or .toml file", {"path": str(path)})


def load_run_config(path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig from an optional file plus explicit overrides.

    Overrides (CLI flags) win over file values; None overrides are ignored.

    Raises:
        ConfigError: unreadable file, unknown keys or invalid values
    """
    data: Dict[str, Any] = {}
    if path:
        data = _read(Path(path))
        if not isinstance(data, dict):
            raise ConfigError("config root must be a table/object", {"path": str(path)})
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"invalid config: {location}: {first['msg']}",
                          {"errors": e.error_count()})
    logger.debug("Run config loaded", path=str(path) if path else None, kappa=config.kappa.value)
    return config
