"""
Run Configuration
Schema and loading of the YAML run configuration.

The file is read with yaml.safe_load, merged with command-line overrides and
validated against RunConfig. Unknown keys are rejected at every level.

Example usage:
    config = load_config("config.yaml", overrides={"simulation": {"seed": 7}})
    config.preset.id, config.simulation.horizon
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import ConfigValidationError
from src.estimation.cmaes import CmaesConfig
from src.likelihood.engine import LikelihoodConfig
from src.simulation.state import FORMAT_VERSION, SimConfig

logger = logging.getLogger("config")

LOG_LEVEL_ENV = "LOBSIM_LOG_LEVEL"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PresetSection(StrictModel):
    id: str = Field(default="model1", description="Preset id: model1, model2, imbalance, impact, constant")
    theta: Dict[str, float] = Field(default_factory=dict, description="Named free parameters; missing ones use reference values")
    options: Dict[str, Any] = Field(default_factory=dict, description="Structural preset constants")


class SimulationSection(StrictModel):
    horizon: float = Field(default=100.0, ge=0)
    seed: int = 0
    scheme: Literal["frozen", "thinning"] = "frozen"
    step: float = Field(default=1e-3, gt=0)
    window: float = Field(default=0.05, gt=0)
    safety: float = Field(default=1.5, gt=1)
    max_events: int = Field(default=10_000_000, ge=1)
    sample_interval: Optional[float] = Field(default=None, gt=0)

    def to_sim_config(self) -> SimConfig:
        return SimConfig(**self.model_dump())


class LikelihoodSection(StrictModel):
    n_deg: Optional[int] = Field(default=None, ge=2)
    max_step: float = Field(default=1e-3, gt=0)
    min_substeps: int = Field(default=10, ge=1)
    method: Literal["euler", "rk4"] = "euler"

    @field_validator("n_deg")
    @classmethod
    def _even(cls, v):
        if v is not None and v % 2:
            raise ValueError("n_deg must be even")
        return v

    def to_likelihood_config(self) -> LikelihoodConfig:
        return LikelihoodConfig(**self.model_dump())


class EstimatorSection(StrictModel):
    popsize: Optional[int] = Field(default=None, ge=4)
    sigma0: float = Field(default=0.5, gt=0)
    max_evals: int = Field(default=3000, ge=1)
    restarts: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    tolfun: float = Field(default=1e-12, gt=0)
    tolx: float = Field(default=1e-11, gt=0)
    start: Optional[Dict[str, float]] = None

    def to_cmaes_config(self) -> CmaesConfig:
        data = self.model_dump(exclude={"start"})
        return CmaesConfig(**data)


class ScalingSection(StrictModel):
    n_list: List[int] = Field(default_factory=lambda: [1, 4, 16])
    horizon: float = Field(default=1.0, gt=0)
    eps: float = Field(default=0.5, gt=0)
    reps: int = Field(default=200, ge=1)


class LyapunovSection(StrictModel):
    y_max: float = Field(default=30.0, gt=0)
    y_points: int = Field(default=61, ge=3)
    signal_values: Optional[List[float]] = Field(
        default_factory=lambda: [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
        description="Truncated signal support; required for Gaussian signals",
    )


class ImpactSection(StrictModel):
    size: int = Field(default=100, ge=0)
    grid_end: float = Field(default=240.0, gt=0)
    grid_points: int = Field(default=49, ge=2)
    reps: int = Field(default=20000, ge=1)
    burn_in: float = Field(default=100.0, ge=0)
    double_burn_in: bool = False


class LiquidationSection(StrictModel):
    rhos: List[float] = Field(default_factory=lambda: [-0.8, 0.0, 0.8])
    sigmas: List[float] = Field(default_factory=lambda: [0.02, 0.01])
    interval: float = Field(default=30.0, gt=0)
    n_orders: int = Field(default=20, ge=0)
    sizes: List[int] = Field(default_factory=lambda: [25, 15])
    reps: int = Field(default=5000, ge=1)
    bins: int = Field(default=50, ge=1)

    @field_validator("rhos")
    @classmethod
    def _correlations(cls, v):
        if any(not -1.0 < r < 1.0 for r in v):
            raise ValueError("correlations must lie in (-1, 1)")
        return v


class AnalysisSection(StrictModel):
    scaling: ScalingSection = Field(default_factory=ScalingSection)
    lyapunov: LyapunovSection = Field(default_factory=LyapunovSection)
    impact: ImpactSection = Field(default_factory=ImpactSection)
    liquidation: LiquidationSection = Field(default_factory=LiquidationSection)


class UnitsSection(StrictModel):
    time_unit: str = "second"
    price_unit: str = "currency"
    time_scale: float = Field(default=1.0, gt=0, description="Internal time units per file time unit")
    price_scale: float = Field(default=1.0, gt=0, description="Internal price units per file price unit")


class LoggingSection(StrictModel):
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    file: Optional[str] = None
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class OutputsSection(StrictModel):
    dir: str = "outputs"


class RunConfig(StrictModel):
    format_version: str = FORMAT_VERSION
    preset: PresetSection = Field(default_factory=PresetSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    likelihood: LikelihoodSection = Field(default_factory=LikelihoodSection)
    estimator: EstimatorSection = Field(default_factory=EstimatorSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    units: UnitsSection = Field(default_factory=UnitsSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)
    outputs: OutputsSection = Field(default_factory=OutputsSection)
    jobs: int = Field(default=1, ge=1)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def merge_overrides(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; override values win."""
    merged = copy.deepcopy(dict(base))
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def validate_config(data: Mapping[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(dict(data))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigValidationError(f"Invalid configuration: {problems}") from e


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Load, override and validate a run configuration.

    Args:
        path: YAML file; None starts from the defaults
        overrides: Nested values applied on top of the file (e.g. CLI flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigValidationError: unreadable file or schema violation
    """
    load_dotenv()
    data: Dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigValidationError(f"Config file not found: {path}")
        try:
            with open(config_path, "r") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigValidationError(f"Config file {path} is not valid YAML: {e}") from e
        if not isinstance(data, dict):
            raise ConfigValidationError(f"Config file {path} must hold a mapping at the top level")
    if overrides:
        data = merge_overrides(data, overrides)
    env_level = os.getenv(LOG_LEVEL_ENV)
    if env_level:
        data = merge_overrides(data, {"logging": {"level": env_level.upper()}})
    config = validate_config(data)
    logger.debug(f"Loaded configuration for preset {config.preset.id}")
    return config
