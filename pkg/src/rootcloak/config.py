"""
Reading settings from config files, environment variables and command-line
overrides, and providing a settings object for the construction.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

CONFIG_FILENAMES = ("rootcloak.config.yaml", "rootcloak.config.yml", "rootcloak.config.json")


class AmplitudeSettings(BaseModel):
    """
    Bump amplitudes a_1..a_N, either explicit or drawn from a seeded generator.
    """

    values: List[float] | None = None
    """Explicit amplitudes in root order. Takes precedence over the seed."""

    seed: int = 42
    """Seed for the uniform draw when no explicit values are given."""

    low: float = 0.5
    high: float = 1.5

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_range(self) -> "AmplitudeSettings":
        if self.high < self.low:
            raise ValueError("amplitudes.high must not be below amplitudes.low")
        return self


class IntegratorSettings(BaseModel):
    """Adaptive Runge-Kutta settings for the geodesic flow."""

    rel_tol: float = Field(1e-12, gt=0)
    abs_tol: float = Field(1e-12, gt=0)

    max_param: float = Field(1e3, gt=0)
    """Cap on the flow parameter before a trace is declared stuck."""

    max_step_fraction: float = Field(0.25, gt=0)
    """Largest step as a fraction of the ball radius, so no ball is stepped over."""

    method: Literal["DOP853", "RK45"] = "DOP853"

    model_config = ConfigDict(extra="forbid")


class ThresholdSettings(BaseModel):
    """Pass/fail thresholds of the verification suites."""

    lateral: float = 1e-6
    """Largest lateral deviation, in units of the ball radius."""

    angular: float = 1e-8
    """Largest angle between entry and exit directions, radians."""

    energy_drift: float = 1e-9
    energy_level: float = 1e-10
    symmetry: float = 1e-10
    mirror: float = 1e-7
    section: float = 1e-8

    curvature_floor_ratio: float = 10.0
    """Curvature must exceed this multiple of the flat noise floor."""

    obstruction: float = 1e-6

    reversal: float = 1e-8
    """Time reversal: distance between the re-traced exit line and the entry line."""

    control_lateral: float = 1e-4
    """Smallest lateral deviation, in units of the ball radius, the visibility control must show."""

    model_config = ConfigDict(extra="forbid")


class EpsilonSearchSettings(BaseModel):
    """Bisection for the largest admissible epsilon."""

    grid_resolution: int = Field(15, ge=2)
    lower: float = 1e-6
    upper: float = 2.0
    iterations: int = Field(30, ge=1)
    min_eigenvalue: float = 0.01
    safety: float = 0.5

    model_config = ConfigDict(extra="forbid")


class VerificationSettings(BaseModel):
    """Sizes of the verification runs."""

    rays: int = Field(100, ge=1)
    symmetry_samples: int = Field(1000, ge=1)
    energy_points: int = Field(10_000, ge=1)
    """Approximate number of grid points in the base ball for the energy scan."""

    section_rays: int = Field(5, ge=1)
    """Rays per root direction for the single-ball section invariance check."""

    obstruction_grid: int = Field(41, ge=2)
    fd_step_fraction: float = Field(1e-3, gt=0)
    """Curvature stencil step as a fraction of the ball radius."""

    control_angle: float = 0.3
    """Rotation (radians) of v_1 used for the visibility control run."""

    seed: int = 7
    """Seed for random sample points."""

    model_config = ConfigDict(extra="forbid")


class ExecutorSettings(BaseModel):
    """Thread pool used for ray batches and grid scans."""

    max_workers: int | None = None
    """None uses the interpreter default; 1 runs inline."""

    model_config = ConfigDict(extra="forbid")


class LoggerSettings(BaseModel):
    """
    Logger settings for rootcloak.
    """

    type: Literal["none", "console", "file"] = "file"

    level: Literal["debug", "info", "warning", "error"] = "warning"
    """Minimum logging level"""

    progress_display: bool = True
    """Enable or disable the progress bars for batch runs"""

    path: str = "rootcloak.jsonl"
    """Path to log file, if logger 'type' is 'file'."""


class Settings(BaseSettings):
    """
    Settings class for rootcloak. Fields set to "auto" are resolved numerically
    by core.construction.resolve_config.
    """

    model_config = SettingsConfigDict(
        env_prefix="ROOTCLOAK_",
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="forbid",
        nested_model_default_partial_update=True,
    )

    n: int = 2
    """Dimension of the space; the root system is A_n."""

    epsilon: float | Literal["auto"] = "auto"
    """Perturbation strength; "auto" is half the admissible threshold."""

    ball_radius: float | Literal["auto"] = "auto"

    radius_fraction: float = Field(0.9, gt=0, le=1)
    """Share of the largest disjoint radius used when ball_radius is "auto"."""

    chamber_point: List[float] | Literal["auto"] = "auto"

    profile: Literal["mollifier"] = "mollifier"

    amplitudes: AmplitudeSettings = AmplitudeSettings()
    integrator: IntegratorSettings = IntegratorSettings()
    thresholds: ThresholdSettings = ThresholdSettings()
    epsilon_search: EpsilonSearchSettings = EpsilonSearchSettings()
    verification: VerificationSettings = VerificationSettings()
    executor: ExecutorSettings = ExecutorSettings()
    logger: LoggerSettings = LoggerSettings()

    @field_validator("n")
    @classmethod
    def validate_dimension(cls, v: int) -> int:
        if v < 2:
            raise ValueError("n must be at least 2")
        return v

    @field_validator("amplitudes", mode="before")
    @classmethod
    def accept_amplitude_list(cls, v: Any) -> Any:
        """A bare list is shorthand for {values: [...]}."""
        if isinstance(v, (list, tuple)):
            return {"values": list(v)}
        return v

    @field_validator("epsilon", "ball_radius")
    @classmethod
    def validate_positive(cls, v: float | str) -> float | str:
        if isinstance(v, float) and v < 0:
            raise ValueError("must be non-negative or 'auto'")
        return v

    @model_validator(mode="after")
    def validate_lengths(self) -> "Settings":
        root_count = self.n * (self.n + 1) // 2
        if self.amplitudes.values is not None and len(self.amplitudes.values) != root_count:
            raise ValueError(f"amplitudes.values must have N = {root_count} entries for n = {self.n}, got {len(self.amplitudes.values)}")
        if isinstance(self.chamber_point, list) and len(self.chamber_point) != self.n:
            raise ValueError(f"chamber_point must have n = {self.n} entries, got {len(self.chamber_point)}")
        if isinstance(self.ball_radius, float) and self.ball_radius == 0:
            raise ValueError("ball_radius must be positive")
        return self

    @property
    def root_count(self) -> int:
        return self.n * (self.n + 1) // 2

    @classmethod
    def find_config(cls) -> Path | None:
        """Find the config file in the current directory or parent directories."""
        current_dir = Path.cwd()
        while current_dir != current_dir.parent:
            for filename in CONFIG_FILENAMES:
                config_path = current_dir / filename
                if config_path.exists():
                    return config_path
            current_dir = current_dir.parent
        return None


def deep_merge(base: dict, update: dict) -> dict:
    """Recursively merge two dictionaries, preserving nested structures."""
    merged = base.copy()
    for key, value in update.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def parse_override(assignment: str) -> Dict[str, Any]:
    """
    Turn "integrator.rel_tol=1e-10" into {"integrator": {"rel_tol": 1e-10}}.
    Values are parsed as YAML, so lists ("[1, 0.5]") and numbers work.
    """
    from rootcloak.core.exceptions import ConfigInvalid

    key, sep, raw = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigInvalid(f"Invalid override '{assignment}'", "Overrides take the form key=value, e.g. --set epsilon=0.01")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigInvalid(f"Invalid value in override '{assignment}'", str(e), field=key) from e
    # YAML reads 1e-10 as a string; numbers in scientific notation are common here
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            pass
    result: Dict[str, Any] = {}
    cursor = result
    parts = key.split(".")
    for part in parts[:-1]:
        cursor = cursor.setdefault(part, {})
    cursor[parts[-1]] = value
    return result


def load_config_file(config_file: Path) -> Dict[str, Any]:
    """Read a YAML or JSON config file into a dict."""
    from rootcloak.core.exceptions import ConfigInvalid

    if not config_file.exists():
        raise ConfigInvalid(f"Config file not found: {config_file}")
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            if config_file.suffix.lower() == ".json":
                data = json.load(f)
            else:
                data = yaml.safe_load(f)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigInvalid(f"Could not parse config file {config_file}", str(e)) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigInvalid(f"Config file {config_file} must contain a mapping at the top level")
    return data


def get_settings(config_path: str | Path | None = None, overrides: List[str] | None = None) -> Settings:
    """
    Build settings from defaults, environment, the config file and overrides.

    Raises ConfigInvalid with the offending field path when validation fails.
    """
    from rootcloak.core.exceptions import ConfigInvalid

    if config_path:
        config_file: Path | None = Path(config_path)
    else:
        config_file = Settings.find_config()

    merged: Dict[str, Any] = load_config_file(config_file) if config_file else {}
    for assignment in overrides or []:
        merged = deep_merge(merged, parse_override(assignment))

    try:
        return Settings(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        details = "\n".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise ConfigInvalid(f"Invalid configuration field '{location}'", details, field=location) from e
