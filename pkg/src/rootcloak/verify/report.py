"""
Report models of the verification suites and their JSON rendering.
"""

import json
from datetime import datetime
from typing import Any, Dict, List

from pydantic import BaseModel, Field, computed_field

from rootcloak.geometry.metricfield import GeometryReport
from rootcloak.logging.json_serializer import JSONSerializer


class RayRecord(BaseModel):
    offset: List[float]
    lateral: float
    angular: float
    balls_crossed: List[int]
    energy_drift: float
    time_delay: float
    crossing_ok: bool = True
    mirror_residual: float | None = None
    reversal_residual: float | None = None


class InvisibilityReport(BaseModel):
    label: str
    """`root:i`, `root:-i` or `custom:...`."""

    direction: List[float]
    root: int | None = None
    """0-based root index when the direction is a signed root."""

    control: bool = False
    """True for the visibility control run, which must show a deviation."""

    rays: int
    hits: int
    max_lateral: float
    max_angular: float
    max_energy_drift: float
    max_mirror_residual: float | None = None
    max_reversal_residual: float | None = None
    crossings_valid: bool = True
    thresholds: Dict[str, float]
    passed: bool
    records: List[RayRecord] = Field(default_factory=list)


class SymmetryReport(BaseModel):
    samples: int
    per_generator: List[float]
    max_residual: float
    threshold: float
    passed: bool


class SectionResidual(BaseModel):
    root: int
    rays: int
    max_residual: float
    max_exit_angle: float


class EnergyReport(BaseModel):
    grid_points: int
    max_level_deviation: float
    pushed_points: int
    max_pushed_deviation: float
    sections: List[SectionResidual]
    max_section_residual: float
    thresholds: Dict[str, float]
    passed: bool


class PairObstruction(BaseModel):
    k: int
    l: int
    """1-based root indices of the pair."""

    max_abs: float
    at: List[float]


class ObstructionReport(BaseModel):
    grid_points: int
    pairs: List[PairObstruction]
    degenerate_pairs: List[List[int]]
    threshold: float

    @computed_field
    @property
    def nonzero(self) -> bool:
        return any(p.max_abs > self.threshold for p in self.pairs)


class CurvatureSample(BaseModel):
    x: List[float]
    fd_step: float
    max_riemann: float
    """Largest |R^i_jkl|."""

    scalar: float
    symmetry_residual: float
    """Largest violation of the pair symmetries of the lowered tensor."""


class FlatnessReport(BaseModel):
    sample: CurvatureSample
    flat: CurvatureSample
    """Same stencil at epsilon = 0."""

    outside: CurvatureSample
    noise_floor: float
    floor_ratio: float
    claimed: bool
    """Non-flatness is only asserted when some pair obstruction is nonzero."""

    obstruction: ObstructionReport
    symmetry_tolerance: float
    passed: bool


class VerificationReport(BaseModel):
    config_digest: str
    created_at: datetime = Field(default_factory=datetime.now)
    duration: float | None = None
    geometry: GeometryReport | None = None
    invisibility: List[InvisibilityReport] | None = None
    symmetry: SymmetryReport | None = None
    energy: EnergyReport | None = None
    flatness: FlatnessReport | None = None

    @computed_field
    @property
    def passed(self) -> bool:
        checks: List[bool] = []
        if self.geometry is not None:
            checks.append(self.geometry.passed)
        if self.invisibility is not None:
            checks.extend(r.passed for r in self.invisibility)
        for suite in (self.symmetry, self.energy, self.flatness):
            if suite is not None:
                checks.append(suite.passed)
        return all(checks)

    def summary(self) -> Dict[str, bool]:
        """Pass/fail per suite that ran."""
        result: Dict[str, bool] = {}
        if self.geometry is not None:
            result["geometry"] = self.geometry.passed
        if self.invisibility is not None:
            result["invisibility"] = all(r.passed for r in self.invisibility)
        for name in ("symmetry", "energy", "flatness"):
            suite = getattr(self, name)
            if suite is not None:
                result[name] = suite.passed
        return result


def to_json(model: BaseModel | Dict[str, Any], indent: int | None = 2) -> str:
    """
    JSON text for a report. Floats are written in their shortest round-trip form;
    non-finite values become strings.
    """
    data = model.model_dump(mode="python") if isinstance(model, BaseModel) else model
    return json.dumps(JSONSerializer().serialize(data), indent=indent, allow_nan=False)
