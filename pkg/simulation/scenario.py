"""
Scenario files: JSON documents validated by pydantic models.

A scenario fixes the array, the receiver trajectory, the primary design
method, an optional field grid and the evaluation settings. Every shipped
scenario carries a ``description`` of the setup it reproduces.
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.aperture import ApertureConfig
from core.exceptions import ScenarioError, TabsError
from core.phase_design import Convention, PadMode
from core.trajectory import (
    CircularTrajectory,
    ConstantTrajectory,
    LinearTrajectory,
    ParabolicTrajectory,
    TabulatedTrajectory,
    Trajectory,
)
from utils.logging_config import get_logger

logger = get_logger("tabs.scenario")

SCHEMA_VERSION = 1

DESIGNED_METHODS = ("numeric", "circular", "parabolic")
BASELINE_METHODS = ("focus", "multipoint", "tracking")


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ApertureSpec(_Spec):
    num_elements: int = Field(ge=1)
    spacing: float = Field(default=0.5, gt=0)
    wavelength_m: Optional[float] = Field(default=None, gt=0)


class TrajectorySpec(_Spec):
    kind: Literal["constant", "linear", "parabolic", "circular", "tabulated"]
    z_start: float
    z_end: float
    x0: float = 0.0
    slope: float = 0.0
    alpha: float = Field(default=1e-4, gt=0)
    apex_x: float = 0.0
    orientation: Literal[1, -1] = 1
    radius: float = Field(default=80.0, gt=0)
    center_x: float = 0.0
    center_z: float = 0.0
    table_path: Optional[str] = None
    order: Literal[1, 3] = 3

    @model_validator(mode="after")
    def _check_segment(self):
        if not self.z_start < self.z_end:
            raise ValueError(f"z_start must be < z_end, got [{self.z_start}, {self.z_end}]")
        if self.kind == "tabulated" and not self.table_path:
            raise ValueError("tabulated trajectories need table_path")
        return self


class DesignSpec(_Spec):
    method: Literal["numeric", "circular", "parabolic", "focus", "multipoint", "tracking"]
    samples_per_wavelength: int = Field(default=8, ge=1)
    pad_mode: PadMode = PadMode.ZERO
    convention: Convention = Convention.PROPAGATION
    lobe_correction: bool = False
    focal: Optional[Tuple[float, float]] = None
    focal_z: Optional[float] = None
    focal_count: int = Field(default=5, ge=1)
    phase_only: bool = False


class GridSpec(_Spec):
    x_min: float
    x_max: float
    z_min: float
    z_max: float
    nx: int = Field(default=200, ge=2)
    nz: int = Field(default=200, ge=2)

    @model_validator(mode="after")
    def _check_ranges(self):
        if not (self.x_min < self.x_max and self.z_min < self.z_max):
            raise ValueError("grid ranges must satisfy x_min < x_max and z_min < z_max")
        return self


class EvaluationSpec(_Spec):
    gammas: List[float] = Field(default_factory=lambda: [0.0])
    samples: Optional[int] = Field(default=None, ge=100)
    baselines: List[Literal["focus", "multipoint"]] = Field(default_factory=list)
    focal_z: Optional[float] = None
    multipoint_count: int = Field(default=5, ge=1)
    multipoint_max: int = Field(default=0, ge=0)
    multipoint_gamma: float = Field(default=0.007, gt=0)
    tracking_gamma: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_gammas(self):
        if not self.gammas:
            raise ValueError("gammas must not be empty")
        if any(g < 0 for g in self.gammas):
            raise ValueError("gammas must be non-negative")
        return self


class Scenario(_Spec):
    schema_version: Literal[1]
    name: str = Field(min_length=1)
    description: str = ""
    aperture: ApertureSpec
    trajectory: TrajectorySpec
    design: DesignSpec
    grid: Optional[GridSpec] = None
    evaluation: EvaluationSpec = Field(default_factory=EvaluationSpec)
    output_dir: Optional[str] = None
    threads: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_method_inputs(self):
        method, kind = self.design.method, self.trajectory.kind
        if method == "circular":
            if kind != "circular":
                raise ValueError("circular design needs a circular trajectory")
            if self.trajectory.center_z != 0:
                raise ValueError("circular design needs a circle centred on the aperture line (center_z = 0)")
        if method == "parabolic" and kind != "parabolic":
            raise ValueError("parabolic design needs a parabolic trajectory")
        for label, z in (("design.focal_z", self.design.focal_z), ("evaluation.focal_z", self.evaluation.focal_z)):
            if z is not None and not self.trajectory.z_start <= z <= self.trajectory.z_end:
                raise ValueError(f"{label}={z} lies outside the trajectory segment")
        return self

    @property
    def primary_label(self) -> str:
        """Report label of the design method: designed profiles report as 'tabs'."""
        return "tabs" if self.design.method in DESIGNED_METHODS else self.design.method


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(p) for p in item.get("loc", ())) or "<root>"
        parts.append(f"{where}: {item.get('msg')}")
    return "; ".join(parts)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Validate a JSON scenario document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: invalid JSON ({e})")
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"{source}: {_format_validation_error(e)}")


def load_scenario(path: Union[str, Path]) -> Scenario:
    source = Path(path)
    if not source.is_file():
        raise ScenarioError(f"scenario file not found: {source}")
    scenario = parse_scenario(source.read_text(encoding="utf-8"), str(source))

    # table paths are relative to the scenario file
    table = scenario.trajectory.table_path
    if table and not Path(table).is_absolute():
        resolved = str((source.parent / table).resolve())
        trajectory = scenario.trajectory.model_copy(update={"table_path": resolved})
        scenario = scenario.model_copy(update={"trajectory": trajectory})
    logger.info("Scenario loaded", scenario=scenario.name, method=scenario.design.method,
                path=str(source))
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return scenario.model_dump_json(indent=2, exclude_none=True)


def build_config(scenario: Scenario) -> ApertureConfig:
    spec = scenario.aperture
    try:
        return ApertureConfig(num_elements=spec.num_elements, spacing=spec.spacing,
                              wavelength_m=spec.wavelength_m)
    except TabsError as e:
        raise ScenarioError(f"aperture: {e}")


def build_trajectory(scenario: Scenario) -> Trajectory:
    """Instantiate the trajectory variant named by the scenario."""
    spec = scenario.trajectory
    segment = {"z_start": spec.z_start, "z_end": spec.z_end}
    try:
        if spec.kind == "constant":
            return ConstantTrajectory(x0=spec.x0, **segment)
        if spec.kind == "linear":
            return LinearTrajectory(slope=spec.slope, x0=spec.x0, **segment)
        if spec.kind == "parabolic":
            return ParabolicTrajectory(alpha=spec.alpha, apex_x=spec.apex_x,
                                       orientation=spec.orientation, **segment)
        if spec.kind == "circular":
            return CircularTrajectory(radius=spec.radius, center_x=spec.center_x,
                                      center_z=spec.center_z, **segment)
        full = TabulatedTrajectory.from_csv(spec.table_path, order=spec.order)
        return TabulatedTrajectory(z_samples=full.z_samples, x_samples=full.x_samples,
                                   order=spec.order, **segment)
    except ScenarioError:
        raise
    except TabsError as e:
        raise ScenarioError(f"trajectory: {e}")
