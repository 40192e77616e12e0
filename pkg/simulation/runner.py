"""
Scenario runner: wires aperture, trajectory, designers, field synthesis,
metrics and baselines into the four reproducible experiments.

Every command writes its artifacts below the resolved output directory and
returns a summary dict. Artifacts are deterministic: rerunning a scenario
with any thread count gives byte-identical files.
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.aperture import ApertureConfig, BeamWeights, export_element_phases
from core.baselines import TrackingPolicy, focus_weights, multipoint_weights, spread_focals, tracking_run
from core.exceptions import DomainError, ScenarioError
from core.metrics import (
    central_window,
    multipoint_sweep,
    reliability_sweep,
    ridge_deviation,
    ridge_trace,
    spatial_outage_reliability,
)
from core.nearfield import field_grid, intensity_along_trajectory
from core.phase_design import PhaseProfile, design_circular, design_numeric, design_parabolic
from core.trajectory import Trajectory, position
from simulation.scenario import DESIGNED_METHODS, Scenario, build_config, build_trajectory
from utils import config
from utils.export import write_csv
from utils.logging_config import get_logger, metrics

logger = get_logger("tabs.runner")


@dataclass(frozen=True)
class RunSettings:
    """Output directory, worker threads and trajectory sample count of one run."""

    output_dir: Path
    threads: int
    samples: int


def _first(*values):
    return next((v for v in values if v is not None), None)


def resolve_settings(scenario: Scenario, out: Optional[str] = None, threads: Optional[int] = None,
                     samples: Optional[int] = None) -> RunSettings:
    """CLI flag, then scenario field, then environment, then built-in default."""
    output_dir = _first(out, scenario.output_dir) or config.TABS_OUTPUT_DIR
    try:
        threads = _first(threads, scenario.threads)
        threads = config.default_threads() if threads is None else threads
        samples = _first(samples, scenario.evaluation.samples)
        samples = config.default_samples() if samples is None else samples
    except RuntimeError as e:
        raise ScenarioError(str(e))
    if threads < 1:
        raise ScenarioError(f"threads must be >= 1, got {threads}")
    if samples < 100:
        raise ScenarioError(f"samples must be >= 100, got {samples}")
    return RunSettings(output_dir=Path(output_dir), threads=int(threads), samples=int(samples))


class ScenarioRunner:
    """Run the design, fieldmap, reliability and compare experiments of one scenario"""

    def __init__(self, scenario: Scenario, settings: RunSettings):
        self.scenario = scenario
        self.settings = settings
        self.cfg: ApertureConfig = build_config(scenario)
        self.traj: Trajectory = build_trajectory(scenario)
        self._profile: Optional[PhaseProfile] = None
        self._weights: Dict[str, BeamWeights] = {}
        self.log = logger.bind(scenario=scenario.name)

    @property
    def out(self) -> Path:
        return self.settings.output_dir

    def _trajectory_point(self, z: Optional[float]) -> Tuple[float, float]:
        if z is None:
            z = 0.5 * (self.traj.z_start + self.traj.z_end)
        return float(position(self.traj, z)), float(z)

    def design_profile(self) -> Optional[PhaseProfile]:
        """Continuous phase profile of the primary method; None for baseline methods."""
        design = self.scenario.design
        if design.method not in DESIGNED_METHODS:
            return None
        if self._profile is None:
            options = dict(samples_per_wavelength=design.samples_per_wavelength, pad_mode=design.pad_mode,
                           lobe_correction=design.lobe_correction)
            if design.method == "numeric":
                self._profile = design_numeric(self.traj, self.cfg, **options)
            elif design.method == "circular":
                self._profile = design_circular(self.traj.radius, self.cfg, center_x=self.traj.center_x,
                                                convention=design.convention, **options)
            else:
                self._profile = design_parabolic(self.traj.alpha, self.cfg, apex_x=self.traj.apex_x,
                                                 orientation=self.traj.orientation, **options)
        return self._profile

    def weights_for(self, label: str) -> BeamWeights:
        """
        Weights of a report label: 'tabs' is the designed profile, the
        others are the baselines configured in the scenario.
        """
        if label in self._weights:
            return self._weights[label]
        design, evaluation = self.scenario.design, self.scenario.evaluation
        primary = label == self.scenario.primary_label

        if label == "tabs":
            weights = self.design_profile().weights()
        elif label == "focus":
            if primary and design.focal is not None:
                focal = design.focal
            else:
                focal = self._trajectory_point(design.focal_z if primary else evaluation.focal_z)
            weights = focus_weights(focal, self.cfg)
        elif label == "multipoint":
            count = design.focal_count if primary else evaluation.multipoint_count
            weights = multipoint_weights(spread_focals(self.traj, count), self.cfg,
                                         phase_only=design.phase_only)
        elif label == "tracking":
            weights = focus_weights(self._trajectory_point(self.traj.z_start), self.cfg)
        else:
            raise ScenarioError(f"unknown method label: {label}")
        self._weights[label] = weights
        return weights

    def method_labels(self) -> List[str]:
        labels = [self.scenario.primary_label]
        for name in self.scenario.evaluation.baselines:
            if name not in labels:
                labels.append(name)
        return labels

    def _operation_count(self) -> int:
        n = self.cfg.num_elements
        method = self.scenario.design.method
        if method in DESIGNED_METHODS:
            return int(self.design_profile().xi.size) + n
        if method == "multipoint":
            return self.scenario.design.focal_count * n
        return n

    def design(self) -> Dict[str, Any]:
        """Write the primary method's phase samples and per-element phases."""
        started = time.perf_counter()
        profile = self.design_profile()
        weights = self.weights_for(self.scenario.primary_label)
        elapsed = time.perf_counter() - started

        files = []
        if profile is not None:
            profile.export(self.out / "phase_samples.csv", self.out / "element_phases.csv")
            files.append(self.out / "phase_samples.csv")
        else:
            export_element_phases(self.out / "element_phases.csv", weights.phases)
        files.append(self.out / "element_phases.csv")

        summary = {
            "method": self.scenario.design.method,
            "num_elements": self.cfg.num_elements,
            "design_seconds": elapsed,
            "operation_count": self._operation_count(),
            "files": [str(f) for f in files],
        }
        if profile is not None:
            summary["covered"] = profile.covered
        self.log.info("Design command finished", operation_count=summary["operation_count"],
                      design_seconds=elapsed)
        return summary

    def fieldmap(self) -> Dict[str, Any]:
        """Evaluate the grid, write CSV, grayscale map and ridge trace."""
        spec = self.scenario.grid
        if spec is None:
            raise ScenarioError(f"scenario {self.scenario.name!r} has no grid section")
        weights = self.weights_for(self.scenario.primary_label)
        grid = field_grid(weights, self.cfg, (spec.x_min, spec.x_max), (spec.z_min, spec.z_max),
                          spec.nx, spec.nz, threads=self.settings.threads)
        grid.export_csv(self.out / "fieldmap.csv")
        grid.export_map(self.out / "fieldmap.pgm")
        ridge = ridge_trace(grid)
        write_csv(self.out / "ridge.csv", ["z", "x_ridge"], [ridge[:, 0], ridge[:, 1]])

        summary: Dict[str, Any] = {
            "nx": grid.nx,
            "nz": grid.nz,
            "threads": self.settings.threads,
            "peak_intensity": float(np.max(grid.intensity)),
        }
        lo, hi = central_window(self.traj)
        lo, hi = max(lo, spec.z_min), min(hi, spec.z_max)
        if lo < hi:
            try:
                deviation = ridge_deviation(ridge, self.traj, (lo, hi))
            except DomainError:
                deviation = None
            if deviation is not None:
                summary["ridge_rms"] = deviation.rms
                summary["ridge_max_abs"] = deviation.max_abs
        self.log.info("Fieldmap command finished", nx=grid.nx, nz=grid.nz)
        return summary

    def reliability(self) -> Dict[str, Any]:
        """R_S(gamma) per method, plus the multi-point focal-count sweep when configured."""
        evaluation = self.scenario.evaluation
        curves = {}
        for label in self.method_labels():
            curve = reliability_sweep(self.weights_for(label), self.cfg, self.traj,
                                      evaluation.gammas, self.settings.samples, method=label)
            curve.export_csv(self.out / f"reliability_{label}.csv")
            curves[label] = curve.values.tolist()

        summary: Dict[str, Any] = {"gammas": list(evaluation.gammas), "reliability": curves}
        if evaluation.multipoint_max > 0:
            primary = self.scenario.primary_label
            sweep = multipoint_sweep(self.weights_for(primary), self.cfg, self.traj,
                                     evaluation.multipoint_gamma, evaluation.multipoint_max,
                                     self.settings.samples, reference_label=primary,
                                     phase_only=self.scenario.design.phase_only)
            sweep.export_csv(self.out / "multipoint_sweep.csv")
            summary["multipoint"] = sweep.multipoint.tolist()
        self.log.info("Reliability command finished", methods=",".join(curves))
        return summary

    def compare(self) -> Dict[str, Any]:
        """Trajectory profiles per method, tracking runs and a switch-count report."""
        evaluation = self.scenario.evaluation
        gamma = evaluation.tracking_gamma
        rows: Dict[str, list] = {k: [] for k in ("method", "min_intensity", "mean_intensity",
                                                  "reliability", "switch_count")}
        for label in self.method_labels():
            weights = self.weights_for(label)
            profile = intensity_along_trajectory(weights, self.cfg, self.traj, self.settings.samples)
            write_csv(self.out / f"profile_{label}.csv", ["z", "x", "intensity"],
                      [profile.z, profile.x, profile.intensity])

            rows["method"].append(label)
            rows["min_intensity"].append(float(np.min(profile.intensity)))
            rows["mean_intensity"].append(float(np.average(profile.intensity, weights=profile.arc_weight)))
            if gamma is None:
                rows["reliability"].append("")
                rows["switch_count"].append("")
                continue
            rows["reliability"].append(spatial_outage_reliability(profile, gamma))
            run = tracking_run(self.traj, self.cfg, TrackingPolicy(gamma, self.settings.samples),
                               initial_weights=weights)
            run.export_csv(self.out / f"tracking_{label}.csv")
            rows["switch_count"].append(run.switch_count)

        write_csv(self.out / "compare_report.csv", list(rows), list(rows.values()))
        self.log.info("Compare command finished", methods=",".join(rows["method"]))
        return {"tracking_gamma": gamma, **rows}


def _run(command: str, scenario: Scenario, settings: RunSettings) -> Dict[str, Any]:
    metrics.reset_counters()
    runner = ScenarioRunner(scenario, settings)
    summary = getattr(runner, command)()
    metrics.log_metrics()
    return summary


def cmd_design(scenario: Scenario, settings: RunSettings) -> Dict[str, Any]:
    return _run("design", scenario, settings)


def cmd_fieldmap(scenario: Scenario, settings: RunSettings) -> Dict[str, Any]:
    return _run("fieldmap", scenario, settings)


def cmd_reliability(scenario: Scenario, settings: RunSettings) -> Dict[str, Any]:
    return _run("reliability", scenario, settings)


def cmd_compare(scenario: Scenario, settings: RunSettings) -> Dict[str, Any]:
    return _run("compare", scenario, settings)


COMMANDS = {
    "design": cmd_design,
    "fieldmap": cmd_fieldmap,
    "reliability": cmd_reliability,
    "compare": cmd_compare,
}
