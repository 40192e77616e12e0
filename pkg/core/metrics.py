"""
Spatial outage reliability and beam diagnostics.

R_S(gamma) is the arc-length fraction of a trajectory on which the
received intensity reaches gamma. The measure is approximated by sample
indicators weighted with trapezoidal arc-length weights; samples at a
threshold crossing count with their full weight.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from core.aperture import ApertureConfig, BeamWeights
from core.exceptions import DomainError
from core.nearfield import FieldGrid, TrajectoryProfile, intensity_along_trajectory
from core.trajectory import Trajectory, position
from utils.logging_config import get_logger

logger = get_logger("tabs.reliability")

DEFAULT_SAMPLE_COUNT = 2000
MIN_SAMPLE_COUNT = 100
# Polyline nodes for distance-to-curve and ridge points per distance block
_CURVE_RESOLUTION = 4096
_DISTANCE_BLOCK = 64


def spatial_outage_reliability(intensity_samples: Union[TrajectoryProfile, Sequence[tuple[float, float, float]]],
                               gamma: float) -> float:
    """
    Fraction of arc length with intensity >= gamma.

    Args:
        intensity_samples: A TrajectoryProfile or (z, I, arc_weight) tuples
        gamma: Threshold

    Returns:
        R_S in [0, 1]
    """
    values, weights = _intensity_and_weights(intensity_samples)
    return float(np.sum(weights[values >= gamma]) / np.sum(weights))


def _intensity_and_weights(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, TrajectoryProfile):
        values, weights = samples.intensity, samples.arc_weight
    else:
        table = np.asarray(samples, dtype=float)
        if table.size == 0:
            raise DomainError("reliability needs at least one sample")
        if table.ndim != 2 or table.shape[1] != 3:
            raise DomainError("samples must be (z, I, arc_weight) tuples")
        values, weights = table[:, 1], table[:, 2]
    if values.size == 0:
        raise DomainError("reliability needs at least one sample")
    if np.any(weights <= 0):
        raise DomainError("arc weights must be positive")
    return values, weights


@dataclass(frozen=True, eq=False)
class ReliabilityCurve:
    thresholds: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    method: str
    trajectory: str
    sample_count: int

    def export_csv(self, path: Union[str, Path]) -> Path:
        from utils.export import write_csv

        return write_csv(path, ["gamma", "reliability", "method"],
                         [self.thresholds, self.values, [self.method] * self.thresholds.size])


def reliability_curve(profile: TrajectoryProfile, gammas: Sequence[float], method: str,
                      trajectory: str = "") -> ReliabilityCurve:
    """R_S for each threshold from one sampled profile."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise DomainError("thresholds must be non-negative")
    values = np.array([spatial_outage_reliability(profile, g) for g in gammas])
    return ReliabilityCurve(thresholds=gammas, values=values, method=method,
                            trajectory=trajectory, sample_count=len(profile))


def reliability_sweep(weights: BeamWeights, cfg: ApertureConfig, traj: Trajectory,
                      gammas: Sequence[float], count: int = DEFAULT_SAMPLE_COUNT,
                      method: str = "") -> ReliabilityCurve:
    """R_S over a threshold sweep, sharing one trajectory intensity pass."""
    if count < MIN_SAMPLE_COUNT:
        raise DomainError(f"reliability sweeps need at least {MIN_SAMPLE_COUNT} samples, got {count}")
    profile = intensity_along_trajectory(weights, cfg, traj, count)
    curve = reliability_curve(profile, gammas, method, traj.kind)
    logger.info("Reliability sweep finished", method_label=method,
                thresholds=int(curve.thresholds.size), sample_count=count)
    return curve


def ridge_trace(grid: FieldGrid) -> np.ndarray:
    """
    x of maximum intensity for every z column, refined by a parabola through
    the three samples around the discrete maximum.

    Returns:
        (nz, 2) array of (z, x_ridge)
    """
    values = grid.intensity
    # argmax returns the first maximum: ties go to the smaller x
    idx = np.argmax(values, axis=0)
    x = grid.x
    dx = x[1] - x[0]
    ridge = x[idx].astype(float)

    inner = (idx > 0) & (idx < grid.nx - 1)
    cols = np.flatnonzero(inner)
    if cols.size:
        i = idx[cols]
        left, mid, right = values[i - 1, cols], values[i, cols], values[i + 1, cols]
        denom = left - 2.0 * mid + right
        safe = denom < 0
        offset = np.zeros(cols.size)
        offset[safe] = 0.5 * (left[safe] - right[safe]) / denom[safe]
        ridge[cols] += np.clip(offset, -0.5, 0.5) * dx
    return np.column_stack([grid.z, ridge])


@dataclass(frozen=True)
class RidgeDeviation:
    rms: float
    max_abs: float
    count: int


def distance_to_curve(x: np.ndarray, z: np.ndarray, traj: Trajectory,
                      resolution: int = _CURVE_RESOLUTION) -> np.ndarray:
    """Euclidean distance from each (x, z) to the trajectory segment, as a fine polyline."""
    zc = np.linspace(traj.z_start, traj.z_end, resolution)
    nodes = np.column_stack([position(traj, zc), zc])
    start, seg = nodes[:-1], np.diff(nodes, axis=0)
    seg_len2 = np.sum(seg * seg, axis=1)

    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    out = np.empty(x.size)
    for lo in range(0, x.size, _DISTANCE_BLOCK):
        hi = min(lo + _DISTANCE_BLOCK, x.size)
        px = x[lo:hi, None] - start[None, :, 0]
        pz = z[lo:hi, None] - start[None, :, 1]
        t = np.clip((px * seg[:, 0] + pz * seg[:, 1]) / seg_len2, 0.0, 1.0)
        dx, dz = px - t * seg[:, 0], pz - t * seg[:, 1]
        out[lo:hi] = np.sqrt(np.min(dx * dx + dz * dz, axis=1))
    return out


def ridge_deviation(ridge: np.ndarray, traj: Trajectory,
                    z_window: Optional[tuple[float, float]] = None,
                    measure: str = "normal") -> RidgeDeviation:
    """
    RMS / max deviation between a ridge trace and the trajectory.

    ``measure="normal"`` takes the distance from each ridge point to the
    curve; ``measure="x"`` the offset x_ridge - c(z) at equal z.
    """
    if measure not in ("normal", "x"):
        raise DomainError(f"Unknown deviation measure: {measure}")
    z, x = ridge[:, 0], ridge[:, 1]
    lo, hi = z_window or (traj.z_start, traj.z_end)
    lo, hi = max(lo, traj.z_start), min(hi, traj.z_end)
    keep = (z >= lo) & (z <= hi)
    if not np.any(keep):
        raise DomainError("no ridge samples inside the requested window")
    if measure == "x":
        err = x[keep] - position(traj, z[keep])
    else:
        err = distance_to_curve(x[keep], z[keep], traj)
    return RidgeDeviation(rms=float(np.sqrt(np.mean(err * err))),
                          max_abs=float(np.max(np.abs(err))), count=int(np.sum(keep)))


def central_window(traj: Trajectory, fraction: float = 0.8) -> tuple[float, float]:
    """Central ``fraction`` of the segment's z extent."""
    margin = 0.5 * (1.0 - fraction) * traj.segment_length
    return traj.z_start + margin, traj.z_end - margin


def switch_count(profile: Union[TrajectoryProfile, Sequence[tuple[float, float]]], gamma: float,
                 policy=None, *, traj: Optional[Trajectory] = None,
                 cfg: Optional[ApertureConfig] = None,
                 weights: Optional[BeamWeights] = None) -> int:
    """
    Number of re-focus events the tracking baseline needs.

    A profile that already meets gamma everywhere needs none. Otherwise the
    count comes from ``baselines.tracking_run`` started with ``weights``.
    """
    from core.baselines import TrackingPolicy, tracking_run

    if isinstance(profile, TrajectoryProfile):
        values = profile.intensity
    else:
        values = np.asarray([p[1] for p in profile], dtype=float)
    if values.size and np.all(values >= gamma):
        return 0
    if traj is None or cfg is None:
        raise DomainError("switch counting below threshold needs the trajectory and array config")
    policy = policy or TrackingPolicy(threshold=gamma, resolution=max(int(values.size), 2))
    return tracking_run(traj, cfg, policy, initial_weights=weights).switch_count


@dataclass(frozen=True, eq=False)
class MultipointSweep:
    counts: np.ndarray = field(repr=False)
    multipoint: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)
    gamma: float
    reference_label: str

    def export_csv(self, path: Union[str, Path]) -> Path:
        from utils.export import write_csv

        return write_csv(path, ["num_focals", "reliability_multipoint", f"reliability_{self.reference_label}", "gamma"],
                         [self.counts, self.multipoint, self.reference, [self.gamma] * self.counts.size])


def multipoint_sweep(reference: BeamWeights, cfg: ApertureConfig, traj: Trajectory,
                     gamma: float, max_focals: int = 10, count: int = DEFAULT_SAMPLE_COUNT,
                     reference_label: str = "tabs", phase_only: bool = False) -> MultipointSweep:
    """R_S at ``gamma`` for multi-point focusing with 1..max_focals focals, next to a reference scheme."""
    from core.baselines import multipoint_weights, spread_focals

    if max_focals < 1:
        raise DomainError("max_focals must be >= 1")
    ref_value = reliability_sweep(reference, cfg, traj, [gamma], count, reference_label).values[0]
    counts = np.arange(1, max_focals + 1)
    values = np.empty(counts.size)
    for i, k in enumerate(counts):
        focals = spread_focals(traj, int(k))
        weights = multipoint_weights(focals, cfg, phase_only=phase_only)
        values[i] = reliability_sweep(weights, cfg, traj, [gamma], count, f"multipoint_k{k}").values[0]
    return MultipointSweep(counts=counts, multipoint=values, reference=np.full(counts.size, ref_value),
                           gamma=float(gamma), reference_label=reference_label)
