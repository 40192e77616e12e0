"""
Comparison schemes: single-point beam focusing, multi-point superposed
focusing and reactive tracking with beam switching.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from core.aperture import ApertureConfig, BeamWeights, normalized_weights, weights_from_phases
from core.exceptions import DomainError, NumericalError
from core.nearfield import channel, intensity_at
from core.trajectory import Trajectory, sample_points
from utils.logging_config import get_logger, log_beam_switch

logger = get_logger("tabs.baselines")

_CANCELLATION_FLOOR = 1e-9


def focus_weights(focal: tuple[float, float], cfg: ApertureConfig) -> BeamWeights:
    """
    Unit-modulus weights phase-matched to the channel at ``focal``.

    phi_n = -k0 r_n cancels the propagation phase, so every element adds
    in phase at the focal point.
    """
    r = channel(focal, cfg).distances
    return weights_from_phases(-cfg.wave_number * r, cfg)


def multipoint_weights(focals: Sequence[tuple[float, float]], cfg: ApertureConfig,
                       phase_only: bool = False) -> BeamWeights:
    """
    Equal-power superposition of K focused beams.

    Args:
        focals: K >= 1 focal points
        cfg: Array configuration
        phase_only: Keep only the phase of the superposition (unit-modulus)
            instead of renormalising it to unit l2 norm

    Returns:
        Unit-norm weights, or unit-modulus weights when ``phase_only``
    """
    if len(focals) < 1:
        raise DomainError("multipoint focusing needs at least one focal point")
    total = np.zeros(cfg.num_elements, dtype=complex)
    for focal in focals:
        total += focus_weights(focal, cfg).coefficients
    total /= np.sqrt(len(focals))

    if np.linalg.norm(total) < _CANCELLATION_FLOOR:
        raise NumericalError("superposed focusing weights cancel to zero")
    if phase_only:
        return weights_from_phases(np.angle(total), cfg)
    return normalized_weights(total)


def spread_focals(traj: Trajectory, count: int, axis: str = "x",
                  resolution: int = 4096) -> list[tuple[float, float]]:
    """
    ``count`` points on the trajectory at the centres of equal bins of its
    x extent (``axis="x"``) or z extent (``axis="z"``).
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    samples = sample_points(traj, resolution)
    centres = (np.arange(count) + 0.5) / count

    if axis == "x" and not _strictly_monotone(samples.x):
        logger.warning("Trajectory is not monotone in x, spreading focals in z", count=count)
        axis = "z"

    if axis == "z":
        z = traj.z_start + centres * traj.segment_length
        x = np.interp(z, samples.z, samples.x)
    elif axis == "x":
        xs = samples.x
        order = np.argsort(xs)
        x = xs[0] + centres * (xs[-1] - xs[0])
        z = np.interp(x, xs[order], samples.z[order])
    else:
        raise DomainError(f"Unknown spread axis: {axis}")
    return [(float(a), float(b)) for a, b in zip(x, z)]


def _strictly_monotone(values: np.ndarray) -> bool:
    dv = np.diff(values)
    return bool(np.all(dv > 0) or np.all(dv < 0))


@dataclass(frozen=True)
class TrackingPolicy:
    """Reactive re-focusing: refocus at the current sample when I < threshold."""

    threshold: float
    resolution: int = 2000

    def __post_init__(self):
        if not self.threshold > 0:
            raise DomainError(f"tracking threshold must be positive, got {self.threshold}")
        if self.resolution < 2:
            raise DomainError(f"tracking resolution must be >= 2, got {self.resolution}")


@dataclass(frozen=True, eq=False)
class TrackingResult:
    z: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    switched: np.ndarray = field(repr=False)
    switch_events: tuple[float, ...] = ()

    @property
    def switch_count(self) -> int:
        return len(self.switch_events)

    def as_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.z.tolist(), self.intensity.tolist()))

    def export_csv(self, path: Union[str, Path]) -> Path:
        from utils.export import write_csv

        return write_csv(path, ["z", "intensity", "switched"], [self.z, self.intensity, self.switched])


def tracking_run(traj: Trajectory, cfg: ApertureConfig, policy: TrackingPolicy,
                 initial_weights: Optional[BeamWeights] = None) -> TrackingResult:
    """
    Walk the trajectory in increasing z and refocus whenever the intensity
    drops below the threshold.

    Args:
        traj: Receiver trajectory
        cfg: Array configuration
        policy: Threshold and sample count
        initial_weights: Weights in use at the first sample; defaults to a
            beam focused on the first sample (not counted as a switch)

    Raises:
        NumericalError: a freshly focused beam is still below the threshold
    """
    samples = sample_points(traj, policy.resolution)
    weights = initial_weights
    if weights is None:
        weights = focus_weights((samples.x[0], samples.z[0]), cfg)
    gamma = policy.threshold

    values = np.empty(len(samples))
    switched = np.zeros(len(samples), dtype=bool)
    events: list[float] = []
    for i, (x, z) in enumerate(zip(samples.x, samples.z)):
        value = float(intensity_at(np.array([x]), np.array([z]), weights, cfg)[0])
        if value < gamma:
            weights = focus_weights((x, z), cfg)
            refocused = float(intensity_at(np.array([x]), np.array([z]), weights, cfg)[0])
            if refocused < gamma:
                raise NumericalError(
                    f"threshold unattainable: focused intensity {refocused:.6g} < gamma={gamma:.6g} at z={z:.6g}")
            log_beam_switch(float(z), value, refocused)
            events.append(float(z))
            switched[i] = True
            value = refocused
        values[i] = value

    logger.info("Tracking walk finished", switch_count=len(events), threshold=gamma,
                sample_count=policy.resolution)
    return TrackingResult(z=samples.z, intensity=values, switched=switched,
                          switch_events=tuple(events))
