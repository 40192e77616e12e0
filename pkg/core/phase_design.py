"""
Aperture phase design for trajectory-adaptive beams.

The numeric designer realises the phase gradient k0 * sin(theta), theta being
the angle of the ray that is tangent to the trajectory. Along such a ray
family phi(xi) + k0 * L(xi) grows like k0 times the arc length of the caustic
(L is the ray length from xi to its tangent point), which gives the profile
without integrating the gradient across its edge singularities. Closed forms
exist for circular and parabolic caustics.

Phase convention: weights are exp(j*phi)/sqrt(N) and the field at (x, z)
accumulates phi(xi) + k0 * r, so a positive gradient launches rays toward +x.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np

from core.aperture import ApertureConfig, BeamWeights, element_positions, weights_from_phases
from core.exceptions import DomainError, NumericalError
from core.specfun import arcsec, parabolic_kernel
from core.trajectory import (
    TabulatedTrajectory,
    Trajectory,
    position,
    slope,
    solve_tangency_many,
    tangency_map,
)
from utils.logging_config import get_logger, log_design_completed, metrics

logger = get_logger("tabs.phase_design")

DEFAULT_SAMPLES_PER_WAVELENGTH = 8
# Ai(-s) peaks at s = -a'1, a'1 being the first zero of Ai'
AIRY_MAIN_LOBE = 1.0187929716474710
# Gauss-Legendre nodes per interval for caustic arc length
_ARC_NODES = 8
# Offset-curve samples for lobe-corrected numeric designs
_LOBE_CURVE_SAMPLES = 2049


class PadMode(str, Enum):
    STRICT = "strict"
    ZERO = "zero"


class Convention(str, Enum):
    PROPAGATION = "propagation"
    CONJUGATE = "conjugate"


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """
    Continuous aperture phase phi(xi) sampled on a uniform grid.

    ``covered`` is the sub-interval where phi comes from the caustic design;
    outside it the samples are a constant extension (pad mode "zero").
    """

    xi: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)
    cfg: ApertureConfig
    method: str
    covered: tuple[float, float]

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        phase = np.asarray(self.phase, dtype=float)
        if xi.ndim != 1 or xi.shape != phase.shape or xi.size == 0:
            raise DomainError("xi and phase must be equal-length 1-D arrays")
        if xi.size > 1 and np.any(np.diff(xi) <= 0):
            raise DomainError("xi samples must be strictly increasing")
        tol = 1e-9 * max(1.0, self.cfg.aperture_length)
        if xi[0] < -tol or xi[-1] > self.cfg.aperture_length + tol:
            raise DomainError("xi samples must lie within [0, D]")
        if not np.all(np.isfinite(phase)):
            raise NumericalError("phase profile is not finite")
        for arr in (xi, phase):
            arr.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "phase", phase)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.xi[0]), float(self.xi[-1])

    @property
    def element_phases(self) -> np.ndarray:
        return discretize(self, self.cfg)

    def weights(self) -> BeamWeights:
        return weights_from_phases(self.element_phases, self.cfg)

    def gradient(self) -> np.ndarray:
        """Central-difference dphi/dxi on the sample grid."""
        if self.xi.size < 2:
            return np.zeros_like(self.phase)
        return np.gradient(self.phase, self.xi)

    def interpolate(self, xi: np.ndarray) -> np.ndarray:
        return np.interp(xi, self.xi, self.phase)

    def export(self, samples_path: Union[str, Path], elements_path: Union[str, Path]) -> None:
        """Write (xi, phi) and (n, phi_n) CSV files."""
        from core.aperture import export_element_phases
        from utils.export import write_csv

        write_csv(samples_path, ["xi", "phase_radians"], [self.xi, self.phase])
        export_element_phases(elements_path, self.element_phases)


def aperture_grid(cfg: ApertureConfig, samples_per_wavelength: int = DEFAULT_SAMPLES_PER_WAVELENGTH) -> np.ndarray:
    """Uniform xi grid over [0, D]; coincides with element positions when d * spw is an integer."""
    if samples_per_wavelength < 1:
        raise DomainError("samples_per_wavelength must be >= 1")
    length = cfg.aperture_length
    if length == 0:
        return np.zeros(1)
    count = int(round(length * samples_per_wavelength / cfg.wavelength)) + 1
    return np.linspace(0.0, length, count)


def _pad(xi: np.ndarray, phase: np.ndarray, valid: np.ndarray, cfg: ApertureConfig,
         pad_mode: PadMode, method: str) -> PhaseProfile:
    if not np.any(valid):
        raise NumericalError(f"{method}: no aperture sample lies inside the trajectory's tangent image")
    idx = np.flatnonzero(valid)
    lo, hi = idx[0], idx[-1]
    covered = (float(xi[lo]), float(xi[hi]))

    if pad_mode is PadMode.STRICT:
        return PhaseProfile(xi[lo:hi + 1], phase[lo:hi + 1], cfg, method, covered)

    padded = phase.copy()
    padded[:lo] = phase[lo]
    padded[hi + 1:] = phase[hi]
    if lo > 0 or hi < xi.size - 1:
        logger.warning("Aperture outside the caustic image padded with constant phase",
                       method=method, covered_from=covered[0], covered_to=covered[1],
                       padded_samples=int(lo + xi.size - 1 - hi))
    return PhaseProfile(xi, padded, cfg, method, covered)


def _plane_wave(traj: Trajectory, cfg: ApertureConfig, xi: np.ndarray) -> np.ndarray:
    m = float(slope(traj, traj.z_start))
    return cfg.wave_number * xi * m / np.sqrt(1.0 + m * m)


def main_lobe_offset(radius_of_curvature: Union[float, np.ndarray], k0: float) -> Union[float, np.ndarray]:
    """
    Distance from a caustic to the intensity maximum on its lit side.

    Near a caustic of local radius of curvature rho the field follows
    Ai(-n / l) with l = (rho / (2 k0^2))^(1/3), n measured into the lit side,
    so the main lobe sits at n = 1.0188 l.
    """
    rho = np.asarray(radius_of_curvature, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("radius of curvature must be positive")
    offset = AIRY_MAIN_LOBE * np.cbrt(rho / (2.0 * k0 * k0))
    return float(offset) if offset.ndim == 0 else offset


def lobe_corrected_trajectory(traj: Trajectory, k0: float,
                              count: int = _LOBE_CURVE_SAMPLES) -> TabulatedTrajectory:
    """
    Parallel curve of ``traj`` shifted toward its shadow side by the local
    main-lobe offset. Designing for it puts the intensity ridge on ``traj``.
    """
    if traj.is_straight():
        raise DomainError("a straight trajectory forms no caustic to correct")
    z = np.linspace(traj.z_start, traj.z_end, count)
    c, s = traj._c(z), traj._dc(z)
    bend = np.gradient(s, z, edge_order=2)
    if np.any(bend == 0) or np.any(np.sign(bend) != np.sign(bend[0])):
        raise NumericalError("trajectory curvature vanishes or changes sign; the caustic has no single lit side")

    norm = np.sqrt(1.0 + s * s)
    # tangent lines lie on the lit side, so the shadow side is the sign of c''
    shift = np.sign(bend) * main_lobe_offset(norm ** 3 / np.abs(bend), k0)
    z_new = z - shift * s / norm
    x_new = c + shift / norm
    if np.any(np.diff(z_new) <= 0):
        raise NumericalError("main-lobe offset exceeds the trajectory's radius of curvature")
    logger.debug("Lobe-corrected design curve", offset_min=float(np.min(np.abs(shift))),
                 offset_max=float(np.max(np.abs(shift))), samples=count)
    return TabulatedTrajectory.from_samples(z_new, x_new, order=3)


def _caustic_phase(traj: Trajectory, xi: np.ndarray, z_star: np.ndarray, k0: float) -> np.ndarray:
    """k0 * (S(z*) - L(xi)) anchored at the first sample; S is signed caustic arc length."""
    ray = np.hypot(traj._c(z_star) - xi, z_star)
    arc = np.zeros_like(z_star)
    if z_star.size > 1:
        nodes, node_weights = np.polynomial.legendre.leggauss(_ARC_NODES)
        half = 0.5 * np.diff(z_star)
        mid = 0.5 * (z_star[1:] + z_star[:-1])
        speed = np.sqrt(1.0 + traj._dc(mid[:, None] + half[:, None] * nodes[None, :]) ** 2)
        arc[1:] = np.cumsum(half * (speed @ node_weights))
    phase = k0 * (arc - ray)
    return phase - phase[0]


def design_numeric(traj: Trajectory, cfg: ApertureConfig,
                   samples_per_wavelength: int = DEFAULT_SAMPLES_PER_WAVELENGTH,
                   pad_mode: PadMode = PadMode.ZERO,
                   lobe_correction: bool = False) -> PhaseProfile:
    """
    Caustic phase profile for an arbitrary trajectory.

    The profile has gradient k0 * s / sqrt(1 + s^2), s = c'(z*(xi)), and is
    evaluated through the tangent-ray identity so that its accuracy does not
    depend on the aperture sampling.

    Args:
        traj: Target trajectory; its tangent intercept must be monotone
        cfg: Array configuration
        samples_per_wavelength: Aperture sampling density
        pad_mode: Handling of aperture points outside the tangent image
        lobe_correction: Design for ``lobe_corrected_trajectory(traj)`` so the
            intensity maximum, rather than the caustic, follows ``traj``

    Returns:
        PhaseProfile anchored to zero at the first covered sample
    """
    pad_mode = PadMode(pad_mode)
    xi = aperture_grid(cfg, samples_per_wavelength)
    tmap = tangency_map(traj)

    if tmap.degenerate:
        # All tangents share one intercept: straight rays, plane-wave gradient
        phase = _plane_wave(traj, cfg, xi)
        profile = PhaseProfile(xi, phase - phase[0], cfg, "numeric", (float(xi[0]), float(xi[-1])))
        log_design_completed("numeric", cfg.num_elements, xi.size, plane_wave=True)
        return profile

    if lobe_correction:
        traj = lobe_corrected_trajectory(traj, cfg.wave_number)
        tmap = tangency_map(traj)

    tol = 1e-9
    valid = (xi >= tmap.t_min - tol) & (xi <= tmap.t_max + tol)
    if not np.any(valid):
        raise NumericalError(
            f"tangent image [{tmap.t_min:.6g}, {tmap.t_max:.6g}] does not overlap the aperture [0, {cfg.aperture_length}]")

    xi_valid = np.clip(xi[valid], tmap.t_min, tmap.t_max)
    z_star = solve_tangency_many(traj, xi_valid, tmap)
    metrics.increment("tangency_solves", int(z_star.size))

    phase = np.zeros_like(xi)
    phase[valid] = _caustic_phase(traj, xi_valid, z_star, cfg.wave_number)

    profile = _pad(xi, phase, valid, cfg, pad_mode, "numeric")
    log_design_completed("numeric", cfg.num_elements, xi.size, covered=profile.covered,
                         lobe_correction=lobe_correction)
    return profile


def circular_phase(xi: np.ndarray, radius: float, k0: float, center_x: float = 0.0) -> np.ndarray:
    """k0 R (sqrt(u^2 - 1) - arcsec(u)), u = (xi - cx)/R >= 1."""
    u = (np.asarray(xi, dtype=float) - center_x) / radius
    return k0 * radius * (np.sqrt(u * u - 1.0) - arcsec(u))


def design_circular(radius: float, cfg: ApertureConfig, *,
                    center_x: float = 0.0,
                    samples_per_wavelength: int = DEFAULT_SAMPLES_PER_WAVELENGTH,
                    pad_mode: PadMode = PadMode.ZERO,
                    convention: Convention = Convention.PROPAGATION,
                    lobe_correction: bool = False) -> PhaseProfile:
    """
    Closed-form profile of a circular caustic of radius R centred at (cx, 0).

    ``Convention.CONJUGATE`` returns ``circular_phase`` unchanged, the sign
    that suits an e^{+jk0 r} channel; the default ``PROPAGATION`` negates it
    so the caustic forms at z > 0 under this package's channel model.
    With ``lobe_correction`` the caustic radius is R minus the main-lobe
    offset, which puts the intensity maximum on the circle of radius R.
    """
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    pad_mode, convention = PadMode(pad_mode), Convention(convention)
    design_radius = radius
    if lobe_correction:
        design_radius = radius - main_lobe_offset(radius, cfg.wave_number)
    xi = aperture_grid(cfg, samples_per_wavelength)
    valid = xi >= center_x + design_radius
    if not np.any(valid):
        if pad_mode is PadMode.STRICT:
            raise DomainError(f"aperture D={cfg.aperture_length} has no region with xi >= R={design_radius}")
        raise NumericalError(f"aperture D={cfg.aperture_length} has no region with xi >= R={design_radius}")

    phase = np.zeros_like(xi)
    phase[valid] = circular_phase(xi[valid], design_radius, cfg.wave_number, center_x)
    if convention is Convention.PROPAGATION:
        phase = -phase
    profile = _pad(xi, phase, valid, cfg, pad_mode, "circular")
    log_design_completed("circular", cfg.num_elements, xi.size, radius=radius, design_radius=design_radius)
    return profile


def parabolic_phase(u: np.ndarray, alpha: float, k0: float) -> np.ndarray:
    """-(4 alpha k0 u / 3) sqrt(u/alpha) 2F1(1/2, 3/2; 5/2; -4 alpha u), u >= 0."""
    u = np.asarray(u, dtype=float)
    return -(4.0 * alpha * k0 * u / 3.0) * np.sqrt(u / alpha) * parabolic_kernel(4.0 * alpha * u)


def design_parabolic(alpha: float, cfg: ApertureConfig, *,
                     apex_x: float = 0.0,
                     orientation: int = -1,
                     samples_per_wavelength: int = DEFAULT_SAMPLES_PER_WAVELENGTH,
                     pad_mode: PadMode = PadMode.ZERO,
                     lobe_correction: bool = False) -> PhaseProfile:
    """
    Closed-form profile of the parabolic caustic x = apex + orientation * alpha * z^2.

    With apex 0 and orientation -1 this is ``parabolic_phase`` directly;
    the other cases follow by translating and mirroring the aperture coordinate.
    ``lobe_correction`` moves the caustic apex outward by the main-lobe offset
    at the vertex (radius of curvature 1 / (2 alpha)).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if orientation not in (1, -1):
        raise DomainError(f"orientation must be +1 or -1, got {orientation}")
    pad_mode = PadMode(pad_mode)
    if lobe_correction:
        apex_x = apex_x + orientation * main_lobe_offset(0.5 / alpha, cfg.wave_number)
    xi = aperture_grid(cfg, samples_per_wavelength)
    # distance from the apex measured into the tangent image
    u = -orientation * (xi - apex_x)
    valid = u >= 0
    phase = np.zeros_like(xi)
    if np.any(valid):
        phase[valid] = parabolic_phase(u[valid], alpha, cfg.wave_number)
    profile = _pad(xi, phase, valid, cfg, pad_mode, "parabolic")
    log_design_completed("parabolic", cfg.num_elements, xi.size, alpha=alpha, orientation=orientation,
                         apex_x=apex_x)
    return profile


def discretize(profile: PhaseProfile, cfg: ApertureConfig) -> np.ndarray:
    """Per-element phases phi((n-1) d) by linear interpolation of the profile."""
    positions = element_positions(cfg)
    lo, hi = profile.domain
    tol = 1e-9 * max(1.0, cfg.aperture_length)
    if positions[0] < lo - tol or positions[-1] > hi + tol:
        raise DomainError(
            f"profile domain [{lo}, {hi}] does not cover element positions [0, {positions[-1]}]")
    if profile.xi.size == 1:
        return np.full(positions.size, profile.phase[0])
    return np.interp(positions, profile.xi, profile.phase)


@dataclass(frozen=True)
class TotalPhase:
    """Accumulated phase at one observation point over the aperture samples."""

    xi: np.ndarray
    exact: np.ndarray
    fresnel: np.ndarray
    point: tuple[float, float]


def total_phase(profile: PhaseProfile, point: tuple[float, float], cfg: ApertureConfig) -> TotalPhase:
    """phi(xi) + k0 r exactly and in the Fresnel (paraxial) form."""
    x, z = point
    if not z > 0:
        raise DomainError(f"observation point must have z > 0, got z={z}")
    k0 = cfg.wave_number
    dx = x - profile.xi
    exact = profile.phase + k0 * np.sqrt(dx * dx + z * z)
    fresnel = profile.phase + k0 * (z + dx * dx / (2.0 * z))
    return TotalPhase(profile.xi, exact, fresnel, (float(x), float(z)))


@dataclass(frozen=True)
class StationaryPhaseCheck:
    """Stationary-phase diagnostics of one caustic point."""

    z: float
    aperture_point: float
    first_derivative: float
    second_derivative: float
    fresnel_second_derivative: float


def stationary_phase_residuals(profile: PhaseProfile, traj: Trajectory, cfg: ApertureConfig,
                               z: float) -> StationaryPhaseCheck:
    """
    Find the aperture point where dPsi/dxi is closest to zero for the caustic
    point (c(z), z) and report the second derivative there, exactly and in
    the Fresnel form phi'' + k0/z. On an ideal caustic the exact derivatives
    vanish and the Fresnel form is left with (k0/z)(1 - cos^3 theta).
    """
    tp = total_phase(profile, (position(traj, z), z), cfg)
    d1 = np.gradient(tp.exact, tp.xi)
    d2 = np.gradient(d1, tp.xi)
    lo, hi = profile.covered
    # skip the first/last covered samples, where one-sided differences are used
    idx = np.flatnonzero((tp.xi > lo) & (tp.xi < hi))
    if idx.size == 0:
        raise NumericalError(f"no covered aperture samples for z={z}")
    i = int(idx[np.argmin(np.abs(d1[idx]))])

    phi2 = np.gradient(np.gradient(profile.phase, profile.xi), profile.xi)
    return StationaryPhaseCheck(z=float(z), aperture_point=float(tp.xi[i]),
                                first_derivative=float(d1[i]),
                                second_derivative=float(d2[i]),
                                fresnel_second_derivative=float(phi2[i] + cfg.wave_number / z))
