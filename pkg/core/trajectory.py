"""
Receiver trajectories x = c(z) and the ray-tangency geometry that maps
aperture points to caustic points.

Every ray launched from the aperture point xi is tangent to the trajectory
at z*, with xi = T(z*) = c(z*) - z* c'(z*).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import make_interp_spline

from core.exceptions import DomainError, NumericalError

MONOTONICITY_SCAN_POINTS = 512
TANGENCY_XTOL = 1e-12
# Bisection on z; each step halves the bracket, 90 steps reach float resolution
_VECTOR_BISECTION_STEPS = 90

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Trajectory(ABC):
    """Base class: a curve x = c(z) on the segment [z_start, z_end]."""

    z_start: float
    z_end: float

    def __post_init__(self):
        if not (np.isfinite(self.z_start) and np.isfinite(self.z_end)):
            raise DomainError("segment bounds must be finite")
        if not self.z_start < self.z_end:
            raise DomainError(f"z_start must be < z_end, got [{self.z_start}, {self.z_end}]")

    @property
    def kind(self) -> str:
        return type(self).__name__.replace("Trajectory", "").lower()

    @property
    def segment_length(self) -> float:
        return self.z_end - self.z_start

    def contains(self, z: ArrayLike, tol: float = 1e-12) -> bool:
        z = np.asarray(z, dtype=float)
        scale = max(1.0, abs(self.z_start), abs(self.z_end))
        return bool(np.all((z >= self.z_start - tol * scale) & (z <= self.z_end + tol * scale)))

    def _check(self, z: ArrayLike) -> np.ndarray:
        z_arr = np.asarray(z, dtype=float)
        if not self.contains(z_arr):
            raise DomainError(f"z outside segment [{self.z_start}, {self.z_end}]")
        return np.clip(z_arr, self.z_start, self.z_end)

    @abstractmethod
    def _c(self, z: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _dc(self, z: np.ndarray) -> np.ndarray:
        ...

    def is_straight(self) -> bool:
        """True when every tangent passes through one intercept."""
        return False


@dataclass(frozen=True)
class ConstantTrajectory(Trajectory):
    x0: float = 0.0

    def _c(self, z):
        return np.full_like(z, self.x0, dtype=float)

    def _dc(self, z):
        return np.zeros_like(z, dtype=float)

    def is_straight(self) -> bool:
        return True


@dataclass(frozen=True)
class LinearTrajectory(Trajectory):
    slope: float = 0.0
    x0: float = 0.0

    def _c(self, z):
        return self.x0 + self.slope * z

    def _dc(self, z):
        return np.full_like(z, self.slope, dtype=float)

    def is_straight(self) -> bool:
        return True


@dataclass(frozen=True)
class ParabolicTrajectory(Trajectory):
    """x = apex_x + orientation * alpha * z**2."""

    alpha: float = 1e-4
    apex_x: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        super().__post_init__()
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.orientation not in (1, -1):
            raise DomainError(f"orientation must be +1 or -1, got {self.orientation}")

    def _c(self, z):
        return self.apex_x + self.orientation * self.alpha * z * z

    def _dc(self, z):
        return 2.0 * self.orientation * self.alpha * z


@dataclass(frozen=True)
class CircularTrajectory(Trajectory):
    """Branch x = cx + sqrt(R^2 - (z - cz)^2) of the circle, facing the aperture."""

    radius: float = 80.0
    center_x: float = 0.0
    center_z: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        if self.z_start <= self.center_z - self.radius or self.z_end >= self.center_z + self.radius:
            raise DomainError("circular segment must satisfy |z - cz| < R at both ends")

    def _root(self, z):
        return np.sqrt(self.radius ** 2 - (z - self.center_z) ** 2)

    def _c(self, z):
        return self.center_x + self._root(z)

    def _dc(self, z):
        root = self._root(z)
        if np.any(root <= 0):
            raise DomainError("circular slope is vertical at |z - cz| = R")
        return -(z - self.center_z) / root


@dataclass(frozen=True, eq=False)
class TabulatedTrajectory(Trajectory):
    """Interpolated trajectory through (z, x) samples; order 1 or 3."""

    z_samples: np.ndarray = field(default=None, repr=False)
    x_samples: np.ndarray = field(default=None, repr=False)
    order: int = 3

    def __post_init__(self):
        super().__post_init__()
        z = np.asarray(self.z_samples, dtype=float)
        x = np.asarray(self.x_samples, dtype=float)
        if z.ndim != 1 or z.shape != x.shape:
            raise DomainError("z and x samples must be 1-D arrays of equal length")
        if self.order not in (1, 3):
            raise DomainError(f"interpolation order must be 1 or 3, got {self.order}")
        if z.size < (4 if self.order == 3 else 2):
            raise DomainError(f"order {self.order} interpolation needs more samples, got {z.size}")
        if np.any(np.diff(z) <= 0):
            raise DomainError("z samples must be strictly increasing")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(x))):
            raise DomainError("tabulated samples must be finite")
        if self.z_start < z[0] or self.z_end > z[-1]:
            raise DomainError("segment must lie within the tabulated z range")
        object.__setattr__(self, "z_samples", z)
        object.__setattr__(self, "x_samples", x)
        spline = make_interp_spline(z, x, k=self.order)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_dspline", spline.derivative())

    def _c(self, z):
        return self._spline(z)

    def _dc(self, z):
        return self._dspline(z)

    @classmethod
    def from_samples(cls, z: np.ndarray, x: np.ndarray, order: int = 3) -> "TabulatedTrajectory":
        z = np.asarray(z, dtype=float)
        return cls(z_start=float(z[0]), z_end=float(z[-1]), z_samples=z,
                   x_samples=np.asarray(x, dtype=float), order=order)

    @classmethod
    def from_csv(cls, path: Union[str, Path], order: int = 3) -> "TabulatedTrajectory":
        from utils.export import read_trajectory_table

        z, x = read_trajectory_table(path)
        return cls.from_samples(z, x, order=order)


@dataclass(frozen=True)
class RayGeometry:
    aperture_point: float
    tangent_point: float
    deviation_angle: float


def _scalar_or_array(value: np.ndarray, like: ArrayLike):
    return float(value) if np.ndim(like) == 0 else value


def position(traj: Trajectory, z: ArrayLike) -> ArrayLike:
    """c(z); raises DomainError outside the segment."""
    zc = traj._check(z)
    return _scalar_or_array(traj._c(zc), z)


def slope(traj: Trajectory, z: ArrayLike) -> ArrayLike:
    """dc/dz."""
    zc = traj._check(z)
    return _scalar_or_array(traj._dc(zc), z)


def tangent_intercept(traj: Trajectory, z: ArrayLike) -> ArrayLike:
    """T(z) = c(z) - z c'(z): x-axis intercept of the tangent line at z."""
    zc = traj._check(z)
    return _scalar_or_array(traj._c(zc) - zc * traj._dc(zc), z)


@dataclass(frozen=True)
class TangencyMap:
    """Validated monotone tangency map of one trajectory."""

    traj: Trajectory
    increasing: bool
    t_min: float
    t_max: float
    degenerate: bool

    @property
    def image(self) -> tuple[float, float]:
        return self.t_min, self.t_max


def tangency_map(traj: Trajectory) -> TangencyMap:
    """
    Scan T(z) over the segment and check it is strictly monotone.

    Raises:
        NumericalError: T is not monotone, so the trajectory is not a
            single-valued caustic of this aperture.
    """
    z = np.linspace(traj.z_start, traj.z_end, MONOTONICITY_SCAN_POINTS)
    t = traj._c(z) - z * traj._dc(z)
    if not np.all(np.isfinite(t)):
        raise NumericalError("tangent intercept is not finite over the segment")

    scale = max(1.0, float(np.max(np.abs(t))))
    if traj.is_straight() or float(np.ptp(t)) <= 1e-12 * scale:
        x0 = float(t[0])
        return TangencyMap(traj, True, x0, x0, degenerate=True)

    dt = np.diff(t)
    if np.all(dt > 0):
        increasing = True
    elif np.all(dt < 0):
        increasing = False
    else:
        raise NumericalError(
            f"tangent intercept is not monotone over [{traj.z_start}, {traj.z_end}]; "
            "trajectory is not realisable as a single-valued caustic")
    t_ends = (float(t[0]), float(t[-1]))
    return TangencyMap(traj, increasing, min(t_ends), max(t_ends), degenerate=False)


def solve_tangency(traj: Trajectory, xi: float, tmap: TangencyMap | None = None) -> float:
    """
    Tangent point z* with T(z*) = xi, by bracketed bisection.

    Args:
        traj: Trajectory with a monotone tangency map
        xi: Aperture point
        tmap: Pre-computed tangency map (optional)

    Returns:
        z* in the segment
    """
    tmap = tmap or tangency_map(traj)
    tol = 1e-9
    if tmap.degenerate:
        if abs(xi - tmap.t_min) <= tol:
            return traj.z_start
        raise DomainError(f"xi={xi} outside image of T (all tangents meet at {tmap.t_min})")
    if xi < tmap.t_min - tol or xi > tmap.t_max + tol:
        raise DomainError(f"xi={xi} outside image of T [{tmap.t_min}, {tmap.t_max}]")

    def residual(z: float) -> float:
        return float(traj._c(np.asarray(z)) - z * traj._dc(np.asarray(z))) - xi

    lo, hi = traj.z_start, traj.z_end
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        # xi sits within tol of an endpoint
        return lo if abs(f_lo) < abs(f_hi) else hi
    return optimize.bisect(residual, lo, hi, xtol=TANGENCY_XTOL, maxiter=200)


def solve_tangency_many(traj: Trajectory, xi: np.ndarray,
                        tmap: TangencyMap | None = None) -> np.ndarray:
    """Vectorised bisection for many aperture points inside the image of T."""
    tmap = tmap or tangency_map(traj)
    xi = np.asarray(xi, dtype=float)
    if tmap.degenerate:
        raise DomainError("tangency map is degenerate for straight trajectories")
    if np.any(xi < tmap.t_min - 1e-9) or np.any(xi > tmap.t_max + 1e-9):
        raise DomainError("aperture points outside image of T")

    sign = 1.0 if tmap.increasing else -1.0
    lo = np.full_like(xi, traj.z_start)
    hi = np.full_like(xi, traj.z_end)
    for _ in range(_VECTOR_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        t_mid = traj._c(mid) - mid * traj._dc(mid)
        below = sign * (t_mid - xi) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def ray_geometry(traj: Trajectory, xi: float, tmap: TangencyMap | None = None) -> RayGeometry:
    """Tangent point and deviation angle of the ray launched from xi."""
    z_star = solve_tangency(traj, xi, tmap)
    theta = float(np.arctan(slope(traj, z_star)))
    return RayGeometry(aperture_point=xi, tangent_point=z_star, deviation_angle=theta)


def _arc_integrand(traj: Trajectory):
    def f(z: float) -> float:
        s = float(traj._dc(np.asarray(z, dtype=float)))
        return float(np.sqrt(1.0 + s * s))
    return f


def arc_length(traj: Trajectory) -> float:
    """Geometric length of the segment by adaptive quadrature."""
    if traj.is_straight():
        s = float(traj._dc(np.asarray(traj.z_start)))
        return traj.segment_length * float(np.sqrt(1.0 + s * s))
    breakpoints = None
    if isinstance(traj, TabulatedTrajectory):
        inner = traj.z_samples[(traj.z_samples > traj.z_start) & (traj.z_samples < traj.z_end)]
        breakpoints = inner.tolist()[:200] or None
    value, _ = integrate.quad(_arc_integrand(traj), traj.z_start, traj.z_end,
                              epsabs=0.0, epsrel=1e-11, limit=500, points=breakpoints)
    return float(value)


@dataclass(frozen=True)
class TrajectorySamples:
    """Uniform-in-z samples with trapezoidal arc-length weights."""

    z: np.ndarray
    x: np.ndarray
    arc_weight: np.ndarray

    def __len__(self) -> int:
        return self.z.size

    def as_tuples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.x.tolist(), self.z.tolist(), self.arc_weight.tolist()))


def sample_points(traj: Trajectory, count: int) -> TrajectorySamples:
    """
    Sample ``count`` points uniformly in z.

    Weights are sqrt(1 + c'(z)^2) * dz with the trapezoid halves at both ends,
    so they sum to the arc length up to quadrature error.
    """
    if int(count) != count or count < 2:
        raise DomainError(f"count must be an integer >= 2, got {count}")
    z = np.linspace(traj.z_start, traj.z_end, int(count))
    x = traj._c(z)
    dz = traj.segment_length / (count - 1)
    w = np.sqrt(1.0 + traj._dc(z) ** 2) * dz
    w[0] *= 0.5
    w[-1] *= 0.5
    return TrajectorySamples(z=z, x=np.asarray(x, dtype=float), arc_weight=w)
