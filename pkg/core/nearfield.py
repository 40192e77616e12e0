"""
Exact spherical-wave near-field channel and intensity synthesis.

h_n = exp(-j k0 r_n) / r_n and I = |h^H w|. Every intensity goes through
``_intensity_block``, which reduces over the element axis of a C-contiguous
(points x elements) array, so a point's value does not depend on how many
other points are evaluated with it.
"""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from joblib import Parallel, delayed

from core.aperture import ApertureConfig, BeamWeights, element_positions
from core.exceptions import DomainError
from core.trajectory import Trajectory, sample_points
from utils.logging_config import get_logger, log_grid_evaluated, metrics

logger = get_logger("tabs.nearfield")

# Points per block; bounds the (points x elements) work array
_BLOCK_POINTS = 256


@dataclass(frozen=True)
class ChannelVector:
    coefficients: np.ndarray = field(repr=False)
    point: tuple[float, float]
    distances: np.ndarray = field(repr=False)


def _distances(xs: np.ndarray, zs: np.ndarray, cfg: ApertureConfig) -> np.ndarray:
    xn = element_positions(cfg)
    dx = xs[:, None] - xn[None, :]
    r = np.sqrt(dx * dx + (zs * zs)[:, None])
    if np.any(r <= 0):
        raise DomainError("receiver coincides with an array element")
    return r


def channel(point: tuple[float, float], cfg: ApertureConfig) -> ChannelVector:
    """Line-of-sight near-field channel of every element to ``point``."""
    x, z = float(point[0]), float(point[1])
    r = _distances(np.array([x]), np.array([z]), cfg)[0]
    h = np.exp(-1j * cfg.wave_number * r) / r
    return ChannelVector(coefficients=h, point=(x, z), distances=r)


def focusing_bound(point: tuple[float, float], cfg: ApertureConfig) -> float:
    """(1/sqrt(N)) * sum 1/r_n: the largest intensity any unit-modulus weights reach at ``point``."""
    r = channel(point, cfg).distances
    return float(np.sum(1.0 / r) / np.sqrt(cfg.num_elements))


def _check_weights(weights: BeamWeights, cfg: ApertureConfig):
    if weights.num_elements != cfg.num_elements:
        raise DomainError(f"weights have {weights.num_elements} elements, array has {cfg.num_elements}")


def _intensity_block(xs: np.ndarray, zs: np.ndarray, weights: BeamWeights,
                     cfg: ApertureConfig) -> np.ndarray:
    """|h^H w| for each (x, z) pair; element sums in ascending index order."""
    out = np.empty(xs.size)
    w = weights.coefficients
    k0 = cfg.wave_number
    for start in range(0, xs.size, _BLOCK_POINTS):
        stop = min(start + _BLOCK_POINTS, xs.size)
        r = _distances(xs[start:stop], zs[start:stop], cfg)
        # conj(h_n) * w_n
        terms = np.ascontiguousarray(np.exp(1j * k0 * r) / r * w[None, :])
        out[start:stop] = np.abs(terms.sum(axis=1))
    metrics.increment("intensity_evaluations", int(xs.size))
    return out


def intensity(point: tuple[float, float], weights: BeamWeights, cfg: ApertureConfig) -> float:
    """Received signal strength |h(point)^H w|."""
    _check_weights(weights, cfg)
    return float(_intensity_block(np.array([float(point[0])]), np.array([float(point[1])]),
                                  weights, cfg)[0])


def intensity_at(xs: np.ndarray, zs: np.ndarray, weights: BeamWeights, cfg: ApertureConfig) -> np.ndarray:
    """Vectorised intensity over paired coordinate arrays."""
    _check_weights(weights, cfg)
    xs = np.asarray(xs, dtype=float).ravel()
    zs = np.asarray(zs, dtype=float).ravel()
    if xs.shape != zs.shape:
        raise DomainError("x and z arrays must have equal length")
    return _intensity_block(xs, zs, weights, cfg)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Intensity I[ix, iz] on a regular (x, z) grid."""

    x: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    cfg_hash: str = ""
    weights_hash: str = ""

    @property
    def nx(self) -> int:
        return self.x.size

    @property
    def nz(self) -> int:
        return self.z.size

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def z_range(self) -> tuple[float, float]:
        return float(self.z[0]), float(self.z[-1])

    def export_csv(self, path: Union[str, Path]) -> Path:
        """(x, z, I) rows, x varying fastest within each z."""
        from utils.export import write_csv

        zz, xx = np.meshgrid(self.z, self.x, indexing="ij")
        return write_csv(path, ["x", "z", "intensity"],
                         [xx.ravel(), zz.ravel(), self.intensity.T.ravel()])

    def export_map(self, path: Union[str, Path]) -> Path:
        """Grayscale map: one image row per z sample, columns along x."""
        from utils.export import write_grayscale_map

        return write_grayscale_map(path, self.intensity.T)


def _grid_columns(x: np.ndarray, z_values: np.ndarray, weights: BeamWeights,
                  cfg: ApertureConfig) -> np.ndarray:
    block = np.empty((x.size, z_values.size))
    for j, z in enumerate(z_values):
        block[:, j] = _intensity_block(x, np.full(x.size, z), weights, cfg)
    return block


def field_grid(weights: BeamWeights, cfg: ApertureConfig,
               x_range: tuple[float, float], z_range: tuple[float, float],
               nx: int, nz: int, threads: int = 1) -> FieldGrid:
    """
    Evaluate the exact intensity on an nx-by-nz grid.

    Work is split into contiguous blocks of z-lines, one task per block,
    so the result is identical for every thread count.

    Args:
        weights: Array weights
        cfg: Array configuration
        x_range: (x_min, x_max)
        z_range: (z_min, z_max)
        nx: Samples along x (>= 2)
        nz: Samples along z (>= 2)
        threads: Worker threads
    """
    _check_weights(weights, cfg)
    if nx < 2 or nz < 2:
        raise DomainError(f"grid needs at least 2x2 samples, got {nx}x{nz}")
    if not (x_range[0] < x_range[1] and z_range[0] < z_range[1]):
        raise DomainError(f"degenerate grid ranges x={x_range}, z={z_range}")
    if threads < 1:
        raise DomainError(f"threads must be >= 1, got {threads}")

    x = np.linspace(float(x_range[0]), float(x_range[1]), int(nx))
    z = np.linspace(float(z_range[0]), float(z_range[1]), int(nz))

    started = time.perf_counter()
    chunks = np.array_split(np.arange(z.size), min(z.size, max(threads * 4, 1)))
    if threads == 1:
        blocks = [_grid_columns(x, z[idx], weights, cfg) for idx in chunks]
    else:
        blocks = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_grid_columns)(x, z[idx], weights, cfg) for idx in chunks)
    values = np.concatenate(blocks, axis=1)

    log_grid_evaluated(x.size, z.size, threads, time.perf_counter() - started)
    return FieldGrid(x=x, z=z, intensity=values,
                     cfg_hash=cfg.fingerprint(), weights_hash=weights.fingerprint())


@dataclass(frozen=True, eq=False)
class TrajectoryProfile:
    """Intensity sampled along a trajectory."""

    z: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    arc_weight: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.z.size

    def as_pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.z.tolist(), self.intensity.tolist()))


def intensity_along_trajectory(weights: BeamWeights, cfg: ApertureConfig,
                               traj: Trajectory, count: int) -> TrajectoryProfile:
    """Intensity at ``count`` uniform-in-z samples of the trajectory."""
    samples = sample_points(traj, count)
    values = intensity_at(samples.x, samples.z, weights, cfg)
    return TrajectoryProfile(z=samples.z, x=samples.x, intensity=values,
                             arc_weight=samples.arc_weight)
