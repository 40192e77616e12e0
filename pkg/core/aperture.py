"""
Uniform linear array model and constant-amplitude analog beamforming weights.

All lengths are in wavelengths (lambda = 1, k0 = 2*pi).
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from core.exceptions import DomainError

_TOL = 1e-12


@dataclass(frozen=True)
class ApertureConfig:
    """Array geometry. ``wavelength_m`` is carried as metadata only."""

    num_elements: int
    spacing: float = 0.5
    wavelength: float = 1.0
    wavelength_m: float | None = None

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise DomainError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def aperture_length(self) -> float:
        return (self.num_elements - 1) * self.spacing

    @property
    def wave_number(self) -> float:
        return 2.0 * np.pi / self.wavelength

    def fingerprint(self) -> str:
        return f"N={self.num_elements};d={self.spacing!r};lambda={self.wavelength!r}"


class ModulusMode(str, Enum):
    UNIT_MODULUS = "unit-modulus"
    UNIT_NORM = "unit-norm"


@dataclass(frozen=True)
class BeamWeights:
    """Per-element complex weights with the normalisation they were built under."""

    coefficients: np.ndarray = field(repr=False)
    modulus_mode: ModulusMode = ModulusMode.UNIT_MODULUS

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("weights must be a non-empty vector")

        if self.modulus_mode is ModulusMode.UNIT_MODULUS:
            target = 1.0 / np.sqrt(coeffs.size)
            if np.max(np.abs(np.abs(coeffs) - target)) > _TOL:
                raise DomainError("unit-modulus weights must all have magnitude 1/sqrt(N)")
        elif abs(np.linalg.norm(coeffs) - 1.0) > _TOL:
            raise DomainError("unit-norm weights must have l2 norm 1")

    @property
    def num_elements(self) -> int:
        return self.coefficients.size

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.coefficients)

    def fingerprint(self) -> str:
        # sha1 over the raw bytes; stable across runs for identical weights
        return hashlib.sha1(self.coefficients.tobytes()).hexdigest()[:16]


def element_positions(cfg: ApertureConfig) -> np.ndarray:
    """x-coordinates of the elements, ``[0, d, 2d, ..., D]``."""
    return np.arange(cfg.num_elements, dtype=float) * cfg.spacing


def weights_from_phases(phases: Union[Sequence[float], np.ndarray],
                        cfg: ApertureConfig | None = None) -> BeamWeights:
    """
    Build unit-modulus weights ``exp(j*phi_n)/sqrt(N)``.

    Args:
        phases: Unwrapped per-element phases in radians
        cfg: Optional array config used to check the length

    Returns:
        BeamWeights in unit-modulus mode
    """
    phi = np.asarray(phases, dtype=float)
    if phi.ndim != 1 or phi.size == 0:
        raise DomainError("phases must be a non-empty vector")
    if cfg is not None and phi.size != cfg.num_elements:
        raise DomainError(f"expected {cfg.num_elements} phases, got {phi.size}")
    if not np.all(np.isfinite(phi)):
        raise DomainError("phases must be finite")

    coeffs = np.exp(1j * phi) / np.sqrt(phi.size)
    return BeamWeights(coeffs, ModulusMode.UNIT_MODULUS)


def normalized_weights(coefficients: np.ndarray) -> BeamWeights:
    """Scale an arbitrary complex vector to unit l2 norm."""
    coeffs = np.asarray(coefficients, dtype=complex)
    norm = np.linalg.norm(coeffs)
    if norm == 0:
        raise DomainError("cannot normalise a zero vector")
    return BeamWeights(coeffs / norm, ModulusMode.UNIT_NORM)


def export_element_phases(path: Union[str, Path], phases: np.ndarray) -> Path:
    """Write ``element_index,phase_radians`` rows (1-based index)."""
    from utils.export import write_csv

    phi = np.asarray(phases, dtype=float)
    return write_csv(path, ["element_index", "phase_radians"],
                     [np.arange(1, phi.size + 1), phi])
