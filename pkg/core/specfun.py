"""
Special functions used by the closed-form phase profiles.

gauss_2f1 supports real non-positive arguments only: a direct power series
for |x| < 0.5 and the Pfaff transformation for x <= -0.5, which maps the
argument into [1/3, 1).
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from core.exceptions import DomainError

SERIES_SWITCH = -0.5
_REL_STOP = 1e-16
_MAX_TERMS = 200_000

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Hyp2F1Params:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.c <= 0 and float(self.c).is_integer():
            raise DomainError(f"c must not be a non-positive integer, got {self.c}")


# Parameters of the parabolic closed-form profile
PARABOLIC_PARAMS = Hyp2F1Params(0.5, 1.5, 2.5)


def _power_series(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    """Sum of the Gauss series for |x| < 1, element-wise, until every lane converges."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = x != 0
    k = 0
    while np.any(active) and k < _MAX_TERMS:
        term = np.where(active, term * ((a + k) * (b + k)) / ((c + k) * (k + 1.0)) * x, 0.0)
        total = total + term
        active = active & (np.abs(term) >= _REL_STOP * np.abs(total))
        k += 1
    return total


def gauss_2f1(params: Hyp2F1Params, x: ArrayLike, method: str = "auto") -> ArrayLike:
    """
    Gauss hypergeometric function 2F1(a, b; c; x) for x <= 0.

    Args:
        params: (a, b, c)
        x: Scalar or array of non-positive arguments
        method: "auto", "series" (forces the direct series, |x| < 1 only)
            or "pfaff" (forces the transformed series)

    Returns:
        Value(s) with the shape of x
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr > 0) or not np.all(np.isfinite(x_arr)):
        raise DomainError("gauss_2f1 supports finite x <= 0 only")
    a, b, c = params.a, params.b, params.c

    flat = np.atleast_1d(x_arr).ravel()
    out = np.empty_like(flat)

    if method == "auto":
        use_pfaff = flat <= SERIES_SWITCH
    elif method == "series":
        if np.any(flat <= -1):
            raise DomainError("direct series diverges for x <= -1")
        use_pfaff = np.zeros_like(flat, dtype=bool)
    elif method == "pfaff":
        use_pfaff = np.ones_like(flat, dtype=bool)
    else:
        raise ValueError(f"Unknown 2F1 method: {method}")

    direct = ~use_pfaff
    if np.any(direct):
        out[direct] = _power_series(a, b, c, flat[direct])
    if np.any(use_pfaff):
        xp = flat[use_pfaff]
        w = xp / (xp - 1.0)
        out[use_pfaff] = (1.0 - xp) ** (-a) * _power_series(a, c - b, c, w)

    out = out.reshape(x_arr.shape)
    return float(out) if x_arr.ndim == 0 else out


def hyp2f1_half_threehalf_fivehalf(y: ArrayLike) -> ArrayLike:
    """
    Closed form of 2F1(1/2, 3/2; 5/2; -y) for y > 0:
    (3/2) * (sqrt(1 + y)/y - asinh(sqrt(y))/y**1.5).

    Cancels badly for small y; only used for y >= 0.5.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise DomainError("closed form requires y > 0")
    value = 1.5 * (np.sqrt(1.0 + y_arr) / y_arr - np.arcsinh(np.sqrt(y_arr)) / y_arr ** 1.5)
    return float(value) if y_arr.ndim == 0 else value


def parabolic_kernel(y: ArrayLike) -> ArrayLike:
    """2F1(1/2, 3/2; 5/2; -y) for y >= 0, fast path above y = 0.5."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise DomainError("parabolic kernel requires y >= 0")
    flat = np.atleast_1d(y_arr).ravel()
    out = np.empty_like(flat)
    fast = flat >= 0.5
    if np.any(fast):
        out[fast] = hyp2f1_half_threehalf_fivehalf(flat[fast])
    if np.any(~fast):
        out[~fast] = gauss_2f1(PARABOLIC_PARAMS, -flat[~fast])
    out = out.reshape(y_arr.shape)
    return float(out) if y_arr.ndim == 0 else out


def arcsec(x: ArrayLike) -> ArrayLike:
    """Principal inverse secant, arccos(1/x) in [0, pi], for |x| >= 1."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) < 1):
        raise DomainError("arcsec requires |x| >= 1")
    value = np.arccos(np.clip(1.0 / x_arr, -1.0, 1.0))
    return float(value) if x_arr.ndim == 0 else value
