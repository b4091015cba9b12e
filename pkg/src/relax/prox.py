"""Proximal maps of the envelope term.

shrink1d is the proximal map of a convex piecewise-linear function,
    argmin_d  Wbar(d) + gamma/2 (d - z)^2,
and shrink2d the proximal map of (|d| - 1)_+ in the plane.
"""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidInputError, InvalidParameterError


@dataclass(frozen=True)
class ShrinkTable:
    """Kinks d_0 < ... < d_M and slopes (s_-, s_1, ..., s_M, s_+)."""

    kinks: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        kinks = np.ascontiguousarray(self.kinks, dtype=float)
        slopes = np.ascontiguousarray(self.slopes, dtype=float)
        if kinks.ndim != 1 or kinks.size < 1 or slopes.size != kinks.size + 1:
            raise InvalidInputError("need M+1 kinks and M+2 slopes")
        if np.any(np.diff(kinks) <= 0):
            raise InvalidInputError("kinks must be strictly increasing")
        if np.any(np.diff(slopes) <= 0):
            raise InvalidInputError("slopes must be strictly increasing")
        object.__setattr__(self, "kinks", kinks)
        object.__setattr__(self, "slopes", slopes)

    @classmethod
    def from_envelope(cls, env):
        return cls(env.breakpoints, env.extended_slopes())


@numba.njit(cache=True)
def shrink_scalar(kinks, slopes, z, gamma):
    # thresholds kinks[i] + slopes[i]/gamma <= z <= kinks[i] + slopes[i+1]/gamma
    # select the kink; between them z is shifted by the segment slope.
    n = kinks.shape[0]
    lo = 0
    hi = n
    while lo < hi:
        mid = (lo + hi) // 2
        if kinks[mid] + slopes[mid + 1] / gamma < z:
            lo = mid + 1
        else:
            hi = mid
    if lo == n:
        return z - slopes[n] / gamma
    if z >= kinks[lo] + slopes[lo] / gamma:
        return kinks[lo]
    return z - slopes[lo] / gamma


@numba.njit(cache=True)
def _shrink_array(kinks, slopes, z, gamma, out):
    for i in range(z.shape[0]):
        out[i] = shrink_scalar(kinks, slopes, z[i], gamma)


def shrink1d(table, z, gamma):
    """Minimizer of Wbar(d) + gamma/2 (d - z)^2; z may be a scalar or array."""
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive")
    z_arr = np.asarray(z, dtype=float)
    if z_arr.ndim == 0:
        return float(shrink_scalar(table.kinks, table.slopes, float(z_arr), float(gamma)))
    flat = np.ascontiguousarray(z_arr.ravel())
    out = np.empty_like(flat)
    _shrink_array(table.kinks, table.slopes, flat, float(gamma), out)
    return out.reshape(z_arr.shape)


@numba.njit(cache=True)
def shrink2d_scale(nux, nuy, gamma):
    rho = np.sqrt(nux * nux + nuy * nuy)
    if rho < 1e-300:
        return 0.0
    return max(1.0 - 1.0 / (gamma * rho), min(1.0, 1.0 / rho))


def shrink2d(nux, nuy, gamma):
    """Minimizer of (|d| - 1)_+ + gamma/2 |d - nu|^2 over d in the plane."""
    if not gamma > 0:
        raise InvalidParameterError("gamma must be positive")
    nux = np.asarray(nux, dtype=float)
    nuy = np.asarray(nuy, dtype=float)
    rho = np.hypot(nux, nuy)
    with np.errstate(all="ignore"):
        scale = np.maximum(1.0 - 1.0 / (gamma * rho), np.minimum(1.0, 1.0 / rho))
    scale = np.where(rho < 1e-300, 0.0, scale)
    dx, dy = scale * nux, scale * nuy
    if dx.ndim == 0:
        return float(dx), float(dy)
    return dx, dy
