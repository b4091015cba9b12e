"""Convex envelope of a sampled one-dimensional potential.

The envelope is the lower convex hull of the sample points, stored as a
piecewise-linear function with optional linear extrapolation past the ends.
"""
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_SAMPLES = 4096
ENERGY_SLACK = 1e-6


@dataclass(frozen=True)
class SampledFunction:
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or values.ndim != 1 or nodes.size != values.size:
            raise InvalidInputError("nodes and values must be 1D arrays of equal length")
        if nodes.size < 2:
            raise InvalidInputError("at least 2 samples are required")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise InvalidInputError("samples must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidInputError("nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def domain(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    def __call__(self, d):
        """Piecewise-linear interpolant of the samples."""
        return np.interp(d, self.nodes, self.values)


def sample(func, lo, hi, n=DEFAULT_SAMPLES):
    """Tabulate `func` on n uniform intervals of [lo, hi]."""
    if not hi > lo:
        raise InvalidInputError("empty sampling interval")
    x = np.linspace(lo, hi, int(n) + 1)
    return SampledFunction(x, func(x))


def _extended(v):
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def _from_extended(v):
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


@dataclass(frozen=True)
class Envelope:
    """Piecewise-linear convex function.

    `slopes[j]` is the slope between `breakpoints[j]` and `breakpoints[j+1]`;
    `left_slope`/`right_slope` extend it past the ends (infinite slopes mean
    the function is +inf outside the breakpoint range).
    """

    breakpoints: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    left_slope: float = -math.inf
    right_slope: float = math.inf

    @property
    def domain(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def extended_slopes(self):
        """Slopes with the end slopes attached, as used by the shrink table."""
        return np.concatenate([[self.left_slope], self.slopes, [self.right_slope]])

    def __call__(self, d, slack=0.0):
        return eval_envelope(self, d, slack)

    def energy_slack(self):
        """Rounding allowance used when evaluating energies of iterates."""
        lo, hi = self.domain
        return ENERGY_SLACK * (hi - lo)

    def to_dict(self):
        return {
            "breakpoints": [float(v) for v in self.breakpoints],
            "values": [float(v) for v in self.values],
            "slopes": [float(v) for v in self.slopes],
            "left_slope": _extended(self.left_slope),
            "right_slope": _extended(self.right_slope),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        bp = np.asarray(data["breakpoints"], dtype=float)
        vals = np.asarray(data["values"], dtype=float)
        slopes = np.asarray(data["slopes"], dtype=float)
        if bp.size < 2 or vals.size != bp.size or slopes.size != bp.size - 1:
            raise InvalidInputError("inconsistent envelope arrays")
        return cls(bp, vals, slopes, _from_extended(data["left_slope"]),
                   _from_extended(data["right_slope"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def value_scale(values):
    s = float(np.max(np.abs(values)))
    return s if s > 0 else 1.0


def lower_hull(x, y, rtol=1e-12):
    """Indices of the lower convex hull of points sorted by x (monotone chain).

    A point within rtol * max|y| of the chord through its neighbours is
    treated as collinear and dropped.
    """
    tol = rtol * value_scale(y)
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross <= tol * (x[i] - x[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=np.int64)


def build_envelope(f, left_slope=-math.inf, right_slope=math.inf):
    """Convex envelope of the samples in `f`."""
    if not isinstance(f, SampledFunction):
        raise InvalidInputError("expected a SampledFunction")
    idx = lower_hull(f.nodes, f.values)
    bp = f.nodes[idx]
    vals = f.values[idx]
    slopes = np.diff(vals) / np.diff(bp)
    if left_slope > slopes[0] or right_slope < slopes[-1]:
        raise InvalidInputError("end slopes would break convexity")
    return Envelope(bp, vals, slopes, float(left_slope), float(right_slope))


def eval_envelope(env, d, slack=0.0):
    """Evaluate the envelope; points within `slack` of the breakpoint range
    are evaluated at the nearest end instead of being extrapolated."""
    d_arr = np.asarray(d, dtype=float)
    lo, hi = env.domain
    if slack > 0:
        d_arr = np.where((d_arr < lo) & (d_arr >= lo - slack), lo, d_arr)
        d_arr = np.where((d_arr > hi) & (d_arr <= hi + slack), hi, d_arr)
    out = np.interp(d_arr, env.breakpoints, env.values)
    left = d_arr < lo
    right = d_arr > hi
    if np.any(left):
        if math.isinf(env.left_slope):
            out = np.where(left, math.inf, out)
        else:
            out = np.where(left, env.values[0] + env.left_slope * (d_arr - lo), out)
    if np.any(right):
        if math.isinf(env.right_slope):
            out = np.where(right, math.inf, out)
        else:
            out = np.where(right, env.values[-1] + env.right_slope * (d_arr - hi), out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _linear_blocks(env, tol):
    """Group consecutive hull segments whose union is linear within tol."""
    bp, vals = env.breakpoints, env.values
    blocks = []
    start = 0
    m = len(bp) - 1
    end = 1
    while end <= m:
        nxt = end + 1
        if nxt <= m:
            x0, x1 = bp[start], bp[nxt]
            chord = vals[start] + (vals[nxt] - vals[start]) * (bp[start + 1:nxt] - x0) / (x1 - x0)
            if np.all(np.abs(chord - vals[start + 1:nxt]) <= tol):
                end = nxt
                continue
        blocks.append((start, end))
        start = end
        end = start + 1
    return blocks


def non_contact_intervals(env, f, tol):
    """Maximal gradient intervals (d_L, d_R) on which the envelope lies below W.

    Adjacent hull segments that are collinear within `tol` are merged, so a
    flat run through an intermediate well is reported as one interval.
    """
    gap = f.values - eval_envelope(env, f.nodes)
    out = []
    for s, e in _linear_blocks(env, tol):
        dl, dr = env.breakpoints[s], env.breakpoints[e]
        inside = (f.nodes > dl) & (f.nodes < dr)
        if np.any(gap[inside] > tol):
            out.append((float(dl), float(dr)))
    return out


def default_tolerance(f):
    """Two-atom classification threshold, 1e-6 of the largest |W| sample."""
    return 1e-6 * value_scale(f.values)
