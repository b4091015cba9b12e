"""Young measure reconstruction from a relaxed minimizer.

Where the gradient of the minimizer lies in a non-contact interval (d_L, d_R)
of the envelope, the optimal measure splits into two Dirac atoms at d_L and
d_R whose mean is the gradient; elsewhere it is the Dirac mass at the
gradient itself.
"""
from dataclasses import dataclass, field

import numpy as np

from .envelope import default_tolerance, non_contact_intervals
from .errors import DomainError

DOMAIN_SLACK = 1e-3


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: tuple  # ((location, weight), ...)

    @property
    def is_split(self):
        return len(self.atoms) == 2

    def mean(self):
        return sum(loc * w for loc, w in self.atoms)

    def integrate(self, func):
        return sum(float(func(loc)) * w for loc, w in self.atoms)

    def to_dict(self):
        return [{"loc": float(loc), "w": float(w)} for loc, w in self.atoms]


@dataclass
class ParametrizedMeasure:
    x: np.ndarray
    measures: list

    def split_mask(self):
        return np.array([m.is_split for m in self.measures], dtype=bool)

    def to_list(self):
        return [{"x": float(xi), "atoms": m.to_dict()} for xi, m in zip(self.x, self.measures)]


@dataclass
class OscillationInterval:
    x0: float
    x1: float
    dL: float
    dR: float
    fraction_left: float

    def to_dict(self):
        return {"x0": self.x0, "x1": self.x1, "dL": self.dL, "dR": self.dR,
                "fraction_left": self.fraction_left}


@dataclass
class OscillationReport:
    intervals: list = field(default_factory=list)

    def pairs(self):
        return [(iv.x0, iv.x1) for iv in self.intervals]

    def to_dict(self):
        return {"intervals": [iv.to_dict() for iv in self.intervals]}


def measure_at(envelope, intervals, ux, tol, f=None):
    """Optimal measure at one point with gradient ux.

    With a sampled potential `f`, a split is only used where W(ux) exceeds the
    envelope by more than tol.
    """
    lo, hi = envelope.domain
    if not lo <= ux <= hi:
        raise DomainError(f"gradient {ux} outside envelope range [{lo}, {hi}]")
    for dl, dr in intervals:
        if dl < ux < dr:
            if f is not None and f(ux) - envelope(ux) <= tol:
                break
            wl = (dr - ux) / (dr - dl)
            return AtomicMeasure(((dl, wl), (dr, 1.0 - wl)))
    return AtomicMeasure(((float(ux), 1.0),))


def measure_field(x, ux, envelope, f, tol=None, intervals=None):
    """measure_at applied to each cell gradient; x holds the cell positions.

    Gradients within a small slack of the envelope range are clamped to it
    (the constraint d = u_x only holds up to the solver tolerance).
    """
    tol = default_tolerance(f) if tol is None else tol
    if intervals is None:
        intervals = non_contact_intervals(envelope, f, tol)
    lo, hi = envelope.domain
    slack = DOMAIN_SLACK * (hi - lo)
    ux = np.asarray(ux, dtype=float)
    bad = (ux < lo - slack) | (ux > hi + slack)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"gradient {ux[i]} at x={x[i]} outside envelope range")
    ux = np.clip(ux, lo, hi)
    return ParametrizedMeasure(np.asarray(x, dtype=float),
                               [measure_at(envelope, intervals, v, tol, f) for v in ux])


def measure_of_solution(report, envelope, f, tol=None):
    grid = report.grid
    return measure_field(grid.midpoints, report.ux, envelope, f, tol)


def oscillation_report(pm, gap=1):
    """Runs of split measures, merged across gaps of at most `gap` points.

    Endpoints are the positions of the first and last split point of a run.
    """
    mask = pm.split_mask()
    idx = np.flatnonzero(mask)
    out = OscillationReport()
    if idx.size == 0:
        return out
    runs = []
    start = prev = idx[0]
    for i in idx[1:]:
        if i - prev - 1 > gap:
            runs.append((start, prev))
            start = i
        prev = i
    runs.append((start, prev))
    for s, e in runs:
        members = [pm.measures[k] for k in range(s, e + 1) if mask[k]]
        dl = min(m.atoms[0][0] for m in members)
        dr = max(m.atoms[1][0] for m in members)
        frac = float(np.mean([m.atoms[0][1] for m in members]))
        out.intervals.append(OscillationInterval(float(pm.x[s]), float(pm.x[e]),
                                                 float(dl), float(dr), frac))
    return out
