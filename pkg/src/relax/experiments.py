"""Catalogue of the reference problems and their default settings."""
import math
from dataclasses import dataclass

import numpy as np

from .envelope import SampledFunction, build_envelope, sample
from .errors import ConfigError
from .solver1d import Dirichlet, Grid1D, Natural, PotentialV, Problem

NAMES_1D = ("example1", "example2", "example3", "example4", "example5")
NAMES = NAMES_1D + ("example6",)


def double_well(d):
    return (d * d - 1.0) ** 2


def triple_well(d):
    return (d * d - 1.0) ** 2 * ((d - 2.0) ** 2 - 1.0) ** 2


def tracking_exp(x):
    return np.sin(2 * np.pi * x) / 6.0 + 0.5 * np.exp(x)


def tracking_sin(x):
    return 0.25 * np.sin(2 * np.pi * x) + 0.5


POTENTIALS_W = {"double_well": double_well, "triple_well": triple_well}
G_FUNCTIONS = {"sin_exp": tracking_exp, "sin_half": tracking_sin}


def random_potential(seed, lo=-2.0, hi=2.0, n=64):
    """Uniform(0, 1) values at n equispaced points of [lo, hi]."""
    rng = np.random.default_rng(seed)
    return SampledFunction(np.linspace(lo, hi, n), rng.uniform(0.0, 1.0, n))


@dataclass
class Setup1D:
    name: str
    W: SampledFunction
    problem: Problem
    interval: tuple
    bc: object
    dx: float
    K: int
    gs_sweeps: int
    init: str
    seed: object = None

    def grid(self, dx=None):
        a, b = self.interval
        return Grid1D.from_spacing(a, b, self.dx if dx is None else dx)

    def initial_guess(self, grid, init=None):
        kind = self.init if init is None else init
        if isinstance(kind, np.ndarray):
            if kind.shape != (grid.n_cells + 1,):
                raise ConfigError("initial guess has the wrong length", "init")
            return kind.astype(float)
        n = grid.n_cells + 1
        if kind == "zero":
            return np.zeros(n)
        if kind == "plus":
            return np.ones(n)
        if kind == "minus":
            return -np.ones(n)
        raise ConfigError(f"unknown initial guess {kind!r}", "init")


def setup(name, seed=0, splitting_a=None, d_range=None):
    """Problem definition and default parameters for a named example."""
    if name == "example1":
        W = sample(double_well, 0.0, 3.0)
        V = PotentialV("quadratic_tracking")
        return Setup1D(name, W, Problem(build_envelope(W), V), (0.0, 1.0),
                       Dirichlet(0.0, 0.5), 2.0 ** -7, 5, 10, "zero")
    if name in ("example2", "example3"):
        a = 4.0 if splitting_a is None else splitting_a
        if name == "example2":
            W = sample(double_well, -3.0, 3.0)
        else:
            W = sample(triple_well, -2.0, 4.0)
        V = PotentialV("double_well", a=a)
        return Setup1D(name, W, Problem(build_envelope(W), V), (-1.0, 1.0),
                       Dirichlet(0.0, 0.0), 2.0 ** -7, 5, 10, "plus")
    if name == "example4":
        W = sample(double_well, -3.0, 3.0)
        V = PotentialV("quadratic_tracking", g=tracking_exp)
        return Setup1D(name, W, Problem(build_envelope(W), V), (-1.0, 1.0),
                       Natural(), 2.0 ** -8, 5, 20, "zero")
    if name == "example5":
        a = 4.1 if splitting_a is None else splitting_a
        lo, hi = (-2.0, 2.0) if d_range is None else d_range
        W = random_potential(seed, lo, hi)
        V = PotentialV("tracking_well", g=tracking_sin, a=a)
        return Setup1D(name, W, Problem(build_envelope(W), V), (-1.0, 1.0),
                       Natural(), 2.0 ** -8, 10, 20, "plus", seed)
    raise ConfigError(f"unknown experiment {name!r}", "experiment")


def parse_dx(text):
    """Accepts plain numbers and powers of two written as 2^-k."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        s = str(text).strip()
        try:
            if s.startswith("2^"):
                value = 2.0 ** float(s[2:])
            else:
                value = float(s)
        except ValueError:
            raise ConfigError(f"cannot parse grid spacing {text!r}", "dx") from None
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"grid spacing must be positive, got {text!r}", "dx")
    return value
