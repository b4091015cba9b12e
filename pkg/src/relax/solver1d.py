"""Gradient flow with convexity splitting, each step solved by split Bregman.

Unknowns: u on the n+1 grid nodes, d and b on the n cells.  The gradient is
the forward difference (u[i+1] - u[i]) / dx, stored on cell i.

The potential V(x, u) is split as V = V_plus + V_minus with
V_plus = alpha/2 u^2 - beta u treated implicitly and V_minus linearized at
the previous time step:

    quadratic_tracking  (u - g)^2      alpha = 2,    beta = 2g, no splitting
    double_well         (u^2 - 1)^2    alpha = 4a,   V_minus' = 4u^3 - 4(1+a)u
    tracking_well       (u^2 - g)^2    alpha = 4a,   V_minus' = 4u^3 - 4(g+a)u

All discrete norms carry the grid weight dx.
"""
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import solve_banded

from .envelope import Envelope
from .errors import DivergenceError, InvalidInputError, InvalidParameterError
from .prox import ShrinkTable, shrink1d, shrink_scalar

FORMS = {"quadratic_tracking": 0, "double_well": 1, "tracking_well": 2}


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n_cells: int

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidInputError("grid needs a < b")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise InvalidInputError("grid needs at least 2 cells")

    @classmethod
    def from_spacing(cls, a, b, dx):
        n = (b - a) / dx
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise InvalidInputError(f"dx={dx} does not divide [{a}, {b}]")
        return cls(a, b, int(round(n)))

    @property
    def dx(self):
        return (self.b - self.a) / self.n_cells

    @property
    def x(self):
        return np.linspace(self.a, self.b, self.n_cells + 1)

    @property
    def midpoints(self):
        x = self.x
        return 0.5 * (x[1:] + x[:-1])


@dataclass(frozen=True)
class PotentialV:
    form: str
    g: object = None
    a: float = 0.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise InvalidInputError(f"unknown potential form {self.form!r}")
        if self.a < 0:
            raise InvalidInputError("splitting parameter must be non-negative")
        if self.form != "quadratic_tracking" and not self.a > 0:
            raise InvalidInputError(f"{self.form} needs a positive splitting parameter")

    def g_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.g is None:
            return np.zeros_like(x)
        if callable(self.g):
            return np.broadcast_to(np.asarray(self.g(x), dtype=float), x.shape).copy()
        return np.full_like(x, float(self.g))

    def __call__(self, x, u):
        g = self.g_at(x)
        if self.form == "quadratic_tracking":
            return (u - g) ** 2
        if self.form == "double_well":
            return (u * u - 1.0) ** 2
        return (u * u - g) ** 2

    def coefficients(self, x):
        """(alpha, beta, form code, a, g) on the nodes x."""
        g = self.g_at(x)
        if self.form == "quadratic_tracking":
            return 2.0, 2.0 * g, 0, 0.0, g
        return 4.0 * self.a, np.zeros_like(g), FORMS[self.form], float(self.a), g


@dataclass(frozen=True)
class Dirichlet:
    left: float
    right: float


@dataclass(frozen=True)
class Natural:
    pass


@dataclass(frozen=True)
class SolverConfig:
    gamma: float
    h: float
    K: int = 5
    gs_sweeps: int = 10
    tol: float = 1e-12
    max_outer: int = 50_000
    bc: object = field(default_factory=lambda: Dirichlet(0.0, 0.0))

    def __post_init__(self):
        for name in ("gamma", "h", "tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{name} must be a positive number")
        if int(self.K) != self.K or self.K < 1:
            raise InvalidParameterError("K must be an integer >= 1")
        if int(self.gs_sweeps) != self.gs_sweeps or self.gs_sweeps < 1:
            raise InvalidParameterError("gs_sweeps must be an integer >= 1")
        if int(self.max_outer) != self.max_outer or self.max_outer < 1:
            raise InvalidParameterError("max_outer must be an integer >= 1")
        if not isinstance(self.bc, (Dirichlet, Natural)):
            raise InvalidParameterError("bc must be Dirichlet or Natural")

    @property
    def dirichlet(self):
        return isinstance(self.bc, Dirichlet)


def default_step(dx):
    """gamma = h = max(dx, 0.01)."""
    return max(dx, 0.01)


@dataclass(frozen=True)
class Problem:
    envelope: Envelope
    potential: PotentialV


@dataclass
class SolveReport:
    grid: Grid1D
    u: np.ndarray
    d: np.ndarray
    b: np.ndarray
    energy_history: np.ndarray
    constraint_history: np.ndarray
    outer_iterations: int
    converged: bool
    final_energy: float
    final_energy_cell: float

    @property
    def ux(self):
        return np.diff(self.u) / self.grid.dx


# ---------------------------------------------------------------- kernels

@numba.njit(cache=True)
def _vminus_grad(form, a, g, U):
    if form == 1:
        return 4.0 * U ** 3 - 4.0 * (1.0 + a) * U
    if form == 2:
        return 4.0 * U ** 3 - 4.0 * (g + a) * U
    return 0.0


@numba.njit(cache=True)
def _gs_sweeps(u, d, b, U, dx, gam, h, sweeps, alpha, beta, form, a, g, dirichlet):
    # Returns -1 on success or the index of the first non-finite node.
    n = u.shape[0] - 1
    c = gam / (dx * dx)
    e = gam / dx
    lo = 1 if dirichlet else 0
    hi = n - 1 if dirichlet else n
    for _ in range(sweeps):
        for j in range(lo, hi + 1):
            rhs = U[j] / h + beta[j] - _vminus_grad(form, a, g[j], U[j])
            den = 1.0 / h + alpha
            if j > 0:
                rhs += c * u[j - 1] + e * (d[j - 1] - b[j - 1])
                den += c
            if j < n:
                rhs += c * u[j + 1] - e * (d[j] - b[j])
                den += c
            val = rhs / den
            if not np.isfinite(val):
                return j
            u[j] = val
    return -1


@numba.njit(cache=True)
def _shrink_and_update(u, d, b, kinks, slopes, dx, gam):
    for i in range(d.shape[0]):
        ux = (u[i + 1] - u[i]) / dx
        d[i] = shrink_scalar(kinks, slopes, ux + b[i], gam)
        b[i] += ux - d[i]


@numba.njit(cache=True)
def _wbar(bp, vals, sl, left, right, d, slack):
    m = bp.shape[0] - 1
    if bp[0] - slack <= d < bp[0]:
        d = bp[0]
    elif bp[m] < d <= bp[m] + slack:
        d = bp[m]
    if d < bp[0]:
        if np.isinf(left):
            return np.inf
        return vals[0] + left * (d - bp[0])
    if d > bp[m]:
        if np.isinf(right):
            return np.inf
        return vals[m] + right * (d - bp[m])
    lo = 0
    hi = m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bp[mid] <= d:
            lo = mid
        else:
            hi = mid
    return vals[lo] + sl[lo] * (d - bp[lo])


@numba.njit(cache=True)
def _v_value(form, g, u):
    if form == 0:
        return (u - g) ** 2
    if form == 1:
        return (u * u - 1.0) ** 2
    return (u * u - g) ** 2


@numba.njit(cache=True)
def _node_energy(u, dx, bp, vals, sl, left, right, slack, form, g):
    n = u.shape[0] - 1
    w = 0.0
    for j in range(1, n):
        w += _wbar(bp, vals, sl, left, right, (u[j + 1] - u[j - 1]) / (2.0 * dx), slack)
    v = 0.5 * (_v_value(form, g[0], u[0]) + _v_value(form, g[n], u[n]))
    for j in range(1, n):
        v += _v_value(form, g[j], u[j])
    return (w + v) * dx


@numba.njit(cache=True)
def _outer(u, d, b, kinks, slopes, bp, vals, sl, left, right, slack, dx, gam, h, K, sweeps,
           alpha, beta, form, a, g, dirichlet, tol, max_outer, e_hist, c_hist):
    n = u.shape[0] - 1
    U = u.copy()
    for it in range(max_outer):
        U[:] = u
        for _ in range(K):
            bad = _gs_sweeps(u, d, b, U, dx, gam, h, sweeps, alpha, beta, form, a, g, dirichlet)
            if bad >= 0:
                return it, 2, bad
            _shrink_and_update(u, d, b, kinks, slopes, dx, gam)
        err = 0.0
        for i in range(n):
            err += ((u[i + 1] - u[i]) / dx - d[i]) ** 2
        err *= dx
        step = 0.0
        for j in range(n + 1):
            step += (u[j] - U[j]) ** 2
        step *= dx / (h * h)
        c_hist[it] = err
        e_hist[it] = _node_energy(u, dx, bp, vals, sl, left, right, slack, form, g)
        if err <= tol and step <= tol:
            return it + 1, 0, -1
    return max_outer, 1, -1


# ---------------------------------------------------------------- public API

def _prepare(problem, cfg, grid):
    alpha, beta, form, a, g = problem.potential.coefficients(grid.x)
    beta = np.ascontiguousarray(np.broadcast_to(beta, grid.x.shape), dtype=float)
    return float(alpha), beta, form, a, np.ascontiguousarray(g, dtype=float)


def apply_bc(u, cfg):
    if cfg.dirichlet:
        u[0] = cfg.bc.left
        u[-1] = cfg.bc.right
    return u


def gauss_seidel_u_step(u, d, b, U_n, V, cfg, grid):
    """cfg.gs_sweeps forward Gauss-Seidel sweeps on the u-subproblem."""
    alpha, beta, form, a, g = _prepare(Problem(None, V), cfg, grid)
    out = np.array(u, dtype=float)
    bad = _gs_sweeps(out, np.asarray(d, float), np.asarray(b, float), np.asarray(U_n, float),
                     grid.dx, cfg.gamma, cfg.h, cfg.gs_sweeps, alpha, beta, form, a, g,
                     cfg.dirichlet)
    if bad >= 0:
        raise DivergenceError(f"non-finite u at node {bad} during Gauss-Seidel sweep")
    return out


def u_step_system(d, b, U_n, V, cfg, grid):
    """Banded matrix and right-hand side of the u-subproblem (free nodes only).

    Returns (ab, rhs, free) where `free` indexes the unknown nodes; the matrix
    is in scipy.linalg.solve_banded (1, 1) layout.
    """
    alpha, beta, form, a, g = _prepare(Problem(None, V), cfg, grid)
    n = grid.n_cells
    dx, gam, h = grid.dx, cfg.gamma, cfg.h
    c, e = gam / dx ** 2, gam / dx
    U_n = np.asarray(U_n, dtype=float)
    d = np.asarray(d, dtype=float)
    b = np.asarray(b, dtype=float)
    q = d - b
    diag = np.full(n + 1, 1.0 / h + alpha)
    rhs = U_n / h + beta
    if form:
        rhs = rhs - np.array([_vminus_grad(form, a, g[j], U_n[j]) for j in range(n + 1)])
    diag[1:] += c
    diag[:-1] += c
    rhs[1:] += e * q
    rhs[:-1] -= e * q
    off = np.full(n, -c)
    if cfg.dirichlet:
        free = np.arange(1, n)
        rhs = rhs[1:-1].copy()
        rhs[0] += c * cfg.bc.left
        rhs[-1] += c * cfg.bc.right
        diag = diag[1:-1]
        off = off[1:-1]
    else:
        free = np.arange(n + 1)
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return ab, rhs, free


def exact_u_step(u, d, b, U_n, V, cfg, grid):
    """Exact minimizer of the u-subproblem by a tridiagonal solve."""
    ab, rhs, free = u_step_system(d, b, U_n, V, cfg, grid)
    out = np.array(u, dtype=float)
    apply_bc(out, cfg)
    out[free] = solve_banded((1, 1), ab, rhs)
    return out


def bregman_inner(U_n, state, problem, cfg, grid, exact=False):
    """K split Bregman rounds warm-started from state = (u, d, b)."""
    u, d, b = (np.array(v, dtype=float) for v in state)
    table = ShrinkTable.from_envelope(problem.envelope)
    for _ in range(cfg.K):
        if exact:
            u = exact_u_step(u, d, b, U_n, problem.potential, cfg, grid)
        else:
            u = gauss_seidel_u_step(u, d, b, U_n, problem.potential, cfg, grid)
        _shrink_and_update(u, d, b, table.kinks, table.slopes, grid.dx, cfg.gamma)
    return u, d, b


def compute_energy(u, envelope, V, grid, quadrature="cell"):
    """Discrete relaxed energy.

    "cell": envelope of the forward difference on each cell plus V at the
    cell midpoint (midpoint rule).
    "node": envelope of the centred difference at interior nodes plus the
    trapezoidal rule for V on the nodes.
    Gradients within a rounding slack of the envelope's range are clamped.
    """
    u = np.asarray(u, dtype=float)
    dx = grid.dx
    slack = envelope.energy_slack()
    if quadrature == "cell":
        ux = np.diff(u) / dx
        um = 0.5 * (u[1:] + u[:-1])
        return float(np.sum(envelope(ux, slack)) * dx + np.sum(V(grid.midpoints, um)) * dx)
    if quadrature == "node":
        uc = (u[2:] - u[:-2]) / (2 * dx)
        vn = V(grid.x, u)
        return float(np.sum(envelope(uc, slack)) * dx
                     + (vn.sum() - 0.5 * (vn[0] + vn[-1])) * dx)
    raise InvalidParameterError(f"unknown quadrature {quadrature!r}")


def solve(problem, cfg, grid, u0=None):
    """Outer gradient-flow loop; stops when both the constraint error
    ||d - u_x||^2 and the time derivative ||U_n - U_{n-1}||^2 / h^2 drop
    below cfg.tol, or after cfg.max_outer steps."""
    n = grid.n_cells
    u = np.zeros(n + 1) if u0 is None else np.array(u0, dtype=float)
    if u.shape != (n + 1,):
        raise InvalidInputError("initial guess has the wrong length")
    apply_bc(u, cfg)
    d = np.zeros(n)
    b = np.zeros(n)
    env = problem.envelope
    table = ShrinkTable.from_envelope(env)
    alpha, beta, form, a, g = _prepare(problem, cfg, grid)
    e_hist = np.zeros(cfg.max_outer)
    c_hist = np.zeros(cfg.max_outer)
    its, status, bad = _outer(
        u, d, b, table.kinks, table.slopes,
        np.ascontiguousarray(env.breakpoints), np.ascontiguousarray(env.values),
        np.ascontiguousarray(env.slopes), float(env.left_slope), float(env.right_slope),
        env.energy_slack(),
        grid.dx, float(cfg.gamma), float(cfg.h), int(cfg.K), int(cfg.gs_sweeps),
        alpha, beta, form, a, g, cfg.dirichlet, float(cfg.tol), int(cfg.max_outer),
        e_hist, c_hist)
    if status == 2:
        raise DivergenceError(f"non-finite u at node {bad} in outer iteration {its}")
    return SolveReport(
        grid=grid, u=u, d=d, b=b,
        energy_history=e_hist[:its].copy(),
        constraint_history=c_hist[:its].copy(),
        outer_iterations=int(its),
        converged=status == 0,
        final_energy=compute_energy(u, env, problem.potential, grid, "node"),
        final_energy_cell=compute_energy(u, env, problem.potential, grid, "cell"),
    )


# ------------------------------------------------ inner-loop diagnostics

def _inner_objective(u, d, U_n, problem, cfg, grid):
    """W[d] + V_plus-part + proximal term for a quadratic-tracking V."""
    dx = grid.dx
    v = problem.potential(grid.x, u)
    prox = (u - U_n) ** 2 / (2 * cfg.h)
    return float(np.sum(problem.envelope(d)) * dx + np.sum(v + prox) * dx)


def _joint_minimize(u, d, b, U_n, problem, cfg, grid, table, tol, max_iter):
    for _ in range(max_iter):
        u_new = exact_u_step(u, d, b, U_n, problem.potential, cfg, grid)
        z = np.diff(u_new) / grid.dx + b
        d_new = shrink1d(table, z, cfg.gamma)
        change = max(np.max(np.abs(u_new - u)), np.max(np.abs(d_new - d)))
        u, d = u_new, d_new
        if change <= tol:
            break
    return u, d


def exact_bregman_history(U_n, problem, cfg, grid, iterations, inner_tol=1e-15,
                          inner_max=10_000):
    """Bregman iteration on one time step with exact joint (u, d) solves.

    Starts from b = 0 and returns per-iteration arrays (H, E), where
    H = gamma/2 ||d - u_x||^2 and E is the step objective at (u, d).
    Only meaningful for a convex, unsplit V.
    """
    if problem.potential.form != "quadratic_tracking":
        raise InvalidParameterError("exact Bregman diagnostics need an unsplit convex V")
    table = ShrinkTable.from_envelope(problem.envelope)
    n = grid.n_cells
    u = apply_bc(np.array(U_n, dtype=float), cfg)
    d = np.clip(np.diff(u) / grid.dx, table.kinks[0], table.kinks[-1])
    b = np.zeros(n)
    H = np.zeros(iterations)
    E = np.zeros(iterations)
    for k in range(iterations):
        u, d = _joint_minimize(u, d, b, U_n, problem, cfg, grid, table, inner_tol, inner_max)
        r = np.diff(u) / grid.dx - d
        b = b + r
        H[k] = 0.5 * cfg.gamma * np.sum(r * r) * grid.dx
        E[k] = _inner_objective(u, d, U_n, problem, cfg, grid)
    return H, E, u


def constrained_step_energy(U_n, problem, cfg, grid, iterations=2000):
    """Objective of the constrained single-step minimizer (d = u_x)."""
    H, E, u = exact_bregman_history(U_n, problem, cfg, grid, iterations)
    return _inner_objective(u, np.diff(u) / grid.dx, U_n, problem, cfg, grid), H[-1]
