"""Split Bregman with convexity splitting on [-1, 1]^2 for

    I[u] = int (|grad u| - 1)_+ + 1/4 (1 - u^2)^2,    u = xy on the boundary.

Each iteration is one Gauss-Seidel sweep for u (a single gradient-flow step
with U_n the current iterate), a shrink for d and a Bregman update for b.

The gradient at a node is built from one-sided differences.  A "pairing"
(sx, sy) picks forward (+1) or backward (-1) differences in each direction.
The forward scheme uses the single pairing (+1, +1) on the n x n cells.  The
symmetric scheme averages the four pairings at every node where they exist,
which makes the discrete functional invariant under the reflections of the
square; in particular I[u] = I[-u(x, -y)] holds exactly.
"""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DivergenceError, InvalidParameterError
from .prox import shrink2d_scale

# fast-math without the no-NaN/no-inf assumptions, so divergence is still caught
FAST = {"reassoc", "contract", "arcp", "nsz", "afn"}

PAIRINGS = {
    "forward": np.array([[1, 1]], dtype=np.int64),
    "symmetric": np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int64),
}


@dataclass(frozen=True)
class Config2D:
    n: int = 50
    gamma: float = 0.04
    h: float = 0.04
    a: float = 2.5
    tol: float = 1e-10
    max_iter: int = 200_000
    scheme: str = "symmetric"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise InvalidParameterError("n must be an integer >= 4")
        for name in ("gamma", "h", "tol"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.a < 0:
            raise InvalidParameterError("a must be non-negative")
        if self.scheme not in PAIRINGS:
            raise InvalidParameterError(f"unknown scheme {self.scheme!r}")

    @property
    def spacing(self):
        return 2.0 / self.n


def grid_nodes(n):
    x = np.linspace(-1.0, 1.0, n + 1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return x, X, Y


def boundary_data(n):
    _, X, Y = grid_nodes(n)
    return X * Y


@dataclass
class State2D:
    """u on nodes; d, b per pairing, indexed by the corner node (i, j)."""

    u: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    pairings: np.ndarray

    @classmethod
    def initial(cls, u0, scheme="symmetric"):
        u = np.array(u0, dtype=float)
        n = u.shape[0] - 1
        pairs = PAIRINGS[scheme]
        z = np.zeros((len(pairs), n + 1, n + 1))
        return cls(u, z.copy(), z.copy(), z.copy(), z.copy(), pairs)


@numba.njit(cache=True)
def _corner_range(s, n):
    # nodes whose one-sided neighbour in direction s exists
    if s == 1:
        return 0, n
    return 1, n + 1


@numba.njit(cache=True)
def _edge_terms(dX, dY, bX, bY, pairs, qx, qy):
    # qx[e, j]: weighted sum of (d - b) over pairings using x-edge (e, e+1) in row j
    P = pairs.shape[0]
    n = qx.shape[0]
    w = 1.0 / P
    qx[:, :] = 0.0
    qy[:, :] = 0.0
    for p in range(P):
        sx, sy = pairs[p, 0], pairs[p, 1]
        i0, i1 = _corner_range(sx, n)
        j0, j1 = _corner_range(sy, n)
        for i in range(i0, i1):
            ex = i if sx == 1 else i - 1
            for j in range(j0, j1):
                ey = j if sy == 1 else j - 1
                qx[ex, j] += w * (dX[p, i, j] - bX[p, i, j])
                qy[i, ey] += w * (dY[p, i, j] - bY[p, i, j])


@numba.njit(cache=True, fastmath=FAST)
def _sweep_u(u, qx, qy, D, gam, h, a):
    # Returns (sum of squared changes, index of a non-finite node or -1).
    n = u.shape[0] - 1
    c0 = 1.0 + 4.0 * gam * h / (D * D) + a * h
    c1 = (gam * h / (D * D)) / c0
    step = 0.0
    for i in range(1, n):
        for j in range(1, n):
            U = u[i, j]
            s = u[i - 1, j] + u[i, j - 1] + u[i + 1, j] + u[i, j + 1]
            s += D * (qx[i - 1, j] - qx[i, j] + qy[i, j - 1] - qy[i, j])
            new = (U + h * ((1.0 + a) * U - U * U * U)) / c0 + c1 * s
            if not np.isfinite(new):
                return step, i * (n + 1) + j
            step += (new - U) ** 2
            u[i, j] = new
    return step, -1


@numba.njit(cache=True)
def _update_db(u, dX, dY, bX, bY, pairs, D, gam, update_d, update_b):
    # Shrink d from nu = grad u + b, then b += grad u - d.  Returns the
    # pairing-averaged constraint error sum |grad u - d|^2 D^2.
    P = pairs.shape[0]
    n = u.shape[0] - 1
    err = 0.0
    for p in range(P):
        sx, sy = pairs[p, 0], pairs[p, 1]
        i0, i1 = _corner_range(sx, n)
        j0, j1 = _corner_range(sy, n)
        for i in range(i0, i1):
            for j in range(j0, j1):
                gx = sx * (u[i + sx, j] - u[i, j]) / D
                gy = sy * (u[i, j + sy] - u[i, j]) / D
                if update_d:
                    nx = gx + bX[p, i, j]
                    ny = gy + bY[p, i, j]
                    sc = shrink2d_scale(nx, ny, gam)
                    dX[p, i, j] = sc * nx
                    dY[p, i, j] = sc * ny
                rx = gx - dX[p, i, j]
                ry = gy - dY[p, i, j]
                if update_b:
                    bX[p, i, j] += rx
                    bY[p, i, j] += ry
                err += rx * rx + ry * ry
    return err * D * D / P


@numba.njit(cache=True, fastmath=FAST)
def _db_and_edges(u, dX, dY, bX, bY, pairs, D, gam, qx, qy):
    # _update_db followed by _edge_terms, fused into one pass
    P = pairs.shape[0]
    n = u.shape[0] - 1
    w = 1.0 / P
    qx[:, :] = 0.0
    qy[:, :] = 0.0
    err = 0.0
    for p in range(P):
        sx, sy = pairs[p, 0], pairs[p, 1]
        i0, i1 = _corner_range(sx, n)
        j0, j1 = _corner_range(sy, n)
        for i in range(i0, i1):
            ex = i if sx == 1 else i - 1
            for j in range(j0, j1):
                ey = j if sy == 1 else j - 1
                gx = (u[ex + 1, j] - u[ex, j]) / D
                gy = (u[i, ey + 1] - u[i, ey]) / D
                nx = gx + bX[p, i, j]
                ny = gy + bY[p, i, j]
                sc = shrink2d_scale(nx, ny, gam)
                dxv = sc * nx
                dyv = sc * ny
                bxv = nx - dxv
                byv = ny - dyv
                dX[p, i, j] = dxv
                dY[p, i, j] = dyv
                bX[p, i, j] = bxv
                bY[p, i, j] = byv
                err += (gx - dxv) ** 2 + (gy - dyv) ** 2
                qx[ex, j] += w * (dxv - bxv)
                qy[i, ey] += w * (dyv - byv)
    return err * D * D / P


@numba.njit(cache=True)
def _iterate(u, dX, dY, bX, bY, pairs, D, gam, h, a, tol, max_iter, c_hist):
    n = u.shape[0] - 1
    qx = np.zeros((n, n + 1))
    qy = np.zeros((n + 1, n))
    _edge_terms(dX, dY, bX, bY, pairs, qx, qy)
    for it in range(max_iter):
        step, bad = _sweep_u(u, qx, qy, D, gam, h, a)
        if bad >= 0:
            return it, 2, bad
        err = _db_and_edges(u, dX, dY, bX, bY, pairs, D, gam, qx, qy)
        c_hist[it] = err
        if err <= tol and step * D * D / (h * h) <= tol:
            return it + 1, 0, -1
    return max_iter, 1, -1


def update_u_2d(state, cfg):
    """One Gauss-Seidel sweep over the interior nodes (in place)."""
    n = state.u.shape[0] - 1
    qx = np.zeros((n, n + 1))
    qy = np.zeros((n + 1, n))
    _edge_terms(state.dx, state.dy, state.bx, state.by, state.pairings, qx, qy)
    _, bad = _sweep_u(state.u, qx, qy, cfg.spacing, cfg.gamma, cfg.h, cfg.a)
    if bad >= 0:
        raise DivergenceError(f"non-finite u at node {divmod(bad, n + 1)}")
    return state


def update_d_2d(state, cfg):
    """d <- shrink2d(grad u + b) on every edge pair (in place)."""
    _update_db(state.u, state.dx, state.dy, state.bx, state.by, state.pairings,
               cfg.spacing, cfg.gamma, True, False)
    return state


def update_b_2d(state, cfg):
    """b <- b + (grad u - d) (in place)."""
    _update_db(state.u, state.dx, state.dy, state.bx, state.by, state.pairings,
               cfg.spacing, cfg.gamma, False, True)
    return state


def pair_gradients(u, D, pairs):
    """Per-pairing gradient arrays (gx, gy, valid) indexed by corner node."""
    n = u.shape[0] - 1
    P = len(pairs)
    gx = np.zeros((P, n + 1, n + 1))
    gy = np.zeros((P, n + 1, n + 1))
    valid = np.zeros((P, n + 1, n + 1), dtype=bool)
    fx = np.diff(u, axis=0) / D  # fx[e, j]: x-edge (e, e+1)
    fy = np.diff(u, axis=1) / D
    for p, (sx, sy) in enumerate(pairs):
        ii = np.arange(0, n) if sx == 1 else np.arange(1, n + 1)
        jj = np.arange(0, n) if sy == 1 else np.arange(1, n + 1)
        I, J = np.meshgrid(ii, jj, indexing="ij")
        gx[p, I, J] = fx[I if sx == 1 else I - 1, J]
        gy[p, I, J] = fy[I, J if sy == 1 else J - 1]
        valid[p, I, J] = True
    return gx, gy, valid


def constraint_error(state, D):
    gx, gy, valid = pair_gradients(state.u, D, state.pairings)
    r = (gx - state.dx) ** 2 + (gy - state.dy) ** 2
    return float(np.sum(np.where(valid, r, 0.0)) * D * D / len(state.pairings))


def energy_2d(u, D, scheme="symmetric"):
    """Pairing-averaged (|grad u| - 1)_+ plus the trapezoidal rule for the well."""
    pairs = PAIRINGS[scheme]
    gx, gy, valid = pair_gradients(u, D, pairs)
    tv = np.sum(np.where(valid, np.maximum(np.hypot(gx, gy) - 1.0, 0.0), 0.0)) / len(pairs)
    w = np.ones_like(u)
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    return float((tv + np.sum(w * 0.25 * (1.0 - u * u) ** 2)) * D * D)


@dataclass
class Report2D:
    u: np.ndarray
    energy: float
    energy_history: np.ndarray  # (iteration, energy) pairs
    constraint_history: np.ndarray
    iterations: int
    converged: bool
    scheme: str

    @property
    def final_constraint(self):
        return float(self.constraint_history[-1]) if self.iterations else float("nan")


def solve_2d(cfg=None, u0=None, record_every=250):
    """Iterate from u0 (default xy) until the constraint error and the
    time derivative fall below cfg.tol, or cfg.max_iter sweeps.

    The energy is recorded every `record_every` sweeps and at the end.
    """
    cfg = Config2D() if cfg is None else cfg
    n = cfg.n
    D = cfg.spacing
    bd = boundary_data(n)
    u = bd.copy() if u0 is None else np.array(u0, dtype=float)
    if u.shape != (n + 1, n + 1):
        raise InvalidParameterError("initial guess has the wrong shape")
    u[0, :], u[-1, :], u[:, 0], u[:, -1] = bd[0, :], bd[-1, :], bd[:, 0], bd[:, -1]
    st = State2D.initial(u, cfg.scheme)
    c_hist = np.zeros(cfg.max_iter)
    energies = [(0, energy_2d(st.u, D, cfg.scheme))]
    done = 0
    status = 1
    while done < cfg.max_iter:
        chunk = min(record_every, cfg.max_iter - done)
        its, status, bad = _iterate(st.u, st.dx, st.dy, st.bx, st.by, st.pairings, D,
                                    float(cfg.gamma), float(cfg.h), float(cfg.a),
                                    float(cfg.tol), int(chunk), c_hist[done:])
        if status == 2:
            raise DivergenceError(
                f"non-finite u at node {divmod(bad, n + 1)} in sweep {done + its}")
        done += its
        energies.append((done, energy_2d(st.u, D, cfg.scheme)))
        if status == 0:
            break
    return Report2D(st.u, energies[-1][1], np.array(energies), c_hist[:done].copy(),
                    int(done), status == 0, cfg.scheme)


def reflect_negate(u):
    """The symmetry u(x, y) -> -u(x, -y) on the node array."""
    return -np.asarray(u)[:, ::-1]


def symmetric_guesses(n, amplitude=0.2):
    """Two initial guesses exchanged by reflect_negate, biased in the centre."""
    _, X, Y = grid_nodes(n)
    bump = (1 - X ** 2) * (1 - Y ** 2)
    return X * Y + amplitude * bump, X * Y - amplitude * bump
