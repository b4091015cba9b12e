"""Semi-analytic minimizers from the control Hamiltonian and shooting.

Both reference problems reduce to a planar system u' = v, v' = F(u, v)
along which a Hamiltonian H(u, v) is conserved.  The free switching point
is found by shooting on the boundary condition.
"""
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.integrate import simpson

from .errors import ShootingError, SingularityError

STEPS_PER_UNIT = 10_000
BISECT_TOL = 1e-10
SINGULAR_TOL = 1e-10
V_SWITCH_1 = math.sqrt(2.0 / 3.0)


@numba.njit(cache=True)
def _rhs(system, u, v):
    # returns (u', v', denominator)
    if system == 0:
        den = 6.0 * v * v - 2.0
        return v, u / den, den
    if system == 1:
        den = 3.0 * v * v - 1.0
        return v, u * (u * u - 1.0) / den, den
    return v, 0.0, 1.0


def _h_one_sided(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.where(v >= V_SWITCH_1, 3 * v ** 4 - 2 * v ** 2 - 1 - u ** 2, -(1 + u ** 2))
    return np.where(v < 0, np.inf, out)


def _h_double_well(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    inner = -(u ** 2 - 1) ** 2
    return np.where(np.abs(v) >= 1, (v ** 2 - 1) * (3 * v ** 2 + 1) + inner, inner)


@dataclass(frozen=True)
class HamiltonianSystem:
    name: str
    system_id: int
    hamiltonian: object
    lagrangian: object = None


ONE_SIDED = HamiltonianSystem(
    "one_sided_well", 0, _h_one_sided,
    lambda u, v: (v * v - 1) ** 2 + u * u)
DOUBLE_WELL = HamiltonianSystem(
    "double_well", 1, _h_double_well,
    lambda u, v: (v * v - 1) ** 2 + (u * u - 1) ** 2)
FREE = HamiltonianSystem("free", 2, lambda u, v: 0.5 * np.asarray(v) ** 2)


@dataclass
class Trajectory:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass
class ShootingResult:
    x_star: float
    trajectory: Trajectory
    energy: float
    hamiltonian_drift: float
    level: float


@numba.njit(cache=True)
def _rk4(system, u0, v0, x0, step, n, xs, us, vs):
    # Returns -1 or the index of the step where a denominator became singular.
    u, v = u0, v0
    xs[0], us[0], vs[0] = x0, u0, v0
    for i in range(n):
        k1u, k1v, d1 = _rhs(system, u, v)
        k2u, k2v, d2 = _rhs(system, u + 0.5 * step * k1u, v + 0.5 * step * k1v)
        k3u, k3v, d3 = _rhs(system, u + 0.5 * step * k2u, v + 0.5 * step * k2v)
        k4u, k4v, d4 = _rhs(system, u + step * k3u, v + step * k3v)
        if min(abs(d1), abs(d2), abs(d3), abs(d4)) < SINGULAR_TOL:
            return i
        u = u + step / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + step / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs[i + 1] = x0 + (i + 1) * step
        us[i + 1] = u
        vs[i + 1] = v
    return -1


def integrate(sys, u0, v0, x0, x1, n_steps):
    """Classical fixed-step RK4 from x0 to x1 (x1 < x0 integrates backwards)."""
    n = int(n_steps)
    if n < 1:
        raise ValueError("n_steps must be positive")
    xs, us, vs = np.empty(n + 1), np.empty(n + 1), np.empty(n + 1)
    bad = _rk4(sys.system_id, float(u0), float(v0), float(x0), (x1 - x0) / n, n, xs, us, vs)
    if bad >= 0:
        raise SingularityError(
            f"{sys.name}: vanishing denominator near x={x0 + bad * (x1 - x0) / n:.6g}")
    xs[-1] = x1
    return Trajectory(xs, us, vs)


def _steps(length):
    return max(2, int(math.ceil(abs(length) * STEPS_PER_UNIT)))


def hamiltonian_check(sys, traj):
    """Largest deviation of H from its initial value along the trajectory."""
    H = sys.hamiltonian(traj.u, traj.v)
    return float(np.max(np.abs(H - H[0])))


def _arc_energy(sys, traj):
    return float(abs(simpson(sys.lagrangian(traj.u, traj.v), x=traj.x)))


def shoot_example1():
    """u(0) = 0, u(1) = 1/2 for the one-sided well with V = u^2.

    The minimizer is zero up to x*, then leaves with slope sqrt(2/3).
    """
    def miss(xs):
        traj = integrate(ONE_SIDED, 0.0, V_SWITCH_1, xs, 1.0, _steps(1.0 - xs))
        return traj.u[-1] - 0.5

    lo, hi = 0.0, 0.99
    f_lo, f_hi = miss(lo), miss(hi)
    if f_lo * f_hi > 0:
        raise ShootingError("switching point not bracketed")
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = miss(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    xs = 0.5 * (lo + hi)
    traj = integrate(ONE_SIDED, 0.0, V_SWITCH_1, xs, 1.0, _steps(1.0 - xs))
    # zero segment: envelope value 1 at slope 0, V = 0
    energy = xs * 1.0 + _arc_energy(ONE_SIDED, traj)
    return ShootingResult(xs, traj, energy, hamiltonian_check(ONE_SIDED, traj),
                          float(_h_one_sided(0.0, V_SWITCH_1)))


def integrate_to_zero(sys, u0, v0, direction=-1.0, budget=2.0):
    """Integrate from (u0, v0) at 0 until u changes sign.

    The crossing is located by bisection on the length of the final step.
    Returns the trajectory ending exactly at the crossing.
    """
    step = direction / STEPS_PER_UNIT
    n_max = int(round(budget * STEPS_PER_UNIT))
    xs, us, vs = [0.0], [float(u0)], [float(v0)]
    buf = (np.empty(2), np.empty(2), np.empty(2))
    sid = sys.system_id
    for i in range(n_max):
        bad = _rk4(sid, us[-1], vs[-1], xs[-1], step, 1, *buf)
        if bad >= 0:
            raise SingularityError(f"{sys.name}: vanishing denominator near x={xs[-1]:.6g}")
        if buf[1][1] * us[0] <= 0:
            lo, hi = 0.0, 1.0
            while hi - lo > 1e-14:
                mid = 0.5 * (lo + hi)
                _rk4(sid, us[-1], vs[-1], xs[-1], step * mid, 1, *buf)
                if buf[1][1] * us[0] > 0:
                    lo = mid
                else:
                    hi = mid
            _rk4(sid, us[-1], vs[-1], xs[-1], step * hi, 1, *buf)
            xs.append(buf[0][1])
            us.append(buf[1][1])
            vs.append(buf[2][1])
            return Trajectory(np.array(xs), np.array(us), np.array(vs))
        xs.append(buf[0][1])
        us.append(buf[1][1])
        vs.append(buf[2][1])
    raise ShootingError(f"no zero crossing of u within length {budget}")


def shoot_example2():
    """u(-1) = u(1) = 0 for the double well with V = (u^2 - 1)^2.

    The minimizer sits at u = 1 on (x*, -x*) and follows the arc through
    (u, v) = (1, 1) down to u = 0 on either side.
    """
    traj = integrate_to_zero(DOUBLE_WELL, 1.0, 1.0, direction=-1.0)
    length = -traj.x[-1]
    xs = length - 1.0
    # the plateau contributes nothing; two mirror arcs
    energy = 2.0 * _arc_energy(DOUBLE_WELL, traj)
    arc = Trajectory(traj.x + xs, traj.u, traj.v)
    return ShootingResult(xs, arc, energy, hamiltonian_check(DOUBLE_WELL, traj),
                          float(_h_double_well(1.0, 1.0)))


def assemble_example1(res, x):
    """Minimizer on the nodes x of [0, 1]."""
    t = res.trajectory
    return np.where(x <= res.x_star, 0.0, np.interp(x, t.x, t.u))


def assemble_example2(res, x):
    """Even minimizer on the nodes x of [-1, 1]."""
    t = res.trajectory
    order = np.argsort(t.x)
    left = np.interp(x, t.x[order], t.u[order])
    right = np.interp(-x, t.x[order], t.u[order])
    return np.where(x <= res.x_star, left, np.where(x >= -res.x_star, right, 1.0))


def oracle(name):
    if name == "example1":
        return shoot_example1()
    if name == "example2":
        return shoot_example2()
    raise ValueError(f"no oracle for {name!r}")
