import math

import numpy as np
import pytest

from relax.errors import ShootingError, SingularityError
from relax.oracle import (DOUBLE_WELL, FREE, ONE_SIDED, assemble_example1, assemble_example2,
                          hamiltonian_check, integrate, integrate_to_zero, oracle)


@pytest.fixture(scope="module")
def ex1():
    return oracle("example1")


@pytest.fixture(scope="module")
def ex2():
    return oracle("example2")


def test_example1_hits_boundary_value():
    traj = integrate(ONE_SIDED, 0.0, math.sqrt(2 / 3), 0.4039, 1.0, 6000)
    assert traj.u[-1] == pytest.approx(0.5, abs=1e-3)


def test_example1_switch_and_energy(ex1):
    assert ex1.x_star == pytest.approx(0.4039, abs=1e-3)
    assert ex1.energy == pytest.approx(0.505445, abs=1e-4)
    assert ex1.hamiltonian_drift <= 1e-6


def test_example2_switch_and_energy(ex2):
    assert ex2.x_star == pytest.approx(-0.0529, abs=1e-3)
    assert ex2.energy == pytest.approx(1.0241, abs=1e-3)
    assert ex2.energy < 16 / 15 < 2
    assert ex2.hamiltonian_drift <= 1e-6


def test_assembled_profiles(ex1, ex2):
    x = np.linspace(0, 1, 257)
    u = assemble_example1(ex1, x)
    assert u[0] == 0.0 and u[-1] == pytest.approx(0.5, abs=1e-9)
    assert np.all(u[x < ex1.x_star] == 0.0)
    y = np.linspace(-1, 1, 257)
    w = assemble_example2(ex2, y)
    assert abs(w[0]) < 1e-9 and abs(w[-1]) < 1e-9
    assert np.allclose(w, w[::-1], atol=1e-9)
    assert np.all(w[np.abs(y) < -ex2.x_star] == 1.0)


def test_reversible():
    u0, v0, L = 0.5, 1.2, 0.3
    fwd = integrate(DOUBLE_WELL, u0, v0, 0.0, L, 3000)
    back = integrate(DOUBLE_WELL, fwd.u[-1], -fwd.v[-1], 0.0, L, 3000)
    assert back.u[-1] == pytest.approx(u0, abs=1e-8)
    assert -back.v[-1] == pytest.approx(v0, abs=1e-8)


def test_rk4_order():
    # free particle: exact for any step; one-sided system converges at fourth order
    t = integrate(FREE, 0.0, 2.0, 0.0, 1.0, 3)
    assert t.u[-1] == pytest.approx(2.0, abs=1e-14)
    ref = integrate(ONE_SIDED, 0.1, 1.0, 0.0, 0.5, 4000).u[-1]
    e1 = abs(integrate(ONE_SIDED, 0.1, 1.0, 0.0, 0.5, 20).u[-1] - ref)
    e2 = abs(integrate(ONE_SIDED, 0.1, 1.0, 0.0, 0.5, 40).u[-1] - ref)
    assert 12 < e1 / e2 < 20


def test_hamiltonian_conserved_along_trajectory():
    t = integrate(DOUBLE_WELL, 0.2, 1.5, 0.0, 1.0, 10_000)
    assert hamiltonian_check(DOUBLE_WELL, t) < 1e-9


def test_singular_start():
    with pytest.raises(SingularityError):
        integrate(DOUBLE_WELL, 0.5, 1 / math.sqrt(3), 0.0, 0.1, 10)


def test_no_zero_crossing():
    with pytest.raises(ShootingError):
        integrate_to_zero(DOUBLE_WELL, 1.0, 1.0, budget=0.1)


def test_unknown_name():
    with pytest.raises(ValueError):
        oracle("example3")
