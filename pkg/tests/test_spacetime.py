"""Space-time norms: time-inside and time-outside families, Kato norms.

Oracles: constant-in-time trajectories reduce every family to a closed
form in the spatial norm and the window length; single-mode heat
trajectories give exact exponential time profiles, integrable by hand.
"""
import math

import numpy as np
import pytest

from bnslab.field import random_band_limited, single_mode
from bnslab.grid import GridSpec
from bnslab.littlewood_paley import BesovIndex, besov_norm, critical_index
from bnslab.solver import heat_trajectory
from bnslab.spacetime import (SpaceTimeNormSpec, chemin_lerner_norm,
                              constant_trajectory, embedding_chain_check,
                              evaluate, kato_interpolation_constant, kato_norm,
                              lebesgue_besov_norm, rescale_trajectory,
                              script_norm)


@pytest.fixture(scope="module")
def grid():
    return GridSpec(32)


@pytest.fixture(scope="module")
def const_traj(grid):
    u = random_band_limited(grid, j_lo=0, j_hi=2, seed=30)
    times = np.linspace(0.0, 1.0, 11)
    return u, constant_trajectory(u, times)


def test_constant_trajectory_chemin_lerner_oracle(const_traj):
    # time-inside L^rho of a constant is T^{1/rho} times the snapshot value
    u, traj = const_traj
    idx = critical_index(3.0, 3.0)
    T = traj.t_final
    for rho in (1.0, 2.0, math.inf):
        w = 1.0 if math.isinf(rho) else T ** (1.0 / rho)
        expected = w * besov_norm(u, idx)
        assert chemin_lerner_norm(traj, idx, rho) == pytest.approx(
            expected, rel=1e-10)
        assert lebesgue_besov_norm(traj, idx, rho) == pytest.approx(
            expected, rel=1e-10)


def test_minkowski_between_families(grid):
    # time-inside <= time-outside at rho <= q; reversed at rho >= q
    u0 = random_band_limited(grid, j_lo=0, j_hi=2, seed=31)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.2, 9))
    idx = critical_index(3.0, 3.0)
    slack = 1e-12
    assert chemin_lerner_norm(traj, idx, 1.0) <= (
        lebesgue_besov_norm(traj, idx, 1.0) * (1 + slack))
    assert lebesgue_besov_norm(traj, idx, math.inf) <= (
        chemin_lerner_norm(traj, idx, math.inf) * (1 + slack))


def test_kato_norm_heat_single_mode(grid):
    # e^{tD}u0 for a single mode decays like e^{-k^2 t}; the weighted sup
    # t^{(1-3/q)/2} e^{-k^2 t} ||u0||_q maximizes at t* = (1-3/q)/(2 k^2)
    u0 = single_mode(grid, (2, 0, 0))
    q = 6.0
    k2 = 4.0
    alpha = 0.5 * (1.0 - 3.0 / q)
    times = np.linspace(0.0, 1.0, 201)
    traj = heat_trajectory(u0, times)
    expected = max(t ** alpha * math.exp(-k2 * t) for t in times) * u0.lp(q)
    assert kato_norm(traj, q) == pytest.approx(expected, rel=1e-10)


def test_kato_requires_supercritical(grid):
    u0 = single_mode(grid, (1, 0, 0))
    traj = heat_trajectory(u0, np.linspace(0.0, 0.1, 5))
    with pytest.raises(ValueError):
        kato_norm(traj, 2.0)


def test_script_norm_endpoint_matches_chemin_lerner(grid):
    # the (1, inf) script family at a = 1, b = inf is the same object as
    # the time-inside norm pair it interpolates
    u0 = random_band_limited(grid, j_lo=0, j_hi=2, seed=33)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.1, 9))
    v = script_norm(traj, 1.0, math.inf, 3.0)
    assert v > 0.0
    assert math.isfinite(v)


def test_evaluate_dispatch(grid):
    u0 = random_band_limited(grid, j_lo=0, j_hi=2, seed=34)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.1, 9))
    idx = critical_index(3.0, 3.0)
    spec = SpaceTimeNormSpec(kind="chemin_lerner", besov=idx, rho=2.0)
    assert evaluate(traj, spec) == pytest.approx(
        chemin_lerner_norm(traj, idx, 2.0), rel=1e-12)


def test_embedding_chain(grid):
    u0 = random_band_limited(grid, j_lo=0, j_hi=2, seed=35)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.5, 17))
    out = embedding_chain_check(traj, 2.0, 3.0, math.inf,
                                critical_index(3.0, 3.0))
    assert out["ok"]


def test_kato_interpolation_constant_bounded(grid):
    u0 = random_band_limited(grid, j_lo=0, j_hi=2, seed=36)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.5, 33))
    c = kato_interpolation_constant(traj, 6.0)
    assert 0.0 < c < 10.0


def test_rescale_trajectory_invariance(grid):
    # the parabolic rescaling preserves the critical time-outside norm
    u0 = random_band_limited(grid, j_lo=0, j_hi=1, seed=37)
    traj = heat_trajectory(u0, np.linspace(0.0, 0.4, 17))
    idx = critical_index(3.0, 3.0)
    r = rescale_trajectory(traj, 1)
    a = lebesgue_besov_norm(traj, idx, math.inf)
    b = lebesgue_besov_norm(r, idx, math.inf)
    assert b == pytest.approx(a, rel=1e-6)
