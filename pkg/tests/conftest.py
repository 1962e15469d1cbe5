"""Shared fixtures: small grids and seeded divergence-free data.

Session scope keeps the FFT-heavy setups (Picard solves, 64^3 grids)
to one evaluation per run.
"""
import numpy as np
import pytest

from bnslab.field import random_band_limited
from bnslab.grid import GridSpec
from bnslab.solver import SolverConfig, picard_solve


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64)


@pytest.fixture(scope="session")
def u_small(grid32):
    """Small-amplitude band-limited divergence-free datum."""
    return random_band_limited(grid32, j_lo=0, j_hi=2, seed=7, amplitude=0.05)


@pytest.fixture(scope="session")
def u_moderate(grid32):
    return random_band_limited(grid32, j_lo=0, j_hi=2, seed=11, amplitude=0.4)


@pytest.fixture(scope="session")
def solved_small(u_small):
    """A converged mild solution reused across solver/expansion tests."""
    cfg = SolverConfig(dt=0.01, n_steps=16)
    traj, report = picard_solve(u_small, cfg)
    assert report.classification != "picard_diverged"
    return traj, report, cfg


def rng_fields(grid, count, j_lo=0, j_hi=2, amplitude=0.1, seed0=100):
    return [random_band_limited(grid, j_lo=j_lo, j_hi=j_hi,
                                seed=seed0 + i, amplitude=amplitude)
            for i in range(count)]
