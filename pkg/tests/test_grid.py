"""Grid, cutoffs and masks.

Oracles: the partition of unity is checked pointwise against 1 on the
resolved band; shell supports are checked against the annulus bounds
implied by the cutoff's support; the dealias mask against the radius
rule it encodes.
"""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bnslab.grid import (GridSpec, dealias_mask, low_pass_multipliers,
                         radial_cutoff, shell_multipliers, wavenumber_sq,
                         wavevectors)


def test_rejects_bad_sizes():
    # non-powers of two, and sizes too small to carry four shells
    for n in (0, 17, 24, 8, 16):
        with pytest.raises(ValueError):
            GridSpec(n)


def test_shell_range_32():
    g = GridSpec(32)
    assert list(g.shells) == [0, 1, 2, 3]


def test_shell_range_doubles_with_resolution():
    assert len(GridSpec(64).shells) == len(GridSpec(32).shells) + 1


@given(st.floats(min_value=0.0, max_value=100.0))
def test_radial_cutoff_range(r):
    v = float(radial_cutoff(np.array([r]))[0])
    assert 0.0 <= v <= 1.0


def test_cutoff_profile():
    # low-pass profile: 1 near the origin, 0 beyond twice the knee,
    # nonincreasing in between
    r = np.linspace(0.0, 3.0, 301)
    v = radial_cutoff(r)
    assert v[0] == 1.0
    assert np.all(v[r >= 2.0] == 0.0)
    assert np.all(np.diff(v) <= 1e-12)


def test_partition_of_unity_on_resolved_band():
    g = GridSpec(32)
    k = np.sqrt(wavenumber_sq(g))
    total = low_pass_multipliers(g)[0].copy()
    for m in shell_multipliers(g):
        total = total + m
    _, hi = g.resolved_band
    band = k <= hi
    assert np.max(np.abs(total[band] - 1.0)) < 1e-12


def test_shells_cover_disjoint_annuli_up_to_overlap():
    g = GridSpec(32)
    mults = shell_multipliers(g)
    # adjacent shells overlap; shells two apart never do
    for i in range(len(mults)):
        for j in range(i + 2, len(mults)):
            assert np.max(mults[i] * mults[j]) == 0.0


def test_dealias_mask_radius():
    g = GridSpec(32)
    k = np.sqrt(wavenumber_sq(g)) / (2.0 * math.pi / g.period)
    mask = dealias_mask(g)
    assert np.all(k[mask] < g.n_points / 3.0)
    assert np.all(k[~mask] >= g.n_points / 3.0)


def test_wavevectors_shape_and_symmetry():
    g = GridSpec(32)
    kv = wavevectors(g)
    assert kv.shape == (3, 32, 32, 32)
    # k and -k both present for every non-Nyquist mode
    assert kv[0, 1, 0, 0] == -kv[0, -1, 0, 0]
