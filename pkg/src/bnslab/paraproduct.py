"""Bony decomposition and empirical product/heat/bilinear estimates.

The product of two fields splits as fg = T_f g + T_g f + R(f, g), where
T_f g collects interactions of low frequencies of f against high
frequencies of g and R keeps the nearly-diagonal pairs.  We build the
split from the extended block list (resolved shells plus the two trimmed
tails), so the three pieces partition all block pairs and reconstruction
is exact by telescoping: pairs with j' <= j - 2 go to T_f g, pairs with
j <= j' - 2 to T_g f, and |j - j'| <= 1 to R.

Products are formed pointwise per component: for vector fields the
"product" here is the componentwise array f_c g_c, which is what the
product laws control component by component.

The module also houses the empirical estimate checks: Besov product
laws (constants recorded, never asserted against the inexplicit ones),
heat-flow characterization of negative-regularity Besov norms, per-block
heat decay rates, and the bilinear bound in Kato-type spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .field import SpectralField, from_physical, lp_norm
from .grid import GridSpec, TWO_PI, dealias_mask, low_pass_multipliers, shell_multipliers
from .littlewood_paley import BesovIndex, besov_norm, block_lp_norms, lp_decompose
from .solver import bilinear_B
from .spacetime import Trajectory, kato_norm


@dataclass(frozen=True)
class BonyTriple:
    """The three pieces of the Bony splitting of a pointwise product."""

    low_high: SpectralField   # T_f g
    high_low: SpectralField   # T_g f
    high_high: SpectralField  # R(f, g)

    def reconstruct(self) -> SpectralField:
        return self.low_high + self.high_low + self.high_high


def _extended_blocks_physical(u: SpectralField) -> list[np.ndarray]:
    """Physical-space blocks [low tail, Delta_{j_min..j_max}, high tail]."""
    bs = lp_decompose(u)
    out = [bs.low_tail.physical()]
    out.extend(b.physical() for b in bs.blocks)
    out.append(bs.high_tail.physical())
    return out


def bony_decompose(f: SpectralField, g: SpectralField,
                   apply_dealias: bool = True) -> BonyTriple:
    """Split the pointwise product fg into T_f g + T_g f + R(f, g)."""
    if f.grid != g.grid:
        raise GridError("bony_decompose needs a shared grid")
    grid = f.grid
    fb = _extended_blocks_physical(f)
    gb = _extended_blocks_physical(g)
    nb = len(fb)
    # extended positions: the trimmed tails sit two rungs past the resolved
    # range, so a pure low tail (e.g. a constant) pairs into T against every
    # block rather than into the diagonal part
    pos = [grid.j_min - 2] + list(grid.shells) + [grid.j_max + 2]
    t_fg = np.zeros_like(fb[0])
    t_gf = np.zeros_like(fb[0])
    rem = np.zeros_like(fb[0])
    for i in range(nb):
        for ip in range(nb):
            d = pos[ip] - pos[i]
            piece = fb[ip] * gb[i]
            if d <= -2:
                t_fg += piece
            elif d >= 2:
                t_gf += piece
            else:
                rem += piece
    pieces = []
    for arr in (t_fg, t_gf, rem):
        fld = from_physical(grid, arr)
        if apply_dealias:
            fld = SpectralField(grid, fld.coeffs * dealias_mask(grid),
                                divergence_free=False)
        pieces.append(fld)
    return BonyTriple(*pieces)


def bony_reconstruction_defect(f: SpectralField, g: SpectralField) -> float:
    """Relative coefficient-space error of the telescoping identity."""
    grid = f.grid
    tri = bony_decompose(f, g, apply_dealias=True)
    prod = from_physical(grid, f.physical() * g.physical())
    prod = SpectralField(grid, prod.coeffs * dealias_mask(grid),
                         divergence_free=False)
    diff = tri.reconstruct() - prod
    top = prod.sup_coeff()
    return diff.sup_coeff() / top if top > 0 else diff.sup_coeff()


def paraproduct_support_defect(f: SpectralField, g: SpectralField) -> float:
    """Largest coefficient of any T_f g block-j contribution outside its
    frequency envelope |n| <= 5 * 2^j (low-pass support 2^j plus block
    support 2^{j+2}), relative to the overall sup coefficient."""
    grid = f.grid
    fb = _extended_blocks_physical(f)
    gb_fields = lp_decompose(g)
    f_prefix = np.cumsum(np.stack(fb), axis=0)
    nsq = _mode_magnitude(grid)
    worst = 0.0
    top = 0.0
    for i, j in enumerate(grid.shells):
        # extended index of shell j is i + 1; T pairs use f blocks <= i - 1
        if i + 1 < 2:
            continue
        piece = from_physical(grid, f_prefix[i - 1] * gb_fields.blocks[i].physical())
        top = max(top, piece.sup_coeff())
        outside = nsq > 5.0 * 2.0**j
        if np.any(outside):
            worst = max(worst, float(np.max(np.abs(piece.coeffs[:, outside]))))
    return worst / top if top > 0 else worst


def _mode_magnitude(grid: GridSpec) -> np.ndarray:
    n = grid.n_points
    idx = np.fft.fftfreq(n, 1.0 / n).astype(int)
    return np.sqrt(
        idx[:, None, None] ** 2 + idx[None, :, None] ** 2 + idx[None, None, :] ** 2
    )


# -- product laws --------------------------------------------------------------

def product_estimate_check(
    f: SpectralField,
    g: SpectralField,
    s1: float,
    t1: float,
    p: float,
    p2: float,
) -> dict:
    """Empirical constants for the two Besov product laws.

    T-law (needs s1 < 0):   ||T_f g||_{B^{s1+t1}_{pbar,inf}} vs
    ||f||_{B^{s1}_{p,inf}} ||g||_{B^{t1}_{p2,inf}} with 1/pbar = 1/p + 1/p2.
    R-law (needs s1+t1 > 0): same exponent arithmetic on the diagonal part.
    Constants are reported, not asserted; the cutoff fixes them.
    """
    if s1 >= 0:
        raise ValueError("the paraproduct law needs s1 < 0")
    inv_pbar = 1.0 / p + 1.0 / p2
    if inv_pbar > 1.0:
        raise ValueError("exponent arithmetic needs 1/p + 1/p2 <= 1")
    pbar = 1.0 / inv_pbar
    tri = bony_decompose(f, g)
    nf = besov_norm(f, BesovIndex(s1, p, math.inf))
    ng = besov_norm(g, BesovIndex(t1, p2, math.inf))
    lhs_t = besov_norm(tri.low_high, BesovIndex(s1 + t1, pbar, math.inf))
    out = {
        "s1": s1, "t1": t1, "p": p, "p2": p2, "pbar": pbar,
        "t_lhs": lhs_t, "rhs": nf * ng,
        "t_constant": lhs_t / (nf * ng) if nf * ng > 0 else 0.0,
    }
    if s1 + t1 > 0:
        lhs_r = besov_norm(tri.high_high, BesovIndex(s1 + t1, pbar, math.inf))
        out["r_lhs"] = lhs_r
        out["r_constant"] = lhs_r / (nf * ng) if nf * ng > 0 else 0.0
    return out


PRODUCT_REPORT_HEADER = "check_id,s1,t1,p,p2,lhs,rhs,ratio"


def product_report_rows(reports: list[dict]) -> list[str]:
    rows = []
    for i, r in enumerate(reports):
        rows.append(f"T{i},{r['s1']},{r['t1']},{r['p']},{r['p2']},"
                    f"{r['t_lhs']:.6e},{r['rhs']:.6e},{r['t_constant']:.6e}")
        if "r_lhs" in r:
            rows.append(f"R{i},{r['s1']},{r['t1']},{r['p']},{r['p2']},"
                        f"{r['r_lhs']:.6e},{r['rhs']:.6e},{r['r_constant']:.6e}")
    return rows


# -- heat flow characterization -------------------------------------------------

def heat_characterization_norm(
    u: SpectralField, idx: BesovIndex, t_grid: np.ndarray | None = None
) -> float:
    """sup_t t^{-s/2} ||e^{t Laplace} u||_{L^p}: the heat-flow formulation
    of a negative-regularity Besov norm (s < 0 required)."""
    from .field import heat_flow

    if idx.s >= 0:
        raise ValueError("heat characterization needs s < 0")
    grid = u.grid
    if t_grid is None:
        # cover the dyadic times matched to every resolved shell
        k0 = (TWO_PI / grid.period) * 2.0 ** grid.j_min
        k1 = (TWO_PI / grid.period) * 2.0 ** (grid.j_max + 2)
        t_grid = np.geomspace(0.05 / k1**2, 4.0 / k0**2, 48)
    best = 0.0
    for t in t_grid:
        val = t ** (-idx.s / 2.0) * heat_flow(u, t).lp(idx.p)
        best = max(best, val)
    return best


def heat_block_decay_rates(
    u: SpectralField, n_times: int = 12
) -> list[tuple[int, float, float]]:
    """Fitted exponential decay rate per shell under the heat flow.

    Returns (j, fitted_rate, reference_rate) triples.  The reference is
    the squared physical wavenumber of the shell's nominal frequency
    2^{j+1} (the center of the integer band the cutoff assigns to shell
    j); the fitted rate interpolates between the energy-weighted mean at
    early times and the support edge at late times, and stays within a
    bounded factor of the nominal rate for any block content.
    """
    from .field import heat_flow

    grid = u.grid
    k_unit = TWO_PI / grid.period
    out = []
    for i, j in enumerate(grid.shells):
        block = lp_decompose(u).blocks[i]
        if block.l2() == 0.0:
            continue
        k_ref = k_unit * 2.0 ** (j + 1)
        ts = np.linspace(0.0, 1.0 / k_ref**2, n_times)
        vals = np.array([heat_flow(block, t).l2() for t in ts])
        good = vals > 0
        slope = np.polyfit(ts[good], np.log(vals[good]), 1)[0]
        out.append((j, -float(slope), float(k_ref**2)))
    return out


# -- bilinear Kato bound ---------------------------------------------------------

def bilinear_kato_check(
    f: Trajectory,
    g: Trajectory,
    p: float,
    q: float,
    r: float,
    T: float = math.inf,
) -> dict:
    """Empirical constant for ||B(f,g)||_{K_r(T)} against the bound
    c [ (1/p + 1/q)^{-1} + (1/3 + 1/r - 1/p - 1/q)^{-1} ]
      ||f||_{K_p(T)} ||g||_{K_q(T)}."""
    inv = 1.0 / p + 1.0 / q
    if not (0.0 < inv < 1.0 / 3.0 + 1.0 / r):
        raise ValueError("exponent window violated: need 0 < 1/p + 1/q < 1/3 + 1/r")
    if not (1.0 / r <= inv <= 1.0):
        raise ValueError("exponent window violated: need 1/r <= 1/p + 1/q <= 1")
    b = bilinear_B(f, g)
    lhs = kato_norm(b, r, T)
    nf = kato_norm(f, p, T)
    ng = kato_norm(g, q, T)
    factor = 1.0 / inv + 1.0 / (1.0 / 3.0 + 1.0 / r - inv)
    rhs = factor * nf * ng
    return {
        "p": p, "q": q, "r": r, "lhs": lhs, "factor": factor,
        "f_norm": nf, "g_norm": ng,
        "constant": lhs / rhs if rhs > 0 else 0.0,
    }
