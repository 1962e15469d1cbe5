"""Space-time norms over trajectories: Chemin-Lerner, the two-exponent
scaling-invariant family, and Kato norms.

Time integrals use the composite trapezoid rule on the trajectory's own
grid; suprema are maxima over sampled times.  Singular weights t^a with
a < 0 are evaluated from the first positive sample onward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GridError
from .field import SpectralField, lp_norm, scaling_transform
from .grid import GridSpec, shell_multipliers
from .littlewood_paley import BesovIndex, besov_from_blocks, besov_norm
import scipy.fft as sfft

_WORKERS = -1


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled spectral field: coeffs[i] are the coefficients at times[i]."""

    grid: GridSpec
    times: np.ndarray  # (nt,), strictly increasing, times[0] == 0 typically
    coeffs: np.ndarray  # (nt, 3, N, N, N) complex128
    divergence_free: bool = False

    def __post_init__(self):
        n = self.grid.n_points
        nt = len(self.times)
        if self.coeffs.shape != (nt, 3, n, n, n):
            raise GridError("trajectory array shape mismatches grid/times")
        if nt >= 2 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def n_times(self) -> int:
        return len(self.times)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def snapshot(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[i], self.divergence_free)

    def snapshots(self):
        return [self.snapshot(i) for i in range(self.n_times)]

    def __add__(self, other: "Trajectory") -> "Trajectory":
        _check_compatible(self, other)
        return Trajectory(self.grid, self.times, self.coeffs + other.coeffs,
                          self.divergence_free and other.divergence_free)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        _check_compatible(self, other)
        return Trajectory(self.grid, self.times, self.coeffs - other.coeffs,
                          self.divergence_free and other.divergence_free)

    def __mul__(self, alpha: float) -> "Trajectory":
        return Trajectory(self.grid, self.times, self.coeffs * alpha,
                          self.divergence_free)

    __rmul__ = __mul__


def _check_compatible(a: Trajectory, b: Trajectory):
    if a.grid != b.grid:
        raise GridError("trajectories live on different grids")
    if a.n_times != b.n_times or not np.allclose(a.times, b.times):
        raise ValueError("trajectories have different time grids")


def from_fields(times, fields: list[SpectralField]) -> Trajectory:
    times = np.asarray(times, dtype=float)
    if len(fields) != len(times):
        raise ValueError("times and snapshots differ in length")
    grid = fields[0].grid
    coeffs = np.stack([f.coeffs for f in fields])
    return Trajectory(grid, times, coeffs, all(f.divergence_free for f in fields))


def constant_trajectory(u: SpectralField, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    coeffs = np.broadcast_to(u.coeffs, (len(times),) + u.coeffs.shape).copy()
    return Trajectory(u.grid, times, coeffs, u.divergence_free)


def rescale_trajectory(traj: Trajectory, m: int) -> Trajectory:
    """u_lambda(t, x) = lambda u(lambda^2 t, lambda x), lambda = 2^m.

    Spatial part via `scaling_transform` (period shrinks), time nodes
    divided by lambda^2 so the sampled history is the same.
    """
    lam = 2.0**m
    fields = [scaling_transform(traj.snapshot(i), m) for i in range(traj.n_times)]
    return from_fields(traj.times / lam**2, fields)


@dataclass(frozen=True)
class SpaceTimeNormSpec:
    """kind in {lebesgue, chemin_lerner, script, kato, kato1}."""

    kind: str
    besov: BesovIndex
    rho: float = math.inf  # time exponent (lebesgue / chemin_lerner)
    a: float = 1.0  # script family endpoints
    b: float = math.inf
    t1: float = 0.0
    t2: float = math.inf

    def __post_init__(self):
        if self.kind not in {"lebesgue", "chemin_lerner", "script", "kato", "kato1"}:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.rho < 1:
            raise ValueError("time exponent must be >= 1")
        if self.a > self.b:
            raise ValueError("script norm requires a <= b")


# -- block norm matrix -----------------------------------------------------

def block_norm_matrix(traj: Trajectory, p: float) -> np.ndarray:
    """||Delta_j u(t_i)||_{L^p} as an (n_times, n_shells) array."""
    grid = traj.grid
    deltas = shell_multipliers(grid)
    out = np.empty((traj.n_times, grid.n_shells))
    for i in range(traj.n_times):
        for jj in range(grid.n_shells):
            block = traj.coeffs[i] * deltas[jj]
            phys = np.real(sfft.ifftn(block, axes=(1, 2, 3), norm="forward",
                                      workers=_WORKERS))
            out[i, jj] = lp_norm(phys, grid, p)
    return out


def _window(traj: Trajectory, t1: float, t2: float) -> np.ndarray:
    t2 = min(t2, traj.t_final)
    if t1 < traj.times[0] - 1e-15 or t2 > traj.t_final + 1e-15 or t1 >= t2:
        raise ValueError(f"window [{t1}, {t2}] outside trajectory range")
    return (traj.times >= t1 - 1e-15) & (traj.times <= t2 + 1e-15)


def _time_lr(values: np.ndarray, times: np.ndarray, rho: float) -> float:
    """L^rho norm in time of a sampled scalar function (trapezoid / max)."""
    if math.isinf(rho):
        return float(np.max(values))
    return float(np.trapezoid(values**rho, times) ** (1.0 / rho))


# -- the norms -------------------------------------------------------------

def chemin_lerner_norm(
    traj: Trajectory, idx: BesovIndex, rho: float,
    t1: float = 0.0, t2: float = math.inf,
) -> float:
    """|| 2^{js} ||Delta_j u||_{L^rho([t1,t2]; L^p)} ||_{l^q}."""
    sel = _window(traj, t1, t2)
    mat = block_norm_matrix(traj, idx.p)[sel]
    times = traj.times[sel]
    per_block = np.array([_time_lr(mat[:, jj], times, rho)
                          for jj in range(mat.shape[1])])
    return besov_from_blocks(per_block, traj.grid, idx)


def lebesgue_besov_norm(
    traj: Trajectory, idx: BesovIndex, rho: float,
    t1: float = 0.0, t2: float = math.inf,
) -> float:
    """|| ||u(t)||_{B^s_{p,q}} ||_{L^rho([t1,t2])} (time norm outside)."""
    sel = _window(traj, t1, t2)
    mat = block_norm_matrix(traj, idx.p)[sel]
    vals = np.array([besov_from_blocks(mat[i], traj.grid, idx)
                     for i in range(mat.shape[0])])
    return _time_lr(vals, traj.times[sel], rho)


def chemin_lerner_from_matrix(
    mat: np.ndarray, times: np.ndarray, grid: GridSpec, idx: BesovIndex,
    rho: float,
) -> float:
    """Chemin-Lerner norm from a precomputed block-norm matrix slice."""
    per_block = np.array([_time_lr(mat[:, jj], times, rho)
                          for jj in range(mat.shape[1])])
    return besov_from_blocks(per_block, grid, idx)


def script_from_matrix(
    mat: np.ndarray, times: np.ndarray, grid: GridSpec,
    a: float, b: float, p: float, q: float | None = None,
) -> float:
    q = p if q is None else q
    sp = -1.0 + 3.0 / p
    vals = []
    for r in {a, b}:
        s = sp + (0.0 if math.isinf(r) else 2.0 / r)
        vals.append(chemin_lerner_from_matrix(mat, times, grid,
                                              BesovIndex(s, p, q), r))
    return max(vals)


def script_norm(
    traj: Trajectory, a: float, b: float, p: float, q: float | None = None,
    T: float = math.inf,
) -> float:
    """The two-exponent scaling-invariant family on [0, T].

    Realized as the max of the Chemin-Lerner endpoint norms at exponents
    r in {a, b} with regularity s_p + 2/r each; interior exponents
    interpolate between the endpoints.
    """
    if a > b:
        raise ValueError("script norm requires a <= b")
    sel = _window(traj, 0.0, T)
    mat = block_norm_matrix(traj, p)[sel]
    return script_from_matrix(mat, traj.times[sel], traj.grid, a, b, p, q)


def kato_norm(traj: Trajectory, q: float, T: float = math.inf, order: int = 0) -> float:
    """Kato norms on (0, T]: order 0 is sup t^{-s_q/2} ||u(t)||_{L^q},
    order 1 is sup t^{1/2 - s_q/2} ||u(t)||_{B^1_{q,inf}}.

    The sup runs over sampled times t > 0 only.
    """
    if q <= 3:
        raise ValueError("Kato norms require q > 3")
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    sq = -1.0 + 3.0 / q
    power = -sq / 2.0 + (0.5 if order == 1 else 0.0)
    best = 0.0
    idx1 = BesovIndex(1.0, q, math.inf)
    for i in range(traj.n_times):
        t = float(traj.times[i])
        if t <= 0.0 or t > T + 1e-15:
            continue
        u = traj.snapshot(i)
        val = besov_norm(u, idx1) if order == 1 else u.lp(q)
        best = max(best, t**power * val)
    return best


def evaluate(traj: Trajectory, spec: SpaceTimeNormSpec) -> float:
    """Dispatch a SpaceTimeNormSpec to the matching norm."""
    if spec.kind == "lebesgue":
        return lebesgue_besov_norm(traj, spec.besov, spec.rho, spec.t1, spec.t2)
    if spec.kind == "chemin_lerner":
        return chemin_lerner_norm(traj, spec.besov, spec.rho, spec.t1, spec.t2)
    if spec.kind == "script":
        return script_norm(traj, spec.a, spec.b, spec.besov.p, spec.besov.q, spec.t2)
    if spec.kind == "kato":
        return kato_norm(traj, spec.besov.p, spec.t2, order=0)
    return kato_norm(traj, spec.besov.p, spec.t2, order=1)


def report_row(traj: Trajectory, spec: SpaceTimeNormSpec) -> str:
    """One CSV row: norm_kind, a, b, s, p, q, t1, t2, value."""
    value = evaluate(traj, spec)
    t2 = min(spec.t2, traj.t_final)
    if spec.kind in ("lebesgue", "chemin_lerner"):
        a, b = spec.rho, ""
    elif spec.kind == "script":
        a, b = spec.a, spec.b
    else:
        a, b = "", ""
    cells = [spec.kind, a, b, spec.besov.s, spec.besov.p, spec.besov.q,
             spec.t1, t2, value]
    return ",".join(str(c) for c in cells)


REPORT_HEADER = "norm_kind,a,b,s,p,q,t1,t2,value"


# -- structural checks -----------------------------------------------------

def embedding_chain_check(
    traj: Trajectory, rho1: float, q: float, rho2: float, idx: BesovIndex,
    t1: float = 0.0, t2: float = math.inf,
) -> dict:
    """Embedding chain between time-inside and time-outside Besov norms.

    For rho1 <= q <= rho2 (q is the Besov third index), Minkowski gives
    CL^{rho1} <= Leb^{rho1} and Leb^{rho2} <= CL^{rho2}, and Hoelder on
    the finite window gives CL^{rho1} <= T^{1/rho1-1/rho2} CL^{rho2}.
    Returns the four values, the Hoelder factor, and a pass flag with
    1e-9 slack.
    """
    if not (1 <= rho1 <= q <= rho2):
        raise ValueError("embedding chain requires 1 <= rho1 <= q <= rho2")
    idx = replace(idx, q=q)
    leb1 = lebesgue_besov_norm(traj, idx, rho1, t1, t2)
    cl1 = chemin_lerner_norm(traj, idx, rho1, t1, t2)
    cl2 = chemin_lerner_norm(traj, idx, rho2, t1, t2)
    leb2 = lebesgue_besov_norm(traj, idx, rho2, t1, t2)
    T = min(t2, traj.t_final) - t1
    inv_gap = (1.0 / rho1 if not math.isinf(rho1) else 0.0) - (
        1.0 / rho2 if not math.isinf(rho2) else 0.0)
    holder = T**inv_gap
    slack = 1e-9
    ok = (
        cl1 <= leb1 * (1 + slack) + slack
        and cl1 <= holder * cl2 * (1 + slack) + slack
        and leb2 <= cl2 * (1 + slack) + slack
    )
    return {
        "lebesgue_rho1": leb1, "chemin_lerner_rho1": cl1,
        "chemin_lerner_rho2": cl2, "lebesgue_rho2": leb2,
        "holder_factor": holder, "ok": bool(ok),
    }


def kato_interpolation_constant(traj: Trajectory, p: float, T: float = math.inf) -> float:
    """C with ||f||_K_p <= C ||f||_{L^inf B^{s_p}_{p,inf}}^{p/(2p-3)}
    ||f||_{K1_p}^{(p-3)/(2p-3)}; returns the observed ratio."""
    if p <= 3:
        raise ValueError("requires p > 3")
    sp = -1.0 + 3.0 / p
    kato = kato_norm(traj, p, T, order=0)
    kato1 = kato_norm(traj, p, T, order=1)
    linf = lebesgue_besov_norm(traj, BesovIndex(sp, p, math.inf), math.inf,
                               0.0, T)
    th1 = p / (2.0 * p - 3.0)
    th2 = (p - 3.0) / (2.0 * p - 3.0)
    denom = linf**th1 * kato1**th2
    return kato / denom if denom > 0 else 0.0
