"""Norms, total variation, coarsening and the entropy functional

    E[phi, alpha, q] = iint alpha(q) phi_t + beta(q) phi_x dx dt + int alpha(q0) phi(0, x) dx

evaluated on stored trajectories.  E >= 0 for every convex alpha and every
nonnegative test function characterizes the entropy solution of the local
law; a negative value flags a non-admissible discontinuity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .core_model import CellField, Grid1D
from .errors import (
    GridMismatch,
    IncompatibleFactor,
    InsufficientTrajectoryResolution,
    ValidationError,
)
from .local_reference import FluxFunction
from .results import RunResult

BETA_NODES = 4097
BETA_TOL = 1e-10


# ------------------------------------------------------------------ entropies


@dataclass(frozen=True)
class Quadratic:
    """alpha(u) = u^2 / 2."""

    name = "quadratic"

    def alpha(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def dalpha(self, u):
        return np.asarray(u, dtype=float) * 1.0

    def d2alpha(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def breakpoints(self) -> tuple:
        return ()


@dataclass(frozen=True)
class SmoothedKruzkov:
    """alpha(u) = sqrt((u - k)^2 + delta^2) - delta, a C^2 stand-in for |u - k|.

    E differs from the Kruzkov value by at most O(delta) times the bump scale.
    """

    k: float = 0.0
    delta: float = 1e-3
    name = "smoothed-kruzkov"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError("smoothing delta must be positive")

    def alpha(self, u):
        z = np.asarray(u, dtype=float) - self.k
        return np.sqrt(z * z + self.delta**2) - self.delta

    def dalpha(self, u):
        z = np.asarray(u, dtype=float) - self.k
        return z / np.sqrt(z * z + self.delta**2)

    def d2alpha(self, u):
        z = np.asarray(u, dtype=float) - self.k
        return self.delta**2 / (z * z + self.delta**2) ** 1.5

    def breakpoints(self) -> tuple:
        return tuple(self.k + self.delta * np.linspace(-20.0, 20.0, 81))


EntropyPair = Union[Quadratic, SmoothedKruzkov]


class EntropyFlux:
    """beta(u) = int_0^u alpha'(s) f'(s) ds on a working range.

    The integral is tabulated interval by interval with adaptive quadrature
    and interpolated by cubic Hermite splines that reuse the exact
    derivative alpha' f' at the nodes.
    """

    def __init__(self, pair, flux: FluxFunction, lo: float, hi: float, n: int = BETA_NODES):
        if not lo < 0 < hi:
            raise ValidationError("entropy flux range must contain 0")
        self.pair = pair
        self.flux = flux
        self.lo = float(lo)
        self.hi = float(hi)
        extra = [b for b in pair.breakpoints() if lo < b < hi]
        nodes = np.unique(np.concatenate((np.linspace(lo, hi, n), [0.0], extra)))
        integrand = self.derivative
        pieces = np.array([
            quad(lambda s: float(integrand(s)), a, b, epsabs=BETA_TOL * 1e-3, epsrel=BETA_TOL, limit=200)[0]
            for a, b in zip(nodes[:-1], nodes[1:])
        ])
        cum = np.concatenate(([0.0], np.cumsum(pieces)))
        cum -= cum[np.searchsorted(nodes, 0.0)]
        self.nodes = nodes
        self._spline = CubicHermiteSpline(nodes, cum, integrand(nodes))

    def derivative(self, u):
        return self.pair.dalpha(u) * self.flux.df(u)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.size and (u.min() < self.lo - 1e-12 or u.max() > self.hi + 1e-12):
            raise ValidationError(
                f"entropy flux evaluated outside [{self.lo}, {self.hi}]: [{u.min()}, {u.max()}]"
            )
        return self._spline(u)


# ------------------------------------------------------------------ test bumps


def _psi(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1, (1 - s * s) ** 2, 0.0)


def _dpsi(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1, -4 * s * (1 - s * s), 0.0)


@dataclass(frozen=True)
class TestBump:
    """phi(t, x) = psi((t - t0)/rt) psi((x - x0)/rx),  psi(s) = (1 - s^2)^2 on |s| < 1."""

    __test__ = False  # not a pytest class

    t0: float
    x0: float
    rt: float
    rx: float

    def __post_init__(self):
        if not (self.rt > 0 and self.rx > 0):
            raise ValidationError("bump radii must be positive")

    def phi(self, t, x):
        return _psi((np.asarray(t) - self.t0) / self.rt) * _psi((np.asarray(x) - self.x0) / self.rx)

    def phi_t(self, t, x):
        return _dpsi((np.asarray(t) - self.t0) / self.rt) / self.rt * _psi((np.asarray(x) - self.x0) / self.rx)

    def phi_x(self, t, x):
        return _psi((np.asarray(t) - self.t0) / self.rt) * _dpsi((np.asarray(x) - self.x0) / self.rx) / self.rx

    def scale(self) -> float:
        """iint |phi_t| + |phi_x| dx dt = (32/15)(rx + rt); bounds |E| / max(|alpha|, |beta|)."""
        return 32.0 / 15.0 * (self.rx + self.rt)

    @property
    def t_support(self) -> tuple:
        return (self.t0 - self.rt, self.t0 + self.rt)

    @property
    def x_support(self) -> tuple:
        return (self.x0 - self.rx, self.x0 + self.rx)


def bump_lattice(t_end: float, x_lo: float, x_hi: float, n_t: int = 3, n_x: int = 3) -> List[TestBump]:
    """3x3 family with radii (0.3 T, 0.3 (x_hi - x_lo)).

    Time centers run from 0.1 T to 0.7 T so that every support ends before
    t_end; space centers span [x_lo, x_hi].
    """
    rt = 0.3 * t_end
    rx = 0.3 * (x_hi - x_lo)
    t_centers = np.linspace(0.1 * t_end, t_end - rt - 1e-9 * t_end, n_t)
    x_centers = np.linspace(x_lo, x_hi, n_x)
    return [TestBump(float(t0), float(x0), rt, rx) for t0 in t_centers for x0 in x_centers]


# ------------------------------------------------------------ entropy functional


def time_weights(times: np.ndarray) -> np.ndarray:
    """Midpoint weights of the dual cells [mid(t_{k-1}, t_k), mid(t_k, t_{k+1})] clipped to [t_0, t_K]."""
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return np.zeros(1)
    mids = 0.5 * (times[1:] + times[:-1])
    edges = np.concatenate(([times[0]], mids, [times[-1]]))
    return np.diff(edges)


def entropy_functional(traj: RunResult, pair, bump: TestBump, flux: FluxFunction, beta: EntropyFlux = None) -> float:
    times = np.asarray(traj.retained_times)
    if times.size < 2:
        raise InsufficientTrajectoryResolution("trajectory retains fewer than two time levels")
    t_lo, t_hi = bump.t_support
    if t_hi > times[-1] * (1 + 1e-12):
        raise ValidationError(
            f"bump support reaches t={t_hi:g}, beyond the trajectory end t={times[-1]:g}"
        )
    covered = np.nonzero((times[1:] > t_lo) & (times[:-1] < t_hi))[0]
    if covered.size:
        gap = float(np.max(times[covered + 1] - times[covered]))
        if gap > bump.rt / 20 * (1 + 1e-9):
            raise InsufficientTrajectoryResolution(
                f"retained spacing {gap:g} exceeds rt/20 = {bump.rt / 20:g}; lower snapshot_stride"
            )
    if beta is None:
        sup = float(np.max(np.abs(traj.retained_q)))
        beta = EntropyFlux(pair, flux, -sup - 0.1, sup + 0.1)

    grid = traj.config.grid
    x = grid.centers
    x_lo, x_hi = bump.x_support
    cols = (x > x_lo) & (x < x_hi)
    xs = x[cols]
    weights = time_weights(times)
    rows = np.nonzero((times > t_lo) & (times < t_hi))[0]

    total = 0.0
    for k in rows:
        qk = traj.retained_q[k, cols]
        integrand = pair.alpha(qk) * bump.phi_t(times[k], xs) + beta(qk) * bump.phi_x(times[k], xs)
        total += weights[k] * float(np.sum(integrand))
    total *= grid.dx
    q0 = traj.retained_q[0, cols]
    total += float(np.sum(pair.alpha(q0) * bump.phi(times[0], xs))) * grid.dx
    return total


def entropy_audit(traj: RunResult, pair, bumps: Sequence[TestBump], flux: FluxFunction) -> np.ndarray:
    sup = float(np.max(np.abs(traj.retained_q)))
    beta = EntropyFlux(pair, flux, -sup - 0.1, sup + 0.1)
    return np.array([entropy_functional(traj, pair, b, flux, beta) for b in bumps])


# ----------------------------------------------------------------------- norms


def _same_grid(a: CellField, b: CellField) -> Grid1D:
    if a.grid != b.grid:
        raise GridMismatch(f"fields live on different grids: {a.grid} vs {b.grid}")
    return a.grid


def l1_distance(a: CellField, b: CellField, window: Iterable[float] = None) -> float:
    grid = _same_grid(a, b)
    diff = np.abs(a.values - b.values)
    if window is None:
        return float(diff.sum() * grid.dx)
    w_lo, w_hi = window
    if not w_lo < w_hi:
        raise ValidationError(f"empty window {window}")
    if w_lo < grid.x_min - 1e-12 or w_hi > grid.x_max + 1e-12:
        raise ValidationError(f"window {window} leaves the domain [{grid.x_min}, {grid.x_max}]")
    faces = grid.faces
    overlap = np.clip(np.minimum(faces[1:], w_hi) - np.maximum(faces[:-1], w_lo), 0.0, None)
    return float(np.sum(diff * overlap))


def total_variation(a: CellField) -> float:
    return float(np.abs(np.diff(a.values)).sum())


def coarsen(fine: CellField, factor: int) -> CellField:
    factor = int(factor)
    n = fine.grid.n_cells
    if factor < 1 or n % factor:
        raise IncompatibleFactor(f"cannot coarsen {n} cells by a factor {factor}")
    grid = Grid1D(fine.grid.x_min, fine.grid.x_max, n // factor)
    return CellField(grid, fine.values.reshape(-1, factor).mean(axis=1))
