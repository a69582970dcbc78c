"""Godunov finite volumes for the local law  q_t + (q V(|q|))_x = 0.

The numerical flux is the exact Riemann flux: min of f over [a, b] when
a <= b, max over [b, a] otherwise.  Nothing assumes convexity or
monotonicity of f, so Power and Tabulated velocity laws go through the
same path as Identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .core_model import CellField, SimConfig, VelocityModel, sample_datum
from .errors import CflViolation, MaxPrincipleViolation
from .results import Recorder, RunResult, TIME_EPS, next_target

DENSE_SAMPLES = 2**10
GOLDEN_WIDTH = 1e-12
RANGE_PAD = 0.1
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FluxFunction:
    f: Callable
    df: Callable
    name: str = "custom"

    @classmethod
    def for_velocity(cls, velocity: VelocityModel) -> "FluxFunction":
        def f(u):
            u = np.asarray(u, dtype=float)
            return u * velocity(np.abs(u))

        def df(u):
            a = np.abs(np.asarray(u, dtype=float))
            return velocity(a) + a * velocity.derivative(a)

        return cls(f, df, f"u*V(|u|), V={velocity.name}")

    def __call__(self, u):
        return self.f(u)


def _golden_min(g, lo, hi, width=GOLDEN_WIDTH):
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    gc, gd = g(c), g(d)
    while hi - lo > width:
        if gc <= gd:
            hi, d, gd = d, c, gc
            c = hi - _INVPHI * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + _INVPHI * (hi - lo)
            gd = g(d)
    x = 0.5 * (lo + hi)
    return min(gc, gd, g(x))


def godunov_flux(a: float, b: float, flux: FluxFunction) -> float:
    a = float(a)
    b = float(b)
    if a == b:
        return float(flux(a))
    sign = 1.0 if a < b else -1.0
    lo, hi = min(a, b), max(a, b)

    def g(u):
        return sign * float(flux(u))

    u = np.linspace(lo, hi, DENSE_SAMPLES)
    vals = sign * np.asarray(flux(u), dtype=float)
    k = int(np.argmin(vals))
    best = float(vals[k])
    if 0 < k < u.size - 1:
        best = min(best, _golden_min(g, float(u[k - 1]), float(u[k + 1])))
    return sign * best


def flux_critical_points(flux: FluxFunction, lo: float, hi: float, n: int = 4096) -> np.ndarray:
    """Interior points of [lo, hi] where f' changes sign (candidate extrema)."""
    u = np.linspace(lo, hi, n)
    d = np.asarray(flux.df(u), dtype=float)
    roots = []
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        roots.append(brentq(flux.df, u[i], u[i + 1], xtol=1e-15))
    # a zero sample with a sign change across it
    for i in np.nonzero(d[1:-1] == 0)[0] + 1:
        left = d[:i][d[:i] != 0]
        right = d[i + 1:][d[i + 1:] != 0]
        if left.size and right.size and np.sign(left[-1]) != np.sign(right[0]):
            roots.append(u[i])
    return np.unique(np.asarray(roots, dtype=float))


def godunov_flux_array(a: np.ndarray, b: np.ndarray, flux: FluxFunction, critical: np.ndarray) -> np.ndarray:
    """Vectorized exact Riemann flux given the critical points of f on the working range."""
    fa = np.asarray(flux(a), dtype=float)
    fb = np.asarray(flux(b), dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    fmin = np.minimum(fa, fb)
    fmax = np.maximum(fa, fb)
    for c in critical:
        fc = float(flux(c))
        inside = (lo <= c) & (c <= hi)
        fmin = np.where(inside, np.minimum(fmin, fc), fmin)
        fmax = np.where(inside, np.maximum(fmax, fc), fmax)
    return np.where(a <= b, fmin, fmax)


def working_range(sup: float) -> tuple:
    return (-sup - RANGE_PAD, sup + RANGE_PAD)


def max_wave_speed(flux: FluxFunction, lo: float, hi: float, n: int = 4096) -> float:
    return float(np.max(np.abs(flux.df(np.linspace(lo, hi, n)))))


def run_local(config: SimConfig, retain: bool = True, check_invariants: bool = True) -> RunResult:
    """Godunov run of the local law; any kernel on ``config`` is ignored."""
    grid = config.grid
    dx = grid.dx
    flux = FluxFunction.for_velocity(config.velocity)
    q = sample_datum(config.datum, grid).values.copy()
    sup0 = float(np.max(np.abs(q)))
    lo, hi = working_range(config.datum.sup_norm())
    critical = flux_critical_points(flux, lo, hi)
    speed = max(1e-14, max_wave_speed(flux, lo, hi))
    dt_cfl = config.cfl * dx / speed
    bound = sup0 + 1e-12

    rec = Recorder(config, "local", retain=retain)
    rec.observe(0.0, 0, q, None, final=config.t_end == 0)
    t = 0.0
    step = 0
    while t < config.t_end:
        target = next_target(config, t)
        dt = dt_cfl
        if t + dt >= target - TIME_EPS * max(1.0, target):
            dt = target - t
            t_new = target
        else:
            t_new = t + dt
        if dt * speed / dx > 1.0 + 1e-12:
            raise CflViolation(f"CFL number {dt * speed / dx:.6g} exceeds 1 at t={t:g}")
        padded = np.concatenate(([0.0], q, [0.0]))
        fluxes = godunov_flux_array(padded[:-1], padded[1:], flux, critical)
        q = q - (dt / dx) * np.diff(fluxes)
        t = t_new
        step += 1
        if check_invariants:
            sup = float(np.max(np.abs(q)))
            if sup > bound:
                raise MaxPrincipleViolation(f"max|q|={sup:.17g} exceeds {bound:.17g} at t={t:g}")
        rec.observe(t, step, q, None, final=t >= config.t_end)
    return rec.finish(q, None, step)

