"""Grids, cell fields, kernels, velocity laws, initial data and run configuration.

Everything here is immutable once constructed.  Arrays held by the
dataclasses are copied and flagged read-only so that a field can be shared
between runs (or threads) without defensive copies.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InvalidGrid, NonMonotoneVelocity, ValidationError

KAPPA_SLACK = 0.05
MONOTONE_LATTICE = 1000
DEFAULT_CFL = 0.5


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------- grid


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidGrid("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InvalidGrid(f"x_min={self.x_min} must be < x_max={self.x_max}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise InvalidGrid(f"n_cells={self.n_cells} must be an integer >= 2")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        """All n_cells + 1 face coordinates, leftmost boundary first."""
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    def refined(self, factor: int) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_cells * int(factor))


def build_grid(x_min: float, x_max: float, n_cells: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), n_cells)


@dataclass(frozen=True, eq=False)
class CellField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.shape != (self.grid.n_cells,):
            raise ValidationError(
                f"cell field has shape {values.shape}, grid needs ({self.grid.n_cells},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("cell field contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "CellField":
        return cls(grid, np.zeros(grid.n_cells))

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.grid.dx)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


# ------------------------------------------------------------------------ kernels


@dataclass(frozen=True)
class ExponentialKernel:
    """gamma(s) = exp(s / eta) / eta for s <= 0."""

    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValidationError(f"kernel eta must be a positive real, got {self.eta}")

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 0, np.exp(np.minimum(s, 0.0) / self.eta) / self.eta, 0.0)


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """Piecewise-linear kernel on [-support_length, 0].

    ``samples[j]`` is the kernel value at ``s_j = -support_length + j*h`` with
    ``h = support_length / (len(samples) - 1)``; the samples are rescaled at
    construction so that the trapezoidal mass is exactly one.
    """

    support_length: float
    samples: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.support_length) and self.support_length > 0):
            raise ValidationError("kernel support_length must be a positive real")
        g = np.array(self.samples, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise ValidationError("tabulated kernel needs at least two samples")
        if not np.all(np.isfinite(g)):
            raise ValidationError("tabulated kernel samples must be finite")
        if np.any(g < 0):
            raise ValidationError("tabulated kernel samples must be nonnegative")
        h = self.support_length / (g.size - 1)
        mass = h * (g.sum() - 0.5 * (g[0] + g[-1]))
        if not mass > 0:
            raise ValidationError("tabulated kernel has zero mass")
        object.__setattr__(self, "samples", _frozen_array(g / mass))

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.support_length, 0.0, self.samples.size)

    @property
    def spacing(self) -> float:
        return self.support_length / (self.samples.size - 1)

    def mass(self) -> float:
        g = self.samples
        return float(self.spacing * (g.sum() - 0.5 * (g[0] + g[-1])))

    def total_variation(self) -> float:
        g = self.samples
        # zero outside the support, so the end values count as jumps
        return float(np.abs(np.diff(g)).sum() + g[0] + g[-1])

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= -self.support_length) & (s <= 0)
        return np.where(inside, np.interp(s, self.nodes, self.samples), 0.0)

    def cumulative(self, s):
        """Exact integral of the kernel from -support_length to s."""
        s = np.clip(np.asarray(s, dtype=float), -self.support_length, 0.0)
        g = self.samples
        h = self.spacing
        at_nodes = np.concatenate(([0.0], np.cumsum(0.5 * h * (g[1:] + g[:-1]))))
        pos = (s + self.support_length) / h
        j = np.clip(np.floor(pos).astype(int), 0, g.size - 2)
        r = s - (-self.support_length + j * h)
        slope = (g[j + 1] - g[j]) / h
        return at_nodes[j] + g[j] * r + 0.5 * slope * r * r


KernelSpec = Union[ExponentialKernel, TabulatedKernel]


# ---------------------------------------------------------------- velocity laws


@dataclass(frozen=True)
class Identity:
    name = "identity"

    def __call__(self, w):
        return np.asarray(w, dtype=float) * 1.0

    def derivative(self, w):
        return np.ones_like(np.asarray(w, dtype=float))


@dataclass(frozen=True)
class Square:
    name = "square"

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return w * w

    def derivative(self, w):
        return 2.0 * np.asarray(w, dtype=float)


@dataclass(frozen=True)
class Power:
    """V(w) = w**two_m with an even exponent (generalized Burgers)."""

    two_m: int
    name = "power"

    def __post_init__(self):
        if int(self.two_m) != self.two_m or self.two_m <= 0 or self.two_m % 2:
            raise ValidationError(f"power exponent must be an even positive integer, got {self.two_m}")
        object.__setattr__(self, "two_m", int(self.two_m))

    def __call__(self, w):
        return np.asarray(w, dtype=float) ** self.two_m

    def derivative(self, w):
        return self.two_m * np.asarray(w, dtype=float) ** (self.two_m - 1)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear velocity law, held constant beyond the table ends."""

    abscissae: np.ndarray
    ordinates: np.ndarray
    name = "tabulated"

    def __post_init__(self):
        x = np.array(self.abscissae, dtype=float)
        y = np.array(self.ordinates, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValidationError("tabulated velocity needs matching abscissae/ordinates (>= 2 points)")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("tabulated velocity must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("tabulated velocity abscissae must be strictly increasing")
        scale = max(1.0, float(np.max(np.abs(y))))
        drop = -np.min(np.diff(y))
        if drop > 1e-12 * scale:
            raise NonMonotoneVelocity(f"tabulated velocity decreases by {drop:g}")
        object.__setattr__(self, "abscissae", _frozen_array(x))
        object.__setattr__(self, "ordinates", _frozen_array(y))

    @property
    def _step(self) -> float:
        return 1e-6 * max(1.0, float(self.abscissae[-1] - self.abscissae[0]))

    def __call__(self, w):
        return np.interp(np.asarray(w, dtype=float), self.abscissae, self.ordinates)

    def derivative(self, w):
        w = np.asarray(w, dtype=float)
        h = self._step
        return (self(w + h) - self(w - h)) / (2 * h)


VelocityModel = Union[Identity, Square, Power, Tabulated]


@dataclass(frozen=True)
class ValidationReport:
    monotone: bool
    lipschitz: float
    range_max: float


def validate_velocity(v: VelocityModel, range_max: float) -> ValidationReport:
    if not (range_max >= 0 and math.isfinite(range_max)):
        raise ValidationError(f"range_max must be a nonnegative real, got {range_max}")
    w = np.linspace(0.0, range_max, MONOTONE_LATTICE)
    vals = np.asarray(v(w), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    steps = np.diff(vals)
    if steps.size and -steps.min() > 1e-12 * scale:
        raise NonMonotoneVelocity(
            f"{v.name} velocity decreases by {-steps.min():g} on [0, {range_max}]"
        )
    slopes = np.abs(np.asarray(v.derivative(w), dtype=float))
    if steps.size and range_max > 0:
        slopes = np.concatenate((slopes, np.abs(steps) / (w[1] - w[0])))
    return ValidationReport(monotone=True, lipschitz=float(slopes.max()), range_max=float(range_max))


# ----------------------------------------------------------------- initial data


@dataclass(frozen=True, eq=False)
class InitialDatum:
    """Piecewise-constant, compactly supported datum.

    ``plateau_values[k]`` holds on ``(breakpoints[k], breakpoints[k+1])``;
    the datum is zero outside ``[breakpoints[0], breakpoints[-1]]``.
    """

    breakpoints: np.ndarray
    plateau_values: np.ndarray

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=float)
        v = np.array(self.plateau_values, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValidationError("datum needs at least two breakpoints")
        if v.shape != (b.size - 1,):
            raise ValidationError(
                f"datum needs {b.size - 1} plateau values for {b.size} breakpoints, got {v.size}"
            )
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise ValidationError("datum must be finite")
        if np.any(np.diff(b) <= 0):
            raise ValidationError("datum breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", _frozen_array(b))
        object.__setattr__(self, "plateau_values", _frozen_array(v))

    @classmethod
    def zero(cls, a: float = -0.5, b: float = 0.5) -> "InitialDatum":
        return cls([a, b], [0.0])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.plateau_values)))

    def total_variation(self) -> float:
        padded = np.concatenate(([0.0], self.plateau_values, [0.0]))
        return float(np.abs(np.diff(padded)).sum())

    def integral(self) -> float:
        return float(np.sum(self.plateau_values * np.diff(self.breakpoints)))

    def l1(self) -> float:
        return float(np.sum(np.abs(self.plateau_values) * np.diff(self.breakpoints)))

    def cumulative(self, x):
        """Q(x) = integral of the datum over (-inf, x]; piecewise linear."""
        b = self.breakpoints
        at_b = np.concatenate(([0.0], np.cumsum(self.plateau_values * np.diff(b))))
        return np.interp(np.asarray(x, dtype=float), b, at_b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (k >= 0) & (k < self.plateau_values.size)
        return np.where(inside, self.plateau_values[np.clip(k, 0, self.plateau_values.size - 1)], 0.0)


def sample_datum(datum: InitialDatum, grid: Grid1D) -> CellField:
    """Exact cell averages of a piecewise-constant datum."""
    faces = grid.faces
    values = np.diff(datum.cumulative(faces)) / grid.dx
    # cells lying inside one plateau get the plateau value without round-off
    b = datum.breakpoints
    k_left = np.searchsorted(b, faces[:-1], side="right") - 1
    k_right = np.searchsorted(b, faces[1:], side="left") - 1
    inside = (k_left == k_right) & (k_left >= 0) & (k_left < datum.plateau_values.size)
    values[inside] = datum.plateau_values[k_left[inside]]
    return CellField(grid, values)


# ------------------------------------------------------------------- run config


def characteristic_speed_bound(velocity: VelocityModel, sup: float, kappa_slack: float = KAPPA_SLACK) -> float:
    """Bound on |wave speed| for data with sup-norm ``sup``.

    Covers the nonlocal velocity V(W) (W <= (1 + kappa) sup) and the local
    characteristic speed f'(u) = V(|u|) + |u| V'(|u|).
    """
    w = np.linspace(0.0, (1.0 + kappa_slack) * sup, MONOTONE_LATTICE)
    v = np.asarray(velocity(w), dtype=float)
    fprime = v + w * np.asarray(velocity.derivative(w), dtype=float)
    return float(max(np.max(np.abs(v)), np.max(np.abs(fprime))))


@dataclass(frozen=True, eq=False)
class SimConfig:
    grid: Grid1D
    datum: InitialDatum
    velocity: VelocityModel
    t_end: float
    kernel: Optional[KernelSpec] = None
    cfl: float = DEFAULT_CFL
    snapshot_times: Sequence[float] = ()
    snapshot_stride: int = 1
    kappa_slack: float = KAPPA_SLACK

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ValidationError(f"t_end must be a nonnegative real, got {self.t_end}")
        if not (0 < self.cfl <= 1):
            raise ValidationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValidationError("snapshot_stride must be a positive integer")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("snapshot_times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] > self.t_end):
            raise ValidationError("snapshot_times must lie in [0, t_end]")
        object.__setattr__(self, "snapshot_times", times)
        object.__setattr__(self, "snapshot_stride", int(self.snapshot_stride))

        sup = self.datum.sup_norm()
        validate_velocity(self.velocity, (1.0 + self.kappa_slack) * sup)
        self._check_padding(sup)

    def _check_padding(self, sup: float) -> None:
        g = self.grid
        margin = 5 * g.dx
        w = np.linspace(0.0, (1.0 + self.kappa_slack) * sup, MONOTONE_LATTICE)
        v = np.asarray(self.velocity(w), dtype=float)
        right_speed = max(0.0, characteristic_speed_bound(self.velocity, sup, self.kappa_slack))
        left_speed = max(0.0, -float(v.min()))
        need_left = self.datum.breakpoints[0] - self.t_end * left_speed - margin
        need_right = self.datum.breakpoints[-1] + self.t_end * right_speed * (1.0 + self.kappa_slack) + margin
        if g.x_min > need_left:
            raise ValidationError(
                f"domain padding: x_min={g.x_min} must be <= {need_left:.6g} "
                "(first breakpoint - left travel - 5 dx)"
            )
        if g.x_max < need_right:
            raise ValidationError(
                f"domain padding: x_max={g.x_max} must be >= {need_right:.6g} "
                "(last breakpoint + t_end * v_max + 5 dx)"
            )

    @property
    def is_local(self) -> bool:
        return self.kernel is None

    def targets(self) -> tuple:
        """Times the integrator must land on exactly."""
        return tuple(sorted(set(self.snapshot_times) | {float(self.t_end)}))

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)
