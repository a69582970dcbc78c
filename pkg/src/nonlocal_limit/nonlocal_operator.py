"""Face values of the look-behind average W[|q|, gamma] of a cell field.

For the exponential kernel the average obeys an exact first-order
recurrence across one cell, so the whole face field costs O(n).  Tabulated
kernels are integrated exactly against the piecewise-constant field, which
reduces to a fixed stencil on a uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core_model import CellField, ExponentialKernel, Grid1D, KernelSpec, TabulatedKernel
from .errors import KernelUnderResolved, ValidationError


@dataclass(frozen=True, eq=False)
class FaceField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_cells + 1,):
            raise ValidationError(
                f"face field has shape {values.shape}, grid needs ({self.grid.n_cells + 1},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("face field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def at_cells(self) -> np.ndarray:
        """Value at each cell's right face (the location matched to the cell)."""
        return self.values[1:]


def eval_w_exponential(q: CellField, eta: float) -> FaceField:
    if not eta > 0:
        raise ValidationError(f"eta must be positive, got {eta}")
    dx = q.grid.dx
    decay = math.exp(-dx / eta)
    # W_{i+1/2} = decay * W_{i-1/2} + (1 - decay) |q_i|,  W_{-1/2} = 0
    right_faces = lfilter([-math.expm1(-dx / eta)], [1.0, -decay], np.abs(q.values))
    return FaceField(q.grid, np.concatenate(([0.0], right_faces)))


def tabulated_stencil(kernel: TabulatedKernel, dx: float) -> np.ndarray:
    """Weight of the cell k places upwind of a face: cells [x_f-(k+1)dx, x_f-k dx]."""
    if kernel.support_length < dx:
        raise KernelUnderResolved(
            f"kernel support {kernel.support_length:g} is shorter than dx={dx:g}"
        )
    n = int(math.ceil(kernel.support_length / dx))
    edges = -np.arange(n + 1) * dx
    cum = kernel.cumulative(edges)
    return cum[:-1] - cum[1:]


def eval_w_tabulated(q: CellField, kernel: TabulatedKernel) -> FaceField:
    weights = tabulated_stencil(kernel, q.grid.dx)
    # face j+1/2 (j = 0..n-1) sees cells j, j-1, ..., j-len+1
    right_faces = np.convolve(np.abs(q.values), weights)[: q.grid.n_cells]
    return FaceField(q.grid, np.concatenate(([0.0], right_faces)))


def eval_w(q: CellField, kernel: KernelSpec) -> FaceField:
    if isinstance(kernel, ExponentialKernel):
        return eval_w_exponential(q, kernel.eta)
    if isinstance(kernel, TabulatedKernel):
        return eval_w_tabulated(q, kernel)
    raise TypeError(f"unsupported kernel {kernel!r}")


def check_identity(q: CellField, w: FaceField, eta: float) -> float:
    """Largest residual of dW/dx = (|q| - W) / eta over interior faces.

    The derivative is the one-sided difference ending at face i+1/2 and is
    paired with |q_i| and W_{i+1/2}.
    """
    dx = q.grid.dx
    dw = np.diff(w.values) / dx
    rhs = (np.abs(q.values) - w.values[1:]) / eta
    residual = np.abs(dw - rhs)[:-1]
    return float(residual.max()) if residual.size else 0.0
