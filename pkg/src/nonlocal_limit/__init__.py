"""Finite-volume solvers for the look-behind nonlocal conservation law

    q_t + (V(W) q)_x = 0,   W(t, x) = int_{-inf}^x gamma(y - x) |q(t, y)| dy,

a Godunov solver for its local counterpart q_t + (q V(|q|))_x = 0, and the
tooling to measure how the former approaches the latter as the kernel
concentrates.
"""

from .core_model import (
    CellField,
    ExponentialKernel,
    Grid1D,
    Identity,
    InitialDatum,
    Power,
    SimConfig,
    Square,
    Tabulated,
    TabulatedKernel,
    build_grid,
    sample_datum,
    validate_velocity,
)
from .local_reference import godunov_flux, run_local
from .nonlocal_operator import eval_w, eval_w_exponential, eval_w_tabulated
from .nonlocal_solver import run_nonlocal

__version__ = "0.1.0"
