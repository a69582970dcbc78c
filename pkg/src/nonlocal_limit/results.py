"""Run results shared by the nonlocal and the local solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core_model import CellField, SimConfig, sample_datum
from .nonlocal_operator import FaceField

# tolerance for "this step landed on a requested time"
TIME_EPS = 1e-14


@dataclass
class DiagnosticsSeries:
    """Per accepted step (plus the initial state): mass, L1, Linf and TV of q."""

    time: List[float] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)
    l1: List[float] = field(default_factory=list)
    linf: List[float] = field(default_factory=list)
    tv: List[float] = field(default_factory=list)

    def record(self, t: float, q: np.ndarray, dx: float) -> None:
        self.time.append(float(t))
        self.mass.append(float(np.sum(q) * dx))
        self.l1.append(float(np.sum(np.abs(q)) * dx))
        self.linf.append(float(np.max(np.abs(q))))
        self.tv.append(float(np.abs(np.diff(q)).sum()))

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in ("time", "mass", "l1", "linf", "tv")}

    def __len__(self) -> int:
        return len(self.time)


@dataclass
class RunResult:
    config: SimConfig
    kind: str
    snapshot_times: List[float]
    snapshots: List[CellField]
    w_snapshots: List[Optional[FaceField]]
    diagnostics: DiagnosticsSeries
    retained_times: np.ndarray
    retained_q: np.ndarray
    final: CellField
    final_w: Optional[FaceField]
    steps: int

    @property
    def initial(self) -> CellField:
        # every run starts from the exact cell averages of the datum
        return sample_datum(self.config.datum, self.config.grid)

    def snapshot(self, t: float) -> CellField:
        return self.snapshots[self._index(t)]

    def w_snapshot(self, t: float) -> Optional[FaceField]:
        return self.w_snapshots[self._index(t)]

    def _index(self, t: float) -> int:
        for k, s in enumerate(self.snapshot_times):
            if abs(s - t) <= TIME_EPS * max(1.0, abs(t)):
                return k
        raise KeyError(f"no snapshot at t={t}; available: {self.snapshot_times}")

    def max_linf(self) -> float:
        return max(self.diagnostics.linf)


class Recorder:
    """Collects snapshots, diagnostics and the retained trajectory during a run."""

    def __init__(self, config: SimConfig, kind: str, retain: bool = True):
        self.config = config
        self.kind = kind
        self.retain = retain
        self.diagnostics = DiagnosticsSeries()
        self.snapshot_times: List[float] = []
        self.snapshots: List[CellField] = []
        self.w_snapshots: List[Optional[FaceField]] = []
        self._times: List[float] = []
        self._rows: List[np.ndarray] = []
        self._last_retained = -1

    def observe(self, t: float, step: int, q: np.ndarray, w: Optional[FaceField], final: bool = False):
        grid = self.config.grid
        self.diagnostics.record(t, q, grid.dx)
        for s in self.config.snapshot_times:
            if abs(s - t) <= TIME_EPS * max(1.0, abs(s)) and s not in self.snapshot_times:
                self.snapshot_times.append(s)
                self.snapshots.append(CellField(grid, q))
                self.w_snapshots.append(w)
        if self.retain and (step % self.config.snapshot_stride == 0 or final):
            if step != self._last_retained:
                self._times.append(float(t))
                self._rows.append(np.array(q, copy=True))
                self._last_retained = step

    def finish(self, q: np.ndarray, w: Optional[FaceField], steps: int) -> RunResult:
        n = self.config.grid.n_cells
        retained = np.array(self._rows) if self._rows else np.empty((0, n))
        return RunResult(
            config=self.config,
            kind=self.kind,
            snapshot_times=self.snapshot_times,
            snapshots=self.snapshots,
            w_snapshots=self.w_snapshots,
            diagnostics=self.diagnostics,
            retained_times=np.asarray(self._times),
            retained_q=retained,
            final=CellField(self.config.grid, q),
            final_w=w,
            steps=steps,
        )


def next_target(config: SimConfig, t: float) -> float:
    for s in config.targets():
        if s > t + TIME_EPS * max(1.0, abs(s)):
            return s
    return float(config.t_end)
