"""Plain-text run configuration.

The format is line oriented::

    # comment
    [grid]
    x_min = -2
    x_max = 3
    n_cells = 2944

    [datum]
    breakpoints = -0.5, 0, 0.5
    values = -0.5, 1

    [kernel]                 # omit the section for a local run
    type = exponential       # or: tabulated (support_length, samples)
    eta = 0.1

    [velocity]
    type = identity          # square | power (two_m) | tabulated (abscissae, ordinates)

    [time]
    t_end = 0.5
    cfl = 0.5
    snapshot_times = 0.25, 0.5
    snapshot_stride = 1

    [sweep]                  # turns the file into a singular-limit sweep
    etas = 0.1, 0.01, 0.001
    window = -0.6, 1.1
    reference_refinement = 8

Lists are comma separated.  Unknown sections or keys are rejected with the
offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .core_model import (
    DEFAULT_CFL,
    KAPPA_SLACK,
    ExponentialKernel,
    Grid1D,
    Identity,
    InitialDatum,
    Power,
    SimConfig,
    Square,
    Tabulated,
    TabulatedKernel,
)
from .errors import ModelError, ParseError, ValidationError

SCHEMA = {
    "grid": {"x_min", "x_max", "n_cells"},
    "datum": {"breakpoints", "values"},
    "kernel": {"type", "eta", "support_length", "samples"},
    "velocity": {"type", "two_m", "abscissae", "ordinates"},
    "time": {"t_end", "cfl", "snapshot_times", "snapshot_stride", "kappa_slack"},
    "sweep": {"etas", "window", "reference_refinement"},
}

DEFAULT_WINDOW = (-0.6, 1.1)
DEFAULT_REFINEMENT = 8


@dataclass(frozen=True)
class SweepSpec:
    base: SimConfig
    etas: Tuple[float, ...]
    comparison_window: Tuple[float, float] = DEFAULT_WINDOW
    reference_refinement: int = DEFAULT_REFINEMENT

    def __post_init__(self):
        etas = tuple(float(e) for e in self.etas)
        if not etas:
            raise ValidationError("sweep needs at least one eta")
        if any(e <= 0 for e in etas):
            raise ValidationError("sweep etas must be positive")
        if any(b >= a for a, b in zip(etas, etas[1:])):
            raise ValidationError("sweep etas must be strictly decreasing")
        lo, hi = (float(v) for v in self.comparison_window)
        g = self.base.grid
        if not (g.x_min <= lo < hi <= g.x_max):
            raise ValidationError(
                f"comparison window ({lo}, {hi}) must lie inside the domain [{g.x_min}, {g.x_max}]"
            )
        if int(self.reference_refinement) != self.reference_refinement or self.reference_refinement < 1:
            raise ValidationError("reference_refinement must be a positive integer")
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "comparison_window", (lo, hi))
        object.__setattr__(self, "reference_refinement", int(self.reference_refinement))


class _Entry:
    __slots__ = ("value", "lineno")

    def __init__(self, value: str, lineno: int):
        self.value = value
        self.lineno = lineno


def _tokenize(text: str, path=None) -> Dict[str, Dict[str, _Entry]]:
    sections: Dict[str, Dict[str, _Entry]] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {raw.strip()!r}", lineno, path)
            current = line[1:-1].strip().lower()
            if current not in SCHEMA:
                raise ParseError(f"unknown section [{current}]", lineno, path)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]", lineno, path)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        if current is None:
            raise ParseError("key outside of any section", lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in SCHEMA[current]:
            raise ParseError(f"unknown key {key!r} in [{current}]", lineno, path)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r} in [{current}]", lineno, path)
        if not value:
            raise ParseError(f"empty value for {key!r}", lineno, path)
        sections[current][key] = _Entry(value, lineno)
    return sections


class _Reader:
    def __init__(self, sections, path):
        self.sections = sections
        self.path = path

    def has(self, section, key=None) -> bool:
        if section not in self.sections:
            return False
        return key is None or key in self.sections[section]

    def _entry(self, section, key) -> _Entry:
        if section not in self.sections:
            raise ValidationError(f"missing section [{section}]")
        if key not in self.sections[section]:
            raise ValidationError(f"missing key {key!r} in [{section}]")
        return self.sections[section][key]

    def text(self, section, key, default=None) -> str:
        if default is not None and not self.has(section, key):
            return default
        return self._entry(section, key).value.lower()

    def number(self, section, key, default=None) -> float:
        if default is not None and not self.has(section, key):
            return float(default)
        e = self._entry(section, key)
        try:
            return float(e.value)
        except ValueError:
            raise ParseError(f"{key!r} is not a number: {e.value!r}", e.lineno, self.path) from None

    def integer(self, section, key, default=None) -> int:
        if default is not None and not self.has(section, key):
            return int(default)
        e = self._entry(section, key)
        try:
            return int(e.value)
        except ValueError:
            raise ParseError(f"{key!r} is not an integer: {e.value!r}", e.lineno, self.path) from None

    def numbers(self, section, key, default=None) -> List[float]:
        if default is not None and not self.has(section, key):
            return list(default)
        e = self._entry(section, key)
        try:
            return [float(tok) for tok in e.value.split(",")]
        except ValueError:
            raise ParseError(f"{key!r} must be a comma-separated list of numbers", e.lineno, self.path) from None

    def lineno(self, section, key):
        return self.sections.get(section, {}).get(key, _Entry("", None)).lineno


def _velocity(r: _Reader):
    kind = r.text("velocity", "type")
    if kind == "identity":
        return Identity()
    if kind == "square":
        return Square()
    if kind == "power":
        return Power(r.integer("velocity", "two_m"))
    if kind == "tabulated":
        return Tabulated(r.numbers("velocity", "abscissae"), r.numbers("velocity", "ordinates"))
    raise ParseError(f"unknown velocity type {kind!r}", r.lineno("velocity", "type"), r.path)


def _kernel(r: _Reader):
    if not r.has("kernel"):
        return None
    kind = r.text("kernel", "type", default="exponential")
    if kind == "exponential":
        return ExponentialKernel(r.number("kernel", "eta"))
    if kind == "tabulated":
        return TabulatedKernel(r.number("kernel", "support_length"), r.numbers("kernel", "samples"))
    raise ParseError(f"unknown kernel type {kind!r}", r.lineno("kernel", "type"), r.path)


def parse_text(text: str, path=None) -> Union[SimConfig, SweepSpec]:
    r = _Reader(_tokenize(text, path), path)
    try:
        grid = Grid1D(r.number("grid", "x_min"), r.number("grid", "x_max"), r.integer("grid", "n_cells"))
        datum = InitialDatum(r.numbers("datum", "breakpoints"), r.numbers("datum", "values"))
        t_end = r.number("time", "t_end")
        config = SimConfig(
            grid=grid,
            datum=datum,
            velocity=_velocity(r),
            t_end=t_end,
            kernel=_kernel(r),
            cfl=r.number("time", "cfl", default=DEFAULT_CFL),
            snapshot_times=tuple(r.numbers("time", "snapshot_times", default=[t_end])),
            snapshot_stride=r.integer("time", "snapshot_stride", default=1),
            kappa_slack=r.number("time", "kappa_slack", default=KAPPA_SLACK),
        )
        if not r.has("sweep"):
            return config
        if config.kernel is not None and not isinstance(config.kernel, ExponentialKernel):
            raise ValidationError("sweeps vary eta of the exponential kernel; drop the tabulated [kernel]")
        window = r.numbers("sweep", "window", default=DEFAULT_WINDOW)
        if len(window) != 2:
            raise ParseError("window needs exactly two numbers", r.lineno("sweep", "window"), path)
        return SweepSpec(
            base=config,
            etas=tuple(r.numbers("sweep", "etas")),
            comparison_window=tuple(window),
            reference_refinement=r.integer("sweep", "reference_refinement", default=DEFAULT_REFINEMENT),
        )
    except ParseError:
        raise
    except ModelError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc


def parse_config(path) -> Union[SimConfig, SweepSpec]:
    path = Path(path)
    return parse_text(path.read_text(), path)


def _fmt(v) -> str:
    # shortest string that parses back to the same double
    return repr(float(v))


def _fmt_list(values) -> str:
    return ", ".join(_fmt(v) for v in values)


def render_config(config: Union[SimConfig, SweepSpec]) -> str:
    """Fully resolved configuration (defaults filled in) in the input format."""
    sweep = config if isinstance(config, SweepSpec) else None
    c = sweep.base if sweep else config
    lines = [
        "[grid]",
        f"x_min = {_fmt(c.grid.x_min)}",
        f"x_max = {_fmt(c.grid.x_max)}",
        f"n_cells = {c.grid.n_cells}",
        "",
        "[datum]",
        f"breakpoints = {_fmt_list(c.datum.breakpoints)}",
        f"values = {_fmt_list(c.datum.plateau_values)}",
        "",
    ]
    if isinstance(c.kernel, ExponentialKernel):
        lines += ["[kernel]", "type = exponential", f"eta = {_fmt(c.kernel.eta)}", ""]
    elif isinstance(c.kernel, TabulatedKernel):
        lines += [
            "[kernel]",
            "type = tabulated",
            f"support_length = {_fmt(c.kernel.support_length)}",
            f"samples = {_fmt_list(c.kernel.samples)}",
            "",
        ]
    lines += ["[velocity]", f"type = {c.velocity.name}"]
    if isinstance(c.velocity, Power):
        lines.append(f"two_m = {c.velocity.two_m}")
    elif isinstance(c.velocity, Tabulated):
        lines.append(f"abscissae = {_fmt_list(c.velocity.abscissae)}")
        lines.append(f"ordinates = {_fmt_list(c.velocity.ordinates)}")
    lines += [
        "",
        "[time]",
        f"t_end = {_fmt(c.t_end)}",
        f"cfl = {_fmt(c.cfl)}",
        f"snapshot_times = {_fmt_list(c.snapshot_times)}",
        f"snapshot_stride = {c.snapshot_stride}",
        f"kappa_slack = {_fmt(c.kappa_slack)}",
    ]
    if sweep:
        lines += [
            "",
            "[sweep]",
            f"etas = {_fmt_list(sweep.etas)}",
            f"window = {_fmt_list(sweep.comparison_window)}",
            f"reference_refinement = {sweep.reference_refinement}",
        ]
    return "\n".join(lines) + "\n"
