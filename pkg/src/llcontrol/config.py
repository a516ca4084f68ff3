"""Scenario configuration: a flat ``section.key = value`` text format.

Example::

    physical.nu = 0.02
    physical.length = 1
    discretization.elements = 12
    initial.kind = trig
    integrator.dt = auto
    phase.1.control = affine
    phase.1.gain = 0.5
    phase.1.target = -0.7071067811865476, 0, 0.7071067811865476
    phase.1.until = settle
    output.csv = true

Blank lines and ``#`` comments are ignored. Phases are numbered from 1 and
run in numeric order. ``integrator.dt = auto`` picks ``dt_fraction`` over
the stiffest Laplacian eigenvalue; the resolved config written next to the
outputs always carries the numeric step, so it replays bit-identically.
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import SAT_TOL, ControlLaw, Equilibrium, MagnetizationField, PhysicalParams
from .discretization import build
from .integrator import ControlSchedule, IntegratorConfig, Phase, default_dt

__all__ = [
    "ConfigError",
    "InitialCondition",
    "PhaseSpec",
    "OutputConfig",
    "ScenarioConfig",
    "parse_config",
    "load_config",
    "format_config",
]

DEFAULT_DT_FRACTION = 0.2


class ConfigError(ValueError):
    """Malformed or invalid configuration, with the offending line or key."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"'{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class InitialCondition:
    """``trig``: ``(sin 2 pi w x/L, cos 2 pi w x/L, 0)``; ``constant``: a unit
    vector (normalized on construction); ``nodal``: rows of ``m1, m2, m3``
    read from a CSV file, one row per node."""

    kind: str = "trig"
    winding: int = 1
    vector: Optional[tuple] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind == "trig":
            if int(self.winding) != self.winding:
                raise ValueError(f"winding must be an integer, got {self.winding}")
        elif self.kind == "constant":
            v = np.asarray(self.vector, dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)) or not np.linalg.norm(v) > 0:
                raise ValueError(f"constant initial condition needs a nonzero 3-vector, got {self.vector}")
            object.__setattr__(self, "vector", tuple(float(c) for c in v / np.linalg.norm(v)))
        elif self.kind == "nodal":
            if not self.path:
                raise ValueError("nodal initial condition needs a file path")
        else:
            raise ValueError(f"unknown initial condition kind {self.kind!r}")

    def field(self, n_elements, length):
        n_nodes = n_elements + 1
        if self.kind == "trig":
            x = np.linspace(0.0, length, n_nodes)
            ang = 2 * np.pi * self.winding * x / length
            return MagnetizationField(
                np.column_stack([np.sin(ang), np.cos(ang), np.zeros(n_nodes)])
            )
        if self.kind == "constant":
            return MagnetizationField.constant(self.vector, n_nodes)
        from .io import read_nodal_csv

        arr = read_nodal_csv(self.path)
        if arr.shape[0] != n_nodes:
            raise ValueError(f"{self.path}: {arr.shape[0]} nodes, expected {n_nodes}")
        return MagnetizationField(arr, saturated=True, sat_tol=SAT_TOL)


@dataclass(frozen=True)
class PhaseSpec:
    control: str = "none"
    gain: Optional[float] = None
    target: Optional[tuple] = None
    until: str = "settle"
    duration: Optional[float] = None

    def law(self):
        if self.control == "none":
            return ControlLaw.none()
        return ControlLaw(self.control, self.gain, Equilibrium(self.target))

    def phase(self):
        law = self.law()
        if self.until == "settle":
            return Phase.settle(law)
        return Phase.fixed(law, self.duration)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    csv: bool = True
    plot: bool = True


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    n_elements: int = 12
    mass: str = "consistent"
    initial: InitialCondition = field(default_factory=InitialCondition)
    phases: tuple = ()
    dt: Optional[float] = None
    dt_fraction: float = DEFAULT_DT_FRACTION
    t_max: float = 300.0
    projection: str = "off"
    steady_tol: float = 1e-8
    record_every: int = 200
    outputs: OutputConfig = field(default_factory=OutputConfig)
    description: str = ""

    def discretization(self):
        return build(self.n_elements, self.physical.length, mass=self.mass)

    def schedule(self):
        return ControlSchedule([ph.phase() for ph in self.phases])

    def resolve(self):
        """Copy with ``dt`` fixed to a number."""
        if self.dt is not None:
            return self
        return replace(self, dt=default_dt(self.discretization(), self.dt_fraction))

    def integrator(self):
        cfg = self.resolve()
        return IntegratorConfig(
            dt=cfg.dt,
            t_max=cfg.t_max,
            projection=cfg.projection,
            steady_tol=cfg.steady_tol,
            record_every=cfg.record_every,
        )

    def initial_field(self):
        return self.initial.field(self.n_elements, self.physical.length)

    def validate(self):
        """Build every derived object once so errors surface before a run."""
        try:
            self.discretization()
            self.schedule()
            self.integrator()
            self.initial_field()
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def with_overrides(self, n_elements=None, dt=None, directory=None):
        cfg = self
        if n_elements is not None:
            cfg = replace(cfg, n_elements=int(n_elements))
        if dt is not None:
            cfg = replace(cfg, dt=float(dt))
        if directory is not None:
            cfg = replace(cfg, outputs=replace(cfg.outputs, directory=str(directory)))
        return cfg


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _vector(s):
    parts = [p for p in s.replace("(", " ").replace(")", " ").replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"expected three components, got {s!r}")
    return tuple(float(p) for p in parts)


def _opt_float(s):
    return None if s.lower() == "auto" else float(s)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {s!r}")
    return v


_SCALAR_KEYS = {
    "name": ("name", str),
    "description": ("description", str),
    "physical.nu": ("nu", float),
    "physical.length": ("length", float),
    "discretization.elements": ("n_elements", _positive_int),
    "discretization.mass": ("mass", str),
    "initial.kind": ("ic_kind", str),
    "initial.winding": ("winding", int),
    "initial.vector": ("vector", _vector),
    "initial.file": ("path", str),
    "integrator.dt": ("dt", _opt_float),
    "integrator.dt_fraction": ("dt_fraction", float),
    "integrator.t_max": ("t_max", float),
    "integrator.projection": ("projection", str),
    "integrator.steady_tol": ("steady_tol", float),
    "integrator.record_every": ("record_every", _positive_int),
    "output.dir": ("directory", str),
    "output.csv": ("csv", _bool),
    "output.plot": ("plot", _bool),
}

_PHASE_KEYS = {
    "control": str,
    "gain": float,
    "target": _vector,
    "until": str,
    "duration": float,
}


def parse_config(text, source="<config>", base_dir=None):
    """Parse config text into a validated :class:`ScenarioConfig`.

    Relative ``initial.file`` paths are taken relative to ``base_dir``.
    """
    values = {}
    lines = {}
    phase_vals = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if not val:
            raise ConfigError("empty value", line=lineno, key=key)
        if key.startswith("phase."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit() or parts[2] not in _PHASE_KEYS:
                raise ConfigError(
                    f"phase keys look like phase.<n>.<{'|'.join(_PHASE_KEYS)}>", line=lineno, key=key
                )
            idx = int(parts[1])
            try:
                parsed = _PHASE_KEYS[parts[2]](val)
            except ValueError as exc:
                raise ConfigError(str(exc), line=lineno, key=key) from exc
            slot = phase_vals.setdefault(idx, {})
            if parts[2] in slot:
                raise ConfigError("duplicate key", line=lineno, key=key)
            slot[parts[2]] = (parsed, lineno)
            continue
        if key not in _SCALAR_KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        name, conv = _SCALAR_KEYS[key]
        if name in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        try:
            values[name] = conv(val)
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, key=key) from exc
        lines[name] = (lineno, key)

    def build_part(names, factory, fields_map):
        kwargs = {fields_map.get(n, n): values[n] for n in names if n in values}
        try:
            return factory(**kwargs)
        except (ValueError, TypeError) as exc:
            first = next((lines[n] for n in names if n in lines), (None, None))
            raise ConfigError(str(exc), line=first[0], key=first[1]) from exc

    if base_dir is not None and "path" in values and not Path(values["path"]).is_absolute():
        values["path"] = str(Path(base_dir) / values["path"])
    physical = build_part(("nu", "length"), PhysicalParams, {})
    initial = build_part(("ic_kind", "winding", "vector", "path"), InitialCondition, {"ic_kind": "kind"})
    outputs = build_part(("directory", "csv", "plot"), OutputConfig, {})

    if not phase_vals:
        raise ConfigError(f"{source}: no phases defined (need phase.1.control at least)")
    phases = []
    for idx in sorted(phase_vals):
        slot = phase_vals[idx]
        kwargs = {k: v for k, (v, _) in slot.items()}
        first_line = min(ln for _, ln in slot.values())
        try:
            spec = PhaseSpec(**kwargs)
            spec.phase()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), line=first_line, key=f"phase.{idx}") from exc
        phases.append(spec)

    scalar = {k: values[k] for k in ("name", "description", "n_elements", "mass", "dt",
                                     "dt_fraction", "t_max", "projection", "steady_tol",
                                     "record_every") if k in values}
    cfg = ScenarioConfig(physical=physical, initial=initial, phases=tuple(phases),
                         outputs=outputs, **scalar)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, source=str(path), base_dir=path.parent)


def _fmt(x):
    return repr(float(x))


def format_config(cfg):
    """Serialize ``cfg`` back to config text (floats round-trip exactly)."""
    out = [f"name = {cfg.name}"]
    if cfg.description:
        out.append(f"description = {cfg.description}")
    out += [
        f"physical.nu = {_fmt(cfg.physical.nu)}",
        f"physical.length = {_fmt(cfg.physical.length)}",
        f"discretization.elements = {cfg.n_elements}",
        f"discretization.mass = {cfg.mass}",
        f"initial.kind = {cfg.initial.kind}",
    ]
    if cfg.initial.kind == "trig":
        out.append(f"initial.winding = {cfg.initial.winding}")
    elif cfg.initial.kind == "constant":
        out.append("initial.vector = " + ", ".join(_fmt(c) for c in cfg.initial.vector))
    else:
        out.append(f"initial.file = {cfg.initial.path}")
    out += [
        f"integrator.dt = {'auto' if cfg.dt is None else _fmt(cfg.dt)}",
        f"integrator.dt_fraction = {_fmt(cfg.dt_fraction)}",
        f"integrator.t_max = {_fmt(cfg.t_max)}",
        f"integrator.projection = {cfg.projection}",
        f"integrator.steady_tol = {_fmt(cfg.steady_tol)}",
        f"integrator.record_every = {cfg.record_every}",
    ]
    for i, ph in enumerate(cfg.phases, start=1):
        out.append(f"phase.{i}.control = {ph.control}")
        if ph.gain is not None:
            out.append(f"phase.{i}.gain = {_fmt(ph.gain)}")
        if ph.target is not None:
            out.append(f"phase.{i}.target = " + ", ".join(_fmt(c) for c in ph.target))
        out.append(f"phase.{i}.until = {ph.until}")
        if ph.duration is not None:
            out.append(f"phase.{i}.duration = {_fmt(ph.duration)}")
    out += [
        f"output.dir = {cfg.outputs.directory}",
        f"output.csv = {str(cfg.outputs.csv).lower()}",
        f"output.plot = {str(cfg.outputs.plot).lower()}",
    ]
    return "\n".join(out) + "\n"
