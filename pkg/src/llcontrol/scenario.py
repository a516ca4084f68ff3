"""Run a :class:`ScenarioConfig`, write its files and summarize the phases."""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import format_config
from .diagnostics import decay_rate
from .integrator import BlowUpError, run
from .io import write_component_svgs, write_diagnostics_csv, write_metadata, write_trajectory_csv
from .presets import REFERENCE_SETTLE_STATE

__all__ = ["PhaseSummary", "ScenarioResult", "run_scenario", "summarize", "affine_rate_bound"]


def affine_rate_bound(k, nu, length):
    """Guaranteed decay rate ``2 (k - 8 nu L^4)`` of the affine Lyapunov functional."""
    return 2.0 * (k - 8.0 * nu * length ** 4)


@dataclass
class PhaseSummary:
    index: int
    kind: str
    status: str
    t_start: float
    t_end: float
    settle_state: np.ndarray
    settle_norm: float
    nodal_norm_range: tuple
    h1_semi_sq: float
    target: object = None
    target_error: float = None
    decay_rate: float = None
    rate_bound: float = None
    max_lyap_increase: float = None
    notes: list = field(default_factory=list)

    def lines(self):
        s = self.settle_state
        out = [
            f"phase {self.index + 1} [{self.kind}] {self.status}: t = {self.t_start:.6g} -> {self.t_end:.6g}",
            f"  {'settle' if self.status == 'settled' else 'final'} state (mean) = ({s[0]:+.6f}, {s[1]:+.6f}, {s[2]:+.6f}), "
            f"Euclidean norm = {self.settle_norm:.9f}",
            f"  nodal norms in [{self.nodal_norm_range[0]:.9f}, {self.nodal_norm_range[1]:.9f}], "
            f"||m_x||^2 = {self.h1_semi_sq:.3e}",
        ]
        if self.target is not None:
            out.append(f"  max_i |m(x_i) - r| = {self.target_error:.3e} "
                       f"(r = ({self.target[0]:+.6f}, {self.target[1]:+.6f}, {self.target[2]:+.6f}))")
        if self.decay_rate is not None:
            line = f"  measured Lyapunov decay rate = {self.decay_rate:.4f}"
            if self.rate_bound is not None:
                line += (f", guaranteed >= {self.rate_bound:.4f}, margin = "
                         f"{self.decay_rate - self.rate_bound:+.4f}")
            out.append(line)
        if self.max_lyap_increase is not None:
            mono = "monotone" if self.max_lyap_increase <= 0 else "NOT monotone"
            out.append(f"  Lyapunov functional {mono} between samples "
                       f"(largest increase {self.max_lyap_increase:.3e})")
        out += [f"  {n}" for n in self.notes]
        return out


@dataclass
class ScenarioResult:
    config: object
    record: object
    summaries: list
    blew_up: bool = False
    message: str = ""
    files: list = field(default_factory=list)

    @property
    def exit_code(self):
        return 2 if self.blew_up else 0

    def summary_text(self):
        out = [f"scenario {self.config.name}: dt = {self.record.dt:.6g}, "
               f"{len(self.record)} samples, final t = {self.record.times[-1]:.6g}"]
        for s in self.summaries:
            out += s.lines()
        if any(s.status == "timeout" for s in self.summaries):
            out.append("WARNING: at least one settle phase timed out before reaching steady_tol")
        if self.blew_up:
            out.append(f"BLOW-UP: {self.message}")
        return "\n".join(out) + "\n"


def summarize(d, p, record):
    diag = record.diagnostics
    mass_col = d.mass_diag.copy()
    mass_col[:-1] += d.mass_upper
    mass_col[1:] += d.mass_lower
    out = []
    for ph in record.phases:
        idx = record.phase_samples(ph.index)
        final = np.asarray(ph.final_state.nodes)
        mean = mass_col @ final / d.length
        norms = np.linalg.norm(final, axis=1)
        kind = ph.rhs
        s = PhaseSummary(
            index=ph.index,
            kind=kind.kind if kind.target is None else f"{kind.kind} k={kind.gain:g}",
            status=ph.status,
            t_start=ph.t_start,
            t_end=ph.t_end,
            settle_state=mean,
            settle_norm=float(np.linalg.norm(mean)),
            nodal_norm_range=(float(norms.min()), float(norms.max())),
            h1_semi_sq=float(np.sum(np.diff(final, axis=0) ** 2) / d.h),
        )
        if kind.target is not None:
            r = kind.target.vector
            s.target = r
            s.target_error = float(np.max(np.linalg.norm(final - r, axis=1)))
            try:
                s.decay_rate = decay_rate(diag.t[idx], diag.lyap[idx])
            except ValueError:
                s.notes.append("decay rate: too few samples in the fit window")
            if kind.kind == "affine":
                s.rate_bound = affine_rate_bound(kind.gain, p.nu, p.length)
        elif ph.index == 0:
            ref = np.array(REFERENCE_SETTLE_STATE)
            s.notes.append(
                f"reference settle state ({ref[0]:g}, {ref[1]:g}, {ref[2]:g}) has norm "
                f"{np.linalg.norm(ref):g}; shown for comparison, not expected"
            )
        # the boundary sample carries the previous phase's functional
        lyap = diag.lyap[record.phase_index == ph.index]
        if len(lyap) > 1:
            s.max_lyap_increase = float(np.max(np.diff(lyap)))
        out.append(s)
    return out


def run_scenario(cfg, write=True):
    """Integrate ``cfg``; write CSV, SVG and metadata files into its output
    directory when ``write`` is set. A blow-up still writes the partial
    trajectory and sets ``blew_up``."""
    cfg = cfg.resolve()
    d = cfg.discretization()
    p = cfg.physical
    config_text = format_config(cfg)
    metadata = {"name": cfg.name, "version": __version__, "config": config_text}
    blew_up, message = False, ""
    try:
        record = run(d, p, cfg.schedule(), cfg.initial_field(), cfg.integrator(), metadata=metadata)
    except BlowUpError as exc:
        if exc.record is None:
            raise
        record, blew_up, message = exc.record, True, str(exc)
    result = ScenarioResult(cfg, record, summarize(d, p, record), blew_up, message)
    if write:
        result.files = _write_outputs(cfg, d, record, result, config_text)
    return result


def _write_outputs(cfg, d, record, result, config_text):
    out = Path(cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    (out / "config.resolved").write_text(config_text)
    files.append(out / "config.resolved")
    meta = dict(record.metadata)
    meta["phases"] = [
        {"index": ph.index, "kind": ph.rhs.kind, "status": ph.status, "t_start": ph.t_start,
         "t_end": ph.t_end, "settle_time": ph.settle_time, "final_rhs_norm": ph.final_rhs_norm}
        for ph in record.phases
    ]
    meta["dt"] = record.dt
    meta["blew_up"] = result.blew_up
    write_metadata(out / "metadata.json", meta)
    files.append(out / "metadata.json")
    if cfg.outputs.csv:
        write_trajectory_csv(out / "trajectory.csv", record.times, record.states)
        write_diagnostics_csv(out / "diagnostics.csv", record.diagnostics)
        files += [out / "trajectory.csv", out / "diagnostics.csv"]
    if cfg.outputs.plot:
        files += write_component_svgs(out, d.x, record.times, record.states, title=cfg.name)
    (out / "summary.txt").write_text(result.summary_text())
    files.append(out / "summary.txt")
    return files
