"""Fixed-step RK4 time integration and phase-by-phase scenario runs."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import ControlLaw, MagnetizationField
from .dynamics import RhsKind

__all__ = [
    "BlowUpError",
    "IntegratorConfig",
    "Phase",
    "ControlSchedule",
    "PhaseResult",
    "TrajectoryRecord",
    "default_dt",
    "step_rk4",
    "run",
]

PROJECTIONS = ("off", "renormalize")
CHUNK_STEPS = 50_000


class BlowUpError(FloatingPointError):
    """The state became non-finite or left the ``10^3`` L2 ball.

    ``record`` holds the trajectory up to the last finite state, when one
    is available.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


def default_dt(d, fraction=0.2):
    """``fraction / lambda_max`` where ``lambda_max`` is the stiffest Laplacian mode.

    The precession term puts that mode on the imaginary axis, where the RK4
    stability interval ends near 2.83, so ``fraction`` well below that keeps
    both stability and a small saturation drift.
    """
    return fraction / d.max_eigenvalue()


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_max: float = 200.0
    projection: str = "off"
    steady_tol: float = 1e-8
    record_every: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_max > self.dt:
            raise ValueError(f"t_max must exceed dt, got t_max={self.t_max}, dt={self.dt}")
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}, got {self.projection!r}")
        if not self.steady_tol > 0:
            raise ValueError(f"steady_tol must be > 0, got {self.steady_tol}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every}")


@dataclass(frozen=True)
class Phase:
    """One leg of a schedule: a dynamics choice plus a termination rule.

    ``until="settle"`` runs until the RHS norm drops below ``steady_tol`` (or
    ``t_max`` elapses); ``until="duration"`` runs for exactly ``duration``.
    """

    rhs: RhsKind
    until: str = "settle"
    duration: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.rhs, ControlLaw):
            object.__setattr__(self, "rhs", RhsKind.from_control(self.rhs))
        if not isinstance(self.rhs, RhsKind):
            raise TypeError("phase needs a ControlLaw or RhsKind")
        if self.until == "settle":
            if self.duration is not None:
                raise ValueError("settle phase takes no duration")
        elif self.until == "duration":
            if self.duration is None or not self.duration > 0:
                raise ValueError(f"phase duration must be > 0, got {self.duration}")
        else:
            raise ValueError(f"until must be 'settle' or 'duration', got {self.until!r}")

    @classmethod
    def settle(cls, control):
        return cls(control, "settle")

    @classmethod
    def fixed(cls, control, duration):
        return cls(control, "duration", float(duration))

    @property
    def law(self):
        from .dynamics import control_law_for

        return control_law_for(self.rhs)


@dataclass(frozen=True)
class ControlSchedule:
    phases: tuple

    def __init__(self, phases):
        phases = tuple(phases)
        if not phases:
            raise ValueError("schedule needs at least one phase")
        for ph in phases:
            if not isinstance(ph, Phase):
                raise TypeError(f"schedule entries must be Phase, got {type(ph).__name__}")
        object.__setattr__(self, "phases", phases)

    def __len__(self):
        return len(self.phases)

    def __iter__(self):
        return iter(self.phases)

    def __getitem__(self, i):
        return self.phases[i]


@dataclass
class PhaseResult:
    index: int
    rhs: RhsKind
    t_start: float
    t_end: float
    steps: int
    # "settled", "timeout", "completed" or "blowup"
    status: str
    settle_time: Optional[float]
    final_rhs_norm: float
    initial_state: MagnetizationField
    final_state: MagnetizationField


@dataclass
class TrajectoryRecord:
    """Recorded snapshots, per-sample phase labels and phase markers.

    ``phase_index[j]`` is the phase that produced sample ``j``; a phase
    boundary sample belongs to the phase that ended there and doubles as
    the initial state of the next one.
    """

    dt: float
    times: np.ndarray
    states: np.ndarray
    phase_index: np.ndarray
    phases: list
    metadata: dict = field(default_factory=dict)
    diagnostics: object = None

    def __len__(self):
        return len(self.times)

    def snapshot(self, j):
        return MagnetizationField(self.states[j])

    @property
    def final_state(self):
        return MagnetizationField(self.states[-1])

    def phase_samples(self, i):
        """Sample indices covering phase ``i``, boundaries included."""
        ph = self.phases[i]
        return np.flatnonzero((self.times >= ph.t_start) & (self.times <= ph.t_end))


def step_rk4(d, p, kind, m, dt, projection="off"):
    """One classical RK4 step of the RHS selected by ``kind``."""
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    if projection not in PROJECTIONS:
        raise ValueError(f"projection must be one of {PROJECTIONS}, got {projection!r}")
    arr = np.array(d.check(m))
    k, r, a = kind.kernel_params()
    m_lo, m_cp, m_den, k_lo, k_di, k_up = d.kernel_args()
    k1 = np.empty_like(arr)
    out = np.empty_like(arr)
    _kernels.rhs(kind.code, arr, float(p.nu), k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, k1)
    _kernels.rk4_step(kind.code, arr, float(dt), float(p.nu), k, r, a, projection == "renormalize",
                      m_lo, m_cp, m_den, k_lo, k_di, k_up, k1, out)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite state after RK4 step of size {dt}")
    return MagnetizationField(out)


def _as_schedule(schedule):
    if isinstance(schedule, ControlSchedule):
        return schedule
    if isinstance(schedule, Phase):
        return ControlSchedule([schedule])
    return ControlSchedule(schedule)


def run(d, p, schedule, m0, cfg, metadata=None, diagnostics=True):
    """Integrate ``schedule`` phase by phase starting from ``m0``.

    The final state of each phase seeds the next. Settle phases that do not
    settle within ``cfg.t_max`` end with status ``"timeout"`` and the run
    continues. A blow-up raises :class:`BlowUpError` carrying the partial
    record.
    """
    schedule = _as_schedule(schedule)
    m = np.array(d.check(m0, "m0"), dtype=float)
    dt = float(cfg.dt)
    every = int(cfg.record_every)
    project = cfg.projection == "renormalize"
    m_lo, m_cp, m_den, k_lo, k_di, k_up = d.kernel_args()

    steps_rec = [np.array([0], dtype=np.int64)]
    states_rec = [m[None].copy()]
    phase_rec = [np.array([0], dtype=np.int64)]
    phases = []
    step = 0
    blown = False

    for i, ph in enumerate(schedule):
        kind = ph.rhs
        k, r, a = kind.kernel_params()
        settle = ph.until == "settle"
        if settle:
            n_total = int(math.ceil(cfg.t_max / dt - 1e-9))
        else:
            n_total = int(round(ph.duration / dt))
        start_step = step
        start_state = MagnetizationField(m)
        done = 0
        status = _kernels.STATUS_COMPLETED
        rhs_norm = math.nan
        while done < n_total:
            chunk = min(CHUNK_STEPS, n_total - done)
            buf = np.empty((chunk // every + 1, m.shape[0], 3))
            buf_steps = np.empty(chunk // every + 1, dtype=np.int64)
            taken, status, n_rec, rhs_norm = _kernels.advance(
                kind.code, m, dt, chunk, float(p.nu), k, r, a, project,
                float(cfg.steady_tol), settle, every, step,
                m_lo, d.mass_diag, d.mass_upper, m_cp, m_den, k_lo, k_di, k_up,
                buf, buf_steps,
            )
            if n_rec:
                steps_rec.append(buf_steps[:n_rec].copy())
                states_rec.append(buf[:n_rec].copy())
                phase_rec.append(np.full(n_rec, i, dtype=np.int64))
            done += taken
            step += taken
            if status != _kernels.STATUS_COMPLETED:
                break
        if steps_rec[-1][-1] != step:
            steps_rec.append(np.array([step], dtype=np.int64))
            states_rec.append(m[None].copy())
            phase_rec.append(np.array([i], dtype=np.int64))

        if status == _kernels.STATUS_SETTLED:
            label = "settled"
        elif status == _kernels.STATUS_BLOWUP:
            label = "blowup"
        else:
            label = "timeout" if settle else "completed"
        phases.append(PhaseResult(
            index=i,
            rhs=kind,
            t_start=start_step * dt,
            t_end=step * dt,
            steps=step - start_step,
            status=label,
            settle_time=step * dt if label == "settled" else None,
            final_rhs_norm=float(rhs_norm),
            initial_state=start_state,
            final_state=MagnetizationField(m),
        ))
        if label == "blowup":
            blown = True
            break

    steps_all = np.concatenate(steps_rec)
    record = TrajectoryRecord(
        dt=dt,
        times=steps_all * dt,
        states=np.concatenate(states_rec),
        phase_index=np.concatenate(phase_rec),
        phases=phases,
        metadata=dict(metadata or {}),
    )
    if diagnostics:
        from .diagnostics import trajectory_diagnostics

        record.diagnostics = trajectory_diagnostics(d, p, record)
    if blown:
        ph = phases[-1]
        raise BlowUpError(
            f"phase {ph.index} ({ph.rhs.kind}) blew up at t = {ph.t_end:.6g}", record
        )
    return record
