"""Lyapunov functionals, lemma checks and decay-rate estimates.

All integrals use the same discrete inner products as the dynamics, so a
Lyapunov value computed here is the one the semi-discrete flow actually
dissipates.
"""
from dataclasses import dataclass, fields

import numpy as np

from .core import Equilibrium, as_nodes, cross
from .discretization import h1_seminorm_sq, l2_inner, weak_laplacian

__all__ = [
    "DegenerateFieldError",
    "lyapunov_affine",
    "lyapunov_field",
    "lyapunov_l2",
    "exchange_energy",
    "distance_to_equilibria_sq",
    "lemma3_integral",
    "nodal_gradient",
    "lemma4_ratio",
    "decay_rate",
    "DiagnosticSample",
    "DiagnosticSeries",
    "trajectory_diagnostics",
]

DEGENERATE_DENOMINATOR = 1e-14


class DegenerateFieldError(ValueError):
    """A ratio diagnostic has a vanishing denominator."""


def _vec(r):
    return r.vector if isinstance(r, Equilibrium) else np.asarray(r, dtype=float)


def lyapunov_affine(d, m, r):
    """``1/2 ||m - r||^2 + 1/2 ||m_x||^2``."""
    err = d.check(m) - _vec(r)
    return 0.5 * l2_inner(d, err, err) + 0.5 * h1_seminorm_sq(d, m)


def lyapunov_field(d, m, r, k):
    """``k ||m - r||^2 + ||m_x||^2``."""
    if not k > 0:
        raise ValueError(f"gain must be > 0, got {k}")
    err = d.check(m) - _vec(r)
    return k * l2_inner(d, err, err) + h1_seminorm_sq(d, m)


def lyapunov_l2(d, z, r):
    """``1/2 ||z - r||^2``."""
    err = d.check(z) - _vec(r)
    return 0.5 * l2_inner(d, err, err)


def exchange_energy(d, m):
    """``1/2 ||m_x||^2``; non-increasing along the uncontrolled flow."""
    return 0.5 * h1_seminorm_sq(d, m)


def distance_to_equilibria_sq(d, m):
    """Squared L2 distance from ``m`` to the nearest constant unit field.

    ``min_|a|=1 ||m - a||^2 = ||m||^2 - 2 |int m| + L``.
    """
    arr = d.check(m)
    mean = _integral(d, arr)
    return l2_inner(d, arr, arr) - 2.0 * np.linalg.norm(mean) + d.length


def _integral(d, arr):
    # int m dx = 1^T M m, componentwise
    return _mass_colsum(d) @ arr


def lemma3_integral(d, m, r):
    """``int (m - r) . (m x m_xx) dx`` with the weak Laplacian for ``m_xx``.

    Zero in the continuum for Neumann fields; the consistent-mass quadrature
    leaves an O(h^2) residual, the lumped one cancels exactly.
    """
    arr = d.check(m)
    w = weak_laplacian(d, arr).nodes
    return l2_inner(d, arr - _vec(r), cross(arr, w))


def nodal_gradient(d, m):
    """Second-order nodal ``m_x``: central differences inside, one-sided at the ends."""
    arr = as_nodes(m)
    h = d.h
    g = np.empty_like(arr)
    g[1:-1] = (arr[2:] - arr[:-2]) / (2 * h)
    g[0] = (-3 * arr[0] + 4 * arr[1] - arr[2]) / (2 * h)
    g[-1] = (3 * arr[-1] - 4 * arr[-2] + arr[-3]) / (2 * h)
    return g


def lemma4_ratio(d, m):
    """``||m x m_x|| / ||m x m_xx||``; the continuum bound is ``4 L^2``.

    Raises :class:`DegenerateFieldError` when ``||m x m_xx||`` is below
    ``1e-14`` (for instance a constant field).
    """
    arr = d.check(m)
    num = cross(arr, nodal_gradient(d, arr))
    den = cross(arr, weak_laplacian(d, arr).nodes)
    den_norm = np.sqrt(l2_inner(d, den, den))
    if den_norm < DEGENERATE_DENOMINATOR:
        raise DegenerateFieldError(f"||m x m_xx|| = {den_norm:.3e} is degenerate")
    return float(np.sqrt(l2_inner(d, num, num)) / den_norm)


def decay_rate(t, v, window=(0.2, 0.8)):
    """Empirical exponential rate of ``v(t)``: minus the LSQ slope of ``log v``.

    ``window`` selects a fraction of the time span; the default drops the
    first 20 % (transient) and last 20 % (floor). Needs at least 10 samples
    inside the window, all positive.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("t and v must be 1-D arrays of equal length")
    lo, hi = window
    if not 0 <= lo < hi <= 1:
        raise ValueError(f"bad window {window}")
    t0, t1 = t[0], t[-1]
    sel = (t >= t0 + lo * (t1 - t0)) & (t <= t0 + hi * (t1 - t0))
    if np.count_nonzero(sel) < 10:
        raise ValueError(f"need at least 10 samples in the window, got {np.count_nonzero(sel)}")
    vs = v[sel]
    if np.any(vs <= 0) or not np.all(np.isfinite(vs)):
        raise ValueError("decay_rate needs positive finite values in the window")
    slope = np.polyfit(t[sel], np.log(vs), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class DiagnosticSample:
    t: float
    l2_err_sq: float
    h1_semi_sq: float
    lyap: float
    sat_drift: float
    lemma3: float
    field_dissipation: float


@dataclass
class DiagnosticSeries:
    """Column arrays of :class:`DiagnosticSample`, one entry per recorded sample.

    ``l2_err_sq`` is measured against the phase target; uncontrolled phases
    have no target and report the squared distance to the nearest
    equilibrium instead. ``lyap`` is the functional matching the phase kind:
    exchange energy when uncontrolled, ``lyapunov_affine``,
    ``lyapunov_field`` or ``lyapunov_l2`` otherwise.
    """

    t: np.ndarray
    l2_err_sq: np.ndarray
    h1_semi_sq: np.ndarray
    lyap: np.ndarray
    sat_drift: np.ndarray
    lemma3: np.ndarray
    field_dissipation: np.ndarray

    COLUMNS = ("t", "l2_err_sq", "h1_semi_sq", "lyap", "sat_drift", "lemma3", "field_dissipation")

    def __len__(self):
        return len(self.t)

    def __getitem__(self, j):
        return DiagnosticSample(*(float(getattr(self, f.name)[j]) for f in fields(self)))

    def as_array(self):
        return np.column_stack([getattr(self, c) for c in self.COLUMNS])


def _batched_mass_inner(d, a, b):
    mb = d.mass_diag[None, :, None] * b
    mb[:, :-1] += d.mass_upper[None, :, None] * b[:, 1:]
    mb[:, 1:] += d.mass_lower[None, :, None] * b[:, :-1]
    return np.einsum("sic,sic->s", a, mb)


def _laplacian_matrix(d):
    eye = np.eye(d.n_nodes)
    cols = [weak_laplacian(d, np.column_stack([e, e, e])).nodes[:, 0] for e in eye]
    return np.column_stack(cols)


def trajectory_diagnostics(d, p, record):
    """Evaluate :class:`DiagnosticSeries` for every sample of ``record``."""
    states = record.states
    n_s = states.shape[0]
    lap = _laplacian_matrix(d)
    w = np.einsum("ij,sjc->sic", lap, states)
    diff = np.diff(states, axis=1)
    h1 = np.einsum("sic,sic->s", diff, diff) / d.h
    sat = np.max(np.abs(np.linalg.norm(states, axis=2) - 1.0), axis=1)

    l2_err = np.empty(n_s)
    lyap = np.empty(n_s)
    lem3 = np.empty(n_s)
    diss = np.empty(n_s)
    for i, ph in enumerate(record.phases):
        sel = record.phase_index == i
        if not np.any(sel):
            continue
        s, ws = states[sel], w[sel]
        kind = ph.rhs
        if kind.target is None:
            integral = np.einsum("i,sic->sc", _mass_colsum(d), s)
            norm_int = np.linalg.norm(integral, axis=1)
            l2_err[sel] = _batched_mass_inner(d, s, s) - 2 * norm_int + d.length
            ref = np.where(norm_int[:, None] > 1e-12, integral / np.maximum(norm_int, 1e-300)[:, None], 0.0)
            err = s - ref[:, None, :]
            lyap[sel] = 0.5 * h1[sel]
        else:
            r = kind.target.vector
            err = s - r
            l2_err[sel] = _batched_mass_inner(d, err, err)
            if kind.kind == "affine":
                lyap[sel] = 0.5 * l2_err[sel] + 0.5 * h1[sel]
            elif kind.kind == "field":
                lyap[sel] = kind.gain * l2_err[sel] + h1[sel]
            else:
                lyap[sel] = 0.5 * l2_err[sel]
        lem3[sel] = _batched_mass_inner(d, err, cross(s, ws))
        g = ws + kind.gain * (kind.target.vector - s) if kind.kind == "field" else ws
        c = cross(s, g)
        diss[sel] = p.nu * _batched_mass_inner(d, c, c)

    return DiagnosticSeries(
        t=np.array(record.times, dtype=float),
        l2_err_sq=l2_err,
        h1_semi_sq=h1,
        lyap=lyap,
        sat_drift=sat,
        lemma3=lem3,
        field_dissipation=diss,
    )


def _mass_colsum(d):
    col = d.mass_diag.copy()
    col[:-1] += d.mass_upper
    col[1:] += d.mass_lower
    return col
