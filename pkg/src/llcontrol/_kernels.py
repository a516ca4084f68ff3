"""Compiled inner loops.

Everything here works on raw ``(n_nodes, 3)`` float arrays and tridiagonal
bands; validation lives in the public modules.
"""
import numpy as np
from numba import njit

UNCONTROLLED = 0
AFFINE = 1
FIELD = 2
LINEAR_AFFINE = 3
LINEAR_FIELD = 4

STATUS_COMPLETED = 0
STATUS_SETTLED = 1
STATUS_BLOWUP = 2

BLOWUP_NORM = 1e3


@njit(cache=True)
def thomas_factor(lower, diag, upper):
    """Forward-elimination coefficients for a tridiagonal matrix.

    ``lower[i]`` couples row ``i + 1`` to column ``i``; ``upper[i]`` couples
    row ``i`` to column ``i + 1``. No pivoting, so the matrix must be
    diagonally dominant (the mass matrix is).
    """
    n = diag.shape[0]
    cprime = np.zeros(n)
    denom = np.empty(n)
    denom[0] = diag[0]
    if n > 1:
        cprime[0] = upper[0] / denom[0]
    for i in range(1, n):
        denom[i] = diag[i] - lower[i - 1] * cprime[i - 1]
        if i < n - 1:
            cprime[i] = upper[i] / denom[i]
    return cprime, denom


@njit(cache=True)
def thomas_solve_factored(lower, cprime, denom, rhs, out):
    n, ncol = rhs.shape
    for c in range(ncol):
        out[0, c] = rhs[0, c] / denom[0]
    for i in range(1, n):
        for c in range(ncol):
            out[i, c] = (rhs[i, c] - lower[i - 1] * out[i - 1, c]) / denom[i]
    for i in range(n - 2, -1, -1):
        for c in range(ncol):
            out[i, c] -= cprime[i] * out[i + 1, c]


@njit(cache=True)
def tridiag_matvec(lower, diag, upper, f, out):
    n, ncol = f.shape
    for i in range(n):
        for c in range(ncol):
            s = diag[i] * f[i, c]
            if i > 0:
                s += lower[i - 1] * f[i - 1, c]
            if i < n - 1:
                s += upper[i] * f[i + 1, c]
            out[i, c] = s


@njit(cache=True)
def weak_laplacian(f, m_lo, m_cp, m_den, k_lo, k_di, k_up, out):
    """``out`` solves ``M out = -K f`` column by column."""
    tmp = np.empty_like(f)
    tridiag_matvec(k_lo, k_di, k_up, f, tmp)
    for i in range(f.shape[0]):
        for c in range(3):
            tmp[i, c] = -tmp[i, c]
    thomas_solve_factored(m_lo, m_cp, m_den, tmp, out)


@njit(cache=True)
def mass_norm_sq(f, m_lo, m_di, m_up):
    n = f.shape[0]
    s = 0.0
    for i in range(n):
        for c in range(3):
            row = m_di[i] * f[i, c]
            if i > 0:
                row += m_lo[i - 1] * f[i - 1, c]
            if i < n - 1:
                row += m_up[i] * f[i + 1, c]
            s += f[i, c] * row
    return s


@njit(cache=True)
def _precess_damp(m, g, nu, out):
    # out = m x g - nu m x (m x g), nodewise
    for i in range(m.shape[0]):
        m0, m1, m2 = m[i, 0], m[i, 1], m[i, 2]
        g0, g1, g2 = g[i, 0], g[i, 1], g[i, 2]
        c0 = m1 * g2 - m2 * g1
        c1 = m2 * g0 - m0 * g2
        c2 = m0 * g1 - m1 * g0
        out[i, 0] = c0 - nu * (m1 * c2 - m2 * c1)
        out[i, 1] = c1 - nu * (m2 * c0 - m0 * c2)
        out[i, 2] = c2 - nu * (m0 * c1 - m1 * c0)


@njit(cache=True)
def rhs(code, m, nu, k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, out):
    """Right-hand side selected by ``code`` (see module constants)."""
    n = m.shape[0]
    w = np.empty_like(m)
    weak_laplacian(m, m_lo, m_cp, m_den, k_lo, k_di, k_up, w)
    if code == UNCONTROLLED:
        _precess_damp(m, w, nu, out)
    elif code == AFFINE:
        _precess_damp(m, w, nu, out)
        for i in range(n):
            for c in range(3):
                out[i, c] += k * (r[c] - m[i, c])
    elif code == FIELD:
        for i in range(n):
            for c in range(3):
                w[i, c] += k * (r[c] - m[i, c])
        _precess_damp(m, w, nu, out)
    elif code == LINEAR_AFFINE:
        for i in range(n):
            w0, w1, w2 = w[i, 0], w[i, 1], w[i, 2]
            out[i, 0] = nu * w0 + (a[1] * w2 - a[2] * w1) + k * (r[0] - m[i, 0])
            out[i, 1] = nu * w1 + (a[2] * w0 - a[0] * w2) + k * (r[1] - m[i, 1])
            out[i, 2] = nu * w2 + (a[0] * w1 - a[1] * w0) + k * (r[2] - m[i, 2])
    else:
        for i in range(n):
            w0, w1, w2 = w[i, 0], w[i, 1], w[i, 2]
            v0, v1, v2 = m[i, 0], m[i, 1], m[i, 2]
            # v x r
            x0 = v1 * r[2] - v2 * r[1]
            x1 = v2 * r[0] - v0 * r[2]
            x2 = v0 * r[1] - v1 * r[0]
            out[i, 0] = nu * w0 + (r[1] * w2 - r[2] * w1) + k * x0 - k * nu * (r[1] * x2 - r[2] * x1)
            out[i, 1] = nu * w1 + (r[2] * w0 - r[0] * w2) + k * x1 - k * nu * (r[2] * x0 - r[0] * x2)
            out[i, 2] = nu * w2 + (r[0] * w1 - r[1] * w0) + k * x2 - k * nu * (r[0] * x1 - r[1] * x0)


@njit(cache=True)
def _renormalize(m):
    for i in range(m.shape[0]):
        s = np.sqrt(m[i, 0] ** 2 + m[i, 1] ** 2 + m[i, 2] ** 2)
        for c in range(3):
            m[i, c] /= s


@njit(cache=True)
def _all_finite(m):
    for i in range(m.shape[0]):
        for c in range(3):
            if not np.isfinite(m[i, c]):
                return False
    return True


@njit(cache=True)
def rk4_step(code, m, dt, nu, k, r, a, project, m_lo, m_cp, m_den, k_lo, k_di, k_up, k1, out):
    """Classical RK4 step from ``m`` given ``k1 = rhs(m)``; result in ``out``."""
    k2 = np.empty_like(m)
    k3 = np.empty_like(m)
    k4 = np.empty_like(m)
    tmp = np.empty_like(m)
    half = 0.5 * dt
    tmp[:, :] = m + half * k1
    rhs(code, tmp, nu, k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, k2)
    tmp[:, :] = m + half * k2
    rhs(code, tmp, nu, k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, k3)
    tmp[:, :] = m + dt * k3
    rhs(code, tmp, nu, k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, k4)
    sixth = dt / 6.0
    out[:, :] = m + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if project and (code == UNCONTROLLED or code == FIELD):
        _renormalize(out)


@njit(cache=True)
def advance(code, m, dt, n_steps, nu, k, r, a, project, steady_tol, check_settle,
            record_every, step_offset, m_lo, m_di, m_up, m_cp, m_den, k_lo, k_di, k_up,
            rec_states, rec_steps):
    """Advance ``m`` in place by up to ``n_steps`` RK4 steps.

    Settling is tested on the RHS at the start of every step, so the settle
    step does not depend on ``record_every``. States whose global step index
    (``step_offset`` + local) is a multiple of ``record_every`` are written to
    the record buffers. On blow-up ``m`` keeps the last finite state.

    Returns ``(steps_taken, status, n_recorded, rhs_norm)``.
    """
    k1 = np.empty_like(m)
    new = np.empty_like(m)
    n_rec = 0
    rhs_norm = np.nan
    for s in range(n_steps):
        rhs(code, m, nu, k, r, a, m_lo, m_cp, m_den, k_lo, k_di, k_up, k1)
        rhs_norm = np.sqrt(mass_norm_sq(k1, m_lo, m_di, m_up))
        if check_settle and rhs_norm < steady_tol:
            return s, STATUS_SETTLED, n_rec, rhs_norm
        rk4_step(code, m, dt, nu, k, r, a, project, m_lo, m_cp, m_den,
                 k_lo, k_di, k_up, k1, new)
        if not _all_finite(new) or mass_norm_sq(new, m_lo, m_di, m_up) > BLOWUP_NORM ** 2:
            return s, STATUS_BLOWUP, n_rec, rhs_norm
        m[:, :] = new
        if (step_offset + s + 1) % record_every == 0:
            rec_states[n_rec] = m
            rec_steps[n_rec] = step_offset + s + 1
            n_rec += 1
    return n_steps, STATUS_COMPLETED, n_rec, rhs_norm
