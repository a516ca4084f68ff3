"""Finite-difference reference right-hand sides.

Written independently of the Galerkin code: ghost-node central differences
(``f_{-1} = f_1`` and ``f_{N+1} = f_{N-1}``) and ``numpy.cross``. On smooth
Neumann fields both discretizations approach the continuum operator at
second order, so their difference shrinks like ``h^2``.
"""
import numpy as np

__all__ = ["fd_laplacian", "fd_rhs"]


def fd_laplacian(f, h):
    f = np.asarray(f, dtype=float)
    w = np.empty_like(f)
    w[1:-1] = (f[:-2] - 2 * f[1:-1] + f[2:]) / h ** 2
    w[0] = 2 * (f[1] - f[0]) / h ** 2
    w[-1] = 2 * (f[-2] - f[-1]) / h ** 2
    return w


def fd_rhs(kind, m, h, nu, k=0.0, r=None, a=None):
    """Nodal RHS of ``kind`` with the finite-difference Laplacian."""
    m = np.asarray(m, dtype=float)
    r = np.zeros(3) if r is None else np.asarray(r, dtype=float)
    a = r if a is None else np.asarray(a, dtype=float)
    w = fd_laplacian(m, h)
    x = np.cross
    if kind == "uncontrolled":
        return x(m, w) - nu * x(m, x(m, w))
    if kind == "affine":
        return x(m, w) - nu * x(m, x(m, w)) + k * (r - m)
    if kind == "field":
        g = w + k * (r - m)
        return x(m, g) - nu * x(m, x(m, g))
    if kind == "linear_affine":
        return nu * w + x(a, w) + k * (r - m)
    if kind == "linear_field":
        return nu * w + x(r, w) + k * x(m, r) - k * nu * x(r, x(m, r))
    raise ValueError(f"unknown kind {kind!r}")
