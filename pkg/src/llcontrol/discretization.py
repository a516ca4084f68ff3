"""Linear-spline Galerkin discretization on a uniform grid.

Neumann conditions are natural for the weak form, so nothing is imposed on
the boundary rows. Both matrices are tridiagonal and are stored as bands;
``Discretization.mass`` and ``Discretization.stiffness`` give dense copies.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import MagnetizationField, as_nodes

__all__ = [
    "Discretization",
    "build",
    "thomas_solve",
    "weak_laplacian",
    "l2_inner",
    "l2_norm_sq",
    "h1_seminorm_sq",
]

MASS_KINDS = ("consistent", "lumped")


@dataclass(frozen=True, eq=False)
class Discretization:
    n_elements: int
    length: float
    h: float
    mass_kind: str
    mass_lower: np.ndarray
    mass_diag: np.ndarray
    mass_upper: np.ndarray
    stiff_lower: np.ndarray
    stiff_diag: np.ndarray
    stiff_upper: np.ndarray
    # forward-elimination coefficients of the mass matrix
    mass_cprime: np.ndarray
    mass_denom: np.ndarray

    @property
    def n_nodes(self):
        return self.n_elements + 1

    @property
    def x(self):
        """Node coordinates ``x_i = i L / N``."""
        return np.linspace(0.0, self.length, self.n_nodes)

    @property
    def mass(self):
        return _dense(self.mass_lower, self.mass_diag, self.mass_upper)

    @property
    def stiffness(self):
        return _dense(self.stiff_lower, self.stiff_diag, self.stiff_upper)

    def kernel_args(self):
        """Band arrays in the order the compiled RHS expects."""
        return (self.mass_lower, self.mass_cprime, self.mass_denom,
                self.stiff_lower, self.stiff_diag, self.stiff_upper)

    def max_eigenvalue(self):
        """Largest eigenvalue of ``M^-1 K``, the stiffest mode of the weak Laplacian."""
        import scipy.linalg

        return float(scipy.linalg.eigh(self.stiffness, self.mass, eigvals_only=True)[-1])

    def check(self, f, name="field"):
        arr = as_nodes(f)
        if arr.shape[0] != self.n_nodes:
            raise ValueError(
                f"{name} has {arr.shape[0]} nodes; discretization has {self.n_nodes}"
            )
        return np.ascontiguousarray(arr)


def _dense(lower, diag, upper):
    return np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)


def build(n_elements, length=1.0, mass="consistent"):
    """Assemble mass and stiffness matrices for ``n_elements`` hat elements.

    ``mass="lumped"`` replaces the consistent mass matrix by its row sums,
    which turns the weak Laplacian into the ghost-node finite-difference one.
    """
    if isinstance(n_elements, bool) or int(n_elements) != n_elements or n_elements < 2:
        raise ValueError(f"n_elements must be an integer >= 2, got {n_elements!r}")
    if not (np.isfinite(length) and length > 0):
        raise ValueError(f"length must be > 0, got {length!r}")
    if mass not in MASS_KINDS:
        raise ValueError(f"mass must be one of {MASS_KINDS}, got {mass!r}")
    n = int(n_elements)
    length = float(length)
    h = length / n
    nn = n + 1

    off = np.full(n, h / 6.0)
    diag = np.full(nn, 4.0 * h / 6.0)
    diag[0] = diag[-1] = 2.0 * h / 6.0
    if mass == "lumped":
        diag = diag + np.concatenate([off, [0.0]]) + np.concatenate([[0.0], off])
        off = np.zeros(n)

    k_off = np.full(n, -1.0 / h)
    k_diag = np.full(nn, 2.0 / h)
    k_diag[0] = k_diag[-1] = 1.0 / h

    cprime, denom = _kernels.thomas_factor(off, diag, off)
    arrays = [off, diag, off.copy(), k_off, k_diag, k_off.copy(), cprime, denom]
    for a in arrays:
        a.flags.writeable = False
    return Discretization(n, length, h, mass, *arrays)


def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system by the Thomas algorithm.

    ``rhs`` may be a vector or a matrix of right-hand sides (one per column).
    ``lower`` and ``upper`` have one entry fewer than ``diag``.
    """
    lower = np.ascontiguousarray(lower, dtype=float)
    diag = np.ascontiguousarray(diag, dtype=float)
    upper = np.ascontiguousarray(upper, dtype=float)
    b = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if lower.shape != (n - 1,) or upper.shape != (n - 1,):
        raise ValueError("lower and upper bands must have length len(diag) - 1")
    vector = b.ndim == 1
    b2 = np.ascontiguousarray(b[:, None] if vector else b)
    if b2.shape[0] != n:
        raise ValueError(f"rhs has {b2.shape[0]} rows, system has {n}")
    cprime, denom = _kernels.thomas_factor(lower, diag, upper)
    out = np.empty_like(b2)
    _kernels.thomas_solve_factored(lower, cprime, denom, b2, out)
    return out[:, 0] if vector else out


def weak_laplacian(d, f):
    """Nodal second derivative ``w`` with ``M w = -K f``.

    Neumann conditions enter weakly, so ``w`` is only second-order accurate
    at the boundary for fields whose slope vanishes there.
    """
    arr = d.check(f)
    out = np.empty_like(arr)
    _kernels.weak_laplacian(arr, *d.kernel_args(), out)
    return MagnetizationField(out)


def _mass_apply(d, g):
    out = np.empty_like(g)
    _kernels.tridiag_matvec(d.mass_lower, d.mass_diag, d.mass_upper, g, out)
    return out


def l2_inner(d, f, g):
    """Discrete L2 inner product, summed over the three components."""
    a = d.check(f, "f")
    b = d.check(g, "g")
    return float(np.sum(a * _mass_apply(d, b)))


def l2_norm_sq(d, f):
    return l2_inner(d, f, f)


def h1_seminorm_sq(d, f):
    """``||f_x||^2`` for the piecewise-linear interpolant.

    Evaluated from element slopes rather than ``f^T K f``; the two agree
    algebraically, but the difference form is exactly zero for constants.
    """
    a = d.check(f)
    diff = np.diff(a, axis=0)
    return float(np.sum(diff * diff) / d.h)
