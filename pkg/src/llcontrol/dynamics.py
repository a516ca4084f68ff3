"""Semi-discrete right-hand sides.

Each evaluator computes the nodal second derivative with the weak Laplacian
and then applies the cross products node by node.
"""
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import SAT_TOL, ControlLaw, Equilibrium, MagnetizationField
from .discretization import weak_laplacian

__all__ = [
    "SaturationWarning",
    "RhsKind",
    "rhs_uncontrolled",
    "rhs_affine",
    "rhs_field",
    "rhs_linear_affine",
    "rhs_linear_field",
    "evaluate",
    "effective_field",
    "control_law_for",
]

KIND_CODES = {
    "uncontrolled": _kernels.UNCONTROLLED,
    "affine": _kernels.AFFINE,
    "field": _kernels.FIELD,
    "linear_affine": _kernels.LINEAR_AFFINE,
    "linear_field": _kernels.LINEAR_FIELD,
}
# kinds whose semi-discrete flow keeps every nodal norm constant
NORM_PRESERVING = ("uncontrolled", "field")


class SaturationWarning(UserWarning):
    """State passed to a norm-preserving RHS is not on the unit sphere."""


@dataclass(frozen=True)
class RhsKind:
    """Which system to evaluate, with its control data.

    ``base`` is the transport direction of the linearized affine system; it
    defaults to the control target.
    """

    kind: str
    gain: Optional[float] = None
    target: Optional[Equilibrium] = None
    base: Optional[Equilibrium] = None

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown rhs kind {self.kind!r}")
        if self.kind == "uncontrolled":
            if self.gain is not None or self.target is not None or self.base is not None:
                raise ValueError("uncontrolled rhs takes no control data")
            return
        _check_gain(self.gain)
        if not isinstance(self.target, Equilibrium):
            raise ValueError(f"{self.kind} rhs needs an Equilibrium target")
        if self.base is not None and self.kind != "linear_affine":
            raise ValueError("only linear_affine takes a separate base point")

    @classmethod
    def from_control(cls, law):
        """RHS of the nonlinear system driven by ``law``."""
        if law.kind == "none":
            return cls("uncontrolled")
        return cls(law.kind, law.gain, law.target)

    @property
    def code(self):
        return KIND_CODES[self.kind]

    @property
    def preserves_norm(self):
        return self.kind in NORM_PRESERVING

    def kernel_params(self):
        """``(k, r, a)`` as plain floats/arrays for the compiled kernels."""
        k = 0.0 if self.gain is None else float(self.gain)
        r = np.zeros(3) if self.target is None else self.target.vector
        if self.base is not None:
            a = self.base.vector
        else:
            a = r.copy()
        return k, r, a


def _check_gain(k):
    if k is None or not np.isfinite(k) or k <= 0:
        raise ValueError(f"control gain must be > 0, got {k}")


def _warn_unsaturated(m, what):
    drift = float(np.max(np.abs(np.linalg.norm(m, axis=1) - 1.0)))
    if drift > SAT_TOL:
        warnings.warn(
            f"{what}: state is not saturated (max | |m| - 1 | = {drift:.2e})",
            SaturationWarning,
            stacklevel=3,
        )


def evaluate(d, p, kind, m):
    """Evaluate the RHS selected by ``kind`` at state ``m``."""
    arr = d.check(m)
    k, r, a = kind.kernel_params()
    out = np.empty_like(arr)
    _kernels.rhs(kind.code, arr, float(p.nu), k, r, a, *d.kernel_args(), out)
    return MagnetizationField(out)


def rhs_uncontrolled(d, p, m):
    """``m x m_xx - nu m x (m x m_xx)``."""
    arr = d.check(m)
    _warn_unsaturated(arr, "rhs_uncontrolled")
    return evaluate(d, p, RhsKind("uncontrolled"), arr)


def rhs_affine(d, p, m, k, r):
    """Uncontrolled RHS plus the additive feedback ``k (r - m)``."""
    _check_gain(k)
    return evaluate(d, p, RhsKind("affine", float(k), _equilibrium(r)), m)


def rhs_field(d, p, m, k, r):
    """Feedback ``u = k (r - m)`` added to ``m_xx`` inside both cross products."""
    _check_gain(k)
    arr = d.check(m)
    _warn_unsaturated(arr, "rhs_field")
    return evaluate(d, p, RhsKind("field", float(k), _equilibrium(r)), arr)


def rhs_linear_affine(d, p, z, a, k, r):
    """``nu z_xx + a x z_xx + k (r - z)``, linearization at ``a``."""
    _check_gain(k)
    return evaluate(d, p, RhsKind("linear_affine", float(k), _equilibrium(r), _equilibrium(a)), z)


def rhs_linear_field(d, p, v, r, k):
    """``nu v_xx + r x v_xx + k v x r - k nu r x (v x r)``."""
    _check_gain(k)
    return evaluate(d, p, RhsKind("linear_field", float(k), _equilibrium(r)), v)


def effective_field(d, m, law=None):
    """``m_xx + u`` for field control, ``m_xx`` otherwise."""
    arr = d.check(m)
    w = np.array(weak_laplacian(d, arr).nodes)
    if law is not None and law.kind == "field":
        w += law.gain * (law.target.vector - arr)
    return w


def _equilibrium(r):
    return r if isinstance(r, Equilibrium) else Equilibrium(r)


def control_law_for(kind):
    """The nonlinear control law behind an RHS kind, if any."""
    if kind.kind == "affine":
        return ControlLaw.affine(kind.gain, kind.target)
    if kind.kind == "field":
        return ControlLaw.applied_field(kind.gain, kind.target)
    return ControlLaw.none()

