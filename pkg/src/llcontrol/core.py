"""Domain types and pointwise 3-vector algebra.

Vectors are plain ``numpy`` arrays whose last axis has length 3, so the
helpers below work equally on a single vector and on a whole nodal field.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "SAT_TOL",
    "EQUILIBRIUM_TOL",
    "cross",
    "triple",
    "MagnetizationField",
    "Equilibrium",
    "PhysicalParams",
    "ControlLaw",
]

SAT_TOL = 1e-6
EQUILIBRIUM_TOL = 1e-12


def cross(a, b):
    """Right-handed cross product along the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1)


def triple(a, b, c):
    """Vector triple product ``a x (b x c)``."""
    return cross(a, cross(b, c))


class MagnetizationField:
    """Nodal values of a 3-vector field on a uniform 1D grid.

    The node array has shape ``(N + 1, 3)`` and is stored read-only, so a
    field can be shared between trajectory records without defensive copies.
    ``saturated=True`` asserts that every nodal vector has unit length to
    within ``sat_tol``.
    """

    __slots__ = ("_nodes", "saturated", "sat_tol")

    def __init__(self, nodes, saturated=False, sat_tol=SAT_TOL):
        arr = np.array(nodes, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"nodes must have shape (n_nodes, 3), got {arr.shape}")
        if arr.shape[0] < 3:
            raise ValueError(f"need at least 3 nodes, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field has non-finite components")
        if saturated:
            drift = np.max(np.abs(np.linalg.norm(arr, axis=1) - 1.0))
            if drift > sat_tol:
                raise ValueError(
                    f"field tagged saturated but max | |m| - 1 | = {drift:.3e} > {sat_tol:.1e}"
                )
        arr.flags.writeable = False
        self._nodes = arr
        self.saturated = bool(saturated)
        self.sat_tol = sat_tol

    @property
    def nodes(self):
        return self._nodes

    @property
    def n_nodes(self):
        return self._nodes.shape[0]

    def __len__(self):
        return self._nodes.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._nodes
        return self._nodes.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, MagnetizationField):
            return NotImplemented
        return np.array_equal(self._nodes, other._nodes)

    __hash__ = None

    def __repr__(self):
        return f"MagnetizationField(n_nodes={self.n_nodes}, saturated={self.saturated})"

    def copy(self):
        return MagnetizationField(self._nodes, saturated=False)

    def norms(self):
        """Euclidean norm at each node."""
        return np.linalg.norm(self._nodes, axis=1)

    def saturation_drift(self):
        """``max_i | |m(x_i)| - 1 |``."""
        return float(np.max(np.abs(self.norms() - 1.0)))

    @classmethod
    def constant(cls, a, n_nodes):
        a = np.asarray(a, dtype=float)
        return cls(np.tile(a, (n_nodes, 1)))

    @classmethod
    def from_function(cls, func, n_elements, length=1.0, saturated=False):
        """Sample ``func(x) -> (n, 3)`` at the grid nodes ``x_i = i L / N``."""
        x = np.linspace(0.0, length, n_elements + 1)
        return cls(np.asarray(func(x), dtype=float), saturated=saturated)


def as_nodes(f):
    """Node array of a field or array-like, without copying when possible."""
    if isinstance(f, MagnetizationField):
        return f.nodes
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an (n_nodes, 3) array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Equilibrium:
    """A constant unit vector, i.e. a member of the equilibrium set."""

    a: tuple

    def __init__(self, a):
        vec = np.asarray(a, dtype=float).reshape(-1)
        if vec.shape != (3,):
            raise ValueError(f"equilibrium must be a 3-vector, got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValueError("equilibrium has non-finite components")
        norm = float(np.sqrt(vec @ vec))
        if abs(norm - 1.0) > EQUILIBRIUM_TOL:
            raise ValueError(f"equilibrium must have unit norm, got |a| = {norm!r}")
        object.__setattr__(self, "a", tuple(float(v) for v in vec))

    @property
    def vector(self):
        return np.array(self.a)

    @classmethod
    def normalized(cls, v):
        """Equilibrium along the direction of ``v``."""
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    def field(self, n_nodes):
        return MagnetizationField.constant(self.a, n_nodes)


@dataclass(frozen=True)
class PhysicalParams:
    """Damping ``nu >= 0`` and domain length ``length > 0``."""

    nu: float = 0.02
    length: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.nu) and self.nu >= 0):
            raise ValueError(f"damping nu must be >= 0, got {self.nu}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be > 0, got {self.length}")


CONTROL_KINDS = ("none", "affine", "field")


@dataclass(frozen=True)
class ControlLaw:
    """Proportional feedback ``u = k (r - m)``.

    ``kind`` selects how ``u`` enters the dynamics: ``"affine"`` adds it to the
    right-hand side, ``"field"`` adds it to the effective field inside both
    cross products, ``"none"`` leaves the system uncontrolled.
    """

    kind: str = "none"
    gain: Optional[float] = None
    target: Optional[Equilibrium] = field(default=None)

    def __post_init__(self):
        if self.kind not in CONTROL_KINDS:
            raise ValueError(f"unknown control kind {self.kind!r}; expected one of {CONTROL_KINDS}")
        if self.kind == "none":
            if self.gain is not None or self.target is not None:
                raise ValueError("uncontrolled law takes no gain or target")
            return
        if self.gain is None or not self.gain > 0:
            raise ValueError(f"control gain must be > 0, got {self.gain}")
        if not isinstance(self.target, Equilibrium):
            raise ValueError("controlled law needs an Equilibrium target")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def affine(cls, gain, target):
        if not isinstance(target, Equilibrium):
            target = Equilibrium(target)
        return cls("affine", float(gain), target)

    @classmethod
    def applied_field(cls, gain, target):
        if not isinstance(target, Equilibrium):
            target = Equilibrium(target)
        return cls("field", float(gain), target)
