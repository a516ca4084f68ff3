"""Test fields: smooth Neumann-compatible profiles and random samplers."""
import numpy as np

from .core import MagnetizationField

__all__ = [
    "spherical",
    "SMOOTH_FIELDS",
    "winding_field",
    "smooth_field",
    "random_saturated",
    "random_band_limited",
    "random_vectors",
]


def spherical(theta, phi):
    """Unit vectors from polar angle ``theta`` and azimuth ``phi``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _cos(j, x, length):
    return np.cos(j * np.pi * x / length)


# Angles built from cos(j pi x / L) have zero slope at both ends, so the
# fields satisfy the Neumann condition exactly.
SMOOTH_FIELDS = {
    "B": lambda x, L=1.0: spherical(1.0 + 0.5 * _cos(1, x, L), 2.0 * _cos(2, x, L)),
    "C": lambda x, L=1.0: spherical(np.pi / 2 + 0.8 * _cos(1, x, L),
                                    3.0 * _cos(1, x, L) + 0.5 * _cos(3, x, L)),
    "D": lambda x, L=1.0: spherical(1.2 + 0.3 * _cos(1, x, L), 0.5 + 1.0 * _cos(1, x, L)),
}


def smooth_field(name, n_elements, length=1.0):
    func = SMOOTH_FIELDS[name]
    return MagnetizationField.from_function(lambda x: func(x, length), n_elements, length,
                                            saturated=True)


def winding_field(n_elements, length=1.0, winding=1):
    """``(sin 2 pi w x/L, cos 2 pi w x/L, 0)``."""
    x = np.linspace(0.0, length, n_elements + 1)
    ang = 2 * np.pi * winding * x / length
    return MagnetizationField(np.column_stack([np.sin(ang), np.cos(ang), np.zeros_like(x)]),
                              saturated=True)


def random_vectors(rng, shape):
    """Uniform random unit vectors of shape ``shape + (3,)``."""
    v = rng.normal(size=tuple(shape) + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_saturated(rng, n_elements):
    """Independent uniform unit vector at every node (rough, but saturated)."""
    return MagnetizationField(random_vectors(rng, (n_elements + 1,)), saturated=True)


def random_band_limited(rng, n_elements, length=1.0, modes=4):
    """Saturated field whose angles are random cosine series with ``modes`` terms.

    Coefficients decay like ``1/j^2``, so the field is smooth and satisfies
    the Neumann condition.
    """
    j = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / j ** 2
    b = 2.0 * rng.normal(size=modes) / j ** 2
    th0 = rng.uniform(0.3, np.pi - 0.3)
    ph0 = rng.uniform(0.0, 2 * np.pi)
    x = np.linspace(0.0, length, n_elements + 1)
    c = np.cos(np.pi * np.outer(x, j) / length)
    return MagnetizationField(spherical(th0 + c @ a, ph0 + c @ b), saturated=True)
