import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from llcontrol import ControlLaw, Equilibrium, MagnetizationField, PhysicalParams, cross, triple

finite = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)


@given(vec3, vec3)
def test_cross_matches_numpy(a, b):
    np.testing.assert_allclose(cross(a, b), np.cross(a, b), rtol=1e-12, atol=1e-9)


@given(vec3, vec3, vec3)
def test_triple_product_bac_cab(a, b, c):
    expected = b * np.dot(a, c) - c * np.dot(a, b)
    np.testing.assert_allclose(triple(a, b, c), expected, rtol=1e-9, atol=1e-3)


def test_cross_broadcasts_over_nodes(rng):
    a = rng.normal(size=(7, 3))
    b = rng.normal(size=3)
    np.testing.assert_allclose(cross(a, b), np.cross(a, b))


def test_field_is_read_only_copy():
    src = np.zeros((4, 3))
    f = MagnetizationField(src)
    src[0, 0] = 5.0
    assert f.nodes[0, 0] == 0.0
    with pytest.raises(ValueError):
        f.nodes[0, 0] = 1.0


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((5, 2)), np.zeros(9)])
def test_field_shape_validation(bad):
    with pytest.raises(ValueError):
        MagnetizationField(bad)


def test_field_rejects_nonfinite():
    arr = np.ones((4, 3))
    arr[2, 1] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        MagnetizationField(arr)


def test_saturated_tag_is_checked():
    good = np.tile([0.0, 0.6, 0.8], (5, 1))
    assert MagnetizationField(good, saturated=True).saturation_drift() < 1e-15
    with pytest.raises(ValueError, match="saturated"):
        MagnetizationField(1.01 * good, saturated=True)


def test_field_equality_and_constant():
    a = MagnetizationField.constant([0, 0, 1], 5)
    assert a == MagnetizationField(np.tile([0.0, 0.0, 1.0], (5, 1)))
    assert a != MagnetizationField.constant([0, 1, 0], 5)
    np.testing.assert_array_equal(a.norms(), np.ones(5))


def test_from_function_samples_grid_nodes():
    f = MagnetizationField.from_function(lambda x: np.column_stack([x, 2 * x, 0 * x]), 4, length=2.0)
    np.testing.assert_allclose(f.nodes[:, 0], [0, 0.5, 1.0, 1.5, 2.0])


def test_equilibrium_requires_unit_norm():
    Equilibrium([0, 0, 1])
    Equilibrium([-1 / np.sqrt(2), 0, 1 / np.sqrt(2)])
    with pytest.raises(ValueError):
        Equilibrium([0, -0.6, 0])
    with pytest.raises(ValueError):
        Equilibrium([1, 1e-5, 0])
    with pytest.raises(ValueError):
        Equilibrium([1, 0])


@given(vec3.filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_equilibrium_normalized(v):
    e = Equilibrium.normalized(v)
    assert abs(np.linalg.norm(e.vector) - 1) < 1e-12
    assert e.field(3).saturation_drift() < 1e-12


def test_physical_params_validation():
    PhysicalParams(0.0, 1.0)
    for nu, length in [(-0.1, 1.0), (0.02, 0.0), (np.nan, 1.0), (0.02, np.inf)]:
        with pytest.raises(ValueError):
            PhysicalParams(nu, length)


def test_control_law_validation():
    r = Equilibrium([1, 0, 0])
    assert ControlLaw.none().kind == "none"
    assert ControlLaw.affine(0.5, r).target == r
    assert ControlLaw.applied_field(10, [0, 1, 0]).kind == "field"
    with pytest.raises(ValueError):
        ControlLaw.affine(0.0, r)
    with pytest.raises(ValueError):
        ControlLaw("field", 1.0, None)
    with pytest.raises(ValueError):
        ControlLaw("none", 1.0, r)
    with pytest.raises(ValueError):
        ControlLaw("bogus")
