import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llcontrol import (
    ControlLaw,
    DegenerateFieldError,
    Equilibrium,
    IntegratorConfig,
    MagnetizationField,
    Phase,
    PhysicalParams,
    build,
    decay_rate,
    default_dt,
    distance_to_equilibria_sq,
    exchange_energy,
    lemma3_integral,
    lemma4_ratio,
    lyapunov_affine,
    lyapunov_field,
    lyapunov_l2,
    nodal_gradient,
    run,
)
from llcontrol.fields import random_band_limited, smooth_field, winding_field

P = PhysicalParams()
R1 = Equilibrium.normalized([-1, 0, 1])


def test_lyapunov_functionals_on_constants():
    d = build(12, 2.0)
    a = np.tile([1.0, 0.0, 0.0], (13, 1))
    r = Equilibrium([0, 1, 0])
    # ||a - r||^2 = 2 L
    assert lyapunov_affine(d, a, r) == pytest.approx(2.0)
    assert lyapunov_field(d, a, r, 3.0) == pytest.approx(12.0)
    assert lyapunov_l2(d, a, r) == pytest.approx(2.0)
    assert lyapunov_affine(d, a, Equilibrium([1, 0, 0])) == 0.0
    with pytest.raises(ValueError):
        lyapunov_field(d, a, r, 0.0)


def test_exchange_energy_of_winding_field():
    # 1/2 ||m_x||^2 = 1/2 (2 pi)^2 for the unit winding field on [0, 1]
    vals = [exchange_energy(build(n), winding_field(n)) for n in (48, 96)]
    assert vals[-1] == pytest.approx(2 * np.pi ** 2, rel=1e-3)
    assert abs(vals[-1] - 2 * np.pi ** 2) < abs(vals[0] - 2 * np.pi ** 2)


@given(st.integers(0, 2**31 - 1))
def test_distance_to_equilibria(seed):
    rng = np.random.default_rng(seed)
    d = build(10)
    a = Equilibrium.normalized(rng.normal(size=3))
    assert abs(distance_to_equilibria_sq(d, a.field(11))) < 1e-12
    m = random_band_limited(rng, 10)
    dist = distance_to_equilibria_sq(d, m)
    # never larger than the distance to any particular equilibrium
    assert dist <= 2 * lyapunov_l2(d, m, a) + 1e-12
    assert dist >= -1e-12


def test_lemma3_vanishes_for_winding_field():
    d = build(12)
    assert abs(lemma3_integral(d, winding_field(12), R1)) < 1e-14


def test_lemma3_exact_with_lumped_mass(rng):
    d = build(12, mass="lumped")
    assert abs(lemma3_integral(d, random_band_limited(rng, 12), R1)) < 1e-13


def test_lemma3_converges_with_consistent_mass():
    vals = [abs(lemma3_integral(build(n), smooth_field("B", n), R1)) for n in (12, 24, 48)]
    assert vals[0] > vals[1] > vals[2]


def test_nodal_gradient_second_order():
    errs = []
    for n in (12, 24, 48):
        d = build(n)
        f = np.column_stack([np.sin(2 * d.x), np.cos(d.x), d.x ** 2])
        exact = np.column_stack([2 * np.cos(2 * d.x), -np.sin(d.x), 2 * d.x])
        errs.append(np.abs(nodal_gradient(d, f) - exact).max())
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_lemma4_degenerate_and_bound(rng):
    d = build(24)
    with pytest.raises(DegenerateFieldError):
        lemma4_ratio(d, MagnetizationField.constant([0, 0, 1], 25))
    ratios = [lemma4_ratio(d, random_band_limited(rng, 24)) for _ in range(20)]
    assert max(ratios) <= 4.0


@given(st.floats(0.05, 5.0), st.floats(0.1, 10.0))
def test_decay_rate_recovers_exponent(rate, amp):
    t = np.linspace(0, 4.0 / rate, 200)
    assert decay_rate(t, amp * np.exp(-rate * t)) == pytest.approx(rate, rel=1e-9)


def test_decay_rate_validation():
    t = np.linspace(0, 1, 50)
    with pytest.raises(ValueError):
        decay_rate(t[:5], np.ones(5))
    with pytest.raises(ValueError):
        decay_rate(t, -np.ones(50))
    with pytest.raises(ValueError):
        decay_rate(t, np.ones(50), window=(0.5, 0.2))


def test_trajectory_diagnostics_match_scalar_functions():
    d = build(12)
    cfg = IntegratorConfig(dt=default_dt(d), t_max=10.0, record_every=500)
    k = 10.0
    sched = [Phase.fixed(ControlLaw.none(), 0.2), Phase.fixed(ControlLaw.affine(0.5, R1), 0.2),
             Phase.fixed(ControlLaw.applied_field(k, R1), 0.2)]
    rec = run(d, P, sched, winding_field(12), cfg)
    diag = rec.diagnostics
    assert np.array_equal(diag.t, rec.times)
    for j in range(len(rec)):
        m = rec.states[j]
        i = rec.phase_index[j]
        kind = rec.phases[i].rhs.kind
        if kind == "uncontrolled":
            assert diag.lyap[j] == pytest.approx(exchange_energy(d, m), rel=1e-10)
            assert diag.l2_err_sq[j] == pytest.approx(distance_to_equilibria_sq(d, m), rel=1e-9, abs=1e-12)
        elif kind == "affine":
            assert diag.lyap[j] == pytest.approx(lyapunov_affine(d, m, R1), rel=1e-10)
            assert diag.lemma3[j] == pytest.approx(lemma3_integral(d, m, R1), rel=1e-8, abs=1e-14)
        else:
            assert diag.lyap[j] == pytest.approx(lyapunov_field(d, m, R1, k), rel=1e-10)
        assert diag.sat_drift[j] == pytest.approx(MagnetizationField(m).saturation_drift(), abs=1e-16)
    sample = diag[3]
    assert sample.t == diag.t[3]
    assert diag.as_array().shape == (len(rec), len(diag.COLUMNS))
