import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockslit.lattice import LatticeSpec, build_lattice
from fockslit.sources import SlitSpec
from fockslit.states import (
    EnergyMode,
    Observable,
    QuantumState,
    StateKind,
    build_coherent_state,
    build_double_slit_state,
    current_density,
    current_density_double_sum,
    density_matrix_expectation,
    energy_density,
    field_expectation,
    observe,
    state_overlap,
    synthesize,
    vacuum,
)

LAT = build_lattice(LatticeSpec(12.0, 4, mass=0.3))
SLIT = SlitSpec(1.5, 2.0, mass=0.3, phase_b=0.6)
PTS = np.array([[0.3, 0.2, 3.0], [-1.0, 0.7, 2.5], [2.2, -0.4, -3.1], [0.0, 0.0, 4.4]])


def random_state(seed, kind=StateKind.ONE_PARTICLE):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=len(LAT)) + 1j * rng.normal(size=len(LAT))
    return QuantumState(LAT, c * 0.1, kind)


def test_vacuum_observables_vanish():
    for kind in StateKind:
        v = vacuum(LAT, kind)
        for obs in Observable:
            assert np.all(observe(v, obs, PTS) == 0)


def test_single_mode_plane_wave_current():
    i = LAT.index_of((1, 0, -2))
    c = np.zeros(len(LAT), complex)
    c[i] = 1.0
    s = QuantumState(LAT, c)
    j = current_density(s, PTS, t=0.4)
    assert j == pytest.approx(np.full(len(PTS), 1.0 / LAT.spec.volume), rel=1e-12)
    e = energy_density(s, PTS, t=0.4)
    w, k2 = LAT.omega[i], LAT.k_squared[i]
    assert e == pytest.approx(np.full(len(PTS), (w * w + k2 + 0.09) / (2 * w * LAT.spec.volume)))


def test_current_two_ways_agree():
    s = build_double_slit_state(LAT, SLIT)
    for p in PTS:
        direct = current_density(s, p[None, :], 0.2)[0]
        assert abs(direct - current_density_double_sum(s, p, 0.2)) < 1e-10 * max(1, abs(direct))


def test_density_matrix_route_equals_direct():
    s = build_double_slit_state(LAT, SLIT)
    for obs in (Observable.CURRENT, Observable.ENERGY):
        for p in PTS[:2]:
            dm = density_matrix_expectation(s, obs, p, 0.1)
            direct = observe(s, obs, p[None, :], 0.1)[0]
            assert dm == pytest.approx(direct, rel=1e-10, abs=1e-14)


def test_density_matrix_subset_warns():
    s = build_double_slit_state(LAT, SLIT)
    with pytest.warns(RuntimeWarning, match="misses"):
        density_matrix_expectation(s, Observable.CURRENT, PTS[0], subset=np.arange(10))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        density_matrix_expectation(s, Observable.CURRENT, PTS[0])


def test_analytic_gradient_matches_finite_difference():
    s = build_double_slit_state(LAT, SLIT)
    h = 1e-5
    p = PTS[0]
    g = synthesize(s, p[None, :]).grad[0]
    for a in range(3):
        dp = np.zeros(3)
        dp[a] = h
        fd = (field_expectation(s, (p + dp)[None, :]) - field_expectation(s, (p - dp)[None, :])) / (2 * h)
        assert g[a] == pytest.approx(fd[0], rel=1e-6, abs=1e-10)


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10_000), t=st.floats(-5, 5))
def test_one_particle_energy_non_negative(seed, t):
    e = energy_density(random_state(seed), PTS, t)
    assert np.all(e >= 0)


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10_000), phi=st.floats(0, 2 * math.pi))
def test_global_phase_invariance(seed, phi):
    s = random_state(seed)
    r = QuantumState(LAT, s.coeffs * np.exp(1j * phi))
    for obs in (Observable.CURRENT, Observable.ENERGY):
        assert observe(r, obs, PTS) == pytest.approx(observe(s, obs, PTS), rel=1e-10)


def test_kinds_agree_except_instant_energy():
    one = build_double_slit_state(LAT, SLIT)
    coh = build_coherent_state(LAT, SLIT)
    for obs in (Observable.FIELD, Observable.CURRENT, Observable.ENERGY_TIME_AVERAGED):
        assert np.array_equal(observe(one, obs, PTS), observe(coh, obs, PTS))
    inst = energy_density(coh, PTS, 0.0, EnergyMode.INSTANT)
    avg = energy_density(coh, PTS, 0.0, EnergyMode.PERIOD_AVERAGED)
    assert not np.allclose(inst, avg)
    # one-particle states have no <aa> term
    assert np.array_equal(energy_density(one, PTS, 0.0, EnergyMode.INSTANT),
                          energy_density(one, PTS, 0.0, EnergyMode.PERIOD_AVERAGED))


def test_single_mode_coherent_oscillation_averages_out():
    # a monochromatic state: the 8-sample trapezoid cancels the 2w term exactly
    i = LAT.index_of((2, 1, 0))
    c = np.zeros(len(LAT), complex)
    c[i] = 0.7 + 0.2j
    s = QuantumState(LAT, c, StateKind.COHERENT)
    T = 2 * math.pi / LAT.omega[i]
    ts = np.arange(8) * T / 8
    inst = np.mean([energy_density(s, PTS, t, EnergyMode.INSTANT) for t in ts], axis=0)
    avg = energy_density(s, PTS, 0.0, EnergyMode.PERIOD_AVERAGED)
    assert inst == pytest.approx(avg, rel=1e-12)


def test_threads_do_not_change_results():
    s = build_double_slit_state(LAT, SLIT)
    pts = np.random.default_rng(1).uniform(-5, 5, size=(150, 3))
    a = observe(s, Observable.ENERGY, pts, 0.3, threads=1)
    b = observe(s, Observable.ENERGY, pts, 0.3, threads=5)
    assert a.tobytes() == b.tobytes()


def test_normalization_and_norms():
    s = build_double_slit_state(LAT, SLIT, normalize=True)
    assert s.mean_number == pytest.approx(1.0)
    c = build_coherent_state(LAT, SLIT)
    assert c.norm2 == pytest.approx(math.exp(c.mean_number))
    with pytest.raises(ValueError):
        c.normalized()
    with pytest.raises(ValueError):
        vacuum(LAT).normalized()


def test_overlap_hermitian():
    a, b = random_state(1), random_state(2)
    assert state_overlap(b, a) == pytest.approx(np.conj(state_overlap(a, b)))
    with pytest.raises(ValueError):
        state_overlap(a, random_state(3, StateKind.COHERENT))


def test_coefficient_vector_is_frozen():
    s = random_state(4)
    with pytest.raises(ValueError):
        s.coeffs[0] = 1.0
    with pytest.raises(ValueError):
        QuantumState(LAT, np.zeros(3))
