import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockslit.lattice import (
    LatticeSpec,
    QuadratureGrid,
    build_lattice,
    commensurate_grid,
    inner_product,
    mode_function,
    sample_mode,
    verify_orthonormality,
)


def test_spec_defaults_and_validation():
    spec = LatticeSpec(10.0, 3)
    assert spec.spacing == pytest.approx(2 * math.pi / 10)
    assert spec.epsilon == pytest.approx(2 * spec.spacing)
    assert spec.n_modes == 7**3
    for bad in (dict(box_length=0, cutoff=2), dict(box_length=1, cutoff=0),
                dict(box_length=1, cutoff=2, mass=-1), dict(box_length=1, cutoff=2, epsilon=0)):
        with pytest.raises(ValueError):
            LatticeSpec(**bad)


def test_lexicographic_order_and_index_roundtrip():
    lat = build_lattice(LatticeSpec(5.0, 2))
    assert tuple(lat.indices[0]) == (-2, -2, -2)
    assert tuple(lat.indices[1]) == (-2, -2, -1)
    assert tuple(lat.indices[-1]) == (2, 2, 2)
    for i in (0, 17, 62, 124):
        assert lat.index_of(lat.indices[i]) == i
    with pytest.raises(KeyError):
        lat.index_of((3, 0, 0))


def test_mode_table_values():
    spec = LatticeSpec(7.0, 2, mass=0.3)
    lat = build_lattice(spec)
    m = lat.mode_at((1, -2, 0))
    k = np.array([1, -2, 0]) * spec.spacing
    assert m.k_vec == pytest.approx(tuple(k))
    assert m.omega == pytest.approx(math.sqrt(k @ k + 0.09))
    assert m.norm == pytest.approx(1 / math.sqrt(2 * m.omega * spec.volume))


def test_massless_zero_mode_has_no_weight():
    lat = build_lattice(LatticeSpec(4.0, 1))
    zero = lat.index_of((0, 0, 0))
    assert lat.omega[zero] == 0 and lat.norm[zero] == 0
    assert np.all(np.isfinite(lat.norm))


def test_mode_function_plane_wave():
    lat = build_lattice(LatticeSpec(3.0, 1))
    m = lat.mode_at((1, 0, 0))
    r = np.array([0.4, 0.1, -0.2])
    expected = m.norm * np.exp(1j * (m.k_vec[0] * 0.4 - m.omega * 0.7))
    assert mode_function(m, r, 0.7) == pytest.approx(expected)


def test_full_orthonormality_small_lattice():
    rep = verify_orthonormality(build_lattice(LatticeSpec(6.0, 1, mass=0.5)))
    assert rep.max_deviation < 1e-12
    assert rep.n_pairs == 27 * 27


@settings(deadline=None, max_examples=15)
@given(L=st.floats(0.5, 50.0), mass=st.floats(0.0, 3.0), t=st.floats(-10.0, 10.0))
def test_orthonormality_holds_for_any_box_and_time(L, mass, t):
    lat = build_lattice(LatticeSpec(L, 1, mass=mass))
    assert verify_orthonormality(lat, t=t).max_deviation < 1e-10


def test_sampled_pairs_match_full_check():
    lat = build_lattice(LatticeSpec(6.0, 2, mass=0.2))
    pairs = [(0, 0), (3, 7), (124, 124), (60, 61)]
    rep = verify_orthonormality(lat, pairs=pairs)
    assert rep.n_pairs == 4
    assert rep.max_deviation < 1e-12


@settings(deadline=None, max_examples=20)
@given(i=st.integers(0, 26), j=st.integers(0, 26))
def test_inner_product_hermitian(i, j):
    lat = build_lattice(LatticeSpec(4.0, 1, mass=0.7))
    g = commensurate_grid(lat)
    a, b = sample_mode(lat, i, g), sample_mode(lat, j, g)
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)), abs=1e-13)


def test_quadrature_grid_geometry():
    g = QuadratureGrid(2.0, 4, offset=0.5)
    assert g.coords == pytest.approx([-0.75, -0.25, 0.25, 0.75])
    assert g.cell_volume == pytest.approx(0.125)
