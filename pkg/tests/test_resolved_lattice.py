"""The acceptance checks repeated on a lattice that contains the k-shell.

L = 32 wavelengths, N = 48, epsilon = half a lattice spacing, screen at
0.15 L with a small offset in y so the scan avoids the lattice axes.
"""

import math

import numpy as np
import pytest

from fockslit.experiment import (
    ScreenGeometry,
    energy_profile,
    fit_power_law,
    fringe_analysis,
    incoherent_average,
    overlap_curve,
    reconstruction_sweep,
    reference_values,
    relative_l2_error,
    scan_screen,
    single_source_sum,
)
from fockslit.lattice import LatticeSpec, build_lattice
from fockslit.sources import SlitSpec
from fockslit.states import Observable, build_double_slit_state

K = 1.0
LAM = 2 * math.pi
L = 32 * LAM
SPEC = LatticeSpec(L, 48, 0.0, 0.5 * 2 * math.pi / L)
SLIT = SlitSpec(2 * LAM, K)
SCREEN = ScreenGeometry.centered(0.15 * L, 0.1 * L, 201, y=0.37 * LAM)


@pytest.fixture(scope="module")
def lattice():
    return build_lattice(SPEC)


@pytest.fixture(scope="module")
def state(lattice):
    return build_double_slit_state(lattice, SLIT)


def test_reconstruction_converges():
    rows = reconstruction_sweep(SLIT, SCREEN, L, [24, 36, 48], 0.0, SPEC.epsilon, threads=4)
    errs = [r.l2_error for r in rows]
    assert errs[-1] <= 0.05
    assert errs[0] >= errs[1] >= errs[2]


def test_current_reproduces_intensity(state):
    scan = scan_screen(state, SCREEN, Observable.CURRENT, 0.0, SLIT, threads=4)
    ref = reference_values(SLIT, SCREEN, Observable.CURRENT, 0.0, SPEC.epsilon)
    assert relative_l2_error(scan.values, ref) <= 0.05
    rep = fringe_analysis(scan, SLIT)
    assert rep.visibility > 0.95
    assert np.argmax(scan.values) == SCREEN.samples // 2


def test_energy_residual_falls_as_inverse_cube(lattice):
    slit = SlitSpec(0.05 * LAM, K)
    st = build_double_slit_state(lattice, slit)
    r = np.linspace(L / 40, L / 4, 600)
    prof = energy_profile(st, slit, r, (0.21, 0.33, 1.0), threads=4)
    slope, _ = fit_power_law(r, prof.residual, LAM)
    assert abs(slope + 3.0) <= 0.5


def test_incoherent_average_exact(lattice):
    avg = incoherent_average(SLIT, Observable.CURRENT, SCREEN, 0.0, 4, lattice, threads=4)
    ref = single_source_sum(SLIT, Observable.CURRENT, SCREEN, 0.0, lattice, threads=4)
    assert np.max(np.abs(avg.values - ref)) <= 1e-10 * np.max(ref)


def test_overlap_follows_sinc(lattice):
    kd = [0.05, 0.5, 1.0, 2.0, 3.0, math.pi, 4.0, 5.0, 6.0]
    pts = overlap_curve(SLIT, [x / K for x in kd], lattice)
    assert abs(pts[0].ratio - 1) < 0.02
    assert max(abs(p.ratio - p.sinc) for p in pts[1:]) < 0.05
    assert abs(pts[5].ratio) < 0.05
