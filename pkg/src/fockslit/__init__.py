"""Double-slit interference of a free scalar field in Fock space.

Plane-wave modes in a periodic box, spherical-wave expansion coefficients,
one-particle and coherent double-slit states, and the screen observables
built from them.
"""

__version__ = "0.1.0"

from .lattice import LatticeSpec, ModeLattice, build_lattice, verify_orthonormality
from .sources import SlitSpec, closed_form_coefficients, intensity, oracle_coefficients
from .states import (
    EnergyMode,
    Observable,
    QuantumState,
    StateKind,
    build_coherent_state,
    build_double_slit_state,
    build_single_slit_state,
    current_density,
    energy_density,
    field_expectation,
    vacuum,
)
from .experiment import (
    ScreenGeometry,
    fringe_analysis,
    incoherent_average,
    overlap_curve,
    scan_screen,
)

__all__ = [
    "EnergyMode", "LatticeSpec", "ModeLattice", "Observable", "QuantumState", "ScreenGeometry",
    "SlitSpec", "StateKind", "build_coherent_state", "build_double_slit_state",
    "build_lattice", "build_single_slit_state", "closed_form_coefficients", "current_density",
    "energy_density", "field_expectation", "fringe_analysis", "incoherent_average",
    "intensity", "oracle_coefficients", "overlap_curve", "scan_screen", "vacuum",
    "verify_orthonormality",
]
