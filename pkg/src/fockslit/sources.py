"""Spherical-wave sources, the classical two-source pattern and the
plane-wave expansion coefficients of the two-source field.

Fields are regularized with ``k -> k + i*epsilon`` when ``epsilon > 0``, i.e.
``exp(i k rho - epsilon rho) / rho``; ``epsilon = 0`` gives the bare wave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
import scipy.fft

from .lattice import Mode, ModeLattice, QuadratureGrid

TWO_PI = 2.0 * math.pi

Which = Literal["A", "B", "DS"]


class SourceDomainError(ValueError):
    """Observation point inside a source's exclusion radius."""


class GridResolutionError(ValueError):
    """Quadrature grid cannot represent the lattice cutoff."""


@dataclass(frozen=True)
class SourceSpec:
    position: tuple[float, float, float]
    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not (self.magnitude >= 0):
            raise ValueError(f"source magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))

    @property
    def amplitude(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class SlitSpec:
    """Two point sources at ``(+d/2, 0, 0)`` (A) and ``(-d/2, 0, 0)`` (B).

    ``omega_k`` is ``sqrt(k^2 + mu^2)``, or ``k^2 / (2 mu)`` when
    ``nonrelativistic`` is set (requires ``mass > 0``).
    """

    separation: float
    wavenumber: float
    amp_a: float = 1.0
    phase_a: float = 0.0
    amp_b: float = 1.0
    phase_b: float = 0.0
    mass: float = 0.0
    nonrelativistic: bool = False

    def __post_init__(self):
        if not (self.separation > 0 and math.isfinite(self.separation)):
            raise ValueError(f"slit separation must be > 0, got {self.separation}")
        if not (self.wavenumber > 0 and math.isfinite(self.wavenumber)):
            raise ValueError(f"wavenumber must be > 0, got {self.wavenumber}")
        if self.amp_a < 0 or self.amp_b < 0:
            raise ValueError("source magnitudes must be >= 0")
        if self.mass < 0:
            raise ValueError("mass must be >= 0")
        if self.nonrelativistic and self.mass <= 0:
            raise ValueError("non-relativistic dispersion needs mass > 0")
        object.__setattr__(self, "phase_a", float(self.phase_a) % TWO_PI)
        object.__setattr__(self, "phase_b", float(self.phase_b) % TWO_PI)

    @property
    def source_a(self) -> SourceSpec:
        return SourceSpec((0.5 * self.separation, 0.0, 0.0), self.amp_a, self.phase_a)

    @property
    def source_b(self) -> SourceSpec:
        return SourceSpec((-0.5 * self.separation, 0.0, 0.0), self.amp_b, self.phase_b)

    @property
    def omega_k(self) -> float:
        k = self.wavenumber
        if self.nonrelativistic:
            return k * k / (2.0 * self.mass)
        return math.sqrt(k * k + self.mass**2)

    @property
    def wavelength(self) -> float:
        return TWO_PI / self.wavenumber

    def only(self, which: Which) -> "SlitSpec":
        """Copy with the other source switched off."""
        if which == "A":
            return replace(self, amp_b=0.0)
        if which == "B":
            return replace(self, amp_a=0.0)
        return self


def exclusion_radius(box_length: float) -> float:
    return box_length / 100.0


def _distance(position, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.linalg.norm(r - np.asarray(position), axis=-1)


def spherical_wave(src: SourceSpec, k: float, omega: float, r, t: float = 0.0,
                   epsilon: float = 0.0, exclusion: float = 0.0):
    """``amplitude * exp(-i w t + i (k + i eps) rho) / rho``."""
    rho = _distance(src.position, r)
    if np.any(rho <= exclusion) or np.any(rho == 0):
        raise SourceDomainError(
            f"observation point within {exclusion:g} of source at {src.position}")
    out = src.amplitude * np.exp(1j * (k * rho - omega * t) - epsilon * rho) / rho
    return complex(out) if out.ndim == 0 else out


def double_slit_field(spec: SlitSpec, r, t: float = 0.0, epsilon: float = 0.0,
                      exclusion: float = 0.0):
    k, w = spec.wavenumber, spec.omega_k
    return (spherical_wave(spec.source_a, k, w, r, t, epsilon, exclusion)
            + spherical_wave(spec.source_b, k, w, r, t, epsilon, exclusion))


@dataclass(frozen=True)
class InterferenceDecomposition:
    total: np.ndarray
    term_a: np.ndarray
    term_b: np.ndarray
    cross: np.ndarray


def intensity(spec: SlitSpec, r, t: float = 0.0, epsilon: float = 0.0,
              exclusion: float = 0.0) -> InterferenceDecomposition:
    """|F_A + F_B|^2 split into the two single-source terms and the cross term."""
    k, w = spec.wavenumber, spec.omega_k
    fa = np.asarray(spherical_wave(spec.source_a, k, w, r, t, epsilon, exclusion))
    fb = np.asarray(spherical_wave(spec.source_b, k, w, r, t, epsilon, exclusion))
    term_a = np.abs(fa) ** 2
    term_b = np.abs(fb) ** 2
    cross = 2.0 * np.real(np.conj(fa) * fb)
    return InterferenceDecomposition(term_a + term_b + cross, term_a, term_b, cross)


def far_field_cross_term(spec: SlitSpec, r) -> np.ndarray:
    """Small-separation form ``2|A||B|/r^2 cos(-k x d / r + thA - thB)``."""
    r = np.asarray(r, dtype=float)
    rr = np.linalg.norm(r, axis=-1)
    x = r[..., 0]
    phase = -spec.wavenumber * x * spec.separation / rr + spec.phase_a - spec.phase_b
    return 2.0 * spec.amp_a * spec.amp_b / rr**2 * np.cos(phase)


# --- plane-wave coefficients ---------------------------------------------------


def _radial_factor(k2, omega, norm, spec: SlitSpec, epsilon: float):
    kappa = spec.wavenumber + 1j * epsilon
    wk = spec.omega_k
    return 4.0 * math.pi * norm * (omega + wk) / (math.sqrt(2.0 * wk) * (k2 - kappa**2))


def _source_phase(lx, spec: SlitSpec, which: str):
    if which == "A":
        return spec.source_a.amplitude * np.exp(-0.5j * lx * spec.separation)
    if which == "B":
        return spec.source_b.amplitude * np.exp(0.5j * lx * spec.separation)
    if which == "DS":
        return _source_phase(lx, spec, "A") + _source_phase(lx, spec, "B")
    raise ValueError(f"which must be 'A', 'B' or 'DS', got {which!r}")


def closed_form_coefficient(mode: Mode, spec: SlitSpec, which: Which, epsilon: float) -> complex:
    """Expansion coefficient of one mode, with the pole shifted by ``k -> k + i eps``."""
    k2 = float(np.dot(mode.k_vec, mode.k_vec))
    rad = _radial_factor(k2, mode.omega, mode.norm, spec, epsilon)
    return complex(rad * _source_phase(mode.k_vec[0], spec, which))


def closed_form_coefficients(lattice: ModeLattice, spec: SlitSpec, which: Which = "DS") -> np.ndarray:
    """Vector of closed-form coefficients over the lattice, in mode order."""
    rad = _radial_factor(lattice.k_squared, lattice.omega, lattice.norm, spec,
                         lattice.spec.epsilon)
    return rad * _source_phase(lattice.k_vecs[:, 0], spec, which)


def default_oracle_points(lattice: ModeLattice) -> int:
    # ~30 nodes per shortest resolved wavelength, capped for memory
    return int(min(256, max(64, 2 * math.ceil(15 * lattice.spec.cutoff))))


def oracle_coefficients(lattice: ModeLattice, spec: SlitSpec, which: Which = "A",
                        points: int | None = None) -> np.ndarray:
    """Coefficients by direct quadrature of the relativistic inner product.

    The damped source field and its time derivative are sampled at ``t = 0``
    on a cell-centred ``points^3`` grid covering the box; the projection onto
    every lattice mode is a single 3D FFT of each.  Returns a vector in mode
    order.  Independent of :func:`closed_form_coefficients`.
    """
    if which == "DS":
        return (oracle_coefficients(lattice, spec, "A", points)
                + oracle_coefficients(lattice, spec, "B", points))
    G = points or default_oracle_points(lattice)
    N = lattice.spec.cutoff
    if G < 2 * N + 1:
        raise GridResolutionError(
            f"{G} quadrature points per axis cannot resolve cutoff N={N} (need >= {2 * N + 1})")
    L = lattice.spec.box_length
    src = spec.source_a if which == "A" else spec.source_b
    if any(abs(c) >= 0.5 * L for c in src.position):
        raise ValueError("source lies outside the box")
    grid = QuadratureGrid(L, G, offset=0.5)
    X, Y, Z = grid.mesh()
    rho = np.sqrt((X - src.position[0]) ** 2 + (Y - src.position[1]) ** 2
                  + (Z - src.position[2]) ** 2)
    if rho.min() == 0:
        raise GridResolutionError("a quadrature node coincides with the source")

    wk = spec.omega_k
    field = src.amplitude * np.exp((1j * spec.wavenumber - lattice.spec.epsilon) * rho) / rho
    field /= math.sqrt(2.0 * wk)
    del rho
    n = np.arange(-N, N + 1)
    pick = np.ix_(n % G, n % G, n % G)
    # sum_x exp(-i l.x) g(x) with x_j = x0 + j h  ->  exp(-i l x0) * FFT[g][n mod G]
    shift = np.exp(-1j * lattice.spec.spacing * n * grid.coords[0])
    shift3 = shift[:, None, None] * shift[None, :, None] * shift[None, None, :]
    dv = grid.cell_volume

    field_hat = scipy.fft.fftn(field)[pick] * shift3 * dv
    dot_hat = scipy.fft.fftn(-1j * wk * field)[pick] * shift3 * dv
    del field

    norm = lattice.as_grid(lattice.norm)
    omega = lattice.as_grid(lattice.omega)
    # i * sum(u* F' - u'* F) with u* = n e^{-il.x}, u'* = +i w n e^{-il.x}
    coeff = 1j * norm * (dot_hat - 1j * omega * field_hat)
    return coeff.ravel()
