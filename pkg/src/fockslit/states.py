"""Fock-space states stored as mode-coefficient vectors, and their
observables.

Both state kinds reduce every implemented expectation value to bilinears
of the synthesized positive-frequency field

    F(r, t) = sum_l f_l u_l(r, t)

and its derivatives.  A one-particle state ``sum_l f_l a_l^+ |0>`` gives
``<a_k^+ a_l> = f_k* f_l`` and no ``<a a>`` terms; a coherent state
``exp(sum_l f_l a_l^+) |0>`` (ratio to its norm) additionally has
``<a_k a_l> = f_k f_l``.  Normal ordering removes all vacuum contributions.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lattice import ModeLattice
from .sources import SlitSpec, Which, closed_form_coefficients

# Points per evaluation block.  Fixed so results never depend on thread count.
CHUNK = 32


class StateKind(enum.Enum):
    ONE_PARTICLE = "one_particle"
    COHERENT = "coherent"


class Observable(enum.Enum):
    FIELD = "FIELD"
    CURRENT = "CURRENT"
    ENERGY = "ENERGY"
    ENERGY_TIME_AVERAGED = "ENERGY_TIME_AVERAGED"


class EnergyMode(enum.Enum):
    INSTANT = "instant"
    PERIOD_AVERAGED = "period_averaged"


@dataclass(frozen=True, eq=False)
class QuantumState:
    lattice: ModeLattice
    coeffs: np.ndarray = field(repr=False)
    kind: StateKind = StateKind.ONE_PARTICLE
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (len(self.lattice),):
            raise ValueError(f"need {len(self.lattice)} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def mean_number(self) -> float:
        """``sum |f|^2``: the norm squared (one-particle) or log norm squared (coherent)."""
        return float(np.vdot(self.coeffs, self.coeffs).real)

    @property
    def norm2(self) -> float:
        n = self.mean_number
        return n if self.kind is StateKind.ONE_PARTICLE else math.exp(n)

    def normalized(self) -> "QuantumState":
        if self.kind is not StateKind.ONE_PARTICLE:
            raise ValueError("only one-particle states are normalized by rescaling")
        n = math.sqrt(self.mean_number)
        if n == 0:
            raise ValueError("cannot normalize the vacuum")
        return QuantumState(self.lattice, self.coeffs / n, self.kind, self.label)

    def with_kind(self, kind: StateKind) -> "QuantumState":
        return QuantumState(self.lattice, self.coeffs, kind, self.label)


def build_double_slit_state(lattice: ModeLattice, spec: SlitSpec,
                            normalize: bool = False) -> QuantumState:
    state = QuantumState(lattice, closed_form_coefficients(lattice, spec, "DS"),
                         StateKind.ONE_PARTICLE, "DS")
    return state.normalized() if normalize else state


def build_single_slit_state(lattice: ModeLattice, spec: SlitSpec, which: Which) -> QuantumState:
    return QuantumState(lattice, closed_form_coefficients(lattice, spec, which),
                        StateKind.ONE_PARTICLE, which)


def build_coherent_state(lattice: ModeLattice, spec: SlitSpec) -> QuantumState:
    return QuantumState(lattice, closed_form_coefficients(lattice, spec, "DS"),
                        StateKind.COHERENT, "CDS")


def vacuum(lattice: ModeLattice, kind: StateKind = StateKind.ONE_PARTICLE) -> QuantumState:
    return QuantumState(lattice, np.zeros(len(lattice), complex), kind, "vacuum")


# --- mode-sum synthesis -------------------------------------------------------


@dataclass(frozen=True)
class FieldSample:
    """``F``, ``dF/dt`` and ``grad F`` (last axis xyz) at a set of points."""

    value: np.ndarray
    dot: np.ndarray
    grad: np.ndarray


def _synthesize_block(C, Cdot, axis, pts):
    ex = np.exp(1j * np.outer(pts[:, 0], axis))  # (P, s)
    ey = np.exp(1j * np.outer(pts[:, 1], axis))
    ez = np.exp(1j * np.outer(pts[:, 2], axis))
    s = axis.size
    ik = 1j * axis
    C2 = C.reshape(s * s, s)
    T = (C2 @ ez.T).reshape(s, s, -1)  # (a, b, P)
    Tz = (C2 @ (ez * ik).T).reshape(s, s, -1)
    Td = (Cdot.reshape(s * s, s) @ ez.T).reshape(s, s, -1)
    eyT = ey.T[None, :, :]
    W = (T * eyT).sum(axis=1)  # (a, P)
    Wy = (T * (eyT * ik[None, :, None])).sum(axis=1)
    Wz = (Tz * eyT).sum(axis=1)
    Wd = (Td * eyT).sum(axis=1)
    exT = ex.T
    value = (W * exT).sum(axis=0)
    gx = (W * exT * ik[:, None]).sum(axis=0)
    gy = (Wy * exT).sum(axis=0)
    gz = (Wz * exT).sum(axis=0)
    dot = (Wd * exT).sum(axis=0)
    return value, dot, np.stack([gx, gy, gz], axis=-1)


def synthesize(state: QuantumState, r, t: float = 0.0, threads: int = 1) -> FieldSample:
    """Evaluate ``F = sum f_l u_l`` and its derivatives by separable mode sums."""
    r = np.asarray(r, dtype=float)
    shape = r.shape[:-1]
    pts = r.reshape(-1, 3)
    lat = state.lattice
    c = state.coeffs * lat.norm * np.exp(-1j * lat.omega * t)
    C = lat.as_grid(c)
    Cdot = lat.as_grid(-1j * lat.omega * c)
    axis = lat.axis
    blocks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _synthesize_block(C, Cdot, axis, b), blocks))
    else:
        parts = [_synthesize_block(C, Cdot, axis, b) for b in blocks]
    if not parts:
        empty = np.zeros(shape, complex)
        return FieldSample(empty, empty.copy(), np.zeros(shape + (3,), complex))
    value = np.concatenate([p[0] for p in parts]).reshape(shape)
    dot = np.concatenate([p[1] for p in parts]).reshape(shape)
    grad = np.concatenate([p[2] for p in parts]).reshape(shape + (3,))
    return FieldSample(value, dot, grad)


# --- observables ----------------------------------------------------------------


def field_expectation(state: QuantumState, r, t: float = 0.0, threads: int = 1):
    """``<0|Phi|state>`` (one-particle) or the eigenvalue of ``Phi^(+)`` (coherent)."""
    return synthesize(state, r, t, threads).value


def _current(s: FieldSample):
    # i (F* F' - F'* F) = -2 Im(F* F'); positive for positive-frequency waves
    return -2.0 * np.imag(np.conj(s.value) * s.dot)


def _energy(s: FieldSample, mass: float, kind: StateKind, mode: EnergyMode):
    grad2 = np.sum(np.abs(s.grad) ** 2, axis=-1)
    e = np.abs(s.dot) ** 2 + grad2 + mass**2 * np.abs(s.value) ** 2
    if kind is StateKind.COHERENT and mode is EnergyMode.INSTANT:
        e = e + np.real(s.dot**2 + np.sum(s.grad**2, axis=-1) + mass**2 * s.value**2)
    return e


def current_density(state: QuantumState, r, t: float = 0.0, threads: int = 1):
    """Positive-frequency number density ``j0+``."""
    return _current(synthesize(state, r, t, threads))


def energy_density(state: QuantumState, r, t: float = 0.0,
                   mode: EnergyMode = EnergyMode.INSTANT, threads: int = 1):
    """Normal-ordered Hamiltonian density.

    One-particle states have no ``<a a>`` terms, so both modes agree.  For
    coherent states ``INSTANT`` keeps the double-frequency term
    ``Re[F'^2 + (grad F)^2 + mu^2 F^2]`` and ``PERIOD_AVERAGED`` drops it.
    """
    mode = EnergyMode(mode)
    s = synthesize(state, r, t, threads)
    return _energy(s, state.lattice.spec.mass, state.kind, mode)


def observe(state: QuantumState, observable: Observable, r, t: float = 0.0, threads: int = 1):
    """Dispatch on ``observable``; FIELD returns complex values, the rest real."""
    observable = Observable(observable)
    s = synthesize(state, r, t, threads)
    if observable is Observable.FIELD:
        return s.value
    if observable is Observable.CURRENT:
        return _current(s)
    mode = EnergyMode.INSTANT if observable is Observable.ENERGY else EnergyMode.PERIOD_AVERAGED
    return _energy(s, state.lattice.spec.mass, state.kind, mode)


def state_overlap(state_a: QuantumState, state_b: QuantumState) -> complex:
    """``<B|A> = sum_l conj(f^B_l) f^A_l`` for one-particle states."""
    if state_a.lattice is not state_b.lattice and state_a.lattice.spec != state_b.lattice.spec:
        raise ValueError("states live on different lattices")
    if state_a.kind is not StateKind.ONE_PARTICLE or state_b.kind is not StateKind.ONE_PARTICLE:
        raise ValueError("overlap is defined here for one-particle states only")
    return complex(np.vdot(state_b.coeffs, state_a.coeffs))


# --- explicit mode-pair evaluations (small lattices) -----------------------------


def _mode_tables(lattice: ModeLattice, idx, r, t):
    ph = lattice.k_vecs[idx] @ np.asarray(r, float) - lattice.omega[idx] * t
    u = lattice.norm[idx] * np.exp(1j * ph)
    u_dot = -1j * lattice.omega[idx] * u
    u_grad = 1j * lattice.k_vecs[idx] * u[:, None]
    return u, u_dot, u_grad


def current_density_double_sum(state: QuantumState, r, t: float = 0.0) -> float:
    """Current at one point as the explicit double sum over mode pairs."""
    idx = np.arange(len(state.lattice))
    u, u_dot, _ = _mode_tables(state.lattice, idx, r, t)
    f = state.coeffs
    a = np.conj(f * u)
    b = f * u_dot
    pair = np.outer(a, b)
    return float(np.real(1j * (pair.sum() - np.conj(pair).sum())))


def _one_particle_matrix(lattice: ModeLattice, idx, observable: Observable, r, t):
    u, u_dot, u_grad = _mode_tables(lattice, idx, r, t)
    if observable is Observable.CURRENT:
        m = np.outer(np.conj(u), u_dot)
        return 1j * (m - m.conj().T)
    if observable in (Observable.ENERGY, Observable.ENERGY_TIME_AVERAGED):
        return (np.outer(np.conj(u_dot), u_dot) + np.conj(u_grad) @ u_grad.T
                + lattice.spec.mass**2 * np.outer(np.conj(u), u))
    raise ValueError(f"no one-particle matrix for {observable}")


def density_matrix_expectation(state: QuantumState, observable: Observable, r,
                               t: float = 0.0, subset=None, threshold: float = 1e-12) -> float:
    """``Tr(rho O)`` with ``rho = |state><state|`` restricted to ``subset`` modes.

    Warns when the coefficient weight outside ``subset`` exceeds
    ``threshold`` (as a fraction of ``sum |f|^2``).
    """
    if state.kind is not StateKind.ONE_PARTICLE:
        raise ValueError("density-matrix route implemented for one-particle states")
    observable = Observable(observable)
    lat = state.lattice
    idx = np.arange(len(lat)) if subset is None else np.asarray(subset, dtype=int)
    f = state.coeffs
    total = float(np.vdot(f, f).real)
    if total > 0:
        outside = total - float(np.vdot(f[idx], f[idx]).real)
        if outside > threshold * total:
            warnings.warn(f"mode subset misses {outside / total:.3g} of the state weight",
                          RuntimeWarning, stacklevel=2)
    fs = f[idx]
    rho = np.outer(fs, np.conj(fs))  # rho[l, k] = <l|rho|k>
    O = _one_particle_matrix(lat, idx, observable, r, t)  # O[k, l] = <k|O|l>
    return float(np.real(np.sum(rho.T * O)))
