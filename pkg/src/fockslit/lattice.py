"""Periodic-box momentum basis for a free scalar field.

Modes are plane waves ``u_n(r, t) = n_k exp(-i w t + i k.r)`` with
``k = 2 pi n / L`` for every integer triple ``n`` in ``[-N, N]^3``,
``w = sqrt(|k|^2 + mu^2)`` and ``n_k = 1 / sqrt(2 w V)``.  Modes are stored
in lexicographic order of ``n`` (``n_x`` slowest), which is the C-order
flattening of a ``(2N+1, 2N+1, 2N+1)`` array indexed by ``n + N``.

For a massless field the ``n = 0`` mode has ``w = 0`` and no finite
normalization; it is kept in the table with ``norm = 0`` so it drops out of
every mode sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class LatticeSpec:
    """Box size ``L``, cutoff ``N``, mass ``mu`` and regulator ``epsilon``.

    ``epsilon=None`` selects two lattice spacings, ``2 * (2 pi / L)``.
    """

    box_length: float
    cutoff: int
    mass: float = 0.0
    epsilon: float | None = None

    def __post_init__(self):
        if not (self.box_length > 0 and math.isfinite(self.box_length)):
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be an integer >= 1, got {self.cutoff}")
        if not (self.mass >= 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be >= 0, got {self.mass}")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 2.0 * self.spacing)
        elif not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        object.__setattr__(self, "cutoff", int(self.cutoff))

    @property
    def spacing(self) -> float:
        """Momentum spacing ``2 pi / L``."""
        return 2.0 * math.pi / self.box_length

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def side(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def n_modes(self) -> int:
        return self.side**3


@dataclass(frozen=True)
class Mode:
    index: tuple[int, int, int]
    k_vec: tuple[float, float, float]
    omega: float
    norm: float


@dataclass(frozen=True, eq=False)
class ModeLattice:
    """Immutable mode table.  Arrays are flat, length ``(2N+1)^3``."""

    spec: LatticeSpec
    indices: np.ndarray = field(repr=False)
    k_vecs: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    norm: np.ndarray = field(repr=False)

    @property
    def axis(self) -> np.ndarray:
        """Wavenumbers along one axis, ``2 pi n / L`` for ``n = -N..N``."""
        N = self.spec.cutoff
        return self.spec.spacing * np.arange(-N, N + 1, dtype=float)

    @property
    def shape(self) -> tuple[int, int, int]:
        s = self.spec.side
        return (s, s, s)

    @property
    def k_squared(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.k_vecs, self.k_vecs)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def index_of(self, n: Sequence[int]) -> int:
        N = self.spec.cutoff
        if any(abs(int(c)) > N for c in n):
            raise KeyError(f"mode {tuple(n)} outside cutoff {N}")
        s = self.spec.side
        return int(((n[0] + N) * s + (n[1] + N)) * s + (n[2] + N))

    def mode(self, i: int) -> Mode:
        return Mode(
            index=tuple(int(v) for v in self.indices[i]),
            k_vec=tuple(float(v) for v in self.k_vecs[i]),
            omega=float(self.omega[i]),
            norm=float(self.norm[i]),
        )

    def mode_at(self, n: Sequence[int]) -> Mode:
        return self.mode(self.index_of(n))

    def modes(self) -> Iterable[Mode]:
        for i in range(len(self)):
            yield self.mode(i)

    def as_grid(self, values: np.ndarray) -> np.ndarray:
        """Reshape a flat per-mode vector to ``(2N+1,)*3`` indexed by ``n + N``."""
        return np.asarray(values).reshape(self.shape)


def build_lattice(spec: LatticeSpec) -> ModeLattice:
    N = spec.cutoff
    n1 = np.arange(-N, N + 1)
    nx, ny, nz = np.meshgrid(n1, n1, n1, indexing="ij")
    indices = np.stack([nx.ravel(), ny.ravel(), nz.ravel()], axis=1)
    k_vecs = spec.spacing * indices.astype(float)
    omega = np.sqrt(np.einsum("ij,ij->i", k_vecs, k_vecs) + spec.mass**2)
    norm = np.zeros_like(omega)
    live = omega > 0
    norm[live] = 1.0 / np.sqrt(2.0 * omega[live] * spec.volume)
    for a in (indices, k_vecs, omega, norm):
        a.setflags(write=False)
    return ModeLattice(spec=spec, indices=indices, k_vecs=k_vecs, omega=omega, norm=norm)


def mode_function(mode: Mode, r, t: float = 0.0):
    """``n_k exp(-i w t + i k.r)``; ``r`` may be a point or an ``(..., 3)`` array."""
    r = np.asarray(r, dtype=float)
    phase = r @ np.asarray(mode.k_vec) - mode.omega * t
    out = mode.norm * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


# --- relativistic inner product on a uniform periodic grid -------------------


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform ``G^3`` grid over ``[-L/2, L/2)^3``.

    ``offset`` shifts nodes by a fraction of a cell (``0.5`` = cell centres).
    """

    box_length: float
    points: int
    offset: float = 0.0

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("grid needs at least one point per axis")

    @property
    def step(self) -> float:
        return self.box_length / self.points

    @property
    def cell_volume(self) -> float:
        return self.step**3

    @property
    def coords(self) -> np.ndarray:
        return -0.5 * self.box_length + (np.arange(self.points) + self.offset) * self.step

    def mesh(self, sparse: bool = True):
        x = self.coords
        return np.meshgrid(x, x, x, indexing="ij", sparse=sparse)


@dataclass(frozen=True, eq=False)
class SampledField:
    """Field value and time derivative at every node of ``grid``."""

    grid: QuadratureGrid
    value: np.ndarray
    dot: np.ndarray

    def __post_init__(self):
        shape = (self.grid.points,) * 3
        if np.shape(self.value) != shape or np.shape(self.dot) != shape:
            raise ValueError(f"sampled arrays must have shape {shape}")


def inner_product(a: SampledField, b: SampledField) -> complex:
    """``i * sum(a* b' - a'* b) dV`` -- the relativistic inner product."""
    if a.grid != b.grid:
        raise ValueError("fields sampled on different grids")
    total = np.vdot(a.value, b.dot) - np.vdot(a.dot, b.value)
    return complex(1j * total * a.grid.cell_volume)


def commensurate_grid(lattice: ModeLattice) -> QuadratureGrid:
    return QuadratureGrid(lattice.spec.box_length, lattice.spec.side)


def sample_mode(lattice: ModeLattice, i: int, grid: QuadratureGrid, t: float = 0.0,
                conjugate: bool = False) -> SampledField:
    """Sample ``u_i`` (or ``u_i*``) and its time derivative on ``grid``."""
    X, Y, Z = grid.mesh()
    kx, ky, kz = lattice.k_vecs[i]
    w = lattice.omega[i]
    u = lattice.norm[i] * np.exp(1j * (kx * X + ky * Y + kz * Z - w * t))
    u = np.broadcast_to(u, (grid.points,) * 3)
    udot = -1j * w * u
    if conjugate:
        u, udot = np.conj(u), np.conj(udot)
    return SampledField(grid, np.ascontiguousarray(u), np.ascontiguousarray(udot))


@dataclass(frozen=True)
class OrthonormalityReport:
    n_pairs: int
    max_dev_positive: float  # |(u_k, u_l) - delta|
    max_dev_negative: float  # |(u_k*, u_l*) + delta|
    max_dev_mixed: float  # |(u_k*, u_l)|

    @property
    def max_deviation(self) -> float:
        return max(self.max_dev_positive, self.max_dev_negative, self.max_dev_mixed)


def verify_orthonormality(lattice: ModeLattice, pairs=None,
                          grid: QuadratureGrid | None = None, t: float = 0.0) -> OrthonormalityReport:
    """Maximum deviation of the three mode inner products from their ideal values.

    ``pairs`` is an iterable of ``(i, j)`` flat mode indices; ``None`` means
    every ordered pair.  Massless zero modes are skipped (no normalization).
    """
    grid = grid or commensurate_grid(lattice)
    live = np.flatnonzero(lattice.norm > 0)
    if pairs is None:
        rows = cols = live
        pair_mask = None
    else:
        pairs = np.asarray(list(pairs), dtype=int).reshape(-1, 2)
        if pairs.size == 0:
            raise ValueError("empty pair sample")
        keep = (lattice.norm[pairs[:, 0]] > 0) & (lattice.norm[pairs[:, 1]] > 0)
        pairs = pairs[keep]
        rows = np.unique(pairs[:, 0])
        cols = np.unique(pairs[:, 1])
        pair_mask = (np.searchsorted(rows, pairs[:, 0]), np.searchsorted(cols, pairs[:, 1]))

    X, Y, Z = (c.ravel() for c in grid.mesh(sparse=False))
    pts = np.stack([X, Y, Z], axis=1)

    def table(idx):
        ph = pts @ lattice.k_vecs[idx].T - lattice.omega[idx] * t
        u = lattice.norm[idx] * np.exp(1j * ph)
        return u, -1j * lattice.omega[idx] * u

    ur, ur_dot = table(rows)
    uc, uc_dot = table(cols)
    dv = grid.cell_volume

    def gram(a, a_dot, b, b_dot):
        return 1j * (a.conj().T @ b_dot - a_dot.conj().T @ b) * dv

    pos = gram(ur, ur_dot, uc, uc_dot)
    neg = gram(ur.conj(), ur_dot.conj(), uc.conj(), uc_dot.conj())
    mixed = gram(ur.conj(), ur_dot.conj(), uc, uc_dot)
    delta = (rows[:, None] == cols[None, :]).astype(float)
    dev_pos = np.abs(pos - delta)
    dev_neg = np.abs(neg + delta)
    dev_mix = np.abs(mixed)
    if pair_mask is not None:
        dev_pos, dev_neg, dev_mix = (d[pair_mask] for d in (dev_pos, dev_neg, dev_mix))
    return OrthonormalityReport(
        n_pairs=int(dev_pos.size),
        max_dev_positive=float(dev_pos.max()),
        max_dev_negative=float(dev_neg.max()),
        max_dev_mixed=float(dev_mix.max()),
    )
