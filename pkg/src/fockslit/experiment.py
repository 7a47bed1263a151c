"""Screen scans, fringe extraction, phase averaging and separation sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .lattice import LatticeSpec, ModeLattice, build_lattice
from .sources import SlitSpec, double_slit_field, exclusion_radius, intensity
from .states import (
    EnergyMode,
    Observable,
    QuantumState,
    build_double_slit_state,
    build_single_slit_state,
    observe,
    state_overlap,
)

INTENSITY = "INTENSITY"  # classical |F_A + F_B|^2, no lattice involved


class GeometryError(ValueError):
    pass


class FringeError(ValueError):
    pass


@dataclass(frozen=True)
class ScreenGeometry:
    """Line of ``samples`` points ``(x, y, distance)`` with ``x`` in ``[x_min, x_max]``."""

    distance: float
    x_min: float
    x_max: float
    samples: int = 201
    y: float = 0.0

    def __post_init__(self):
        if not self.distance > 0:
            raise GeometryError(f"screen distance must be > 0, got {self.distance}")
        if not self.x_max > self.x_min:
            raise GeometryError("x_max must exceed x_min")
        if self.samples < 16:
            raise GeometryError(f"need at least 16 samples, got {self.samples}")
        if self.samples % 2 == 0:
            raise GeometryError(f"sample count must be odd so a centred scan hits x=0, got {self.samples}")

    @classmethod
    def centered(cls, distance: float, half_width: float, samples: int = 201, y: float = 0.0):
        return cls(distance, -half_width, half_width, samples, y)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.samples)

    def points(self) -> np.ndarray:
        x = self.x
        return np.stack([x, np.full_like(x, self.y), np.full_like(x, self.distance)], axis=1)


def check_geometry(geom: ScreenGeometry, box_length: float | None = None,
                   spec: SlitSpec | None = None) -> None:
    """Raise :class:`GeometryError` if screen points leave the box or touch a source."""
    pts = geom.points()
    if box_length is not None:
        half = 0.5 * box_length
        if np.any(np.abs(pts) >= half):
            raise GeometryError(f"screen points leave the box |coord| < {half:g}")
        if spec is not None and 0.5 * spec.separation >= half:
            raise GeometryError("sources lie outside the box")
    if spec is not None:
        excl = exclusion_radius(box_length) if box_length is not None else 0.0
        for src in (spec.source_a, spec.source_b):
            rho = np.linalg.norm(pts - np.asarray(src.position), axis=1)
            if np.any(rho <= excl):
                raise GeometryError(f"screen passes within {excl:g} of source {src.position}")


@dataclass
class ScreenScan:
    geometry: ScreenGeometry
    observable: str
    values: np.ndarray
    time: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != self.geometry.samples:
            raise ValueError("scan length does not match geometry")

    @property
    def x(self) -> np.ndarray:
        return self.geometry.x


def scan_screen(state: QuantumState, geom: ScreenGeometry, observable, t: float = 0.0,
                spec: SlitSpec | None = None, threads: int = 1) -> ScreenScan:
    observable = Observable(observable)
    check_geometry(geom, state.lattice.spec.box_length, spec)
    values = observe(state, observable, geom.points(), t, threads)
    meta = {"state": state.label, "kind": state.kind.value,
            "cutoff": state.lattice.spec.cutoff, "box_length": state.lattice.spec.box_length}
    return ScreenScan(geom, observable.value, np.asarray(values), t, meta)


def analytic_scan(spec: SlitSpec, geom: ScreenGeometry, t: float = 0.0,
                  epsilon: float = 0.0) -> ScreenScan:
    """Classical two-source intensity along the screen."""
    check_geometry(geom, None, spec)
    dec = intensity(spec, geom.points(), t, epsilon)
    return ScreenScan(geom, INTENSITY, dec.total, t, {"epsilon": epsilon})


def reference_values(spec: SlitSpec, geom: ScreenGeometry, observable, t: float = 0.0,
                     epsilon: float = 0.0) -> np.ndarray:
    """Closed-form counterpart of a lattice observable.

    FIELD -> ``F/sqrt(2 w_k)``; CURRENT -> ``|F|^2``; energies -> ``w_k |F|^2``.
    """
    observable = Observable(observable)
    F = double_slit_field(spec, geom.points(), t, epsilon)
    if observable is Observable.FIELD:
        return F / math.sqrt(2.0 * spec.omega_k)
    if observable is Observable.CURRENT:
        return np.abs(F) ** 2
    return spec.omega_k * np.abs(F) ** 2


def relative_l2_error(values, reference) -> float:
    values, reference = np.asarray(values), np.asarray(reference)
    return float(np.linalg.norm(values - reference) / np.linalg.norm(reference))


# --- fringes -------------------------------------------------------------------


@dataclass(frozen=True)
class FringeReport:
    fringe_spacing: float
    visibility: float
    predicted_spacing: float
    spacing_error: float
    n_extrema: int
    maxima: tuple = ()


def predicted_spacing(spec: SlitSpec, distance: float) -> float:
    return 2.0 * math.pi * distance / (spec.wavenumber * spec.separation)


def _local_extrema(v: np.ndarray, sign: float) -> list[int]:
    """Three-point extrema; on a plateau the smallest-x sample wins."""
    w = sign * v
    out = []
    for i in range(1, len(w) - 1):
        if w[i] > w[i - 1] and w[i] >= w[i + 1]:
            out.append(i)
    return out


def _refine(x: np.ndarray, v: np.ndarray, i: int) -> float:
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den == 0:
        return float(x[i])
    return float(x[i] + 0.5 * (y0 - y2) / den * (x[i + 1] - x[i]))


def visibility(scan: ScreenScan, spec: SlitSpec, periods: float = 3.0) -> float:
    """Fringe contrast ``(I_max - I_min)/(I_max + I_min)`` near the axis.

    Bright and dark fringes are the three-point local maxima and minima
    within ``+-periods`` predicted spacings of ``x = 0``.  The contrast of
    every adjacent bright/dark pair is averaged, so the slowly varying
    single-source envelope is not counted as modulation.  No pair, no
    fringes: returns 0.
    """
    x = scan.x
    v = np.real(np.asarray(scan.values))
    half = periods * predicted_spacing(spec, scan.geometry.distance)
    ext = sorted([(i, 1) for i in _local_extrema(v, 1.0) if abs(x[i]) <= half]
                 + [(i, -1) for i in _local_extrema(v, -1.0) if abs(x[i]) <= half])
    contrasts = []
    for (i, si), (j, sj) in zip(ext[:-1], ext[1:]):
        if si != sj and v[i] + v[j] > 0:
            contrasts.append(abs(v[i] - v[j]) / (v[i] + v[j]))
    if not contrasts:
        return 0.0
    return float(min(1.0, np.mean(contrasts)))


def fringe_analysis(scan: ScreenScan, spec: SlitSpec) -> FringeReport:
    v = np.real(np.asarray(scan.values))
    x = scan.x
    maxima = _local_extrema(v, 1.0)
    minima = _local_extrema(v, -1.0)
    if len(maxima) < 2:
        raise FringeError(f"fewer than 2 maxima found ({len(maxima)}); widen the scan window")
    peaks = np.array([_refine(x, v, i) for i in maxima])
    spacing = float(np.mean(np.diff(peaks)))
    pred = predicted_spacing(spec, scan.geometry.distance)
    return FringeReport(
        fringe_spacing=spacing,
        visibility=visibility(scan, spec),
        predicted_spacing=pred,
        spacing_error=abs(spacing - pred) / pred,
        n_extrema=len(maxima) + len(minima),
        maxima=tuple(float(p) for p in peaks),
    )


# --- incoherent sources --------------------------------------------------------


def phase_grid(n_phase: int) -> np.ndarray:
    if n_phase < 2:
        raise ValueError("need at least 2 phases per source")
    return 2.0 * math.pi * np.arange(n_phase) / n_phase


def _scan_for(spec: SlitSpec, lattice: ModeLattice | None, observable, geom, t, threads):
    if lattice is None:
        return analytic_scan(spec, geom, t).values
    state = build_double_slit_state(lattice, spec)
    return np.real(scan_screen(state, geom, observable, t, spec, threads).values)


def incoherent_average(spec: SlitSpec, observable, geom: ScreenGeometry, t: float = 0.0,
                       n_phase: int = 4, lattice: ModeLattice | None = None,
                       method: str = "grid", seed: int = 0, n_samples: int = 64,
                       threads: int = 1) -> ScreenScan:
    """Average a scan over independent source phases.

    ``method="grid"`` uses the ``n_phase x n_phase`` uniform grid, which
    integrates the single-harmonic cross term exactly.  ``"monte-carlo"``
    draws ``n_samples`` seeded phase pairs.  ``lattice=None`` averages the
    classical intensity instead of a lattice observable.
    """
    if method == "grid":
        th = phase_grid(n_phase)
        pairs = [(a, b) for a in th for b in th]
    elif method == "monte-carlo":
        rng = np.random.default_rng(seed)
        pairs = [tuple(p) for p in rng.uniform(0.0, 2.0 * math.pi, size=(n_samples, 2))]
    else:
        raise ValueError(f"unknown averaging method {method!r}")
    acc = np.zeros(geom.samples)
    for a, b in pairs:
        acc = acc + _scan_for(replace(spec, phase_a=a, phase_b=b), lattice, observable, geom,
                              t, threads)
    obs = INTENSITY if lattice is None else Observable(observable).value
    meta = {"method": method, "n_phase": n_phase, "n_pairs": len(pairs), "seed": seed}
    return ScreenScan(geom, obs, acc / len(pairs), t, meta)


def single_source_sum(spec: SlitSpec, observable, geom: ScreenGeometry, t: float = 0.0,
                      lattice: ModeLattice | None = None, threads: int = 1) -> np.ndarray:
    return (_scan_for(spec.only("A"), lattice, observable, geom, t, threads)
            + _scan_for(spec.only("B"), lattice, observable, geom, t, threads))


# --- separation sweep ------------------------------------------------------------


@dataclass(frozen=True)
class OverlapPoint:
    d: float
    kd: float
    ratio: complex
    sinc: float
    error: str | None = None


def sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def overlap_curve(spec_template: SlitSpec, d_values: Sequence[float],
                  lattice: ModeLattice) -> list[OverlapPoint]:
    """``<B;k|A;k> / <A;k|A;k>`` against ``sin(kd)/(kd)`` for each separation."""
    L = lattice.spec.box_length
    k = spec_template.wavenumber
    rows = []
    for d in d_values:
        kd = k * d
        if not (0 < d <= 0.5 * L):
            rows.append(OverlapPoint(d, kd, complex("nan+nanj"), float(sinc(kd)),
                                     f"d={d:g} outside (0, L/2]"))
            continue
        spec = replace(spec_template, separation=d)
        a = build_single_slit_state(lattice, spec, "A")
        b = build_single_slit_state(lattice, spec, "B")
        ratio = state_overlap(a, b) / state_overlap(a, a)
        rows.append(OverlapPoint(d, kd, ratio, float(sinc(kd))))
    return rows


# --- reconstruction and energy law -----------------------------------------------


@dataclass(frozen=True)
class ReconstructionRow:
    region: str
    l2_error: float
    cutoff: int


def reconstruction_error(state: QuantumState, spec: SlitSpec, geom: ScreenGeometry,
                         t: float = 0.0, threads: int = 1) -> float:
    """Relative L2 error of the lattice field against ``F_DS/sqrt(2 w_k)``.

    The reference carries the same ``exp(-eps rho)`` damping as the coefficients.
    """
    scan = scan_screen(state, geom, Observable.FIELD, t, spec, threads)
    ref = reference_values(spec, geom, Observable.FIELD, t, state.lattice.spec.epsilon)
    return relative_l2_error(scan.values, ref)


def reconstruction_sweep(spec: SlitSpec, geom: ScreenGeometry, box_length: float,
                         cutoffs: Sequence[int], mass: float = 0.0,
                         epsilon: float | None = None, t: float = 0.0,
                         threads: int = 1) -> list[ReconstructionRow]:
    rows = []
    for N in cutoffs:
        lat = build_lattice(LatticeSpec(box_length, N, mass, epsilon))
        err = reconstruction_error(build_double_slit_state(lat, spec), spec, geom, t, threads)
        rows.append(ReconstructionRow("screen", err, N))
    return rows


@dataclass(frozen=True)
class EnergyProfile:
    r: np.ndarray
    ratio: np.ndarray  # energy / (2 w_k^2 |F_lattice|^2)
    residual: np.ndarray  # energy - 2 w_k^2 |F_lattice|^2


def energy_profile(state: QuantumState, spec: SlitSpec, r_values,
                   direction=(0.0, 0.0, 1.0), mode: EnergyMode = EnergyMode.PERIOD_AVERAGED,
                   threads: int = 1) -> EnergyProfile:
    """Energy density against ``w_k |F|^2`` along a ray from the origin."""
    r = np.asarray(r_values, dtype=float)
    u = np.asarray(direction, float) / np.linalg.norm(direction)
    pts = r[:, None] * u[None, :]
    obs = Observable.ENERGY if EnergyMode(mode) is EnergyMode.INSTANT else Observable.ENERGY_TIME_AVERAGED
    e = observe(state, obs, pts, 0.0, threads)
    F = observe(state, Observable.FIELD, pts, 0.0, threads)
    base = 2.0 * spec.omega_k**2 * np.abs(F) ** 2
    return EnergyProfile(r, e / base, e - base)


def fit_power_law(r, residual, window: float, iterations: int = 4) -> tuple[float, float]:
    """Slope and intercept of ``log(rms residual)`` vs ``log r``.

    The residual oscillates on the scale of a wavelength; its RMS over
    consecutive ``window``-wide bins is fitted instead of the raw values.
    A steep power law varies inside each bin, so the bin values are
    de-trended with the current slope estimate and the fit is repeated.
    """
    r = np.asarray(r, float)
    res = np.asarray(residual, float)
    edges = np.arange(r.min(), r.max() + window, window)
    bins = [(r >= lo) & (r < hi) for lo, hi in zip(edges[:-1], edges[1:])]
    bins = [m for m in bins if m.sum() >= 4]
    if len(bins) < 3:
        raise ValueError("not enough windows for a power-law fit")
    centers = np.array([np.exp(np.mean(np.log(r[m]))) for m in bins])
    slope = 0.0
    for _ in range(iterations):
        rms = [math.sqrt(float(np.mean((res[m] * (r[m] / c) ** -slope) ** 2)))
               for m, c in zip(bins, centers)]
        slope, intercept = np.polyfit(np.log(centers), np.log(rms), 1)
    return float(slope), float(intercept)
