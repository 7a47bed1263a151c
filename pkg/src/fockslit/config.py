"""Run configuration: strict JSON loading with line-anchored diagnostics.

A config is one JSON object with the sections ``lattice``, ``slit``,
``experiment``, ``screen``, ``output``, ``seed`` and an optional ``params``
object carrying experiment-specific knobs.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .experiment import GeometryError, ScreenGeometry, check_geometry
from .lattice import LatticeSpec
from .sources import SlitSpec

EXPERIMENTS = ("reconstruct", "scan", "fringes", "incoherent", "overlap-sweep", "validate")
OBSERVABLES = ("FIELD", "CURRENT", "ENERGY", "ENERGY_TIME_AVERAGED", "INTENSITY")

_SECTIONS = {
    "lattice": {"box_length": True, "cutoff": True, "mass": False, "epsilon": False},
    "slit": {"d": True, "k": True, "amp_a": False, "theta_a": False, "amp_b": False,
             "theta_b": False, "nonrelativistic": False},
    "screen": {"distance": True, "x_min": True, "x_max": True, "y": False, "samples": False},
    "params": {"observable": False, "time": False, "state": False, "n_phase": False,
               "phase_mode": False, "n_samples": False, "d_values": False, "cutoffs": False,
               "oracle_points": False, "ortho_pairs": False, "normalize": False},
}
_TOP = {"lattice": True, "slit": True, "experiment": True, "screen": False, "output": False,
        "seed": False, "params": False}


@dataclass(frozen=True)
class Params:
    observable: str = "CURRENT"
    time: float = 0.0
    state: str = "one_particle"
    n_phase: int = 4
    phase_mode: str = "grid"
    n_samples: int = 64
    d_values: tuple = ()
    cutoffs: tuple = ()
    oracle_points: int | None = None
    ortho_pairs: int = 2000
    normalize: bool = False


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeSpec
    slit: SlitSpec
    experiment: str
    screen: ScreenGeometry | None
    output: str = "out"
    seed: int = 0
    params: Params = field(default_factory=Params)

    def to_json(self) -> dict:
        """Plain JSON form using the config field names (round-trips through :func:`parse_config`)."""
        lat = self.lattice
        s = self.slit
        doc = {
            "lattice": {"box_length": lat.box_length, "cutoff": lat.cutoff, "mass": lat.mass,
                        "epsilon": lat.epsilon},
            "slit": {"d": s.separation, "k": s.wavenumber, "amp_a": s.amp_a, "theta_a": s.phase_a,
                     "amp_b": s.amp_b, "theta_b": s.phase_b, "nonrelativistic": s.nonrelativistic},
            "experiment": self.experiment,
            "output": self.output,
            "seed": self.seed,
        }
        if self.screen is not None:
            g = self.screen
            doc["screen"] = {"distance": g.distance, "x_min": g.x_min, "x_max": g.x_max,
                             "y": g.y, "samples": g.samples}
        p = asdict(self.params)
        p["d_values"] = list(p["d_values"])
        p["cutoffs"] = list(p["cutoffs"])
        doc["params"] = p
        return doc


@dataclass(frozen=True)
class Diagnostic:
    line: int
    path: str
    message: str

    def format(self, source: str = "<config>") -> str:
        return f"{source}:{self.line}: {self.path}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic], source: str = "<config>"):
        self.diagnostics = diagnostics
        self.source = source
        super().__init__("\n".join(d.format(source) for d in diagnostics))


class _Locator:
    """Maps a dotted key path to the line where that key appears in the text."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, path: str) -> int:
        start = 0
        for part in path.split("."):
            pat = re.compile(r'"%s"\s*:' % re.escape(part))
            for i in range(start, len(self.lines)):
                if pat.search(self.lines[i]):
                    start = i
                    break
            else:
                return start + 1
        return start + 1


def _number(v, integer=False) -> bool:
    if isinstance(v, bool):
        return False
    if integer:
        return isinstance(v, int) or (isinstance(v, float) and v.is_integer())
    return isinstance(v, (int, float)) and math.isfinite(v)


class _Checker:
    def __init__(self, text: str):
        self.loc = _Locator(text)
        self.diags: list[Diagnostic] = []

    def error(self, path: str, message: str):
        self.diags.append(Diagnostic(self.loc.line_of(path), path, message))

    def section(self, doc: dict, name: str, required: bool):
        keys = _SECTIONS[name]
        sec = doc.get(name)
        if sec is None:
            if required:
                self.error(name, "missing required section")
            return None
        if not isinstance(sec, dict):
            self.error(name, "must be an object")
            return None
        for key in sec:
            if key not in keys:
                self.error(f"{name}.{key}", f"unknown key (allowed: {', '.join(keys)})")
        for key, req in keys.items():
            if req and key not in sec:
                self.error(name, f"missing required key '{key}'")
        return sec

    def num(self, sec, name, key, default=None, integer=False):
        if sec is None or key not in sec:
            return default
        v = sec[key]
        if v is None and default is None:
            return None
        if not _number(v, integer):
            self.error(f"{name}.{key}", f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        return int(v) if integer else float(v)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and fully validate a config document; raise :class:`ConfigError`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([Diagnostic(exc.lineno, "<json>", f"parse error: {exc.msg}")], source)
    if not isinstance(doc, dict):
        raise ConfigError([Diagnostic(1, "<json>", "top level must be an object")], source)

    c = _Checker(text)
    for key in doc:
        if key not in _TOP:
            c.error(key, f"unknown key (allowed: {', '.join(_TOP)})")
    for key, req in _TOP.items():
        if req and key not in doc:
            c.error(key, "missing required key")

    lat_s = c.section(doc, "lattice", True)
    slit_s = c.section(doc, "slit", True)
    scr_s = c.section(doc, "screen", False)
    par_s = c.section(doc, "params", False)

    experiment = doc.get("experiment")
    if "experiment" in doc and experiment not in EXPERIMENTS:
        c.error("experiment", f"must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}")
    output = doc.get("output", "out")
    if not isinstance(output, str) or not output:
        c.error("output", "must be a non-empty string")
    seed = doc.get("seed", 0)
    if not (_number(seed, integer=True) and seed >= 0):
        c.error("seed", f"must be a non-negative integer, got {seed!r}")
        seed = 0

    lattice = None
    if lat_s is not None:
        L = c.num(lat_s, "lattice", "box_length")
        N = c.num(lat_s, "lattice", "cutoff", integer=True)
        mu = c.num(lat_s, "lattice", "mass", 0.0)
        eps = c.num(lat_s, "lattice", "epsilon", None)
        if eps is not None and eps <= 0:
            c.error("lattice.epsilon", f"epsilon must be > 0 (pole regulator), got {eps:g}")
        elif L is not None and N is not None:
            try:
                lattice = LatticeSpec(L, N, mu, eps)
            except ValueError as exc:
                c.error("lattice", str(exc))

    slit = None
    if slit_s is not None:
        vals = {key: c.num(slit_s, "slit", key, dflt) for key, dflt in
                (("d", None), ("k", None), ("amp_a", 1.0), ("theta_a", 0.0),
                 ("amp_b", 1.0), ("theta_b", 0.0))}
        nonrel = slit_s.get("nonrelativistic", False)
        if not isinstance(nonrel, bool):
            c.error("slit.nonrelativistic", "expected true or false")
            nonrel = False
        if vals["d"] is not None and vals["k"] is not None:
            try:
                slit = SlitSpec(vals["d"], vals["k"], vals["amp_a"], vals["theta_a"],
                                vals["amp_b"], vals["theta_b"],
                                lattice.mass if lattice else 0.0, nonrel)
            except ValueError as exc:
                c.error("slit", str(exc))
        if slit is not None and lattice is not None and slit.separation > 0.5 * lattice.box_length:
            c.error("slit.d", f"geometry: d = {slit.separation:g} exceeds L/2 = "
                              f"{0.5 * lattice.box_length:g}; both sources must sit inside the box")
            slit = None

    params = Params()
    if par_s is not None:
        params = _parse_params(c, par_s)

    screen = None
    if scr_s is not None:
        vals = {key: c.num(scr_s, "screen", key, dflt) for key, dflt in
                (("distance", None), ("x_min", None), ("x_max", None), ("y", 0.0))}
        samples = c.num(scr_s, "screen", "samples", 201, integer=True)
        if None not in vals.values():
            try:
                screen = ScreenGeometry(vals["distance"], vals["x_min"], vals["x_max"],
                                        samples, vals["y"])
            except GeometryError as exc:
                c.error("screen", str(exc))
        if screen is not None and lattice is not None and params.observable != "INTENSITY":
            try:
                check_geometry(screen, lattice.box_length, slit)
            except GeometryError as exc:
                c.error("screen", f"geometry: {exc}")
    elif experiment in ("reconstruct", "scan", "fringes", "incoherent"):
        c.error("experiment", f"experiment '{experiment}' needs a screen section")

    if experiment == "overlap-sweep" and not params.d_values:
        c.error("params", "overlap-sweep needs params.d_values")

    if c.diags:
        raise ConfigError(c.diags, source)
    return RunConfig(lattice, slit, experiment, screen, output, int(seed), params)


def _parse_params(c: _Checker, p: dict) -> Params:
    kw = {}
    obs = p.get("observable", "CURRENT")
    if obs not in OBSERVABLES:
        c.error("params.observable", f"must be one of {', '.join(OBSERVABLES)}, got {obs!r}")
    else:
        kw["observable"] = obs
    state = p.get("state", "one_particle")
    if state not in ("one_particle", "coherent"):
        c.error("params.state", f"must be 'one_particle' or 'coherent', got {state!r}")
    else:
        kw["state"] = state
    mode = p.get("phase_mode", "grid")
    if mode not in ("grid", "monte-carlo"):
        c.error("params.phase_mode", f"must be 'grid' or 'monte-carlo', got {mode!r}")
    else:
        kw["phase_mode"] = mode
    kw["time"] = c.num(p, "params", "time", 0.0)
    for key, lo, dflt in (("n_phase", 2, 4), ("n_samples", 1, 64), ("ortho_pairs", 1, 2000)):
        v = c.num(p, "params", key, dflt, integer=True)
        if v < lo:
            c.error(f"params.{key}", f"must be >= {lo}, got {v}")
        kw[key] = v
    pts = c.num(p, "params", "oracle_points", None, integer=True)
    if pts is not None and pts < 3:
        c.error("params.oracle_points", f"must be >= 3, got {pts}")
    kw["oracle_points"] = pts
    norm = p.get("normalize", False)
    if not isinstance(norm, bool):
        c.error("params.normalize", "expected true or false")
    else:
        kw["normalize"] = norm
    for key, integer in (("d_values", False), ("cutoffs", True)):
        v = p.get(key, [])
        if not isinstance(v, list) or not all(_number(x, integer) for x in v):
            c.error(f"params.{key}", f"expected a list of {'integers' if integer else 'numbers'}")
        else:
            kw[key] = tuple(int(x) if integer else float(x) for x in v)
    if any(n < 1 for n in kw.get("cutoffs", ())):
        c.error("params.cutoffs", "cutoffs must be >= 1")
    return Params(**kw)


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    return parse_config(text, str(path))


def config_from_manifest(path) -> RunConfig:
    """Rebuild the run config echoed into a ``manifest.json``."""
    doc = json.loads(Path(path).read_text())
    text = json.dumps(doc["config"], indent=2)
    return parse_config(text, str(path))
