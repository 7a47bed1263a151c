"""Command-line entry point: ``fockslit validate <config>`` and
``fockslit run <config> --out <dir>``.

Exit codes: 0 success, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, config_from_manifest, load_config
from .experiment import (
    INTENSITY,
    analytic_scan,
    fringe_analysis,
    incoherent_average,
    overlap_curve,
    reconstruction_sweep,
    scan_screen,
    single_source_sum,
    visibility,
)
from .lattice import build_lattice, verify_orthonormality
from .sources import closed_form_coefficients, oracle_coefficients
from .states import StateKind, build_double_slit_state

log = logging.getLogger("fockslit")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

# Full-lattice orthonormality is checked up to this many modes; beyond it a
# seeded sample of pairs is used.
FULL_ORTHO_MODES = 729

TOLERANCES = {
    "orthonormality": 1e-10,
    "oracle_relative": 0.02,
    "oracle_shell_factor": 5.0,
    "reconstruction_l2": 0.05,
    "fringe_spacing": 0.02,
    "incoherent_residual": 1e-10,
    "incoherent_visibility": 1e-3,
    "overlap_absolute": 0.05,
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


class Bundle:
    """Collects output files and writes them in one serialized pass."""

    def __init__(self):
        self.files: dict[str, str] = {}
        self.rows: dict[str, int] = {}
        self.notes: dict = {}

    def table(self, name, header, rows):
        rows = list(rows)
        self.files[name] = csv_text(header, rows)
        self.rows[name] = len(rows)


# --- experiments ---------------------------------------------------------------


def _state(cfg: RunConfig, lattice):
    state = build_double_slit_state(lattice, cfg.slit, normalize=cfg.params.normalize)
    if cfg.params.state == "coherent":
        state = state.with_kind(StateKind.COHERENT)
    return state


def _scan(cfg: RunConfig, threads: int):
    p = cfg.params
    if p.observable == INTENSITY:
        return analytic_scan(cfg.slit, cfg.screen, p.time)
    lattice = build_lattice(cfg.lattice)
    return scan_screen(_state(cfg, lattice), cfg.screen, p.observable, p.time, cfg.slit, threads)


def _scan_rows(scan):
    values = np.asarray(scan.values)
    obs = scan.observable
    if np.iscomplexobj(values):
        # the scan table holds real values; complex fields are written as modulus
        values, obs = np.abs(values), f"{obs}_ABS"
    pts = scan.geometry.points()
    return [(x, y, z, scan.time, v, obs) for (x, y, z), v in zip(pts, values)]


SCAN_HEADER = ("x", "y", "z", "t", "value", "observable_id")


def run_scan(cfg, bundle, threads):
    bundle.table("scan.csv", SCAN_HEADER, _scan_rows(_scan(cfg, threads)))


def run_fringes(cfg, bundle, threads):
    scan = _scan(cfg, threads)
    bundle.table("scan.csv", SCAN_HEADER, _scan_rows(scan))
    rep = fringe_analysis(scan, cfg.slit)
    bundle.table("fringes.csv",
                 ("fringe_spacing", "predicted_spacing", "spacing_error", "visibility", "n_extrema"),
                 [(rep.fringe_spacing, rep.predicted_spacing, rep.spacing_error, rep.visibility,
                   rep.n_extrema)])


def run_incoherent(cfg, bundle, threads):
    p = cfg.params
    lattice = None if p.observable == INTENSITY else build_lattice(cfg.lattice)
    obs = "CURRENT" if lattice is None else p.observable
    scan = incoherent_average(cfg.slit, obs, cfg.screen, p.time, p.n_phase, lattice,
                              p.phase_mode, cfg.seed, p.n_samples, threads)
    ref = single_source_sum(cfg.slit, obs, cfg.screen, p.time, lattice, threads)
    resid = float(np.max(np.abs(scan.values - ref)))
    bundle.table("scan.csv", SCAN_HEADER, _scan_rows(scan))
    bundle.table("summary.csv", ("visibility", "max_abs_residual", "n_pairs", "method"),
                 [(visibility(scan, cfg.slit), resid, scan.metadata["n_pairs"],
                   scan.metadata["method"])])


def run_overlap(cfg, bundle, threads):
    lattice = build_lattice(cfg.lattice)
    points = overlap_curve(cfg.slit, cfg.params.d_values, lattice)
    bundle.table("overlap.csv", ("d", "kd", "re_ratio", "im_ratio", "sinc"),
                 [(q.d, q.kd, q.ratio.real, q.ratio.imag, q.sinc) for q in points])
    errors = [q.error for q in points if q.error]
    if errors:
        bundle.notes["point_errors"] = errors


def run_reconstruct(cfg, bundle, threads):
    cutoffs = cfg.params.cutoffs or (cfg.lattice.cutoff,)
    rows = reconstruction_sweep(cfg.slit, cfg.screen, cfg.lattice.box_length, cutoffs,
                                cfg.lattice.mass, cfg.lattice.epsilon, cfg.params.time, threads)
    bundle.table("reconstruction.csv", ("region", "l2_error", "N"),
                 [(r.region, r.l2_error, r.cutoff) for r in rows])


def run_validate(cfg, bundle, threads):
    lattice = build_lattice(cfg.lattice)
    n = len(lattice)
    if n <= FULL_ORTHO_MODES:
        rep = verify_orthonormality(lattice)
    else:
        rng = np.random.default_rng(cfg.seed)
        m = cfg.params.ortho_pairs
        pairs = np.concatenate([np.repeat(rng.integers(0, n, size=(m // 2, 1)), 2, axis=1),
                                rng.integers(0, n, size=(m - m // 2, 2))])
        rep = verify_orthonormality(lattice, pairs=pairs)

    # per-source comparison: the two-source sum has exact zeros where
    # cos(l_x d / 2) = 0, which make a relative error meaningless
    closed, oracle, rel = {}, {}, {}
    for which in ("A", "B"):
        closed[which] = closed_form_coefficients(lattice, cfg.slit, which)
        oracle[which] = oracle_coefficients(lattice, cfg.slit, which, cfg.params.oracle_points)
        scale = np.abs(oracle[which])
        rel[which] = np.divide(np.abs(closed[which] - oracle[which]), scale, out=np.zeros(n),
                               where=scale > 0)
    worst = np.maximum(rel["A"], rel["B"])
    k = cfg.slit.wavenumber
    eps = cfg.lattice.epsilon
    detuning = lattice.k_squared - k * k
    qualifies = np.abs(detuning) > TOLERANCES["oracle_shell_factor"] * eps * k
    live = lattice.norm > 0
    q = qualifies & live
    max_q = float(worst[q].max()) if q.any() else float("nan")

    tol_o, tol_c = TOLERANCES["orthonormality"], TOLERANCES["oracle_relative"]
    bundle.table("validation.csv", ("check", "value", "tolerance", "passed", "count"), [
        ("orthonormality_max_deviation", rep.max_deviation, tol_o, rep.max_deviation < tol_o,
         rep.n_pairs),
        ("oracle_max_relative_error_off_shell", max_q, tol_c, bool(q.any() and max_q <= tol_c),
         int(q.sum())),
        ("oracle_max_relative_error_all_modes", float(worst[live].max()), tol_c,
         bool(worst[live].max() <= tol_c), int(live.sum())),
    ])
    ix = lattice.indices
    bundle.table("coefficients.csv",
                 ("nx", "ny", "nz", "l2_minus_k2", "re_closed_a", "im_closed_a", "re_oracle_a",
                  "im_oracle_a", "rel_error_a", "rel_error_b", "off_shell"),
                 [(ix[i, 0], ix[i, 1], ix[i, 2], detuning[i], closed["A"][i].real,
                   closed["A"][i].imag, oracle["A"][i].real, oracle["A"][i].imag, rel["A"][i],
                   rel["B"][i], bool(qualifies[i])) for i in range(n)])


RUNNERS = {
    "scan": run_scan,
    "fringes": run_fringes,
    "incoherent": run_incoherent,
    "overlap-sweep": run_overlap,
    "reconstruct": run_reconstruct,
    "validate": run_validate,
}


def execute(cfg: RunConfig, threads: int = 1) -> Bundle:
    bundle = Bundle()
    RUNNERS[cfg.experiment](cfg, bundle, threads)
    return bundle


def manifest(cfg: RunConfig, bundle: Bundle) -> dict:
    lat = cfg.lattice
    doc = {
        "manifest_version": 1,
        "config": cfg.to_json(),
        "lattice": {"n_modes": lat.n_modes, "spacing": lat.spacing, "epsilon": lat.epsilon,
                    "volume": lat.volume, "cutoff": lat.cutoff},
        "units": "natural units c = hbar = 1; lengths in the units of lattice.box_length",
        "tolerances": TOLERANCES,
        "versions": {"fockslit": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "files": dict(sorted(bundle.rows.items())),
    }
    if bundle.notes:
        doc["notes"] = bundle.notes
    return doc


def write_bundle(out: Path, cfg: RunConfig, bundle: Bundle) -> list[Path]:
    created_dir = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, text in sorted(bundle.files.items()):
            path = out / name
            with open(path, "w", newline="") as fh:
                fh.write(text)
            written.append(path)
        path = out / "manifest.json"
        with open(path, "w", newline="") as fh:
            fh.write(json.dumps(manifest(cfg, bundle), indent=2, sort_keys=True) + "\n")
        written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        if created_dir:
            try:
                out.rmdir()
            except OSError:
                pass
        raise
    return written


def _load(path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError):
        doc = None
    if isinstance(doc, dict) and "manifest_version" in doc:
        return config_from_manifest(path)
    return load_config(path)


def _threads(arg) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("FOCKSLIT_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def cmd_validate(args) -> int:
    try:
        _load(args.config)
    except FileNotFoundError:
        print(f"{args.config}: file not found", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(f"{args.config}: ok (0 diagnostics)")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except FileNotFoundError:
        print(f"{args.config}: file not found", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out if args.out else cfg.output)
    threads = _threads(args.threads)
    log.info("running %s with %d thread(s) -> %s", cfg.experiment, threads, out)
    try:
        bundle = execute(cfg, threads)
        written = write_bundle(out, cfg, bundle)
    except Exception as exc:  # module errors surface as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockslit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fockslit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="only report errors")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (speed only; falls back to FOCKSLIT_THREADS)")

    p = sub.add_parser("validate", parents=[common], help="check a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", parents=[common], help="run the configured experiment")
    p.add_argument("config", help="config JSON or a manifest.json from a previous run")
    p.add_argument("--out", default=None, help="output directory (default: config 'output')")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
