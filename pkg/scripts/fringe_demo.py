"""Print a coarse text rendering of a lattice CURRENT scan next to the
classical intensity, plus the fringe report.

    python scripts/fringe_demo.py [--cutoff 32]
"""

import argparse
import math

import numpy as np

from fockslit.experiment import (
    ScreenGeometry,
    fringe_analysis,
    incoherent_average,
    reference_values,
    scan_screen,
    visibility,
)
from fockslit.lattice import LatticeSpec, build_lattice
from fockslit.sources import SlitSpec
from fockslit.states import Observable, build_double_slit_state

LAM = 2 * math.pi


def bar(v, vmax, width=30):
    return "#" * int(round(width * v / vmax))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoff", type=int, default=48)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()
    L = 32 * LAM
    spec = LatticeSpec(L, args.cutoff, 0.0, 0.5 * 2 * math.pi / L)
    slit = SlitSpec(2 * LAM, 1.0)
    geom = ScreenGeometry.centered(0.15 * L, 0.1 * L, 81, y=0.37 * LAM)
    lat = build_lattice(spec)
    scan = scan_screen(build_double_slit_state(lat, slit), geom, Observable.CURRENT, 0.0, slit,
                       args.threads)
    ref = reference_values(slit, geom, Observable.CURRENT, 0.0, spec.epsilon)
    vmax = max(scan.values.max(), ref.max())
    print(f"{'x':>8}  {'lattice j0':<31}{'|F|^2':<31}")
    for x, v, r in zip(geom.x, scan.values, ref):
        print(f"{x:8.2f}  {bar(v, vmax):<31}{bar(r, vmax):<31}")
    rep = fringe_analysis(scan, slit)
    print(f"spacing {rep.fringe_spacing:.3f} vs 2 pi r/(k d) = {rep.predicted_spacing:.3f} "
          f"({rep.spacing_error:.1%}); visibility {rep.visibility:.3f}")
    inc = incoherent_average(slit, Observable.CURRENT, geom, 0.0, 4, lat, threads=args.threads)
    print(f"incoherent 4x4 average: visibility {visibility(inc, slit):.3f}")


if __name__ == "__main__":
    main()
