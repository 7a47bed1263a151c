"""Reconstruction error of the screen patch as the pole regulator varies.

    python scripts/epsilon_sensitivity.py [--lattice default|resolved]
"""

import argparse
import math

from fockslit.experiment import ScreenGeometry, reconstruction_sweep
from fockslit.lattice import LatticeSpec
from fockslit.sources import SlitSpec

LAM = 2 * math.pi


def setups(name):
    if name == "default":
        L = 10 * LAM
        return L, 8, SlitSpec(LAM, 1.0), ScreenGeometry.centered(L / 4, L / 10, 201, 0.37 * LAM)
    L = 32 * LAM
    return L, 48, SlitSpec(2 * LAM, 1.0), ScreenGeometry.centered(0.15 * L, 0.1 * L, 201,
                                                                  0.37 * LAM)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lattice", choices=("default", "resolved"), default="default")
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()
    L, N, slit, screen = setups(args.lattice)
    spacing = LatticeSpec(L, N).spacing
    print(f"{args.lattice} lattice: L = {L / LAM:g} wavelengths, N = {N}")
    print("eps/spacing  eps/k     L2 error")
    for f in (0.25, 0.5, 1.0, 2.0, 4.0):
        eps = f * spacing
        row = reconstruction_sweep(slit, screen, L, [N], 0.0, eps, threads=args.threads)[0]
        print(f"{f:11g}  {eps / slit.wavenumber:8.4f}  {row.l2_error:.4g}")


if __name__ == "__main__":
    main()
