#!/usr/bin/env python3
"""Sign of DX on the range of (-D^2+1) across radii (experimental above 1/(2 pi)).

Below the resonant radius the only negative direction is alpha x alpha'.
The first-harmonic pair turns negative at r = 1/(2 pi), so the count jumps
from 1 to 3 while the sign stays -1.  Nothing above resonance has a
reference value to check against.
"""
import argparse
import math

import numpy as np

from hypermag.circles import CircleOrbit
from hypermag.variational import is_resonant, range_spectrum


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rmin", type=float, default=0.02)
    ap.add_argument("--rmax", type=float, default=1.5)
    ap.add_argument("--n", type=int, default=25)
    ap.add_argument("--harmonics", type=int, default=32)
    args = ap.parse_args(argv)
    print(f"resonant radius 1/(2 pi) = {1 / (2 * math.pi):.6f}")
    print(f"{'r':>8} {'neg dims':>9} {'kernel':>7} {'sign':>5} {'first harmonic':>16} {'closed form':>14}")
    for r in np.geomspace(args.rmin, args.rmax, args.n):
        if is_resonant(r):
            print(f"{r:8.4f}  resonant")
            continue
        rep = range_spectrum(CircleOrbit.canonical(float(r)), args.harmonics)
        tag = "" if r < 1 / (2 * math.pi) else "  (experimental)"
        print(f"{r:8.4f} {rep['negative_dimensions']:9d} {rep['kernel_dimension']:7d} {rep['sign']:5d} "
              f"{rep['first_harmonic_eigenvalue'].real:16.6e} {rep['first_harmonic_closed_form']:14.6e}{tag}")


if __name__ == "__main__":
    main()
