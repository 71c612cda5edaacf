#!/usr/bin/env python3
"""Energy sweep for k = 1: closed circles below c = 1, escape at and above it."""
import argparse
import json
from dataclasses import asdict

import numpy as np

from hypermag.solver import sweep_energy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c-values", default="0.25,0.5,0.75,0.9,0.95,1.0,1.05,1.5,2.0,3.0")
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--json", default="")
    args = ap.parse_args(argv)
    cs = [float(x) for x in args.c_values.split(",")]
    ents = sweep_energy(cs, T_max=args.T)
    for e in ents:
        if e.closed:
            print(f"c={e.c:<5} closed   r={e.measured_radius:.12f} (want {e.expected_radius:.12f}, "
                  f"err {e.radius_error:.1e}), T_return={e.return_time:.6f}")
        else:
            print(f"c={e.c:<5} escapes  monotone={e.monotone}  d(10)={e.distance_T10:.4f}  "
                  f"d({args.T:g})={e.distance_T20:.4f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump([asdict(e) for e in ents], fh, indent=2)


if __name__ == "__main__":
    main()
