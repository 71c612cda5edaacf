#!/usr/bin/env python3
"""Remainder of the first-harmonic expansion of k1 along shrinking circles.

For each builtin k1 and chart base, prints e(r) for decreasing r and the
fitted log-log slope (3 is the generic rate for smooth k1).
"""
import argparse

import numpy as np

from hypermag import minkowski as mk
from hypermag.curvature import NAMED, from_selector
from hypermag.errors import DegenerateFit
from hypermag.hyperboloid import exp_map
from hypermag.reduction import CenterChart, asymptotic_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", default="0.1,0.05,0.025,0.0125")
    ap.add_argument("--offset", default="0.5,0.3", help="chart base exp(e3, a e1 + b e2)")
    args = ap.parse_args(argv)
    radii = [float(x) for x in args.radii.split(",")]
    a, b = (float(x) for x in args.offset.split(","))
    charts = {"e3": CenterChart.at(mk.E3), "offset": CenterChart.at(exp_map(mk.E3, a * mk.E1 + b * mk.E2))}
    print(f"{'k1':<14}{'chart':<8}{'slope':>8}  status  remainders")
    for name in sorted(NAMED):
        for cname, chart in charts.items():
            try:
                rep = asymptotic_check(chart, from_selector(name), radii)
            except DegenerateFit as exc:
                print(f"{name:<14}{cname:<8}{'-':>8}  degenerate ({exc})")
                continue
            slope = "-" if rep.slope is None else f"{rep.slope:.3f}"
            rem = " ".join(f"{e:.2e}" for e in rep.remainders)
            print(f"{name:<14}{cname:<8}{slope:>8}  {rep.status:<6}  {rem}")


if __name__ == "__main__":
    main()
