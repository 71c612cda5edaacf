#!/usr/bin/env python3
"""eps ladder for perturbed circle orbits, with a Floquet multiplicity study.

Solves the ladder, prints deviation scaling and closure, then recounts the
geometric multiplicity of the multiplier 1 under several rank cutoffs.  The
drift singular values of M - I grow like ~4e-4 eps at r = 0.05, while the
integration noise floor sits near 2e-11, so the count depends on where the
cutoff falls between them.

    python scripts/continuation_study.py --eps 1e-3,5e-4,2.5e-4 --extra-eps 1e-2,3e-2,1e-1
"""
import argparse
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from hypermag import minkowski as mk
from hypermag.curvature import from_selector
from hypermag.reduction import CenterChart, find_reduced_zero
from hypermag.solver import continue_orbit
from hypermag.variational import RANK_CUTOFF, analyze_monodromy


@dataclass
class StudyConfig:
    r: float = 0.05
    k1: str = "linear-e3"
    eps: tuple = (1e-3, 5e-4, 2.5e-4)
    extra_eps: tuple = (1e-2, 3e-2, 1e-1)
    cutoffs: tuple = (RANK_CUTOFF, 1e-8, 1e-9, 1e-10)
    out: str = ""


def floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def multiplicities(rec, cutoffs):
    M = np.array(rec.floquet["matrix"])
    return {f"{c:g}": analyze_monodromy(M, c).geometric_multiplicity for c in cutoffs}


def ladder(cfg, chart, k1, zero, eps):
    t = time.perf_counter()
    rep = continue_orbit(chart, zero, k1, eps)
    dt = time.perf_counter() - t
    rows = []
    for e, rec, dev in zip(rep.epsilons, rep.records, rep.deviations):
        sv = rec.floquet["singular_values_M_minus_I"]
        rows.append({
            "eps": e,
            "closure": rec.closure,
            "deviation": dev,
            "deviation_over_r2_eps": dev / (cfg.r**2 * e),
            "s1_degree": rec.s1_degree,
            "sv_M_minus_I": sv,
            "geometric_multiplicity": multiplicities(rec, cfg.cutoffs),
        })
    return {"seconds": dt, "rows": rows, "ratios": rep.ratios, "failures": rep.failures}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=StudyConfig.r)
    ap.add_argument("--k1", default=StudyConfig.k1)
    ap.add_argument("--eps", type=floats, default=StudyConfig.eps)
    ap.add_argument("--extra-eps", dest="extra_eps", type=floats, default=StudyConfig.extra_eps)
    ap.add_argument("--out", default="")
    cfg = StudyConfig(**{k: v for k, v in vars(ap.parse_args(argv)).items()})

    chart = CenterChart.at(mk.E3)
    k1 = from_selector(cfg.k1)
    zero = find_reduced_zero(chart, cfg.r, k1, (0.0, 0.0))
    result = {"config": asdict(cfg), "zero": zero.to_dict()}
    result["ladder"] = ladder(cfg, chart, k1, zero, cfg.eps)
    if cfg.extra_eps:
        result["large_eps"] = ladder(cfg, chart, k1, zero, cfg.extra_eps)

    for name in ("ladder", "large_eps"):
        if name not in result:
            continue
        block = result[name]
        print(f"[{name}] {block['seconds']:.1f}s, ratios {['%.3f' % q for q in block['ratios']]}, "
              f"failures {block['failures'] or 'none'}")
        print("  eps        closure   deviation  dev/(r^2 eps)  sv(M-I) smallest two   geo mult by cutoff")
        for row in block["rows"]:
            sv = row["sv_M_minus_I"]
            print(f"  {row['eps']:<9.3g}  {row['closure']:.1e}   {row['deviation']:.3e}  "
                  f"{row['deviation_over_r2_eps']:.4f}         {sv[-2]:.2e} {sv[-1]:.2e}     "
                  f"{row['geometric_multiplicity']}")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2, default=float)


if __name__ == "__main__":
    main()
