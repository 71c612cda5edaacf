"""Invariant battery behind ``hypermag selftest``.

Each suite returns (name, ok, detail).  Budget: well under two minutes on
one core.
"""
from __future__ import annotations

import math
import tempfile
import time
from pathlib import Path

import numpy as np

from . import minkowski as mk
from .audit import audit_curve
from .circles import CircleOrbit, alpha_eval, sample_curve
from .curvature import constant, from_selector, minkowski_linear
from .flow import IntegratorConfig, flow_map
from .io import RunConfig, append_record, config_hash, format_config, parse_config, read_records
from .reduction import CenterChart, find_critical_point, find_reduced_zero, morse_degree, sigma23
from .solver import solve_from_zero, sweep_energy
from .variational import (
    check_E_plus_positivity,
    check_kernel_images,
    dx_eigenvalue_on_J,
    dx_eigenvalue_on_J_closed_form,
    monodromy,
)


def suite_minkowski():
    rng = np.random.default_rng(mk.DEFAULT_SEED)
    f = mk.Frame.canonical()
    ok = mk.is_positive_frame(f, mk.FRAME_TOL).ok
    worst = 0.0
    for _ in range(20):
        A = mk.random_lorentz(rng, 1.5)
        worst = max(worst, mk.lorentz_residual(A)[0])
        ok &= mk.is_positive_frame(f.transformed(A), 1e-9).ok
    return ok and worst < 1e-9, f"max Lorentz residual {worst:.1e}"


def suite_closed_form():
    errs = []
    for r in (1.0, 0.1):
        o = CircleOrbit.canonical(r)
        end = flow_map(alpha_eval(o, 0.0), constant(o.k0), 1.0, IntegratorConfig("rk45", tol=1e-10))
        errs.append(float(np.max(np.abs(end - alpha_eval(o, 1.0)))))
    return max(errs) <= 1e-8, "endpoint errors " + ", ".join(f"{e:.1e}" for e in errs)


def suite_kernel():
    o = CircleOrbit.canonical(0.3)
    M = monodromy(alpha_eval(o, 0.0), constant(o.k0))
    ok = M.geometric_multiplicity == 3 and M.algebraic_multiplicity == 4
    return ok, f"geometric {M.geometric_multiplicity}, algebraic {M.algebraic_multiplicity}"


def suite_spectral():
    o = CircleOrbit.canonical(1.0)
    img = check_kernel_images(o)
    ev, _ = dx_eigenvalue_on_J(o)
    e_err = abs(ev - dx_eigenvalue_on_J_closed_form(1.0))
    rep = check_E_plus_positivity(CircleOrbit.canonical(0.1), trials=1000)
    ok = max(img.values()) <= 1e-10 and e_err <= 1e-10 and rep["passed"]
    return ok, f"images {max(img.values()):.1e}, eigenvalue {e_err:.1e}, E+ min {rep['min_form']:.3g}"


def suite_reduction():
    o = CircleOrbit.canonical(0.1)
    s = sigma23(o, minkowski_linear(mk.E1))
    want = 4 * math.pi**2 * 0.1**3 / (1 - 4 * math.pi**2 * 0.01)
    err = abs(s.sigma3 - want) + abs(s.sigma2)
    chart = CenterChart.at(mk.E3)
    good = 0
    for name in ("morse-max", "morse-saddle"):
        k1 = from_selector(name)
        xc, yc = find_critical_point(chart, k1)
        z = find_reduced_zero(chart, 0.05, k1, (xc, yc))
        good += z.local_degree == morse_degree(chart, k1, xc, yc)
    return err <= 1e-10 and good == 2, f"sigma oracle {err:.1e}, degrees {good}/2"


def suite_orbit():
    chart = CenterChart.at(mk.E3)
    k1 = minkowski_linear(mk.E3)
    z = find_reduced_zero(chart, 0.05, k1, (0.2, -0.1))
    rec = solve_from_zero(chart, z, k1, 1e-3, with_monodromy=False)
    rep = audit_curve(rec.curve(), constant(rec.spec["k0"]) + 1e-3 * k1)
    ok = rec.closure <= 1e-9 and rep.gauss_bonnet_residual <= 1e-5 and rec.s1_degree == -1
    return ok, f"closure {rec.closure:.1e}, GB {rep.gauss_bonnet_residual:.1e}, S1-degree {rec.s1_degree}"


def suite_sweep():
    ents = sweep_energy([0.5, 0.9, 1.0, 1.5, 2.0])
    ok = all(e.passed for e in ents) and [e.closed for e in ents] == [True, True, False, False, False]
    return ok, "closed for c < 1 only" if ok else str(ents)


def suite_audit():
    worst = 0.0
    for r in (1.0, 1 / math.sqrt(3)):
        o = CircleOrbit.canonical(r)
        rep = audit_curve(sample_curve(o), constant(o.k0), o.center)
        worst = max(worst, rep.gauss_bonnet_residual)
    return worst <= 1e-7, f"Gauss-Bonnet residual {worst:.1e}"


def suite_invariance():
    rng = np.random.default_rng(7)
    A = mk.random_lorentz(rng, 1.0)
    o = CircleOrbit.canonical(0.4)
    k = constant(o.k0)
    cfg = IntegratorConfig("rk45", tol=1e-10)
    s0 = alpha_eval(o, 0.0)

    def act(s):
        return np.concatenate([A @ s[:3], A @ s[3:]])

    e1 = flow_map(act(s0), k, 1.0, cfg)
    e2 = act(flow_map(s0, k, 1.0, cfg))
    flow_err = float(np.max(np.abs(e1 - e2)))
    k1 = from_selector("morse-max")
    n0 = sigma23(o, k1).norm
    n1 = sigma23(o.transformed(A), k1.pushforward(A)).norm
    n2 = sigma23(o, k1, phase=0.37).norm
    red_err = abs(n0 - n1) + abs(n0 - n2)
    return flow_err <= 1e-8 and red_err <= 1e-8, f"flow {flow_err:.1e}, reduction {red_err:.1e}"


def suite_io():
    cfg = RunConfig(r=0.05, eps_list=(1e-3, 5e-4), k1="morse-max")
    ok = parse_config(format_config(cfg)) == cfg
    with tempfile.TemporaryDirectory() as d:
        store = Path(d) / "s.jsonl"
        env = append_record(store, "orbit", {"x": 1.5}, config_hash(cfg))
        ok &= read_records(store, chash=config_hash(cfg)) == [env]
    return ok, "config and store round trips"


SUITES = [
    ("minkowski", suite_minkowski, False),
    ("closed-form flow", suite_closed_form, False),
    ("kernel/monodromy", suite_kernel, False),
    ("spectral identities", suite_spectral, False),
    ("reduction", suite_reduction, False),
    ("orbit solver", suite_orbit, True),
    ("energy sweep", suite_sweep, True),
    ("audit", suite_audit, False),
    ("invariance", suite_invariance, False),
    ("io", suite_io, False),
]


def run(quick=False, out=print):
    t0 = time.perf_counter()
    all_ok = True
    for name, fn, slow in SUITES:
        if quick and slow:
            out(f"SKIP {name}")
            continue
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t:.1f}s)")
    out(f"{'PASS' if all_ok else 'FAIL'} selftest total {time.perf_counter() - t0:.1f}s")
    return all_ok
