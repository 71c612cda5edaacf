"""Acceptance criteria 1-9 at their stated tolerances.

Each test records a PASS/FAIL line (printed in the pytest terminal summary,
or directly when this file is run as a script) and then asserts.
"""
import math
import time

import numpy as np
import pytest

from hypermag import minkowski as mk
from hypermag.audit import audit_curve
from hypermag.circles import CircleOrbit, alpha_eval, sample_curve
from hypermag.cli import main as cli_main
from hypermag.curvature import constant, from_selector, minkowski_linear
from hypermag.flow import IntegratorConfig, flow_map
from hypermag.hyperboloid import exp_map
from hypermag.reduction import (
    CenterChart,
    asymptotic_check,
    find_critical_point,
    find_reduced_zero,
    morse_degree,
    sigma23,
    zero_to_critical_distance,
)
from hypermag.solver import continue_orbit, solve_from_zero, sweep_energy
from hypermag.variational import (
    check_E_plus_positivity,
    check_kernel_images,
    constant_k,
    dx_eigenvalue_on_J,
    kernel_state,
    monodromy,
    reproduce_kernel_fields,
)

try:
    from conftest import ACCEPTANCE
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE = {}


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    return bool(ok)


def eigenvalue_on_J(r):
    # value quoted with the DX eigenvalue identity
    return -4 * math.pi**2 / (4 * math.pi**2 * (1 + r * r) + 1)


def sigma3_linear_e1(r):
    # sigma_3 for k1 = <p, e1>_m on the canonical circle of radius r
    return 4 * math.pi**2 * r**3 / (1 - 4 * math.pi**2 * r * r)


_ladder = {}


def continuation_ladder():
    """r = 0.05, k1 = <p, e3>_m, eps in {1e-3, 5e-4, 2.5e-4}; computed once."""
    if not _ladder:
        t = time.perf_counter()
        chart = CenterChart.at(mk.E3)
        k1 = minkowski_linear(mk.E3)
        zero = find_reduced_zero(chart, 0.05, k1, (0.0, 0.0))
        rep = continue_orbit(chart, zero, k1, (1e-3, 5e-4, 2.5e-4))
        _ladder["report"] = rep
        _ladder["seconds"] = time.perf_counter() - t
        _ladder["k1"] = k1
    return _ladder


# ---------------------------------------------------------------- criterion 1


def test_criterion_1_closed_form_fidelity():
    rows, ok = [], True
    for r in (1.0, 0.1):
        o = CircleOrbit.canonical(r)
        t = time.perf_counter()
        end = flow_map(alpha_eval(o, 0.0), constant(o.k0), 1.0, IntegratorConfig("rk45", tol=1e-10))
        dt = time.perf_counter() - t
        err = float(np.max(np.abs(end - alpha_eval(o, 1.0))))
        ok &= err <= 1e-8 and dt < 1.0
        rows.append(f"r={r}: err {err:.1e} in {dt:.2f}s")
    assert record(1, ok, "; ".join(rows))


# ---------------------------------------------------------------- criterion 2


def test_criterion_2_kernel_structure():
    rows, ok = [], True
    for r in (1.0, 0.3, 0.1):
        o = CircleOrbit.canonical(r)
        M = monodromy(alpha_eval(o, 0.0), constant_k(o))
        # W0 = t alpha' is not periodic: one period adds W1
        s0 = kernel_state(o, 0, 0.0, M.frame)
        s1 = kernel_state(o, 1, 0.0, M.frame)
        jordan = float(np.max(np.abs((M.matrix - np.eye(4)) @ s0 - s1)) / np.max(np.abs(s1)))
        fields = reproduce_kernel_fields(o)
        w23 = max(fields[2], fields[3])
        ok &= M.geometric_multiplicity == 3 and M.algebraic_multiplicity == 4
        ok &= jordan <= 1e-7 and w23 <= 1e-7
        rows.append(f"r={r}: geo {M.geometric_multiplicity} alg {M.algebraic_multiplicity}, "
                    f"W0 jordan {jordan:.1e}, W2/W3 {w23:.1e}")
    assert record(2, ok, "; ".join(rows))


# ---------------------------------------------------------------- criterion 3


def test_criterion_3_spectral_identities():
    o = CircleOrbit.canonical(1.0)
    img = max(check_kernel_images(o).values())
    ev, _ = dx_eigenvalue_on_J(o)
    ev_err = abs(ev - eigenvalue_on_J(1.0))
    rep = check_E_plus_positivity(CircleOrbit.canonical(0.1), trials=1000)
    ok = img <= 1e-10 and ev_err <= 1e-10 and rep["passed"] and rep["trials"] == 1000
    detail = (f"images {img:.1e}, eigenvalue {ev:.12f} (err {ev_err:.1e}), "
              f"E+ min {rep['min_form']:.3g} over {rep['trials']} samples")
    assert record(3, ok, detail)


# ---------------------------------------------------------------- criterion 4


def test_criterion_4_reduction():
    errs = []
    for r in (0.1, 0.05, 0.025):
        s = sigma23(CircleOrbit.canonical(r), minkowski_linear(mk.E1))
        errs.append(abs(s.sigma3 - sigma3_linear_e1(r)) + abs(s.sigma2))
    s_err = max(errs)
    # off-center chart so the quadratic k1 has a generic first-harmonic remainder
    chart_q = CenterChart.at(exp_map(mk.E3, 0.5 * mk.E1 + 0.3 * mk.E2))
    asym = asymptotic_check(chart_q, from_selector("square-e3"), [0.1, 0.05, 0.025])
    chart = CenterChart.at(mk.E3)
    worst = 0.0
    conv_ok = True
    for name in ("morse-max", "morse-saddle"):
        k1 = from_selector(name)
        xc, yc = find_critical_point(chart, k1)
        for r in (0.1, 0.05, 0.025):
            d = zero_to_critical_distance(chart, k1, find_reduced_zero(chart, r, k1, (xc, yc)))
            conv_ok &= d <= 5 * r
            worst = max(worst, d / r)
    ok = s_err <= 1e-10 and asym.status == "pass" and asym.slope >= 1.8 and conv_ok
    detail = f"sigma err {s_err:.1e}, slope {asym.slope:.3f}, max zero-critical distance / r {worst:.2e}"
    assert record(4, ok, detail)


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_degree_identities():
    chart = CenterChart.at(mk.E3)
    good, rows = 0, []
    for name in ("morse-max", "morse-saddle"):
        k1 = from_selector(name)
        xc, yc = find_critical_point(chart, k1)
        want = morse_degree(chart, k1, xc, yc)
        z = find_reduced_zero(chart, 0.05, k1, (xc, yc))
        rec = solve_from_zero(chart, z, k1, 1e-3, with_monodromy=False)
        good += z.local_degree == want
        good += rec.s1_degree == -want
        rows.append(f"{name}: hessian sign {want:+d}, degree {z.local_degree:+d}, S1 {rec.s1_degree:+d}")
    assert record(5, good == 4, f"{good}/4 correct; " + "; ".join(rows))


# ---------------------------------------------------------------- criterion 6


def test_criterion_6_continuation():
    lad = continuation_ladder()
    rep = lad["report"]
    converged = rep.epsilons == [1e-3, 5e-4, 2.5e-4] and not rep.failures
    closure = max((rec.closure for rec in rep.records), default=math.inf)
    linear = len(rep.ratios) == 2 and all(abs(q - 1) <= 0.25 for q in rep.ratios)
    geo = [rec.floquet["geometric_multiplicity"] for rec in rep.records]
    floquet = bool(geo) and all(g == 1 for g in geo)
    fast = lad["seconds"] < 30
    ok = converged and closure <= 1e-9 and linear and floquet and fast
    detail = (f"converged {rep.epsilons}, closure {closure:.1e}, deviations "
              + ", ".join(f"{d:.3e}" for d in rep.deviations)
              + ", linearity ratios " + ", ".join(f"{q:.3f}" for q in rep.ratios)
              + f", Floquet geometric multiplicity {geo} (need 1), {lad['seconds']:.1f}s")
    record(6, ok, detail)
    assert converged and closure <= 1e-9, detail
    assert linear and fast, detail
    assert floquet, detail


# ---------------------------------------------------------------- criterion 7


def test_criterion_7_trichotomy():
    ents = sweep_energy([0.5, 0.9, 1.0, 1.5, 2.0])
    closed = [e.closed for e in ents]
    ok = closed == [True, True, False, False, False] and all(e.passed for e in ents)
    ok &= all(e.radius_error <= 1e-8 for e in ents if e.closed)
    ok &= all(e.monotone for e in ents if not e.closed)
    rows = [f"c={e.c}: r err {e.radius_error:.1e}" if e.closed
            else f"c={e.c}: d(10)={e.distance_T10:.3f} d(20)={e.distance_T20:.3f}" for e in ents]
    assert record(7, ok, "; ".join(rows))


# ---------------------------------------------------------------- criterion 8


def test_criterion_8_gauss_bonnet_audit():
    circ = 0.0
    bounds_ok = iso_ok = True
    min_margin = math.inf
    for r in (1.0, 0.3, 0.1):
        o = CircleOrbit.canonical(r)
        rep = audit_curve(sample_curve(o), constant(o.k0), o.center)
        circ = max(circ, rep.gauss_bonnet_residual)
        bounds_ok &= rep.bounds_ok
        iso_ok &= rep.iso_ok
        min_margin = min(min_margin, rep.iso_margin)
    lad = continuation_ladder()
    pert = 0.0
    for rec in lad["report"].records:
        k = constant(rec.spec["k0"]) + rec.spec["epsilon"] * lad["k1"]
        rep = audit_curve(rec.curve(), k)
        pert = max(pert, rep.gauss_bonnet_residual)
        bounds_ok &= rep.bounds_ok
        iso_ok &= rep.iso_ok
        min_margin = min(min_margin, rep.iso_margin)
    ok = circ <= 1e-7 and pert <= 1e-5 and bounds_ok and iso_ok and lad["report"].records
    detail = (f"GB circles {circ:.1e}, perturbed {pert:.1e}, length bounds {bounds_ok}, "
              f"isoperimetric {iso_ok} (min margin {min_margin:.1e})")
    assert record(8, ok, detail)


# ---------------------------------------------------------------- criterion 9


def test_criterion_9_invariance():
    rng = np.random.default_rng(11)
    flow_err = red_err = aud_err = phase_err = 0.0
    cfg = IntegratorConfig("rk45", tol=1e-10)
    k1 = from_selector("morse-max")
    for _ in range(3):
        A = mk.random_lorentz(rng, 1.0)
        o = CircleOrbit.canonical(0.4)
        s0 = alpha_eval(o, 0.0)

        def act(s):
            return np.concatenate([A @ s[:3], A @ s[3:]])

        flow_err = max(flow_err, float(np.max(np.abs(
            flow_map(act(s0), constant(o.k0), 1.0, cfg) - act(flow_map(s0, constant(o.k0), 1.0, cfg))))))
        n0 = sigma23(o, k1).norm
        red_err = max(red_err, abs(sigma23(o.transformed(A), k1.pushforward(A)).norm - n0))
        a0 = audit_curve(sample_curve(o), constant(o.k0), o.center)
        a1 = audit_curve(sample_curve(o).transformed(A), constant(o.k0), A @ o.center)
        aud_err = max(aud_err, abs(a0.length - a1.length), abs(a0.area - a1.area),
                      abs(a0.gauss_bonnet_residual - a1.gauss_bonnet_residual))
        for ph in (0.25, 0.37):
            phase_err = max(phase_err, abs(sigma23(o, k1, phase=ph).norm - n0))
        a2 = audit_curve(sample_curve(o).shifted(37), constant(o.k0), o.center)
        phase_err = max(phase_err, abs(a2.area - a0.area), abs(a2.length - a0.length))
    t = time.perf_counter()
    code = cli_main(["selftest"])
    st = time.perf_counter() - t
    # "exact" phase invariance is read as agreement at round-off level
    ok = max(flow_err, red_err, aud_err) <= 1e-8 and phase_err <= 1e-12 and code == 0 and st < 120
    detail = (f"flow {flow_err:.1e}, reduction {red_err:.1e}, audit {aud_err:.1e}, "
              f"phase shift {phase_err:.1e}, selftest exit {code} in {st:.1f}s")
    assert record(9, ok, detail)


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        try:
            fn()
        except AssertionError:
            pass
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    sys.exit(0 if all(ok for ok, _ in ACCEPTANCE.values()) else 1)
