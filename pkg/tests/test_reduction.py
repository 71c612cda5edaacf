import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypermag import minkowski as mk
from hypermag.circles import CircleOrbit
from hypermag.curvature import constant, from_selector, minkowski_linear, minkowski_product
from hypermag.errors import ChartDomainError, DegenerateFit, NoConvergence, ResonantRadius, SingularJacobian
from hypermag.hyperboloid import exp_map
from hypermag.reduction import (
    CenterChart,
    asymptotic_check,
    find_critical_point,
    find_reduced_zero,
    hessian_fd,
    h_grid,
    morse_degree,
    prefactor,
    reduced_field,
    sigma23,
    zero_to_critical_distance,
)
from strategies import lorentz_maps


@pytest.mark.parametrize("r", [0.1, 0.05, 0.3, 1.0])
def test_sigma_oracle_linear_e1(r):
    s = sigma23(CircleOrbit.canonical(r), minkowski_linear(mk.E1))
    assert s.sigma3 == pytest.approx(4 * math.pi**2 * r**3 / (1 - 4 * math.pi**2 * r * r), abs=1e-12)
    assert abs(s.sigma2) <= 1e-13


def test_sigma_value_r01():
    s = sigma23(CircleOrbit.canonical(0.1), minkowski_linear(mk.E1))
    assert s.sigma3 == pytest.approx(0.0652303129589021, abs=1e-15)


def test_resonant_radius_rejected():
    with pytest.raises(ResonantRadius):
        prefactor(1 / (2 * math.pi))


def test_constant_k1_has_no_reduced_field():
    s = sigma23(CircleOrbit.canonical(0.2), constant(3.0))
    assert s.norm <= 1e-14


@given(lorentz_maps(), st.floats(0, 1))
@settings(max_examples=25, deadline=None)
def test_reduced_norm_invariance(A, phase):
    k1 = from_selector("morse-max")
    o = CircleOrbit.canonical(0.2)
    n0 = sigma23(o, k1).norm
    assert sigma23(o.transformed(A), k1.pushforward(A)).norm == pytest.approx(n0, rel=1e-9, abs=1e-14)
    assert sigma23(o, k1, phase=phase).norm == pytest.approx(n0, rel=1e-12, abs=1e-16)


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
@settings(max_examples=30)
def test_chart_roundtrip(x, y):
    ch = CenterChart.at(exp_map(mk.E3, np.array([0.2, -0.1, 0.0])))
    xx, yy = ch.coords(ch.point(x, y))
    assert (xx, yy) == (pytest.approx(x, abs=1e-12), pytest.approx(y, abs=1e-12))
    assert mk.is_positive_frame(ch.frame_at(x, y), 1e-9).ok


def test_chart_domain():
    with pytest.raises(ChartDomainError):
        CenterChart.at(mk.E3).point(1.5, 0.0)


@pytest.mark.parametrize("name,want", [("morse-max", 1), ("morse-saddle", -1), ("saddle-e3", -1)])
def test_zero_degree_matches_morse(name, want):
    chart = CenterChart.at(mk.E3)
    k1 = from_selector(name)
    xc, yc = find_critical_point(chart, k1)
    assert morse_degree(chart, k1, xc, yc) == want
    z = find_reduced_zero(chart, 0.05, k1, (xc, yc))
    assert z.local_degree == want
    assert z.residual <= 1e-10
    assert zero_to_critical_distance(chart, k1, z) <= 5 * 0.05


def test_zero_converges_to_critical_point():
    chart = CenterChart.at(mk.E3)
    k1 = from_selector("morse-max")
    xc, yc = find_critical_point(chart, k1)
    d = [zero_to_critical_distance(chart, k1, find_reduced_zero(chart, r, k1, (xc, yc))) for r in (0.1, 0.05, 0.025)]
    assert d[0] > d[1] > d[2]
    # distance shrinks like r^2
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.1)


def test_linear_e3_zero_is_degenerate_at_center():
    chart = CenterChart.at(mk.E3)
    z = find_reduced_zero(chart, 0.05, minkowski_linear(mk.E3), (0.1, -0.05))
    assert math.hypot(z.x, z.y) <= 1e-6
    assert z.local_degree == 1


def test_hessian_of_linear_e3():
    # <p, e3>_m = -cosh(rho): maximum at e3 with Hessian -I
    H = hessian_fd(CenterChart.at(mk.E3), minkowski_linear(mk.E3))
    assert np.allclose(H, -np.eye(2), atol=1e-6)


def test_asymptotic_slope_quadratic():
    chart = CenterChart.at(exp_map(mk.E3, 0.5 * mk.E1 + 0.3 * mk.E2))
    rep = asymptotic_check(chart, minkowski_product(mk.E3, mk.E3), [0.1, 0.05, 0.025])
    assert rep.status == "pass" and rep.slope >= 1.8


def test_asymptotic_exact_and_degenerate_cases():
    rep = asymptotic_check(CenterChart.at(mk.E3), minkowski_linear(mk.E1), [0.1, 0.05, 0.025])
    assert rep.status == "exact" and rep.slope is None
    with pytest.raises(ValueError):
        asymptotic_check(CenterChart.at(mk.E3), minkowski_linear(mk.E1), [0.05, 0.1, 0.2])


def test_no_zero_for_constant_gradient_free_field():
    # k1 = <p, e1>_m has no critical point: Newton must leave or fail
    with pytest.raises((NoConvergence, SingularJacobian, ChartDomainError)):
        find_reduced_zero(CenterChart.at(mk.E3, radius=0.5), 0.05, minkowski_linear(mk.E1), (0.0, 0.0), max_iter=8)


def test_h_grid_shape():
    rows = h_grid(CenterChart.at(mk.E3), 0.05, from_selector("morse-max"), np.linspace(-0.1, 0.1, 3), [0.0, 0.1])
    assert np.asarray(rows).shape == (6, 4)
    v = reduced_field(CenterChart.at(mk.E3), 0.05, from_selector("morse-max"), 0.1, 0.0)
    assert np.allclose(np.asarray(rows)[(np.asarray(rows)[:, 0] == 0.1) & (np.asarray(rows)[:, 1] == 0.0)][0, 2:], v.vector)
