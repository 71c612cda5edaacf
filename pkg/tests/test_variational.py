import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypermag import minkowski as mk
from hypermag.circles import CircleOrbit, alpha_eval, kernel_field, sample_curve
from hypermag.errors import NotClosed
from hypermag.variational import (
    FrameSeries,
    analyze_monodromy,
    check_E_plus_positivity,
    check_kernel_images,
    constant_k,
    d2plus1_time_domain,
    dx_eigenvalue_on_J,
    dx_eigenvalue_on_J_closed_form,
    is_resonant,
    kernel_series,
    kernel_state,
    linearized_residual,
    monodromy,
    range_spectrum,
    spectral_apply_D2plus1,
)


@pytest.mark.parametrize("index", [1, 2, 3])
@pytest.mark.parametrize("r", [0.1, 1.0])
def test_kernel_fields_solve_linearization(index, r):
    o = CircleOrbit.canonical(r)
    W, _ = kernel_field(o, index, np.arange(256) / 256)
    res = linearized_residual(sample_curve(o), constant_k(o), W)
    assert np.max(np.abs(res)) <= 1e-8 * max(1.0, o.k0**2)


def test_jordan_structure_r03():
    o = CircleOrbit.canonical(0.3)
    M = monodromy(alpha_eval(o, 0.0), constant_k(o))
    assert (M.geometric_multiplicity, M.algebraic_multiplicity) == (3, 4)
    assert M.det == pytest.approx(1.0, abs=1e-9)
    assert M.det_consistency() <= 1e-9
    s0 = kernel_state(o, 0, 0.0, M.frame)
    s1 = kernel_state(o, 1, 0.0, M.frame)
    assert np.allclose((M.matrix - np.eye(4)) @ s0, s1, atol=1e-9)


def test_monodromy_refuses_open_base():
    o = CircleOrbit.canonical(0.3)
    k = constant_k(o) + 0.01
    with pytest.raises(NotClosed):
        monodromy(alpha_eval(o, 0.0), k)


def test_analyze_monodromy_synthetic():
    # one Jordan block of size 2 and a rotation pair away from 1
    M = np.eye(4)
    M[0, 1] = 1.0
    c, s = math.cos(0.3), math.sin(0.3)
    M[2:, 2:] = [[c, -s], [s, c]]
    rep = analyze_monodromy(M)
    assert (rep.geometric_multiplicity, rep.algebraic_multiplicity) == (1, 2)
    rep = analyze_monodromy(np.eye(4))
    assert (rep.geometric_multiplicity, rep.algebraic_multiplicity) == (4, 4)


@pytest.mark.parametrize("r", [0.05, 0.1, 0.3, 1.0])
def test_kernel_images(r):
    assert max(check_kernel_images(CircleOrbit.canonical(r)).values()) <= 1e-10


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_eigenvalue_on_J(r):
    ev, res = dx_eigenvalue_on_J(CircleOrbit.canonical(r))
    assert ev == pytest.approx(-4 * math.pi**2 / (4 * math.pi**2 * (1 + r * r) + 1), abs=1e-10)
    assert ev == pytest.approx(dx_eigenvalue_on_J_closed_form(r), abs=1e-10)
    assert res <= 1e-10


def test_eigenvalue_at_r1_value():
    # -4 pi^2 / (8 pi^2 + 1) = -0.4937466259...
    assert dx_eigenvalue_on_J_closed_form(1.0) == pytest.approx(-0.49374662593, abs=1e-11)


def test_E_plus_positive_below_resonance():
    rep = check_E_plus_positivity(CircleOrbit.canonical(0.1), trials=200)
    assert rep["passed"] and rep["min_form"] > 0
    assert rep["f_part_closed_form_error"] <= 1e-10


@given(st.floats(0.02, 0.15))
@settings(max_examples=10, deadline=None)
def test_first_harmonic_sign_changes_at_resonance(r):
    below = range_spectrum(CircleOrbit.canonical(r), harmonics=8)
    above = range_spectrum(CircleOrbit.canonical(r + 0.2), harmonics=8)
    assert below["first_harmonic_eigenvalue"].real > 0
    assert above["first_harmonic_eigenvalue"].real < 0
    for rep in (below, above):
        assert rep["first_harmonic_eigenvalue"].real == pytest.approx(rep["first_harmonic_closed_form"], rel=1e-9)
        assert rep["kernel_dimension"] == 3


def test_resonance_flag():
    assert is_resonant(1 / (2 * math.pi))
    assert not is_resonant(0.1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_symbol_roundtrip_and_time_domain(seed):
    o = CircleOrbit.canonical(0.4)
    rng = np.random.default_rng(seed)
    t = np.arange(64) / 64
    l1 = sum(rng.normal() / m * np.cos(2 * np.pi * m * t + rng.uniform(0, 6)) for m in range(1, 8))
    l2 = sum(rng.normal() / m * np.sin(2 * np.pi * m * t + rng.uniform(0, 6)) for m in range(1, 8))
    s = FrameSeries.from_functions(l1, l2)
    img = spectral_apply_D2plus1(o, s)
    back = spectral_apply_D2plus1(o, img, invert=True)
    assert (back - s).max_abs() <= 1e-12
    direct = FrameSeries.from_field(o, d2plus1_time_domain(o, s.to_field(o)))
    assert (direct - img).max_abs() <= 1e-8
    assert s.conjugate_symmetry_residual() <= 1e-12


def test_kernel_series_w1_is_constant():
    s = kernel_series(CircleOrbit.canonical(0.2), 1)
    l1, l2 = s.functions()
    assert np.allclose(l1, 1.0) and np.allclose(l2, 0.0, atol=1e-14)
