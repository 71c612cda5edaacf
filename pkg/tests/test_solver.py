import json
import math

import numpy as np
import pytest

from hypermag import minkowski as mk
from hypermag.circles import CircleOrbit
from hypermag.curvature import from_selector, minkowski_linear
from hypermag.errors import DegenerateJacobian, MissingProvenance, SubcriticalCurvature
from hypermag.io import canonical_json
from hypermag.reduction import CenterChart, find_critical_point, find_reduced_zero
from hypermag.solver import (
    OrbitRecord,
    PerturbationSpec,
    Section,
    ShootingUnknowns,
    SolverConfig,
    local_s1_degree,
    orbit_deviation,
    seed_from_zero,
    shoot_residual,
    solve_from_zero,
    solve_orbit,
    sweep_energy,
)

CHART = CenterChart.at(mk.E3)
K1 = minkowski_linear(mk.E3)


@pytest.fixture(scope="module")
def zero():
    return find_reduced_zero(CHART, 0.05, K1, (0.0, 0.0))


@pytest.fixture(scope="module")
def record(zero):
    return solve_from_zero(CHART, zero, K1, 1e-3, with_monodromy=False)


def test_unperturbed_seed_is_a_solution(zero):
    o, sec, seed = seed_from_zero(CHART, zero)
    F = shoot_residual(seed, PerturbationSpec(o.k0, K1, 0.0), sec)
    assert np.max(np.abs(F)) <= 1e-10


def test_unperturbed_problem_is_degenerate(zero):
    o, sec, seed = seed_from_zero(CHART, zero)
    with pytest.raises(DegenerateJacobian):
        solve_orbit(PerturbationSpec(o.k0, K1, 0.0), sec, seed, with_monodromy=False)


def test_perturbed_orbit(record):
    assert record.closure <= 1e-9
    assert record.equation_residual <= 1e-6
    assert record.speed_variation <= 1e-8 * record.speed
    assert record.s1_degree == -1
    o = CircleOrbit.canonical(0.05)
    # deviation from the unperturbed circle is O(r^2 eps)
    assert orbit_deviation(record, o) == pytest.approx(0.05**2 * 1e-3, rel=0.05)


def test_record_json_roundtrip(record):
    d = json.loads(canonical_json(record.to_dict()))
    back = OrbitRecord.from_dict(d)
    assert np.allclose(back.curve().points, record.curve().points, rtol=0, atol=0)
    assert back.spec == record.spec


def test_solve_is_deterministic(zero, record):
    again = solve_from_zero(CHART, zero, K1, 1e-3, with_monodromy=False)
    a, b = record.to_dict(), again.to_dict()
    a.pop("timestamp"), b.pop("timestamp")
    assert canonical_json(a) == canonical_json(b)


def test_s1_degree_needs_provenance(record):
    rec = OrbitRecord.from_dict({**record.to_dict(), "provenance": None})
    with pytest.raises(MissingProvenance):
        local_s1_degree(rec)


def test_saddle_gives_positive_s1_degree():
    k1 = from_selector("morse-saddle")
    xc, yc = find_critical_point(CHART, k1)
    z = find_reduced_zero(CHART, 0.05, k1, (xc, yc))
    rec = solve_from_zero(CHART, z, k1, 1e-3, with_monodromy=False)
    assert rec.closure <= 1e-9 and rec.s1_degree == 1


def test_spec_validation():
    with pytest.raises(SubcriticalCurvature):
        PerturbationSpec(1.0, K1, 1e-3)
    with pytest.raises(ValueError):
        PerturbationSpec(3.0, K1, -1.0)
    with pytest.raises(ValueError):
        ShootingUnknowns(0, 0, 0, 0.0)
    spec = PerturbationSpec(math.sqrt(2), K1, 10.0)
    with pytest.raises(SubcriticalCurvature):
        spec.check_threshold(np.array([mk.E3]))


def test_sweep_closed_branch():
    (e,) = sweep_energy([0.5])
    assert e.closed and e.passed
    assert e.measured_radius == pytest.approx(1 / math.sqrt(3), abs=1e-8)


def test_sweep_rejects_bad_energy():
    with pytest.raises(ValueError):
        sweep_energy([3.5])
