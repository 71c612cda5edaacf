"""Gauge-fixed shooting for closed orbits with k = k0 + eps k1.

Unknowns u = (a, b, theta, s): the initial point exp(p0, a e_a + b e_b), the
initial direction angle theta in the frame (e_a, e_b) transported to that
point, and the speed s.  The period is fixed to 1.  Here p0 and e_a are the
predicted initial point and unit velocity and e_b = J e_a points to the
predicted center, so {a = 0} is the geodesic section through the predictor
center orthogonal to the predicted velocity.
"""
from __future__ import annotations

import datetime as _dt
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import minkowski as mk
from .circles import TWO_PI, CircleOrbit, alpha_eval, radius_from_k
from .curvature import CurvatureFunction, constant, energy_rescale
from .errors import (
    DegenerateJacobian,
    MissingProvenance,
    NoConvergence,
    SubcriticalCurvature,
)
from .flow import IntegratorConfig, escape_distances, flow_map, integrate
from .hyperboloid import Curve, covariant_derivative, distance, exp_map, log_map, transport
from .reduction import CenterChart, ReducedZero
from .variational import monodromy


@dataclass(frozen=True)
class PerturbationSpec:
    k0: float
    k1: CurvatureFunction
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.k0 > 1.0:
            raise SubcriticalCurvature(f"k0 = {self.k0} must exceed 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def k(self) -> CurvatureFunction:
        if self.epsilon == 0.0:
            return constant(self.k0)
        return constant(self.k0) + self.epsilon * self.k1

    @property
    def r(self):
        return radius_from_k(self.k0)

    def check_threshold(self, points):
        kmin = float(np.min(self.k.value(points)))
        if not kmin > 1.0:
            raise SubcriticalCurvature(f"k drops to {kmin:.6g} <= 1 along the orbit")
        return kmin

    def to_dict(self):
        return {"k0": self.k0, "k1": self.k1.label, "epsilon": self.epsilon}


@dataclass(frozen=True)
class ShootingUnknowns:
    a: float
    b: float
    theta: float
    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("speed must be positive")

    @property
    def vector(self):
        return np.array([self.a, self.b, self.theta, self.s])

    @classmethod
    def from_vector(cls, u):
        return cls(*(float(x) for x in u))


@dataclass(frozen=True)
class Section:
    """Predicted initial point p0 with frame (e_a, e_b = J e_a)."""

    p0: np.ndarray
    ea: np.ndarray
    center: np.ndarray

    @property
    def eb(self):
        return mk.cross(self.p0, self.ea)

    @classmethod
    def from_orbit(cls, o: CircleOrbit):
        st = alpha_eval(o, 0.0)
        v = st[3:]
        return cls(st[:3], v / mk.spacelike_norm(v), o.center)

    def to_dict(self):
        return {"p0": self.p0.tolist(), "ea": self.ea.tolist(), "center": self.center.tolist()}


@dataclass(frozen=True)
class SolverConfig:
    steps: int = 2048
    n_samples: int = 256
    fd_coord: float = 1e-6
    fd_speed: float = 1e-7
    tol: float = 1e-14  # iterate to the noise floor: weak directions have sigma ~ 4e-4 eps
    accept: float = 1e-9
    max_iter: int = 30
    degenerate_ratio: float = 1e-10  # sigma_min / sigma_max; eps = 0 gives ~3e-12, eps = 1e-4 ~2e-9

    @property
    def integrator(self):
        return IntegratorConfig("rk4", step=1.0 / self.steps)


def initial_states(U, sec: Section):
    """Encode unknowns (shape (m, 4)) as ambient states (m, 6)."""
    U = np.atleast_2d(U)
    a, b, th, s = U[:, 0:1], U[:, 1:2], U[:, 2:3], U[:, 3:4]
    ea, eb = sec.ea, sec.eb
    P = exp_map(sec.p0, a * ea + b * eb)
    ea_t = transport(sec.p0, P, np.broadcast_to(ea, P.shape))
    eb_t = transport(sec.p0, P, np.broadcast_to(eb, P.shape))
    V = s * (np.cos(th) * ea_t + np.sin(th) * eb_t)
    return np.concatenate([P, V], axis=-1), ea_t, eb_t


def _wrap(x):
    return (x + math.pi) % TWO_PI - math.pi


def shoot_residual_batch(U, spec: PerturbationSpec, sec: Section, cfg: SolverConfig):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    s0, ea_t, eb_t = initial_states(U, sec)
    end = flow_map(s0, spec.k, 1.0, cfg.integrator)
    P, P1, V1 = s0[:, :3], end[:, :3], end[:, 3:]
    d = log_map(sec.p0, P1)
    dx = mk.inner(d, sec.ea) - U[:, 0]
    dy = mk.inner(d, sec.eb) - U[:, 1]
    Vt = transport(P1, P, V1)
    phi = np.arctan2(mk.inner(Vt, eb_t), mk.inner(Vt, ea_t))
    return np.column_stack([dx, dy, _wrap(phi - U[:, 2]), U[:, 0]])


def shoot_residual(u: ShootingUnknowns, spec: PerturbationSpec, sec: Section, cfg: SolverConfig | None = None):
    return shoot_residual_batch(u.vector, spec, sec, cfg or SolverConfig())[0]


def shooting_jacobian(u, spec, sec, cfg: SolverConfig):
    """Central differences, all 9 evaluations in one batched integration."""
    u = np.asarray(u, dtype=float)
    hs = np.array([cfg.fd_coord, cfg.fd_coord, cfg.fd_coord, cfg.fd_speed])
    U = [u]
    for j in range(4):
        for sgn in (1, -1):
            e = np.zeros(4)
            e[j] = sgn * hs[j]
            U.append(u + e)
    F = shoot_residual_batch(np.array(U), spec, sec, cfg)
    J = np.empty((4, 4))
    for j in range(4):
        diff = F[1 + 2 * j] - F[2 + 2 * j]
        diff[2] = _wrap(diff[2])
        J[:, j] = diff / (2 * hs[j])
    return F[0], J


@dataclass
class OrbitRecord:
    spec: dict
    unknowns: dict
    section: dict
    closure: float
    speed: float
    measured_speed: float
    speed_variation: float
    equation_residual: float
    iterations: int
    jacobian_singular_values: list
    floquet: dict
    points: list = field(repr=False)
    velocities: list = field(repr=False)
    period: float = 1.0
    provenance: dict | None = None
    s1_degree: int | None = None
    audit: dict | None = None
    config_hash: str = ""
    timestamp: str = ""

    def curve(self) -> Curve:
        return Curve(np.array(self.points), np.array(self.velocities), self.period)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _equation_residual(curve: Curve, k: CurvatureFunction):
    p, v = curve.points, curve.velocities
    Dv = covariant_derivative(curve, v)
    s = mk.spacelike_norm(v)
    res = Dv - (s * k.value(p))[:, None] * mk.cross(p, v)
    return float(np.max(mk.spacelike_norm(res)))


def solve_orbit(spec: PerturbationSpec, sec: Section, seed: ShootingUnknowns,
                cfg: SolverConfig | None = None, provenance: ReducedZero | None = None,
                with_monodromy=True) -> OrbitRecord:
    """Damped Newton (Armijo on |F|^2) with a finite-difference Jacobian."""
    cfg = cfg or SolverConfig()
    u = seed.vector.copy()
    F = shoot_residual_batch(u, spec, sec, cfg)[0]
    if not np.all(np.isfinite(F)):
        raise NoConvergence("seed residual is not finite")
    nrm = float(np.linalg.norm(F))
    it = 0
    sv = None
    while nrm > cfg.tol:
        if it >= cfg.max_iter:
            break
        F, J = shooting_jacobian(u, spec, sec, cfg)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] < cfg.degenerate_ratio * sv[0]:
            raise DegenerateJacobian(
                f"shooting Jacobian is degenerate: singular values {np.array2string(sv, precision=3)}"
            )
        d = -np.linalg.solve(J, F)
        lam = 1.0
        while True:
            un = u + lam * d
            if un[3] > 0:
                Fn = shoot_residual_batch(un, spec, sec, cfg)[0]
                nn = float(np.linalg.norm(Fn))
                if nn**2 <= (1 - 2e-4 * lam) * nrm**2:
                    break
            lam *= 0.5
            if lam < 1e-8:
                break
        it += 1
        if lam < 1e-8:
            break  # stagnated at the noise floor
        u, F, nrm = un, Fn, nn
    if nrm > cfg.accept:
        raise NoConvergence(f"shooting did not converge: |F| = {nrm:.3e} after {it} iterations")
    if sv is None:
        _, J = shooting_jacobian(u, spec, sec, cfg)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] < cfg.degenerate_ratio * sv[0]:
            raise DegenerateJacobian(
                f"shooting Jacobian is degenerate: singular values {np.array2string(sv, precision=3)}"
            )
    return _assemble(spec, sec, u, it, sv, cfg, provenance, with_monodromy)


def _assemble(spec, sec, u, it, sv, cfg, provenance, with_monodromy):
    s0, _, _ = initial_states(u, sec)
    s0 = s0[0]
    k = spec.k
    traj = integrate(s0, k, 1.0, cfg.integrator, n_samples=cfg.n_samples)
    end = traj.states[-1]
    closure = float(mk.spacelike_norm(end[:3] - s0[:3]) + mk.spacelike_norm(end[3:] - s0[3:]) / u[3])
    curve = traj.curve()
    spec.check_threshold(curve.points)
    speeds = curve.speeds
    floquet = {}
    if with_monodromy:
        floquet = monodromy(s0, k, steps=2 * cfg.steps).to_dict()
    rec = OrbitRecord(
        spec=spec.to_dict(),
        unknowns=asdict(ShootingUnknowns.from_vector(u)),
        section=sec.to_dict(),
        closure=closure,
        speed=float(u[3]),
        measured_speed=float(speeds.mean()),
        speed_variation=float(speeds.max() - speeds.min()),
        equation_residual=_equation_residual(curve, k),
        iterations=it,
        jacobian_singular_values=[float(x) for x in sv],
        floquet=floquet,
        points=curve.points.tolist(),
        velocities=curve.velocities.tolist(),
        provenance=None if provenance is None else provenance.to_dict(),
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    if provenance is not None:
        rec.s1_degree = local_s1_degree(rec)
    return rec


def local_s1_degree(record: OrbitRecord) -> int:
    """-sign det dH of the reduced zero that seeded the orbit."""
    prov = record.provenance
    if not prov or "det" not in prov:
        raise MissingProvenance("orbit record has no reduced-zero provenance")
    if abs(prov["det"]) <= 1e-10:
        raise MissingProvenance(f"|det dH| = {abs(prov['det']):.3e} too small to assign a degree")
    return -1 if prov["det"] > 0 else 1


def seed_from_zero(chart: CenterChart, zero: ReducedZero):
    """Section and unknowns of the unperturbed circle at a reduced zero."""
    o = chart.orbit(zero.r, zero.x, zero.y)
    return o, Section.from_orbit(o), ShootingUnknowns(0.0, 0.0, 0.0, o.speed)


def solve_from_zero(chart, zero: ReducedZero, k1, epsilon, cfg=None, with_monodromy=True):
    o, sec, seed = seed_from_zero(chart, zero)
    spec = PerturbationSpec(o.k0, k1, epsilon)
    return solve_orbit(spec, sec, seed, cfg, zero, with_monodromy)


# ------------------------------------------------------------- continuation


def orbit_deviation(record: OrbitRecord, o: CircleOrbit):
    """Sup distance of the orbit trace from the unperturbed circle o.

    Distance of a point q to a hyperbolic circle with center w and radius
    rho is |d(q, w) - rho|, so no phase alignment is needed.
    """
    pts = np.array(record.points)
    return float(np.max(np.abs(distance(o.center, pts) - math.asinh(o.r))))


def trace_center(points):
    """Minkowski barycenter of the samples pushed back onto H."""
    m = np.mean(np.asarray(points), axis=0)
    return m / math.sqrt(-mk.inner(m, m))


def center_distance(record: OrbitRecord, o: CircleOrbit):
    return float(distance(trace_center(record.points), o.center))


@dataclass
class ContinuationReport:
    epsilons: list
    records: list
    deviations: list
    center_distances: list
    ratios: list  # deviation(eps_i) / deviation(eps_{i+1}) over eps ratio
    failures: dict

    def to_dict(self):
        d = asdict(self)
        d["records"] = [r.to_dict() if isinstance(r, OrbitRecord) else r for r in self.records]
        return d


def continue_orbit(chart, zero: ReducedZero, k1, epsilons, cfg=None, with_monodromy=True):
    """Solve along an eps ladder using a secant predictor in eps.

    Failures are recorded per eps instead of aborting, which exposes the
    working eps range for the seed.
    """
    o, sec, seed = seed_from_zero(chart, zero)
    hist = []  # (eps, unknown vector)
    recs, devs, cds, fails = [], [], [], {}
    for eps in epsilons:
        if len(hist) >= 2:
            (e1, u1), (e2, u2) = hist[-2], hist[-1]
            guess = u2 + (eps - e2) / (e2 - e1) * (u2 - u1)
        elif hist:
            guess = hist[-1][1]
        else:
            guess = seed.vector
        guess = guess.copy()
        guess[3] = max(guess[3], 1e-6)
        spec = PerturbationSpec(o.k0, k1, float(eps))
        try:
            rec = solve_orbit(spec, sec, ShootingUnknowns.from_vector(guess), cfg, zero, with_monodromy)
        except (NoConvergence, DegenerateJacobian, SubcriticalCurvature) as exc:
            fails[float(eps)] = f"{type(exc).__name__}: {exc}"
            continue
        hist.append((float(eps), np.array([rec.unknowns[k] for k in ("a", "b", "theta", "s")])))
        recs.append(rec)
        devs.append(orbit_deviation(rec, o))
        cds.append(center_distance(rec, o))
    eps_ok = [h[0] for h in hist]
    ratios = []
    for i in range(len(devs) - 1):
        ratios.append((devs[i] / devs[i + 1]) / (eps_ok[i] / eps_ok[i + 1]))
    return ContinuationReport(eps_ok, recs, devs, cds, ratios, fails)


# ------------------------------------------------------------ energy sweep


@dataclass
class SweepEntry:
    c: float
    closed: bool
    expected_radius: float | None = None
    measured_radius: float | None = None
    radius_error: float | None = None
    closure: float | None = None
    return_time: float | None = None
    monotone: bool | None = None
    distance_T10: float | None = None
    distance_T20: float | None = None
    passed: bool = False


def _return_time(k, s0, T_guess, tol):
    """First time after 3/4 of a turn at which <g(t) - g(0), e_a> crosses 0 upward."""
    cfg = IntegratorConfig("rk45", tol=tol)
    p0, v0 = s0[:3], s0[3:]
    ea = v0 / mk.spacelike_norm(v0)
    traj = integrate(s0, k, 1.25 * T_guess, cfg, n_samples=200)
    vals = mk.inner(traj.points - p0, ea)
    t = traj.t
    for i in np.where(t > 0.75 * T_guess)[0][:-1]:
        if vals[i] < 0 <= vals[i + 1]:
            si, ti = traj.states[i], t[i]

            def g(T):
                # restart from the bracketing sample; short integrations only
                if T <= ti:
                    return float(vals[i])
                return float(mk.inner(flow_map(si, k, T - ti, cfg)[:3] - p0, ea))

            return brentq(g, ti, t[i + 1], xtol=1e-14, rtol=1e-15, maxiter=200)
    return None


def sweep_energy(c_values, k: CurvatureFunction | None = None, T_max=20.0, tol=1e-12):
    """Closed orbits exist on E_c exactly for c < 1 when k = 1."""
    k = k or constant(1.0)
    out = []
    for c in c_values:
        c = float(c)
        if not 0 < c <= 3:
            raise ValueError(f"c = {c} outside (0, 3]")
        kc = energy_rescale(k, c)
        s0 = np.concatenate([mk.E3, c * mk.E1])
        e = SweepEntry(c, closed=False)
        if c < 1:
            r = 1.0 / math.sqrt(c**-2 - 1.0)
            e.expected_radius = r
            T = _return_time(kc, s0, TWO_PI * r / c, tol)
            if T is not None:
                end = flow_map(s0, kc, T, IntegratorConfig("rk45", tol=tol))
                e.closure = float(mk.spacelike_norm(end[:3] - s0[:3]) + mk.spacelike_norm(end[3:] - s0[3:]) / c)
                e.return_time = float(T)
                e.measured_radius = c * T / TWO_PI
                e.radius_error = abs(e.measured_radius - r)
                e.closed = e.closure <= 1e-8
                e.passed = e.closed and e.radius_error <= 1e-8
        else:
            t, d = escape_distances(s0, kc, T_max, IntegratorConfig("rk45", tol=1e-10), n_samples=int(20 * T_max))
            sel = t >= 1.0
            e.monotone = bool(np.all(np.diff(d[sel]) > 0))
            e.distance_T10 = float(np.interp(10.0, t, d))
            e.distance_T20 = float(d[-1])
            e.passed = e.monotone and e.distance_T20 > e.distance_T10
        out.append(e)
    return out
