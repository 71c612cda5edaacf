"""Initial-value integration of D_t gamma' = |gamma'| k(gamma) J gamma' on H.

The flow is integrated as the ambient second-order system

    gamma'' = <gamma', gamma'>_m gamma + |gamma'|_m k(gamma) (gamma x_m gamma')

(the first term is the second fundamental form of H in R^{2,1}), with the
point pushed back onto H and the velocity onto T_gamma H after every step.
States are arrays of shape (..., 6) holding (point, velocity).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .curvature import CurvatureFunction
from .errors import StepFailure
from .hyperboloid import distance, project_point, project_tangent


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"  # "rk4" (fixed step) or "rk45" (Dormand-Prince, adaptive)
    tol: float = 1e-10
    step: float = 1.0 / 2048
    renormalize_speed: bool = False

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if not 1e-14 <= self.tol <= 1e-3:
            raise ValueError(f"tolerance {self.tol} outside [1e-14, 1e-3]")
        if not self.step > 0:
            raise ValueError("step must be positive")


def pack(p, v):
    return np.concatenate([np.asarray(p, float), np.asarray(v, float)], axis=-1)


def magnetic_rhs(state, k: CurvatureFunction):
    """Time derivative (gamma', gamma'') of the ambient state."""
    state = np.asarray(state, dtype=float)
    p, v = state[..., :3], state[..., 3:]
    v2 = np.maximum(mk.inner(v, v), 0.0)
    acc = v2[..., None] * p + (np.sqrt(v2) * k.value(p))[..., None] * mk.cross(p, v)
    return np.concatenate([v, acc], axis=-1)


def _renormalize(state, speed0=None):
    p = project_point(state[..., :3])
    v = project_tangent(p, state[..., 3:])
    if speed0 is not None:
        v = v * (speed0 / mk.spacelike_norm(v))[..., None]
    return np.concatenate([p, v], axis=-1)


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp45_attempt(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_A[i], ks))
        ks.append(f(yi))
    y5 = y + h * sum(b * kk for b, kk in zip(_B5, ks) if b != 0.0)
    err = h * sum(e * kk for e, kk in zip(_E, ks) if e != 0.0)
    return y5, err, ks[-1]


def _advance(f, y, T, cfg, post, h_hint, counters):
    """Integrate y over a time span T; returns (y(T), suggested next step)."""
    if cfg.method == "rk4":
        n = max(1, math.ceil(T / cfg.step - 1e-9))
        h = T / n
        for _ in range(n):
            y = post(rk4_step(f, y, h))
        counters["steps"] += n
        return y, h_hint
    t = 0.0
    h = min(h_hint, T)
    k1 = f(y)
    hmin = 1e-14 * max(1.0, T)
    while t < T * (1 - 1e-15):
        h = min(h, T - t)
        ynew, err, klast = _dp45_attempt(f, y, h, k1)
        scale = cfg.tol + cfg.tol * np.maximum(np.abs(y), np.abs(ynew))
        e = float(np.max(np.abs(err) / scale))
        if e <= 1.0:
            t += h
            y = post(ynew)
            k1 = f(y)  # projection invalidates FSAL reuse
            counters["steps"] += 1
            h_hint = h * min(5.0, max(0.2, 0.9 * e ** -0.2 if e > 0 else 5.0))
            h = h_hint
        else:
            counters["rejected"] += 1
            h = h * max(0.2, 0.9 * e ** -0.2)
            if h < hmin:
                raise StepFailure(f"step size underflow at t={t:.6g} (h={h:.3e})")
    return y, h_hint


@dataclass
class Trajectory:
    """Samples at t_i = i T / N for i = 0..N (endpoint included)."""

    t: np.ndarray
    states: np.ndarray
    k: CurvatureFunction = field(repr=False)
    steps: int = 0
    rejected: int = 0

    @property
    def points(self):
        return self.states[..., :3]

    @property
    def velocities(self):
        return self.states[..., 3:]

    @property
    def speeds(self):
        return mk.spacelike_norm(self.velocities)

    def speed_drift(self):
        s = self.speeds
        return float(np.max(np.abs(s - s[0])))

    def constraint_residual(self):
        p, v = self.points, self.velocities
        return float(max(np.max(np.abs(mk.inner(p, p) + 1.0)), np.max(np.abs(mk.inner(p, v)))))

    def distances_from_start(self):
        return distance(self.points[0], self.points)

    def curve(self):
        """The periodic Curve on [0, T) (drops the endpoint sample)."""
        from .hyperboloid import Curve

        return Curve(self.points[:-1], self.velocities[:-1], period=float(self.t[-1]))

    def curvature_residual(self):
        """k_g - k(gamma) with k_g from second-order differences of the velocity."""
        dt = self.t[1] - self.t[0]
        acc = np.gradient(self.velocities, dt, axis=0, edge_order=2)
        p, v = self.points, self.velocities
        dv = project_tangent(p, acc)
        s = mk.spacelike_norm(v)
        kg = mk.inner(dv, mk.cross(p, v)) / np.where(s > 0, s, 1.0) ** 3
        return kg - self.k.value(p)


def integrate(s0, k: CurvatureFunction, T, cfg: IntegratorConfig | None = None, n_samples=256):
    """Integrate from state s0 (shape (..., 6)) over [0, T]; returns a Trajectory."""
    cfg = cfg or IntegratorConfig()
    if not T > 0:
        raise ValueError("T must be positive")
    y = _renormalize(np.asarray(s0, dtype=float))
    speed0 = mk.spacelike_norm(y[..., 3:]) if cfg.renormalize_speed else None

    def f(state):
        return magnetic_rhs(state, k)

    def post(state):
        return _renormalize(state, speed0)

    dt = T / n_samples
    out = np.empty((n_samples + 1,) + y.shape)
    out[0] = y
    counters = {"steps": 0, "rejected": 0}
    h = min(dt, 1e-2)
    for i in range(n_samples):
        y, h = _advance(f, y, dt, cfg, post, h, counters)
        out[i + 1] = y
    return Trajectory(np.arange(n_samples + 1) * dt, out, k, counters["steps"], counters["rejected"])


def flow_map(s0, k: CurvatureFunction, T, cfg: IntegratorConfig | None = None):
    """Endpoint of the flow only (batched over leading axes)."""
    cfg = cfg or IntegratorConfig()
    y = _renormalize(np.asarray(s0, dtype=float))
    speed0 = mk.spacelike_norm(y[..., 3:]) if cfg.renormalize_speed else None
    counters = {"steps": 0, "rejected": 0}
    y, _ = _advance(lambda s: magnetic_rhs(s, k), y, T, cfg, lambda s: _renormalize(s, speed0), min(T, 1e-2), counters)
    return y


def _recenter(p):
    """Lorentz map sending p to e3 (two reflections, through u = p + e3 then e3)."""
    e3 = mk.E3
    u = p + e3
    Ru = np.eye(3) - 2.0 * np.outer(u, u @ mk.I21) / mk.inner(u, u)
    Re = np.eye(3) - 2.0 * np.outer(e3, e3 @ mk.I21) / mk.inner(e3, e3)
    return Re @ Ru


def escape_distances(s0, k: CurvatureFunction, T, cfg: IntegratorConfig | None = None, n_samples=256):
    """Distances d(g(0), g(t_i)) for trajectories that run far out.

    Ambient coordinates grow like exp(d), so after each sample the state is
    moved back to e3 by an isometry; the start point is carried along in
    the moving frame and k is pulled back through the accumulated map.
    """
    cfg = cfg or IntegratorConfig()
    y = _renormalize(np.asarray(s0, dtype=float))
    speed0 = mk.spacelike_norm(y[3:]) if cfg.renormalize_speed else None
    A = np.eye(3)  # global = A @ local
    start = y[:3].copy()  # g(0) in local coordinates
    dt = T / n_samples
    d = np.zeros(n_samples + 1)
    counters = {"steps": 0, "rejected": 0}
    h = min(dt, 1e-2)
    for i in range(n_samples):
        kl = k.pushforward(mk.lorentz_inverse(A))
        y, h = _advance(lambda s: magnetic_rhs(s, kl), y, dt, cfg, lambda s: _renormalize(s, speed0), h, counters)
        c = -float(mk.inner(start, y[:3]))
        # far apart the chord form cancels; arccosh is then well conditioned
        d[i + 1] = math.acosh(c) if c > 2.0 else float(distance(start, y[:3]))
        B = _recenter(y[:3])
        y = _renormalize(np.concatenate([B @ y[:3], B @ y[3:]]))
        start = B @ start
        A = A @ mk.lorentz_inverse(B)
    return np.arange(n_samples + 1) * dt, d


# ------------------------------------------------------------ classification


@dataclass(frozen=True)
class Circle:
    r: float


@dataclass(frozen=True)
class Horocycle:
    pass


@dataclass(frozen=True)
class Hypercycle:
    pass


def classify_constant(k0):
    """Trajectory type of the constant-curvature flow with k = k0 > 0."""
    if not k0 > 0:
        raise ValueError("k0 must be positive")
    if abs(k0 - 1.0) <= 1e-12:
        return Horocycle()
    if k0 > 1.0:
        return Circle(1.0 / math.sqrt(k0 * k0 - 1.0))
    return Hypercycle()


# ------------------------------------------------------------------ CSV output

CSV_COLUMNS = ["t", "xi1", "xi2", "tau", "v1", "v2", "v3", "speed", "distance", "curvature_residual"]


def write_trajectory_csv(traj: Trajectory, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    res = traj.curvature_residual()
    dist = traj.distances_from_start()
    for i in range(len(traj.t)):
        row = [traj.t[i], *traj.points[i], *traj.velocities[i], traj.speeds[i], dist[i], res[i]]
        w.writerow([f"{float(x):.17g}" for x in row])
