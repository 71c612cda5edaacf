"""Finite-dimensional reduction onto the (W2, W3) directions.

For a circle orbit alpha of radius parameter r and a perturbation k1 the
reduced field is

    sigma2 = 8 pi^2 r^2 / (1 - 4 pi^2 r^2) * int_0^1 k1(alpha(t)) cos(2 pi t) dt,
    sigma3 = same with sin(2 pi t).

Over a center chart (x, y) -> w(x, y) this gives the planar field H whose
zeros seed perturbed closed orbits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .circles import TWO_PI, CircleOrbit, alpha_eval
from .curvature import CurvatureFunction
from .errors import (
    ChartDomainError,
    DegenerateFit,
    NoConvergence,
    ResonantRadius,
    SingularJacobian,
)
from .hyperboloid import distance, exp_map, log_map, transport
from .variational import RESONANCE_TOL, is_resonant

FD_STEP = 1e-5
ZERO_TOL = 1e-10


@dataclass(frozen=True)
class CenterChart:
    """w(x, y) = exp(w0, x v1 + y v0); frames carried by radial parallel transport."""

    frame: mk.Frame
    radius: float = 1.0

    @property
    def w0(self):
        return self.frame.w

    @classmethod
    def at(cls, w0, v0=None, radius=1.0):
        """Chart at w0 whose v0 is the tangent projection of v0 (default e1)."""
        w0 = np.asarray(w0, dtype=float)
        v0 = mk.E1 if v0 is None else np.asarray(v0, dtype=float)
        v0 = v0 + mk.inner(v0, w0) * w0
        v0 = v0 / mk.spacelike_norm(v0)
        # positive frame: v0 x w = v1
        v1 = mk.cross(v0, w0)
        return cls(mk.Frame(v0, v1, w0), radius)

    def _check(self, x, y):
        if math.hypot(x, y) > self.radius:
            raise ChartDomainError(f"({x:.4g}, {y:.4g}) outside chart radius {self.radius}")

    def point(self, x, y):
        self._check(x, y)
        return exp_map(self.w0, x * self.frame.v1 + y * self.frame.v0)

    def frame_at(self, x, y):
        w = self.point(x, y)
        v0 = transport(self.w0, w, self.frame.v0)
        v1 = transport(self.w0, w, self.frame.v1)
        return mk.Frame(v0, v1, w)

    def coords(self, p):
        """Inverse chart: (x, y) of the point p."""
        u = log_map(self.w0, p)
        return float(mk.inner(u, self.frame.v1)), float(mk.inner(u, self.frame.v0))

    def orbit(self, r, x, y):
        return CircleOrbit(self.frame_at(x, y), r)

    def rotated(self, theta):
        """Same base point, frame rotated: v0 -> cos v0 + sin v1."""
        c, s = math.cos(theta), math.sin(theta)
        f = self.frame
        return CenterChart(mk.Frame(c * f.v0 + s * f.v1, -s * f.v0 + c * f.v1, f.w), self.radius)


@dataclass(frozen=True)
class ReducedValue:
    sigma2: float
    sigma3: float

    @property
    def vector(self):
        return np.array([self.sigma2, self.sigma3])

    @property
    def norm(self):
        return math.hypot(self.sigma2, self.sigma3)


def prefactor(r):
    if is_resonant(r, RESONANCE_TOL):
        raise ResonantRadius(f"r = {r} is the resonant radius 1/(2 pi)")
    return 8.0 * math.pi**2 * r * r / (1.0 - 4.0 * math.pi**2 * r * r)


def first_harmonic(o: CircleOrbit, k1: CurvatureFunction, n=256, phase=0.0):
    """(int k1(alpha) cos, int k1(alpha) sin) by the trapezoid rule on n samples."""
    t = np.arange(n) / n
    f = k1.value(alpha_eval(o, t + phase)[:, :3])
    return float(np.mean(f * np.cos(TWO_PI * t))), float(np.mean(f * np.sin(TWO_PI * t)))


def sigma23(o: CircleOrbit, k1: CurvatureFunction, n=256, phase=0.0) -> ReducedValue:
    pre = prefactor(o.r)
    c, s = first_harmonic(o, k1, n, phase)
    return ReducedValue(pre * c, pre * s)


def reduced_field(chart: CenterChart, r, k1: CurvatureFunction, x, y, n=256) -> ReducedValue:
    return sigma23(chart.orbit(r, x, y), k1, n)


def h_grid(chart: CenterChart, r, k1, xs, ys, n=256):
    """Rows (x, y, sigma2, sigma3) over the product grid xs x ys."""
    rows = []
    for x in xs:
        for y in ys:
            h = reduced_field(chart, r, k1, x, y, n)
            rows.append((float(x), float(y), h.sigma2, h.sigma3))
    return rows


def _fd_jacobian(fun, x, y, h):
    fx = (fun(x + h, y) - fun(x - h, y)) / (2 * h)
    fy = (fun(x, y + h) - fun(x, y - h)) / (2 * h)
    return np.column_stack([fx, fy])


@dataclass
class ReducedZero:
    x: float
    y: float
    local_degree: int
    jacobian: np.ndarray
    residual: float
    r: float
    iterations: int
    center: np.ndarray = field(repr=False, default=None)
    k1_label: str = ""

    @property
    def det(self):
        return float(np.linalg.det(self.jacobian))

    def to_dict(self):
        return {
            "x": self.x,
            "y": self.y,
            "local_degree": self.local_degree,
            "jacobian": self.jacobian.tolist(),
            "det": self.det,
            "residual": self.residual,
            "r": self.r,
            "iterations": self.iterations,
            "center": None if self.center is None else self.center.tolist(),
            "k1": self.k1_label,
        }


def find_reduced_zero(chart: CenterChart, r, k1: CurvatureFunction, start=(0.0, 0.0), n=256,
                      tol=ZERO_TOL, max_iter=50, h=FD_STEP) -> ReducedZero:
    """Damped Newton on H with a central-difference Jacobian."""

    def H(x, y):
        return reduced_field(chart, r, k1, x, y, n).vector

    x, y = map(float, start)
    chart._check(x, y)
    val = H(x, y)
    for it in range(max_iter + 1):
        res = float(np.linalg.norm(val))
        if res <= tol:
            J = _fd_jacobian(H, x, y, h)
            det = float(np.linalg.det(J))
            if abs(det) < 1e-12:
                raise SingularJacobian(f"|det dH| = {abs(det):.3e} at the zero")
            return ReducedZero(x, y, 1 if det > 0 else -1, J, res, r, it, chart.point(x, y), k1.label)
        if it == max_iter:
            break
        J = _fd_jacobian(H, x, y, h)
        try:
            step = -np.linalg.solve(J, val)
        except np.linalg.LinAlgError:
            raise SingularJacobian("singular Jacobian during Newton iteration") from None
        # keep the iterate inside the chart and limit the jump
        cap = 0.25 * chart.radius
        ns = float(np.linalg.norm(step))
        if ns > cap:
            step *= cap / ns
        lam = 1.0
        while lam > 1e-6:
            xn, yn = x + lam * step[0], y + lam * step[1]
            if math.hypot(xn, yn) <= chart.radius:
                vn = H(xn, yn)
                if np.linalg.norm(vn) < res:
                    break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search failed at |H| = {res:.3e}")
        x, y, val = xn, yn, vn
    raise NoConvergence(f"no convergence after {max_iter} iterations (|H| = {res:.3e})")


# ------------------------------------------------------------ Morse oracles


def chart_function(chart: CenterChart, k1: CurvatureFunction):
    return lambda x, y: float(k1.value(chart.point(x, y)))


def gradient_fd(chart, k1, x, y, h=1e-5):
    f = chart_function(chart, k1)
    return np.array([(f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h)])


def hessian_fd(chart: CenterChart, k1: CurvatureFunction, x=0.0, y=0.0, h=1e-4):
    """Central-difference Hessian of k1 o w at (x, y)."""
    f = chart_function(chart, k1)
    f0 = f(x, y)
    fxx = (f(x + h, y) - 2 * f0 + f(x - h, y)) / h**2
    fyy = (f(x, y + h) - 2 * f0 + f(x, y - h)) / h**2
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    return np.array([[fxx, fxy], [fxy, fyy]])


def find_critical_point(chart: CenterChart, k1: CurvatureFunction, start=(0.0, 0.0), tol=1e-9, max_iter=50):
    """Newton on the chart gradient of k1; returns chart coordinates."""
    x, y = map(float, start)
    for _ in range(max_iter):
        g = gradient_fd(chart, k1, x, y)
        if np.linalg.norm(g) <= tol:
            return x, y
        dx = np.linalg.solve(hessian_fd(chart, k1, x, y), g)
        x, y = x - dx[0], y - dx[1]
    raise NoConvergence("critical point search did not converge")


def morse_degree(chart, k1, x=0.0, y=0.0):
    """deg_loc(grad k1) = sign det Hess at a nondegenerate critical point."""
    return 1 if np.linalg.det(hessian_fd(chart, k1, x, y)) > 0 else -1


def zero_to_critical_distance(chart: CenterChart, k1: CurvatureFunction, zero: ReducedZero):
    xc, yc = find_critical_point(chart, k1, (zero.x, zero.y))
    return float(distance(chart.point(xc, yc), zero.center))


# ------------------------------------------------------------ asymptotics


def remainder(chart: CenterChart, k1: CurvatureFunction, r, n=256):
    """e(r) = int k1(alpha) cos - (r/2) dk1(w0) v1 at the chart origin."""
    c, _ = first_harmonic(chart.orbit(r, 0.0, 0.0), k1, n)
    slope = mk.inner(k1.grad(chart.w0), chart.frame.v1)
    return c - 0.5 * r * float(slope)


@dataclass
class AsymptoticReport:
    radii: list
    remainders: list
    slope: float | None
    status: str  # "pass", "fail" or "exact"

    def to_dict(self):
        return {"radii": self.radii, "remainders": self.remainders, "slope": self.slope, "status": self.status}


def asymptotic_check(chart: CenterChart, k1: CurvatureFunction, radii, n=256, min_slope=1.8):
    radii = [float(r) for r in radii]
    if len(radii) < 3 or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("need at least 3 radii in decreasing order")
    e = [remainder(chart, k1, r, n) for r in radii]
    small = [abs(v) < 1e-14 for v in e]
    if all(small):
        return AsymptoticReport(radii, e, None, "exact")
    if any(small):
        raise DegenerateFit("remainder vanishes at some radii only")
    slope = float(np.polyfit(np.log(radii), np.log(np.abs(e)), 1)[0])
    return AsymptoticReport(radii, e, slope, "pass" if slope >= min_slope else "fail")
