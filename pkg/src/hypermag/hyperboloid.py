"""The hyperbolic plane as the upper sheet {<p,p>_m = -1, tau > 0}.

Points and tangent vectors are plain float arrays with trailing axis 3.
`Curve` is the sampled 1-periodic curve consumed by the spectral and audit
code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import minkowski as mk
from .errors import NonPeriodicField, SpacelikeInput, WrongSheet

POINT_TOL = 1e-10


def check_point(p, tol=POINT_TOL):
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(mk.inner(p, p) + 1.0) > tol) or np.any(p[..., 2] <= 0):
        raise ValueError("not a point of the hyperboloid")
    return p


def project_point(x):
    """Renormalize a future timelike vector onto the hyperboloid."""
    x = np.asarray(x, dtype=float)
    q = mk.inner(x, x)
    if np.any(q >= -1e-14):
        raise SpacelikeInput(f"<x,x>_m = {q} is not timelike")
    if np.any(x[..., 2] <= 0):
        raise WrongSheet("tau <= 0: point lies on the lower sheet")
    return x / np.sqrt(-q)[..., None]


def project_tangent(p, v):
    """Orthogonal projection of v onto T_p: v + <v,p>_m p."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    return v + mk.inner(v, p)[..., None] * p


def rotate_J(p, v):
    """Rotation by +pi/2 in T_p: J(p) v = p x_m v."""
    return mk.cross(p, v)


def distance(p, q):
    # <p-q, p-q>_m = 4 sinh^2(d/2); avoids arccosh cancellation near d = 0
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 2.0 * np.arcsinh(0.5 * mk.spacelike_norm(p - q))


def exp_map(p, v):
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    n = mk.spacelike_norm(v)
    small = n < 1e-10
    safe = np.where(small, 1.0, n)
    out = np.cosh(n)[..., None] * p + (np.sinh(n) / safe)[..., None] * v
    if np.any(small):
        near = project_point(p + v)
        out = np.where(small[..., None], near, out)
    return out


def log_map(p, q):
    """Inverse of exp_map at p (tangent vector at p pointing to q)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    u = project_tangent(p, q)
    nu = mk.spacelike_norm(u)
    # sinh(d) = |u|; d/sinh(d) -> 1 as d -> 0
    scale = np.where(nu > 1e-300, np.arcsinh(nu) / np.where(nu > 1e-300, nu, 1.0), 1.0)
    return scale[..., None] * u


def transport(p, q, v):
    """Parallel transport of v in T_p to T_q along the connecting geodesic."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    c = -mk.inner(p, q)
    return v + (mk.inner(v, q) / (1.0 + c))[..., None] * (p + q)


def tangent_frame(p, v):
    """Orthonormal positive tangent frame (e_a, e_b = J e_a) with e_a || v."""
    ea = v / mk.spacelike_norm(v)[..., None]
    return ea, rotate_J(p, ea)


# ----------------------------------------------------------------- spectral


def fourier_derivative(samples, period=1.0, order=1, floor=1e-15):
    """Spectral derivative of periodic samples along axis 0.

    Coefficients below `floor` times the largest one are rounding noise and
    are dropped before multiplying by (ik)^order.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    coef = np.fft.rfft(samples, axis=0)
    if floor:
        coef = np.where(np.abs(coef) < floor * np.max(np.abs(coef)), 0.0, coef)
    k = 2j * np.pi * np.fft.rfftfreq(n, d=period / n)
    mult = k**order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    mult = mult.reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.fft.irfft(coef * mult, n=n, axis=0)


def fourier_resample(samples, m):
    """Band-limited interpolation of periodic samples onto m uniform points."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    coef = np.fft.rfft(samples, axis=0)
    out = np.zeros((m // 2 + 1,) + samples.shape[1:], dtype=complex)
    keep = min(coef.shape[0], out.shape[0])
    out[:keep] = coef[:keep]
    if n % 2 == 0 and keep == n // 2 + 1 and m > n:
        # split the Nyquist mode so the interpolant stays real and symmetric
        out[keep - 1] *= 0.5
    return np.fft.irfft(out, n=m, axis=0) * (m / n)


@dataclass(frozen=True)
class Curve:
    """Closed curve sampled at t_i = i * period / N, i < N."""

    points: np.ndarray
    velocities: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vel = np.asarray(self.velocities, dtype=float)
        n = pts.shape[0]
        if pts.shape != (n, 3) or vel.shape != (n, 3):
            raise ValueError("points and velocities must both have shape (N, 3)")
        if n < 64 or n & (n - 1):
            raise ValueError(f"N = {n} must be a power of two >= 64")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "velocities", vel)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def times(self):
        return np.arange(self.n) * (self.period / self.n)

    @property
    def speeds(self):
        return mk.spacelike_norm(self.velocities)

    def speed_stats(self):
        s = self.speeds
        return {"mean": float(s.mean()), "min": float(s.min()), "max": float(s.max())}

    def constraint_residual(self):
        pts = np.abs(mk.inner(self.points, self.points) + 1.0)
        tan = np.abs(mk.inner(self.points, self.velocities))
        return float(max(pts.max(), tan.max()))

    def transformed(self, A):
        A = np.asarray(A)
        return Curve(self.points @ A.T, self.velocities @ A.T, self.period)

    def shifted(self, k):
        """Phase shift by k samples: t -> t + k * period / N."""
        return Curve(np.roll(self.points, -k, axis=0), np.roll(self.velocities, -k, axis=0), self.period)

    def reversed(self):
        pts = np.roll(self.points[::-1], 1, axis=0)
        vel = -np.roll(self.velocities[::-1], 1, axis=0)
        return Curve(pts, vel, self.period)

    def resampled(self, m):
        """Spectral upsampling; points are pushed back onto the hyperboloid."""
        pts = project_point(fourier_resample(self.points, m))
        vel = project_tangent(pts, fourier_resample(self.velocities, m))
        return Curve(pts, vel, self.period)


def covariant_derivative(curve: Curve, field):
    """D_t of a tangent field along `curve` (spectral derivative + projection).

    `field` holds N samples (assumed periodic) or N+1 samples whose last
    entry repeats t = period; the latter is checked for periodicity.
    """
    field = np.asarray(field, dtype=float)
    n = curve.n
    if field.shape[0] == n + 1:
        gap = float(np.max(np.abs(field[-1] - field[0])))
        if gap > 1e-8:
            raise NonPeriodicField(f"field endpoint mismatch {gap:.3e} > 1e-8")
        field = field[:-1]
    if field.shape != (n, 3):
        raise ValueError(f"field must have shape ({n}, 3) or ({n + 1}, 3)")
    return project_tangent(curve.points, fourier_derivative(field, curve.period))
