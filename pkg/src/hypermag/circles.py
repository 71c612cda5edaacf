"""Closed-form circle solutions for constant curvature k0 > 1.

For a positive frame (v0, v1, w) and radius parameter r (= sinh of the
hyperbolic radius) the simple 1-periodic solution is

    alpha(t) = sqrt(1+r^2) w + r cos(2 pi t) v1 + r sin(2 pi t) v0,

with k0 = sqrt(1+r^2)/r and speed |alpha'|_m = 2 pi r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import minkowski as mk
from .errors import SubcriticalCurvature, ZeroVelocity
from .hyperboloid import Curve

TWO_PI = 2.0 * math.pi


def radius_from_k(k0):
    if not k0 > 1.0:
        raise SubcriticalCurvature(f"k0 = {k0} <= 1 has no closed circle solution")
    return 1.0 / math.sqrt(k0 * k0 - 1.0)


def k_from_radius(r):
    return math.sqrt(1.0 + r * r) / r


@dataclass(frozen=True)
class CircleOrbit:
    frame: mk.Frame
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")

    @property
    def k0(self):
        return k_from_radius(self.r)

    @property
    def lam(self):
        return TWO_PI * self.r

    @property
    def speed(self):
        return TWO_PI * self.r

    @property
    def center(self):
        return self.frame.w

    @property
    def omega(self):
        """|alpha'|_m k0 = 2 pi sqrt(1+r^2): rotation rate of the Frenet frame."""
        return TWO_PI * math.sqrt(1.0 + self.r**2)

    def transformed(self, A):
        return CircleOrbit(self.frame.transformed(A), self.r)

    @classmethod
    def canonical(cls, r):
        return cls(mk.Frame.canonical(), r)


def alpha_eval(o: CircleOrbit, t):
    """State (position, velocity) of the circle orbit at times t; shape (..., 6)."""
    t = np.asarray(t, dtype=float)[..., None]
    v0, v1, w = o.frame.v0, o.frame.v1, o.frame.w
    r = o.r
    c, s = np.cos(TWO_PI * t), np.sin(TWO_PI * t)
    pos = math.sqrt(1.0 + r * r) * w + r * c * v1 + r * s * v0
    vel = TWO_PI * r * (-s * v1 + c * v0)
    return np.concatenate([pos, vel], axis=-1)


def alpha_accel(o: CircleOrbit, t):
    t = np.asarray(t, dtype=float)[..., None]
    c, s = np.cos(TWO_PI * t), np.sin(TWO_PI * t)
    return -(TWO_PI**2) * o.r * (c * o.frame.v1 + s * o.frame.v0)


def sample_curve(o: CircleOrbit, n=256, cover=1, phase=0.0):
    """The orbit as a Curve; `cover` > 1 gives the multiple cover t -> alpha(n t)."""
    t = np.arange(n) / n
    st = alpha_eval(o, cover * t + phase)
    return Curve(st[:, :3], cover * st[:, 3:])


def orbit_from_initial(p, v, k0):
    """Circle orbit through p with initial direction v; returns (orbit, phase, speed).

    The frame is v0 = v/|v|, v1 = sqrt(1+r^2)(v0 x_m p) - r p, w = v0 x_m v1,
    so that alpha_eval(orbit, 0) = (p, 2 pi r v0).  `phase` is always 0 under
    this construction; `speed` is |v|_m (the caller's time scale).
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    speed = float(mk.spacelike_norm(v))
    if speed <= 1e-14:
        raise ZeroVelocity("initial velocity vanishes")
    r = radius_from_k(k0)
    v0 = v / speed
    v1 = math.sqrt(1.0 + r * r) * mk.cross(v0, p) - r * p
    w = mk.cross(v0, v1)
    return CircleOrbit(mk.Frame(v0, v1, w), r), 0.0, speed


# --------------------------------------------------------------- kernel fields


def kernel_field(o: CircleOrbit, index, t):
    """(W_i(t), D_t W_i(t)) for the Jacobi fields W_0..W_3 along the orbit."""
    if index not in (0, 1, 2, 3):
        raise ValueError("kernel field index must be 0, 1, 2 or 3")
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    r = o.r
    kq = math.sqrt(1.0 + r * r)
    v0, v1, w = o.frame.v0, o.frame.v1, o.frame.w
    st = alpha_eval(o, t)
    pos, vel = st[..., :3], st[..., 3:]
    om = o.omega
    J = mk.cross(pos, vel)
    dvel = om * J  # D_t alpha' = |alpha'| k0 (alpha x alpha')
    c, s = np.cos(TWO_PI * tt), np.sin(TWO_PI * tt)
    if index == 0:
        return tt * vel, vel + tt * dvel
    if index == 1:
        return vel, dvel
    if index == 2:
        val = kq * v1 + r * c * w
        amb = -TWO_PI * r * s * w
    else:
        val = kq * v0 + r * s * w
        amb = TWO_PI * r * c * w
    # tangential part of the ambient derivative
    dval = amb + mk.inner(amb, pos)[..., None] * pos
    return val, dval
