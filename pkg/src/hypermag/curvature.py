"""Curvature functions k: H -> R with their Minkowski gradients.

A `CurvatureFunction` carries a vectorized value map and a gradient map
returning the tangent-projected g_m gradient, so that dk_p(X) = <grad, X>_m
for X in T_p.  Builtins are constants, Minkowski-linear functions
p -> <p, u>_m and their products; they compose with + and scalar *.

Every builtin has a textual selector (e.g. ``linear-e3``,
``product:1,0,0;0,1,0``) so orbit records can be replayed from disk.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import minkowski as mk
from .errors import ConfigError, NonpositiveEnergy
from .hyperboloid import exp_map, project_tangent


@dataclass(frozen=True)
class CurvatureFunction:
    value_fn: Callable
    grad_fn: Callable
    label: str = "custom"

    def __call__(self, p):
        return self.value_fn(np.asarray(p, dtype=float))

    def value(self, p):
        return self.value_fn(np.asarray(p, dtype=float))

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        return project_tangent(p, self.grad_fn(p))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = constant(other)
        return CurvatureFunction(
            lambda p: self.value_fn(p) + other.value_fn(p),
            lambda p: self.grad_fn(p) + other.grad_fn(p),
            f"({self.label})+({other.label})",
        )

    __radd__ = __add__

    def __mul__(self, c):
        c = float(c)
        return CurvatureFunction(
            lambda p: c * self.value_fn(p),
            lambda p: c * self.grad_fn(p),
            f"{c!r}*({self.label})",
        )

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        return self + (-1.0) * (constant(other) if isinstance(other, (int, float)) else other)

    def pushforward(self, A):
        """The function k o A^{-1}, i.e. k transported by the isometry A."""
        A = np.asarray(A, dtype=float)
        Ainv = mk.lorentz_inverse(A)
        return CurvatureFunction(
            lambda p: self.value_fn(p @ Ainv.T),
            lambda p: self.grad_fn(p @ Ainv.T) @ A.T,
            f"push({self.label})",
        )


def constant(k0):
    k0 = float(k0)
    return CurvatureFunction(
        lambda p: np.full(np.shape(p)[:-1], k0),
        lambda p: np.zeros(np.shape(p)),
        f"const:{k0!r}",
    )


def minkowski_linear(u):
    """p -> <p, u>_m."""
    u = np.asarray(u, dtype=float)
    return CurvatureFunction(
        lambda p: mk.inner(p, u),
        lambda p: np.broadcast_to(u, np.shape(p)).copy(),
        "linear:" + ",".join(repr(float(x)) for x in u),
    )


def minkowski_product(u, u2):
    """p -> <p, u>_m <p, u2>_m."""
    u = np.asarray(u, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return CurvatureFunction(
        lambda p: mk.inner(p, u) * mk.inner(p, u2),
        lambda p: mk.inner(p, u2)[..., None] * u + mk.inner(p, u)[..., None] * u2,
        "product:" + ",".join(repr(float(x)) for x in u) + ";" + ",".join(repr(float(x)) for x in u2),
    )


def energy_rescale(k: CurvatureFunction, c):
    """Curvature seen on energy level E_c: pointwise k / c."""
    if not c > 0:
        raise NonpositiveEnergy(f"energy level c = {c} must be positive")
    out = (1.0 / c) * k
    return CurvatureFunction(out.value_fn, out.grad_fn, f"rescale({k.label},{float(c)!r})")


def check_gradient(k: CurvatureFunction, points, directions, h=1e-4):
    """Max relative error of <grad k, v> vs a central difference along exp rays."""
    worst = 0.0
    for p, v in zip(points, directions):
        v = project_tangent(p, v)
        v = v / mk.spacelike_norm(v)
        fd = (k(exp_map(p, h * v)) - k(exp_map(p, -h * v))) / (2 * h)
        an = mk.inner(k.grad(p), v)
        worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
    return float(worst)


# ------------------------------------------------------------------ selectors

_AXES = {"e1": mk.E1, "e2": mk.E2, "e3": mk.E3}


def _vec(text):
    text = text.strip()
    if text in _AXES:
        return _AXES[text]
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected three components, got {text!r}")
    return np.array(parts)


def morse_mix():
    """Asymmetric Morse function with a nondegenerate maximum away from e3."""
    return (
        minkowski_linear(mk.E3)
        + 0.3 * minkowski_linear(mk.E1)
        + 0.2 * minkowski_product(mk.E1, mk.E2)
        + 0.1 * minkowski_product(mk.E2, mk.E2)
    )


def saddle_mix():
    """Morse function with a nondegenerate saddle near e3, not at a symmetry point."""
    return (
        minkowski_product(mk.E1, mk.E2)
        + 0.4 * minkowski_product(mk.E1, mk.E1)
        + 0.05 * minkowski_linear(mk.E1)
        - 0.03 * minkowski_linear(mk.E2)
    )


NAMED = {
    "linear-e1": lambda: minkowski_linear(mk.E1),
    "linear-e2": lambda: minkowski_linear(mk.E2),
    "linear-e3": lambda: minkowski_linear(mk.E3),
    "saddle-e3": lambda: minkowski_product(mk.E1, mk.E2),
    "square-e3": lambda: minkowski_product(mk.E3, mk.E3),
    "morse-max": morse_mix,
    "morse-saddle": saddle_mix,
}


def from_selector(sel: str) -> CurvatureFunction:
    """Build a builtin from its selector string.

    Accepted forms: a name from `NAMED`, ``const:<k>``, ``linear:<u>``,
    ``product:<u>;<u2>``, where <u> is ``e1``/``e2``/``e3`` or three
    comma-separated numbers.
    """
    sel = sel.strip()
    if sel in NAMED:
        k = NAMED[sel]()
        return CurvatureFunction(k.value_fn, k.grad_fn, sel)
    kind, _, arg = sel.partition(":")
    try:
        if kind == "const":
            return constant(float(arg))
        if kind == "linear":
            return minkowski_linear(_vec(arg))
        if kind == "product":
            a, b = arg.split(";")
            return minkowski_product(_vec(a), _vec(b))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad curvature selector {sel!r}: {exc}") from None
    raise ConfigError(f"unknown curvature selector {sel!r}")
