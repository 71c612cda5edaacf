"""Linear algebra of (R^3, g_m) with g_m = dxi1^2 + dxi2^2 - dtau^2.

All functions broadcast over leading axes; the last axis has length 3 and
holds (xi1, xi2, tau).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

I21 = np.diag([1.0, 1.0, -1.0])

ATOL = 1e-12
RTOL = 1e-12
FRAME_TOL = 1e-10
DEFAULT_SEED = 20100305


def inner(a, b):
    """Minkowski inner product <a, b>_m."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def norm_sq(a):
    return inner(a, a)


def spacelike_norm(a):
    """|a|_m for spacelike (or null) a; negative squares are clamped to 0."""
    return np.sqrt(np.maximum(inner(a, a), 0.0))


def cross(a, b):
    """Twisted cross product a x_m b = I21 a x I21 b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack(
        [a3 * b2 - a2 * b3, a1 * b3 - a3 * b1, a1 * b2 - a2 * b1], axis=-1
    )


# ---------------------------------------------------------------- Lorentz maps


def make_rotation(angle):
    """Rotation by `angle` about the tau axis (fixes e3)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def make_boost(rapidity, direction=(1.0, 0.0)):
    """Boost of rapidity `rapidity` along the unit planar `direction`.

    Sends e3 to (sinh(s) d1, sinh(s) d2, cosh(s)).
    """
    d = np.asarray(direction, dtype=float)
    nd = np.hypot(d[0], d[1])
    if nd == 0.0:
        raise ValueError("boost direction must be nonzero")
    d = d / nd
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    A = np.eye(3)
    A[:2, :2] += (ch - 1.0) * np.outer(d, d)
    A[:2, 2] = sh * d
    A[2, :2] = sh * d
    A[2, 2] = ch
    return A


def lorentz_inverse(A):
    """Inverse of a g_m-isometry: I21 A^T I21."""
    return I21 @ np.asarray(A).T @ I21


def lorentz_residual(A):
    """Max deviation of A from SO(2,1)_+ membership (metric, det, sheet)."""
    A = np.asarray(A, dtype=float)
    metric = np.max(np.abs(A.T @ I21 @ A - I21))
    det = abs(np.linalg.det(A) - 1.0)
    return max(metric, det), bool(A[2, 2] > 0)


def is_lorentz(A, tol=1e-12):
    res, future = lorentz_residual(A)
    return res <= tol * max(1.0, np.max(np.abs(A)) ** 2) and future


def random_lorentz(rng, max_rapidity=1.5):
    """Random element of SO(2,1)_+ as rotation * boost * rotation."""
    a, b = rng.uniform(0, 2 * np.pi, size=2)
    s = rng.uniform(0, max_rapidity)
    return make_rotation(a) @ make_boost(s) @ make_rotation(b)


# ---------------------------------------------------------------------- frames


@dataclass(frozen=True)
class Frame:
    """Positive oriented g_m-orthonormal system (v0, v1, w) with v0 x_m v1 = w."""

    v0: np.ndarray
    v1: np.ndarray
    w: np.ndarray

    def as_matrix(self):
        """Columns (v0, v1, w); a Lorentz map when the frame is positive."""
        return np.column_stack([self.v0, self.v1, self.w])

    def transformed(self, A):
        A = np.asarray(A)
        return Frame(A @ self.v0, A @ self.v1, A @ self.w)

    @classmethod
    def canonical(cls):
        return cls(E1.copy(), E2.copy(), E3.copy())


@dataclass
class FrameReport:
    ok: bool
    residuals: dict = field(default_factory=dict)


def frame_residuals(f: Frame):
    v0, v1, w = (np.asarray(x, dtype=float) for x in (f.v0, f.v1, f.w))
    return {
        "v0.v0-1": abs(inner(v0, v0) - 1.0),
        "v1.v1-1": abs(inner(v1, v1) - 1.0),
        "w.w+1": abs(inner(w, w) + 1.0),
        "v0.v1": abs(inner(v0, v1)),
        "v0.w": abs(inner(v0, w)),
        "v1.w": abs(inner(v1, w)),
        "v0xv1-w": float(np.max(np.abs(cross(v0, v1) - w))),
        "w.tau<=0": 0.0 if w[2] > 0 else 1.0,
    }


def is_positive_frame(f: Frame, tol=FRAME_TOL):
    res = frame_residuals(f)
    return FrameReport(ok=all(v <= tol for v in res.values()), residuals=res)
