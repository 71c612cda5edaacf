"""Independent geometric verification of closed curves on H.

The enclosed area comes from a fan of geodesic triangles whose areas are
angle defects, so the Gauss-Bonnet residual

    | int k_g ds - A - 2 pi w |

compares two computations that share no formula.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import minkowski as mk
from .curvature import CurvatureFunction
from .errors import InputError, NotStarShaped, RayDegenerate, ZeroSpeed
from .hyperboloid import Curve, covariant_derivative, log_map, project_tangent

AREA_POINTS = 4096
ISO_TOL = 1e-9  # relative slack in L^2 - 4 pi A - A^2 >= 0 (equality on circles)


def geodesic_curvature(curve: Curve, i=None):
    """k_g = <D_t g', J g'>_m / |g'|^3 at every sample (or at sample i)."""
    p, v = curve.points, curve.velocities
    s = mk.spacelike_norm(v)
    if np.any(s <= 1e-14):
        raise ZeroSpeed("curve has a vanishing velocity")
    kg = mk.inner(covariant_derivative(curve, v), mk.cross(p, v)) / s**3
    return kg if i is None else float(kg[i])


def length(curve: Curve):
    return float(np.mean(curve.speeds) * curve.period)


def total_curvature(curve: Curve):
    """int k_g ds (trapezoid rule, spectrally accurate for periodic data)."""
    return float(np.mean(geodesic_curvature(curve) * curve.speeds) * curve.period)


def _center_frame(center, ref):
    u = log_map(center, ref)
    n = mk.spacelike_norm(u)
    if n < 1e-12:
        raise RayDegenerate("reference point coincides with the center")
    ea = u / n
    return ea, mk.cross(center, ea)


def ray_angles(points, center):
    """Unwrapped polar angle of center -> points in the frame (e_a, J e_a)."""
    points = np.asarray(points, dtype=float)
    center = np.asarray(center, dtype=float)
    u = project_tangent(center, points)
    if np.any(mk.spacelike_norm(u) < 1e-12):
        raise RayDegenerate("curve passes through the center")
    ea, eb = _center_frame(center, points[0])
    return np.unwrap(np.arctan2(mk.inner(u, eb), mk.inner(u, ea)))


def winding_number(curve: Curve, center) -> int:
    ang = ray_angles(curve.points, center)
    # close the loop with the step back to the first sample
    step = np.angle(np.exp(1j * (ang[0] - ang[-1])))
    return int(round((ang[-1] - ang[0] + step) / (2 * math.pi)))


def _vertex_angle(P, Q, R):
    """Angle at P of the geodesic triangle PQR."""
    # differences first: project_tangent(P, Q) cancels badly for Q near P
    u = project_tangent(P, Q - P)
    v = project_tangent(P, R - P)
    sin = np.abs(mk.inner(mk.cross(u, v), P))
    return np.arctan2(sin, mk.inner(u, v))


def triangle_area(a, b, c):
    """Hyperbolic triangle area by angle defect (vectorized)."""
    return math.pi - (_vertex_angle(a, b, c) + _vertex_angle(b, c, a) + _vertex_angle(c, a, b))


def fan_area(points, center):
    """Signed fan area (center, p_i, p_i+1), counted with multiplicity for multiple covers."""
    points = np.asarray(points, dtype=float)
    ang = ray_angles(points, center)
    close = np.angle(np.exp(1j * (ang[0] - ang[-1])))  # wrapped step back to the start
    d = np.append(np.diff(ang), close)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NotStarShaped("ray angles are not monotone about the center")
    nxt = np.roll(points, -1, axis=0)
    c = np.broadcast_to(center, points.shape)
    return float(np.sign(d[0]) * np.sum(triangle_area(c, points, nxt)))


def enclosed_area(curve: Curve, center, m=AREA_POINTS):
    """Fan area on a spectral upsample, Richardson-extrapolated over m and 2m.

    The fan polygon misses the curved segments with an O(m^-2) error.
    A curve collapsed to a point has area 0.
    """
    if np.max(np.abs(curve.points - curve.points[0])) < 1e-14:
        return 0.0
    m = max(m, curve.n)
    a1 = fan_area(curve.resampled(m).points, center)
    a2 = fan_area(curve.resampled(2 * m).points, center)
    return (4.0 * a2 - a1) / 3.0


def gauss_bonnet_residual(curve: Curve, center, area=None):
    w = winding_number(curve, center)
    A = enclosed_area(curve, center) if area is None else area
    return abs(total_curvature(curve) - A - 2 * math.pi * w)


@dataclass
class LengthBounds:
    length: float
    lower: float
    upper: float
    area: float
    iso_margin: float
    lower_ok: bool
    upper_ok: bool
    iso_ok: bool

    @property
    def passed(self):
        return self.lower_ok and self.upper_ok and self.iso_ok


def length_bounds_check(curve: Curve, k_inf, k_sup, center=None, area=None):
    """2 pi / k_sup <= L <= 2 pi / (k_inf - 1) and L^2 >= 4 pi A + A^2."""
    if not k_inf > 1.0:
        raise InputError(f"k_inf = {k_inf} must exceed 1")
    L = length(curve)
    if area is None:
        area = abs(enclosed_area(curve, center if center is not None else trace_center(curve.points)))
    lo = 2 * math.pi / k_sup
    hi = 2 * math.pi / (k_inf - 1.0)
    margin = L * L - 4 * math.pi * area - area * area
    return LengthBounds(L, lo, hi, area, margin, L >= lo * (1 - 1e-12), L <= hi * (1 + 1e-12),
                        margin >= -ISO_TOL * L * L)


def trace_center(points):
    m = np.mean(np.asarray(points), axis=0)
    return m / math.sqrt(-mk.inner(m, m))


def _klein(points, center):
    """Projective coordinates about the center: geodesics become straight lines."""
    ea, eb = _center_frame(center, points[0])
    den = -mk.inner(points, center)
    return np.column_stack([mk.inner(points, ea) / den, mk.inner(points, eb) / den])


def self_intersections(curve: Curve, center=None):
    """Number of crossings between non-adjacent geodesic segments of the trace."""
    center = trace_center(curve.points) if center is None else center
    q = _klein(curve.points, center)
    a, b = q, np.roll(q, -1, axis=0)
    n = len(q)

    def orient(p, r, s):
        return (r[..., 0] - p[..., 0]) * (s[..., 1] - p[..., 1]) - (r[..., 1] - p[..., 1]) * (s[..., 0] - p[..., 0])

    A, B = a[:, None], b[:, None]
    C, D = a[None, :], b[None, :]
    hit = (orient(A, B, C) * orient(A, B, D) < 0) & (orient(C, D, A) * orient(C, D, B) < 0)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    return int(np.sum(hit[i[keep], j[keep]]))


@dataclass
class AuditReport:
    length: float
    area: float
    curvature_integral: float
    gauss_bonnet_residual: float
    winding_number: int
    self_intersections: int
    k_inf: float
    k_sup: float
    lower_bound: float
    upper_bound: float
    iso_margin: float
    curvature_residual: float | None
    bounds_ok: bool
    iso_ok: bool
    gauss_bonnet_ok: bool

    @property
    def passed(self):
        return self.bounds_ok and self.iso_ok and self.gauss_bonnet_ok

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def audit_curve(curve: Curve, k: CurvatureFunction | None = None, center=None, gb_tol=1e-5,
                k_inf=None, k_sup=None) -> AuditReport:
    """Full audit; k (if given) supplies k_inf, k_sup and the pointwise check k_g = k."""
    center = trace_center(curve.points) if center is None else np.asarray(center, dtype=float)
    kg = geodesic_curvature(curve)
    w = winding_number(curve, center)
    if k is not None:
        kv = k.value(curve.points)
        k_inf = float(kv.min()) if k_inf is None else k_inf
        k_sup = float(kv.max()) if k_sup is None else k_sup
        cres = float(np.max(np.abs(kg - kv)))
    else:
        # bounds refer to the positively oriented trace
        ko = kg if w >= 0 else -kg
        k_inf = float(ko.min()) if k_inf is None else k_inf
        k_sup = float(ko.max()) if k_sup is None else k_sup
        cres = None
    A = enclosed_area(curve, center)
    tot = float(np.mean(kg * curve.speeds) * curve.period)
    gb = abs(tot - A - 2 * math.pi * w)
    lb = length_bounds_check(curve, k_inf, k_sup, area=abs(A))
    return AuditReport(
        length=lb.length,
        area=A,
        curvature_integral=tot,
        gauss_bonnet_residual=gb,
        winding_number=w,
        self_intersections=self_intersections(curve, center),
        k_inf=k_inf,
        k_sup=k_sup,
        lower_bound=lb.lower,
        upper_bound=lb.upper,
        iso_margin=lb.iso_margin,
        curvature_residual=cres,
        bounds_ok=lb.lower_ok and lb.upper_ok,
        iso_ok=lb.iso_ok,
        gauss_bonnet_ok=gb <= gb_tol,
    )
