"""Certified two-sided estimates of the Kobayashi metric and distance.

Normalization: on the unit disk k(z; 1) = 1/(1 - |z|^2) and the distance
between 0 and s in [0, 1) is arctanh(s) = (1/2) log((1+s)/(1-s)).

Bound rules and their provenance tags:

* ``exact-formula``       closed form (disk, ball, polydisk)
* ``graham-lower``        |v| / (2 r(z; v)) on convex domains
* ``graham-upper``        |v| / r(z; v) on convex domains
* ``enclosing-ball``      metric of the enclosing ball B_R(0), k >= |v|/R,
                          and the corresponding ball distance lower bound
* ``inscribed-ball``      k <= |v| / delta(z) from the inscribed ball
* ``assumed-finite-type`` configured model k >= c |v| / delta^eps
* ``path-witness``        distance upper bound from an explicit path
* ``euclidean-lower``     distance lower bound c1 |x - y|
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import (
    Domain,
    GeometryError,
    Intersection,
    Polydisk,
    UnitBall,
    UnitDisk,
    as_vector,
    disk_radius_many,
)

_RADIUS_TOL = 1e-7


@dataclass
class MetricEstimate:
    """Certified interval [lower, upper] for a metric or distance value."""

    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str

    def __post_init__(self):
        self.lower = float(self.lower)
        self.upper = float(self.upper)
        if self.lower < 0 and self.lower > -1e-12:
            self.lower = 0.0
        if self.lower < 0:
            raise ValueError(f"negative lower bound {self.lower}")
        if self.upper < self.lower - 1e-12 * max(1.0, abs(self.lower)):
            raise ValueError(
                f"inverted interval [{self.lower}, {self.upper}]")
        self.upper = max(self.upper, self.lower)

    @classmethod
    def exact(cls, value: float) -> "MetricEstimate":
        return cls(value, value, "exact-formula", "exact-formula")

    @property
    def is_exact(self) -> bool:
        return self.lower_provenance == self.upper_provenance == "exact-formula"

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "lower_provenance": self.lower_provenance,
                "upper_provenance": self.upper_provenance}


# ---------------------------------------------------------------------------
# Closed forms


def disk_metric(z: complex, v: complex) -> float:
    return abs(v) / (1.0 - abs(z) ** 2)


def disk_distance(a: complex, b: complex) -> float:
    m = abs((a - b) / (1.0 - np.conj(a) * b))
    return math.atanh(m)


def ball_metric(z: np.ndarray, v: np.ndarray) -> float:
    nz2 = float(np.real(np.vdot(z, z)))
    nv2 = float(np.real(np.vdot(v, v)))
    zv = complex(np.vdot(z, v))  # <v, z> hermitian pairing
    val = (nv2 * (1.0 - nz2) + abs(zv) ** 2) / (1.0 - nz2) ** 2
    return math.sqrt(val)


def ball_distance(a: np.ndarray, b: np.ndarray) -> float:
    na2 = float(np.real(np.vdot(a, a)))
    nb2 = float(np.real(np.vdot(b, b)))
    ab = complex(np.vdot(a, b))
    num = abs(1.0 - ab)
    den = math.sqrt((1.0 - na2) * (1.0 - nb2))
    return float(np.arccosh(max(num / den, 1.0)))


def polydisk_metric(radii: np.ndarray, z: np.ndarray, v: np.ndarray) -> float:
    return float(np.max(np.abs(v) * radii / (radii ** 2 - np.abs(z) ** 2)))


def polydisk_distance(radii: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    za = a / radii
    zb = b / radii
    m = np.abs((za - zb) / (1.0 - np.conj(za) * zb))
    return float(np.max(np.arctanh(m)))


def _exact_metric_many(domain, pts, vecs):
    if isinstance(domain, UnitDisk):
        return np.abs(vecs[:, 0]) / (1.0 - np.abs(pts[:, 0]) ** 2)
    if isinstance(domain, UnitBall):
        nz2 = np.sum(np.abs(pts) ** 2, axis=1)
        nv2 = np.sum(np.abs(vecs) ** 2, axis=1)
        zv = np.abs(np.sum(np.conj(pts) * vecs, axis=1)) ** 2
        return np.sqrt((nv2 * (1.0 - nz2) + zv)) / (1.0 - nz2)
    if isinstance(domain, Polydisk):
        r = domain.radii[None, :]
        return np.max(np.abs(vecs) * r / (r ** 2 - np.abs(pts) ** 2), axis=1)
    return None


def is_exact_kind(domain: Domain) -> bool:
    """True for kinds whose metric and distance have closed forms."""
    return isinstance(domain, (UnitDisk, UnitBall, Polydisk))


def exact_distance(domain: Domain, x: np.ndarray, y: np.ndarray):
    if isinstance(domain, UnitDisk):
        return disk_distance(x[0], y[0])
    if isinstance(domain, UnitBall):
        return ball_distance(x, y)
    if isinstance(domain, Polydisk):
        return polydisk_distance(domain.radii, x, y)
    return None


def enclosing_ball_distance(domain: Domain, x: np.ndarray, y: np.ndarray) -> float:
    R = domain.enclosing_radius
    return ball_distance(x / R, y / R)


def exact_shell_sup(domain: Domain, r: float):
    """Closed-form M(r) = sup 1/k over the shell, for the exact kinds."""
    if isinstance(domain, UnitDisk):
        rr = min(r, 1.0)
        return 2.0 * rr - rr ** 2
    if isinstance(domain, UnitBall):
        rr = min(r, 1.0)
        return math.sqrt(2.0 * rr - rr ** 2)
    if isinstance(domain, Polydisk):
        # mass on the widest factor while another coordinate hugs its circle
        if domain.dim == 1:
            rmax = float(domain.radii[0])
            rr = min(r, rmax)
            return 2.0 * rr - rr ** 2 / rmax  # (rmax^2-(rmax-rr)^2)/rmax
        return float(np.max(domain.radii))
    return None


# ---------------------------------------------------------------------------
# Infinitesimal metric


def metric_bounds_many(domain: Domain, pts: np.ndarray, vecs: np.ndarray,
                       deltas: np.ndarray | None = None):
    """Vectorized certified bounds (lower, upper) for k at many (z, v).

    Used by the path machinery; provenance is not tracked here.
    """
    exact = _exact_metric_many(domain, pts, vecs)
    if exact is not None:
        return exact, exact.copy()
    norms = np.linalg.norm(vecs, axis=1)
    if deltas is None:
        deltas = np.array([domain.boundary_distance(p) for p in pts])
    lower = norms / domain.enclosing_radius
    upper = norms / deltas
    if domain.finite_type_model is not None:
        c, eps = domain.finite_type_model
        lower = np.maximum(lower, c * norms / deltas ** eps)
    if domain.convex:
        # certified to the bisection/sampling tolerance of the radius query
        radii = disk_radius_many(domain, pts, vecs, tol=_RADIUS_TOL,
                                 deltas=deltas)
        lower = np.maximum(lower, norms / (2.0 * radii))
        upper = np.minimum(upper, norms / radii)
    if isinstance(domain, Intersection):
        for comp in domain.components:
            comp_lower, _ = metric_bounds_many(comp, pts, vecs)
            lower = np.maximum(lower, comp_lower)
    upper = np.maximum(upper, lower)
    return lower, upper


def infinitesimal_metric(domain: Domain, z, v) -> MetricEstimate:
    """Certified interval for the infinitesimal Kobayashi metric k(z; v).

    Exact on the disk, ball, and polydisk.  On convex kinds the two-sided
    affine-disk-radius bounds are used; the enclosing-ball lower bound, the
    inscribed-ball upper bound, and any configured assumed finite-type
    model are always in play.  The best available bound wins each side.
    """
    pt = domain.require_interior(z)
    vv = as_vector(v, domain.dim, nonzero=True)

    if isinstance(domain, UnitDisk):
        return MetricEstimate.exact(disk_metric(pt[0], vv[0]))
    if isinstance(domain, UnitBall):
        return MetricEstimate.exact(ball_metric(pt, vv))
    if isinstance(domain, Polydisk):
        return MetricEstimate.exact(polydisk_metric(domain.radii, pt, vv))

    nv = float(np.linalg.norm(vv))
    delta = domain.boundary_distance(pt)
    lowers = [(nv / domain.enclosing_radius, "enclosing-ball")]
    uppers = [(nv / delta, "inscribed-ball")]
    if domain.finite_type_model is not None:
        c, eps = domain.finite_type_model
        lowers.append((c * nv / delta ** eps, "assumed-finite-type"))
    if domain.convex:
        r = float(disk_radius_many(domain, pt[None, :], vv[None, :],
                                   tol=_RADIUS_TOL)[0])
        lowers.append((nv / (2.0 * r), "graham-lower"))
        uppers.append((nv / r, "graham-upper"))
    if isinstance(domain, Intersection):
        for comp in domain.components:
            est = infinitesimal_metric(comp, pt, vv)
            lowers.append((est.lower, est.lower_provenance))
    lo, lo_tag = max(lowers, key=lambda t: t[0])
    up, up_tag = min(uppers, key=lambda t: t[0])
    if up < lo:  # numeric tolerance overlap: collapse conservatively
        up, up_tag = lo, up_tag
    return MetricEstimate(lo, up, lo_tag, up_tag)


# ---------------------------------------------------------------------------
# Path length and distance


def _polyline_length_once(domain, points, side):
    mids = 0.5 * (points[:-1] + points[1:])
    segs = points[1:] - points[:-1]
    if not domain.contains_many(mids).all():
        raise GeometryError("path refinement left the domain; sample it finer")
    lower, upper = metric_bounds_many(domain, mids, segs)
    vals = lower if side == "lower" else upper
    return float(np.sum(vals))


def path_length(domain: Domain, path, side: str = "upper",
                tol: float = 1e-6, max_depth: int = 12) -> float:
    """Kobayashi length of a sampled path by midpoint-rule refinement.

    The integrand uses the chosen side of the certified metric bounds at
    segment midpoints; segments are halved until two successive
    refinements agree within ``tol``.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    pts = np.asarray(getattr(path, "points", path), dtype=complex)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise GeometryError("path must be a sequence of points")
    if not domain.contains_many(pts).all():
        raise GeometryError("all path samples must be interior")
    if pts.shape[0] == 1:
        return 0.0
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 0
    pts = pts[keep]
    if pts.shape[0] == 1:
        return 0.0
    prev = _polyline_length_once(domain, pts, side)
    agreements = 0
    for _ in range(max_depth):
        mids = 0.5 * (pts[:-1] + pts[1:])
        refined = np.empty((2 * len(pts) - 1, pts.shape[1]), dtype=complex)
        refined[0::2] = pts
        refined[1::2] = mids
        pts = refined
        cur = _polyline_length_once(domain, pts, side)
        if abs(cur - prev) < tol:
            agreements += 1
            if agreements >= 2:
                return cur
        else:
            agreements = 0
        prev = cur
    return prev


def distance(domain: Domain, x, y, path_witness: bool = True,
             path_config=None) -> MetricEstimate:
    """Certified interval for the Kobayashi distance K(x, y).

    Exact on the disk, ball, and polydisk.  Otherwise the upper bound is a
    path witness (the straight segment when it stays interior, else the
    geodesic solver's best path) and the lower bound is the better of the
    Euclidean bound c1 |x-y| and the enclosing-ball distance.
    """
    px = domain.require_interior(x)
    py = domain.require_interior(y)
    if px.shape != py.shape:
        raise GeometryError("distance endpoints differ in dimension")
    ex = exact_distance(domain, px, py)
    if ex is not None:
        return MetricEstimate.exact(ex)

    lowers = [(domain.c1 * float(np.linalg.norm(px - py)), "euclidean-lower"),
              (enclosing_ball_distance(domain, px, py), "enclosing-ball")]
    if isinstance(domain, Intersection):
        for comp in domain.components:
            ex_c = exact_distance(comp, px, py)
            if ex_c is not None:
                lowers.append((ex_c, "exact-formula"))
            else:
                lowers.append((enclosing_ball_distance(comp, px, py),
                               "enclosing-ball"))
    lo, lo_tag = max(lowers, key=lambda t: t[0])

    from .geodesics import PathConfig, kob_arclength_params, minimize_path

    up = math.inf
    seg = np.linspace(0.0, 1.0, 33)[:, None]
    chord = (1 - seg) * px[None, :] + seg * py[None, :]
    if domain.contains_many(chord).all():
        up = float(kob_arclength_params(domain, chord)[-1])
    if path_witness:
        cfg = path_config or PathConfig(resolution=32)
        try:
            witness = minimize_path(domain, px, py, cfg)
            up = min(up, float(witness.params[-1]))
        except GeometryError:
            pass
    if not math.isfinite(up):
        raise GeometryError(
            "no interior path witness found between the endpoints")
    up = max(up, lo)
    return MetricEstimate(lo, up, lo_tag, "path-witness")
