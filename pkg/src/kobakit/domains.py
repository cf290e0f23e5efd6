"""Geometry kernel: bounded domains in C^d.

Points and vectors are numpy arrays of ``complex128`` with shape ``(d,)``.
A "real direction" in R^{2d} is encoded the same way, using the standard
identification R^{2d} ~ C^d; it is only ever interpreted R-linearly.

Every domain stores an enclosing radius ``R`` (all member points have
Euclidean norm < R), an interior witness point, a convexity flag that is
True only when convexity is guaranteed by construction, and an optional
assumed finite-type model ``(c, eps)`` encoding the lower bound
``k(z; v) >= c * |v| / delta(z)**eps`` for the metric layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize


class GeometryError(ValueError):
    """Base class for geometric contract violations."""


class DimensionMismatch(GeometryError):
    pass


class OutsideDomain(GeometryError):
    pass


class UnsupportedDomain(GeometryError):
    """Raised when an operation has no sound strategy for the given kind."""


def as_point(p, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``p`` to a complex point array, optionally checking its dimension."""
    arr = np.atleast_1d(np.asarray(p, dtype=complex))
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(float))):
        raise GeometryError("point has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"point has dimension {arr.shape[0]}, expected {dim}")
    return arr


def as_vector(v, dim: Optional[int] = None, nonzero: bool = False) -> np.ndarray:
    """Coerce ``v`` to a complex vector array; optionally require it nonzero."""
    arr = as_point(v, dim)
    if nonzero and np.linalg.norm(arr) == 0.0:
        raise GeometryError("vector must be nonzero")
    return arr


def real_unit_directions(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic set of n unit directions in C^dim ~ R^{2 dim}.

    The 4*dim signed coordinate axes come first, then seeded random
    directions; useful as a reproducible probing set.
    """
    axes = []
    for k in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[k] = 1.0
        axes.extend([e, -e, 1j * e, -1j * e])
    axes = np.array(axes)
    if n <= len(axes):
        return axes[:n]
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((n - len(axes), 2 * dim))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    extra_c = extra[:, :dim] + 1j * extra[:, dim:]
    return np.concatenate([axes, extra_c], axis=0)


# ---------------------------------------------------------------------------
# Domain kinds


class Domain:
    """Base class for bounded domains in C^d."""

    kind: str = "abstract"

    def __init__(self, dim, enclosing_radius, witness, convex,
                 finite_type_model=None):
        self.dim = int(dim)
        self.enclosing_radius = float(enclosing_radius)
        self.witness = as_point(witness, self.dim)
        self.convex = bool(convex)
        # optional (c, eps): assumed metric lower bound c|v|/delta^eps
        self.finite_type_model = (
            None if finite_type_model is None
            else (float(finite_type_model[0]), float(finite_type_model[1]))
        )
        if self.enclosing_radius <= 0:
            raise GeometryError("enclosing radius must be positive")
        if not self.contains(self.witness):
            raise GeometryError("interior witness point is not in the domain")

    # -- mandatory kernel ---------------------------------------------------

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (n, d) array of points."""
        raise NotImplementedError

    def boundary_distance(self, p) -> float:
        """Euclidean distance from an interior point to the boundary."""
        raise NotImplementedError

    def nearest_boundary_point(self, p) -> np.ndarray:
        """A boundary point realizing (to tolerance) the boundary distance."""
        raise NotImplementedError

    # -- derived ------------------------------------------------------------

    def contains(self, p) -> bool:
        pt = as_point(p, self.dim)
        return bool(self.contains_many(pt[None, :])[0])

    def require_interior(self, p) -> np.ndarray:
        pt = as_point(p, self.dim)
        if not self.contains(pt):
            raise OutsideDomain(f"point {pt} is not in the domain {self.kind}")
        return pt

    @property
    def c1(self) -> float:
        """Universal metric lower-bound constant from the enclosing ball.

        The metric of the enclosing ball B_R(0) is minimized at its center
        where it equals |v|/R, so k(z; v) >= |v|/R holds on all of the domain.
        """
        return 1.0 / self.enclosing_radius

    def to_json(self) -> dict:
        raise UnsupportedDomain(f"{self.kind} is not JSON-serializable")

    def __repr__(self):
        return f"{self.__class__.__name__}(dim={self.dim})"


class UnitDisk(Domain):
    """The open unit disk in C."""

    kind = "UnitDisk"

    def __init__(self, finite_type_model=None):
        super().__init__(1, 1.0, [0.0], True, finite_type_model)

    def contains_many(self, pts):
        return np.abs(pts[:, 0]) < 1.0

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        return 1.0 - abs(pt[0])

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        z = pt[0]
        if z == 0:
            return np.array([1.0 + 0j])
        return np.array([z / abs(z)])

    def to_json(self):
        return {"kind": self.kind, "params": {}}


class UnitBall(Domain):
    """The open Euclidean unit ball in C^d."""

    kind = "UnitBall"

    def __init__(self, dim: int, finite_type_model=None):
        super().__init__(dim, 1.0, np.zeros(dim), True, finite_type_model)

    def contains_many(self, pts):
        return np.linalg.norm(pts, axis=1) < 1.0

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        return 1.0 - float(np.linalg.norm(pt))

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        n = np.linalg.norm(pt)
        if n == 0:
            e = np.zeros(self.dim, dtype=complex)
            e[0] = 1.0
            return e
        return pt / n

    def to_json(self):
        return {"kind": self.kind, "params": {"dim": self.dim}}


class Polydisk(Domain):
    """Product of disks: |z_j| < r_j."""

    kind = "Polydisk"

    def __init__(self, radii: Sequence[float], finite_type_model=None):
        radii = np.asarray(radii, dtype=float)
        if np.any(radii <= 0):
            raise GeometryError("polydisk radii must be positive")
        self.radii = radii
        super().__init__(len(radii), float(np.linalg.norm(radii)) + 1e-12,
                         np.zeros(len(radii)), True, finite_type_model)

    def contains_many(self, pts):
        return np.all(np.abs(pts) < self.radii[None, :], axis=1)

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        return float(np.min(self.radii - np.abs(pt)))

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        gaps = self.radii - np.abs(pt)
        j = int(np.argmin(gaps))
        out = pt.copy()
        zj = pt[j]
        out[j] = self.radii[j] * (zj / abs(zj) if zj != 0 else 1.0)
        return out

    def to_json(self):
        return {"kind": self.kind,
                "params": {"dim": self.dim, "radii": self.radii.tolist()}}


class Egg(Domain):
    """Egg domain: sum_j |z_j|^(2 m_j) < 1.

    Convex by construction when every exponent m_j >= 1/2.  Boundary
    distance reduces, by phase alignment, to a real minimization over the
    moduli vector on the defining surface; it is seeded by a radial scan
    and polished with SLSQP.
    """

    kind = "Egg"

    def __init__(self, exponents: Sequence[float], finite_type_model=None):
        m = np.asarray(exponents, dtype=float)
        if np.any(m <= 0):
            raise GeometryError("egg exponents must be positive")
        self.exponents = m
        super().__init__(len(m), math.sqrt(len(m)) + 1e-9, np.zeros(len(m)),
                         bool(np.all(m >= 0.5)), finite_type_model)

    def _gauge_many(self, pts):
        return np.sum(np.abs(pts) ** (2.0 * self.exponents[None, :]), axis=1)

    def contains_many(self, pts):
        return self._gauge_many(pts) < 1.0

    def _nearest_moduli(self, a: np.ndarray) -> np.ndarray:
        """Nearest point to moduli vector a >= 0 on {sum t_j^(2m_j) = 1, t >= 0}."""
        m2 = 2.0 * self.exponents

        def gauge(t):
            return float(np.sum(np.maximum(t, 0.0) ** m2) - 1.0)

        # radial seed: scale a (or e_1 for the origin) onto the surface
        seed_dir = a if np.any(a > 0) else np.eye(len(a))[0]
        lo, hi = 0.0, 1.0
        while gauge(hi * seed_dir) < 0:
            hi *= 2.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if gauge(mid * seed_dir) < 0:
                lo = mid
            else:
                hi = mid
        cands = [0.5 * (lo + hi) * seed_dir]
        # axis seeds catch minimizers on coordinate hyperplanes
        for j in range(len(a)):
            e = np.zeros(len(a))
            e[j] = 1.0
            cands.append(e)
        # polish only the two most promising seeds
        cands.sort(key=lambda t: float(np.sum((t - a) ** 2)))
        best, best_val = None, np.inf
        for s in cands[:2]:
            res = optimize.minimize(
                lambda t: np.sum((t - a) ** 2), s, method="SLSQP",
                constraints=[{"type": "eq", "fun": gauge}],
                bounds=[(0.0, 1.0)] * len(a),
                options={"maxiter": 80, "ftol": 1e-14})
            if res.success and abs(gauge(res.x)) < 1e-9:
                val = float(np.sum((res.x - a) ** 2))
                if val < best_val:
                    best, best_val = res.x, val
        if best is None:
            raise GeometryError("egg boundary projection failed to converge")
        return best

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        t = self._nearest_moduli(np.abs(pt))
        return float(np.linalg.norm(t - np.abs(pt)))

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        a = np.abs(pt)
        t = self._nearest_moduli(a)
        phases = np.where(a > 0, pt / np.where(a > 0, a, 1.0), 1.0)
        return t * phases

    def to_json(self):
        return {"kind": self.kind,
                "params": {"dim": self.dim,
                           "exponents": self.exponents.tolist()}}


class ConvexSupport(Domain):
    """Convex domain given by halfspaces, a ball preset, or a defining function.

    Three parameterizations:

    * ``halfspaces``: pairs (u, h) with unit u in C^d; the domain is the
      (bounded) polytope Re<z, u> < h.  Membership and boundary distance
      are exact.
    * ``ball``: center/radius preset; exact queries.
    * ``defining``: a callable phi with the domain {phi < 0}.  Membership is
      the sign of phi; boundary distance is numeric (boundary mesh seed from
      ray casting, then constrained minimization).  The caller asserts
      convexity; pass ``convex=False`` for synthetic non-convex controls,
      which disables convex-only machinery downstream.
    """

    kind = "ConvexSupport"

    def __init__(self, dim: int, *, halfspaces=None, ball=None, defining=None,
                 enclosing_radius=None, witness=None, convex=True,
                 finite_type_model=None):
        given = sum(x is not None for x in (halfspaces, ball, defining))
        if given != 1:
            raise GeometryError(
                "exactly one of halfspaces / ball / defining is required")
        self._halfspaces = None
        self._ball = None
        self._defining = None
        if halfspaces is not None:
            normals = np.array([as_vector(u, dim) for u, _ in halfspaces])
            norms = np.linalg.norm(normals, axis=1)
            if np.any(norms == 0):
                raise GeometryError("halfspace normal must be nonzero")
            normals /= norms[:, None]
            offsets = np.array([float(h) for _, h in halfspaces])
            self._halfspaces = (normals, offsets)
            if enclosing_radius is None:
                raise GeometryError("halfspace polytopes need an enclosing radius")
        elif ball is not None:
            center = as_point(ball[0], dim)
            radius = float(ball[1])
            if radius <= 0:
                raise GeometryError("ball radius must be positive")
            self._ball = (center, radius)
            if enclosing_radius is None:
                enclosing_radius = float(np.linalg.norm(center)) + radius
            if witness is None:
                witness = center
        else:
            self._defining = defining
            if enclosing_radius is None or witness is None:
                raise GeometryError(
                    "defining-function domains need enclosing_radius and witness")
        if witness is None:
            witness = self._polytope_witness(dim)
        super().__init__(dim, enclosing_radius, witness, convex,
                         finite_type_model)

    def _polytope_witness(self, dim):
        normals, offsets = self._halfspaces
        # Chebyshev-style interior point: maximize the minimum gap on a scan
        # seeded at the offset-weighted centroid of the face projections.
        guess = np.zeros(dim, dtype=complex)
        reals = np.concatenate([guess.real, guess.imag])

        def neg_gap(x):
            z = x[:dim] + 1j * x[dim:]
            gaps = offsets - np.real(np.sum(z[None, :] * np.conj(normals), axis=1))
            return -float(np.min(gaps))

        res = optimize.minimize(neg_gap, reals, method="Nelder-Mead",
                                options={"maxiter": 2000, "xatol": 1e-10,
                                         "fatol": 1e-12})
        z = res.x[:dim] + 1j * res.x[dim:]
        if neg_gap(res.x) >= 0:
            raise GeometryError("halfspace polytope has empty interior")
        return z

    def _gaps_many(self, pts):
        normals, offsets = self._halfspaces
        proj = np.real(pts @ np.conj(normals).T)
        return offsets[None, :] - proj

    def contains_many(self, pts):
        if self._ball is not None:
            c, r = self._ball
            return np.linalg.norm(pts - c[None, :], axis=1) < r
        if self._halfspaces is not None:
            return np.all(self._gaps_many(pts) > 0.0, axis=1)
        vals = self._defining(pts)
        return np.asarray(vals) < 0.0

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        if self._ball is not None:
            c, r = self._ball
            return r - float(np.linalg.norm(pt - c))
        if self._halfspaces is not None:
            return float(np.min(self._gaps_many(pt[None, :])[0]))
        return self._numeric_distance(pt)[0]

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        if self._ball is not None:
            c, r = self._ball
            w = pt - c
            n = np.linalg.norm(w)
            if n == 0:
                e = np.zeros(self.dim, dtype=complex)
                e[0] = 1.0
                return c + r * e
            return c + r * w / n
        if self._halfspaces is not None:
            normals, _ = self._halfspaces
            gaps = self._gaps_many(pt[None, :])[0]
            i = int(np.argmin(gaps))
            return pt + gaps[i] * normals[i]
        return self._numeric_distance(pt)[1]

    def _numeric_distance(self, pt):
        d = self.dim
        dirs = real_unit_directions(max(64, 8 * d), d, seed=7)
        exits = ray_exit_many(self, pt, dirs)
        mesh = pt[None, :] + exits[:, None] * dirs
        dists = np.linalg.norm(mesh - pt[None, :], axis=1)
        i0 = int(np.argmin(dists))
        seed = mesh[i0]

        def fun(x):
            xi = x[:d] + 1j * x[d:]
            return float(np.sum(np.abs(xi - pt) ** 2))

        def con(x):
            xi = x[:d] + 1j * x[d:]
            return float(np.asarray(self._defining(xi[None, :]))[0])

        x0 = np.concatenate([seed.real, seed.imag])
        res = optimize.minimize(fun, x0, method="SLSQP",
                                constraints=[{"type": "eq", "fun": con}],
                                options={"maxiter": 300, "ftol": 1e-18})
        cand = [(dists[i0], seed)]
        if res.success and abs(con(res.x)) < 1e-8:
            xi = res.x[:d] + 1j * res.x[d:]
            cand.append((float(np.linalg.norm(xi - pt)), xi))
        cand.sort(key=lambda t: t[0])
        return cand[0]

    def to_json(self):
        if self._ball is not None:
            c, r = self._ball
            return {"kind": self.kind,
                    "params": {"dim": self.dim,
                               "ball": {"center": complex_to_json(c),
                                        "radius": r}}}
        if self._halfspaces is not None:
            normals, offsets = self._halfspaces
            return {"kind": self.kind,
                    "params": {"dim": self.dim,
                               "enclosing_radius": self.enclosing_radius,
                               "halfspaces": [
                                   {"normal": complex_to_json(u), "offset": float(h)}
                                   for u, h in zip(normals, offsets)]}}
        raise UnsupportedDomain("defining-function domains are not JSON-serializable")


class PsiSupported(Domain):
    """Convex model domain in C^2 with a boundary point flat to infinite order.

    The domain is the intersection of the envelope epigraph
    { (z1, z2) : Im z2 > psi(|z1|) },   psi(t) = exp(-1/t^s),
    with a Euclidean ball centered at (0, i h) whose sphere stays strictly
    above the graph near the origin.  The origin is then a boundary point
    where the graph alone is active, so an affine disk in the z1 direction
    at height Im z2 = delta has radius psi^{-1}(delta) =
    (log 1/delta)^(-1/s): the metric degenerates logarithmically, and the
    exponent s controls whether the shell-growth integral converges
    (0 < s < 1) or diverges (s >= 1).  The ball closes the domain with a
    strictly convex cap so no other boundary piece carries analytic disks
    of fixed size.
    """

    kind = "PsiSupported"

    def __init__(self, s: float, ball_radius: Optional[float] = None,
                 finite_type_model=None):
        if s <= 0:
            raise GeometryError("envelope exponent s must be positive")
        self.s = float(s)
        # psi(t) is convex only for t <= (s/(s+1))^(1/s); the ball must not
        # reach beyond that cap or the epigraph piece would lose convexity
        t_star = (s / (s + 1.0)) ** (1.0 / s)
        if ball_radius is None:
            ball_radius = min(0.95 * t_star, 0.5)
        if ball_radius > t_star:
            raise GeometryError(
                f"ball radius {ball_radius} exceeds the convexity cap "
                f"{t_star:.6g}")
        self.rho = float(ball_radius)
        # ball center sits above the flat point, which lands on the sphere's
        # lower cap only in the limit; h < rho keeps the origin area governed
        # by the envelope graph alone
        self.h = 0.6 * self.rho
        self.center = np.array([0.0, 1j * self.h])
        super().__init__(2, self.h + self.rho + 1e-12, self.center, True,
                         finite_type_model)

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(t > 0,
                           np.exp(-1.0 / np.maximum(t, 1e-300) ** self.s), 0.0)
        return out if out.ndim else float(out)

    def psi_inv(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where((y > 0) & (y < 1),
                           np.log(1.0 / np.maximum(y, 1e-300)) ** (-1.0 / self.s),
                           np.inf)
        out = np.where(y <= 0, 0.0, out)
        return out if out.ndim else float(out)

    def contains_many(self, pts):
        t = np.abs(pts[:, 0])
        im2 = pts[:, 1].imag
        in_ball = np.linalg.norm(pts - self.center[None, :], axis=1) < self.rho
        return in_ball & (im2 > self.psi(t))

    def _graph_distance(self, pt):
        """Distance to the envelope graph {Im z2 = psi(|z1|)} (Re z2 free)."""
        a = abs(pt[0])
        b = pt[1].imag

        def fun(t):
            return (t - a) ** 2 + (self.psi(t) - b) ** 2

        ts = np.linspace(0.0, self.rho, 65)
        vals = [fun(t) for t in ts]
        i = int(np.argmin(vals))
        lo = ts[max(i - 1, 0)]
        hi = ts[min(i + 1, len(ts) - 1)]
        res = optimize.minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-14})
        t_best = float(res.x) if res.fun <= vals[i] else float(ts[i])
        return math.sqrt(fun(t_best)), t_best

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        d_ball = self.rho - float(np.linalg.norm(pt - self.center))
        d_graph, _ = self._graph_distance(pt)
        return float(min(d_ball, d_graph))

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        w = pt - self.center
        nw = np.linalg.norm(w)
        sphere = (self.center + self.rho * w / nw if nw > 0
                  else self.center + self.rho * np.array([1.0, 0.0]))
        d_graph, t = self._graph_distance(pt)
        ph1 = pt[0] / abs(pt[0]) if pt[0] != 0 else 1.0
        graph = np.array([t * ph1, pt[1].real + 1j * float(self.psi(t))])
        if self.rho - nw <= d_graph:
            return sphere
        return graph

    def to_json(self):
        return {"kind": self.kind,
                "params": {"s": self.s, "ball_radius": self.rho}}


class Intersection(Domain):
    """Intersection of two domains of the same dimension."""

    kind = "Intersection"

    def __init__(self, a: Domain, b: Domain, witness=None,
                 finite_type_model=None):
        if a.dim != b.dim:
            raise DimensionMismatch("intersection components differ in dimension")
        self.components = (a, b)
        if witness is None:
            witness = self._find_witness(a, b)
        super().__init__(a.dim, min(a.enclosing_radius, b.enclosing_radius),
                         witness, a.convex and b.convex, finite_type_model)

    @staticmethod
    def _find_witness(a, b):
        for cand in (a.witness, b.witness, 0.5 * (a.witness + b.witness)):
            if a.contains(cand) and b.contains(cand):
                return cand
        # segment scan between the two witnesses
        for t in np.linspace(0.0, 1.0, 257):
            cand = (1 - t) * a.witness + t * b.witness
            if a.contains(cand) and b.contains(cand):
                return cand
        raise GeometryError("no interior witness found for the intersection")

    def contains_many(self, pts):
        a, b = self.components
        return a.contains_many(pts) & b.contains_many(pts)

    def boundary_distance(self, p):
        pt = self.require_interior(p)
        a, b = self.components
        return min(a.boundary_distance(pt), b.boundary_distance(pt))

    def nearest_boundary_point(self, p):
        pt = self.require_interior(p)
        a, b = self.components
        if a.boundary_distance(pt) <= b.boundary_distance(pt):
            return a.nearest_boundary_point(pt)
        return b.nearest_boundary_point(pt)

    def to_json(self):
        a, b = self.components
        return {"kind": self.kind,
                "params": {"components": [a.to_json(), b.to_json()],
                           "witness": complex_to_json(self.witness)}}


# ---------------------------------------------------------------------------
# JSON round trip

def complex_to_json(arr: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.atleast_1d(arr)]


def point_from_json(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data])


def domain_from_json(data: dict) -> Domain:
    """Rebuild a domain from its JSON object {"kind": ..., "params": ...}."""
    kind = data.get("kind")
    params = data.get("params", {})
    model = params.get("finite_type_model")
    if model is not None:
        model = (model["c"], model["eps"])
    if kind == "UnitDisk":
        return UnitDisk(finite_type_model=model)
    if kind == "UnitBall":
        return UnitBall(params["dim"], finite_type_model=model)
    if kind == "Polydisk":
        return Polydisk(params["radii"], finite_type_model=model)
    if kind == "Egg":
        return Egg(params["exponents"], finite_type_model=model)
    if kind == "ConvexSupport":
        if "ball" in params:
            b = params["ball"]
            return ConvexSupport(params["dim"],
                                 ball=(point_from_json(b["center"]), b["radius"]),
                                 finite_type_model=model)
        hs = [(point_from_json(h["normal"]), h["offset"])
              for h in params["halfspaces"]]
        return ConvexSupport(params["dim"], halfspaces=hs,
                             enclosing_radius=params["enclosing_radius"],
                             finite_type_model=model)
    if kind == "PsiSupported":
        return PsiSupported(params["s"], params.get("ball_radius"),
                            finite_type_model=model)
    if kind == "Intersection":
        a, b = (domain_from_json(c) for c in params["components"])
        witness = (point_from_json(params["witness"])
                   if "witness" in params else None)
        return Intersection(a, b, witness=witness, finite_type_model=model)
    raise UnsupportedDomain(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Module operations


def membership(domain: Domain, p) -> bool:
    """True iff p lies in the (open) domain."""
    return domain.contains(as_point(p, domain.dim))


def boundary_distance(domain: Domain, p) -> float:
    """delta(p): Euclidean distance from the interior point p to the boundary."""
    return domain.boundary_distance(p)


def ray_exit_many(domain: Domain, p: np.ndarray, dirs: np.ndarray,
                  tol: float = 1e-10, scan_steps: int = 1024) -> np.ndarray:
    """First-exit lengths sup{t : p + s u in domain for all s in [0, t)}.

    A vectorized forward scan brackets the first crossing per direction
    (so re-entrant rays in non-convex domains are handled), then bisection
    tightens each bracket to ``tol``.
    """
    n = len(dirs)
    t_max = np.linalg.norm(p) + domain.enclosing_radius + 1.0
    grid = np.linspace(0.0, t_max, scan_steps + 1)[1:]
    pts = p[None, None, :] + grid[None, :, None] * dirs[:, None, :]
    inside = domain.contains_many(pts.reshape(-1, domain.dim)).reshape(n, -1)
    first_out = np.argmin(inside, axis=1)  # first False along the scan
    all_in = inside.all(axis=1)
    if np.any(all_in):
        raise GeometryError("scan failed to exit the enclosing ball")
    lo = np.where(first_out == 0, 0.0, grid[np.maximum(first_out - 1, 0)])
    hi = grid[first_out]
    for _ in range(max(1, int(math.ceil(math.log2(t_max / tol))))):
        mid = 0.5 * (lo + hi)
        pts = p[None, :] + mid[:, None] * dirs
        ok = domain.contains_many(pts)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return 0.5 * (lo + hi)


def ray_to_boundary(domain: Domain, p, u, tol: float = 1e-10) -> float:
    """Exit length along the real direction u from the interior point p."""
    pt = domain.require_interior(p)
    uu = as_vector(u, domain.dim, nonzero=True)
    uu = uu / np.linalg.norm(uu)
    return float(ray_exit_many(domain, pt, uu[None, :], tol=tol)[0])


def disk_radius_many(domain: Domain, pts: np.ndarray, vecs: np.ndarray,
                     tol: float = 1e-7, n_circle: int = 256,
                     max_circle: int = 4096,
                     deltas: Optional[np.ndarray] = None) -> np.ndarray:
    """Vectorized affine disk radius r(z; v) for convex domains.

    r(z; v) = sup{ r : z + r*Delta*(v/|v|) is contained in the domain }.
    Containment of each disk is certified through sampled circle points
    (convexity makes circle containment equivalent to disk containment up
    to sampling error, and the error is one-sided: more samples can only
    shrink the answer).  The circle count is doubled until the radius
    stabilizes twice.
    """
    if not domain.convex:
        raise UnsupportedDomain(
            "affine disk radius requires a convex domain (no containment "
            "strategy for non-convex kinds)")
    n = len(pts)
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(norms == 0):
        raise GeometryError("direction vector must be nonzero")
    units = vecs / norms[:, None]

    if deltas is None:
        deltas = np.array([domain.boundary_distance(p) for p in pts])
    else:
        deltas = np.asarray(deltas, dtype=float)
    n_iter = max(1, int(math.ceil(math.log2(2 * domain.enclosing_radius / tol))))

    def radii_at(n_c: int) -> np.ndarray:
        phases = np.exp(2j * np.pi * (np.arange(n_c) + 0.382) / n_c)
        out = np.empty(n)
        chunk = max(1, (1 << 18) // n_c)
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            p_blk = pts[sl]
            u_blk = units[sl]
            # the inscribed Euclidean ball certifies r >= delta
            lo = deltas[sl].copy()
            hi = np.full(len(p_blk), 2.0 * domain.enclosing_radius)
            for _ in range(n_iter):
                mid = 0.5 * (lo + hi)
                circ = (p_blk[:, None, :]
                        + (mid[:, None] * phases[None, :])[:, :, None]
                        * u_blk[:, None, :])
                ok = domain.contains_many(
                    circ.reshape(-1, domain.dim)).reshape(len(p_blk), n_c)
                ok = ok.all(axis=1)
                lo = np.where(ok, mid, lo)
                hi = np.where(ok, hi, mid)
            out[sl] = lo
        return out

    prev = radii_at(n_circle)
    stable = 0
    n_c = n_circle
    while stable < 2 and n_c < max_circle:
        n_c *= 2
        cur = radii_at(n_c)
        # relative verdict stabilization; doubling only shrinks the radii
        if np.all(np.abs(cur - prev) <= 1e-4 * np.maximum(cur, tol)):
            stable += 1
        else:
            stable = 0
        prev = cur
    return prev


def disk_radius_in_complex_line(domain: Domain, z, v, tol: float = 1e-7) -> float:
    """Largest affine-disk radius through z in the complex line direction v."""
    pt = domain.require_interior(z)
    vv = as_vector(v, domain.dim, nonzero=True)
    return float(disk_radius_many(domain, pt[None, :], vv[None, :], tol=tol)[0])


# ---------------------------------------------------------------------------
# Interior-cone condition


@dataclass
class ConeSpec:
    """Open right circular cone attached to a boundary point.

    The cone is vertex + {z : Re<z, axis> > cos(theta/2) |z|} clipped to the
    ball of radius reach around the vertex; the tested point must lie on
    its axis.
    """
    vertex: np.ndarray
    axis: np.ndarray
    aperture: float
    reach: float

    def __post_init__(self):
        if not (0.0 < self.aperture < math.pi):
            raise GeometryError("cone aperture must lie in (0, pi)")
        if self.reach <= 0:
            raise GeometryError("cone reach must be positive")
        self.axis = self.axis / np.linalg.norm(self.axis)


@dataclass
class ConeSample:
    point: np.ndarray
    cone: Optional[ConeSpec]
    verified: bool


@dataclass
class ConeReport:
    samples: list
    apertures_tried: list
    convex_by_construction: bool

    @property
    def all_verified(self) -> bool:
        return all(s.verified for s in self.samples)

    @property
    def min_verified_aperture(self) -> Optional[float]:
        apts = [s.cone.aperture for s in self.samples if s.verified]
        return min(apts) if apts else None

    def to_json(self):
        return {
            "convex_by_construction": self.convex_by_construction,
            "apertures_tried": list(self.apertures_tried),
            "all_verified": self.all_verified,
            "min_verified_aperture": self.min_verified_aperture,
            "samples": [
                {"point": complex_to_json(s.point),
                 "verified": s.verified,
                 "aperture": s.cone.aperture if s.cone else None,
                 "reach": s.cone.reach if s.cone else None}
                for s in self.samples],
        }


def _cap_points(vertex, axis, theta, reach, n_ring=24, n_radial=14,
                n_azimuth=8, dim=1):
    """Deterministic sample of the clipped cone, dense near vertex and rim."""
    radii = reach * np.geomspace(1e-6, 1.0, n_radial) * 0.999999
    fracs = np.linspace(0.0, 0.999999, n_ring)
    pts = []
    # orthonormal completion of the axis over R^{2d}
    basis = []
    ax_r = np.concatenate([axis.real, axis.imag])
    raw = np.eye(2 * dim)
    for b in raw:
        for prev in [ax_r] + basis:
            b = b - np.dot(b, prev) * prev
        nb = np.linalg.norm(b)
        if nb > 1e-12:
            basis.append(b / nb)
    basis = np.array(basis)
    azim = basis[: max(1, min(len(basis), 2 * dim - 1))]
    for rho in radii:
        for f in fracs:
            phi = f * theta / 2.0
            for k in range(min(n_azimuth, len(azim))):
                t_r = azim[(k * 7 + int(f * 13)) % len(azim)]
                t = t_r[:dim] + 1j * t_r[dim:]
                w = math.cos(phi) * axis + math.sin(phi) * t
                pts.append(vertex + rho * w)
    return np.array(pts)


def verify_cone(domain: Domain, cone: ConeSpec, n_ring=24, n_radial=14) -> bool:
    """Check (by dense sampling) that the clipped cone lies inside the domain."""
    pts = _cap_points(cone.vertex, cone.axis, cone.aperture, cone.reach,
                      n_ring=n_ring, n_radial=n_radial, dim=domain.dim)
    return bool(domain.contains_many(pts).all())


def cone_condition_check(domain: Domain, samples, apertures=None,
                         reaches=None, delta_max: float = 0.2,
                         n_axis_perturbations: int = 9) -> ConeReport:
    """Search for verified interior cones at near-boundary sample points.

    For each sample x the candidate vertex is the nearest boundary point
    (the axis is then forced to point from the vertex through x); the
    vertex is additionally perturbed along a small tangential grid.  For
    each aperture (largest first) and reach (largest first) the clipped
    cone is verified by dense sampling; the first verified pair wins.
    Failures are recorded, not raised.
    """
    if apertures is None:
        apertures = [2.9, 2.5, 2.0, math.pi / 2, 1.0, 0.5]
    apertures = sorted(apertures, reverse=True)
    if reaches is None:
        R = domain.enclosing_radius
        reaches = [R / 2, R / 4, R / 8, R / 16, R / 32]
    results = []
    for raw in samples:
        x = domain.require_interior(raw)
        if domain.boundary_distance(x) > delta_max:
            results.append(ConeSample(x, None, False))
            continue
        xi0 = domain.nearest_boundary_point(x)
        vertices = [xi0]
        # tangential perturbations of the vertex, re-projected to the boundary
        rng = np.random.default_rng(11)
        scale = 0.5 * np.linalg.norm(x - xi0)
        for _ in range(max(0, n_axis_perturbations - 1)):
            step = rng.standard_normal(2 * domain.dim)
            step = step / np.linalg.norm(step) * scale
            cand = xi0 + step[:domain.dim] + 1j * step[domain.dim:]
            if domain.contains(cand):
                vertices.append(domain.nearest_boundary_point(cand))
        found = None
        for theta in apertures:
            for xi in vertices:
                gap = np.linalg.norm(x - xi)
                if gap == 0:
                    continue
                axis = (x - xi) / gap
                for r0 in reaches:
                    cone = ConeSpec(xi, axis, theta, r0)
                    if verify_cone(domain, cone):
                        found = cone
                        break
                if found:
                    break
            if found:
                break
        results.append(ConeSample(x, found, found is not None))
    return ConeReport(results, list(apertures), domain.convex)
