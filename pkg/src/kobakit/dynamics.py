"""Iteration of holomorphic self-maps and orbit classification.

Maps are component-wise rational in d complex variables, given by
coefficient tables.  Validation is statistical: a stratified sample grid
(including near-boundary strata) must map into the domain with margin,
and the distance-decreasing surrogate is checked on random pairs.  A
validated flag is therefore a precondition established by sampling, not a
proof.

Orbits are classified by the compact/boundary-convergent dichotomy:
bounded displacement plus recurrence reads as a relatively compact orbit,
while a vanishing boundary-distance trend with a clustering tail reads as
convergence to a single boundary point (the Wolff point surrogate).
Everything else stays Undecided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .domains import Domain, GeometryError, complex_to_json, real_unit_directions, ray_exit_many
from . import metric as km


class MapValidationError(GeometryError):
    pass


def _coerce_terms(spec, dim: int):
    """Accept ascending univariate coefficient lists or term dicts."""
    terms = []
    if all(isinstance(c, (int, float, complex, list, tuple))
           and not isinstance(c, dict) for c in spec):
        if dim != 1 and any(not isinstance(c, (list, tuple)) or
                            len(c) != dim + 1 for c in spec):
            # univariate ascending coefficients
            pass
        for power, c in enumerate(spec):
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1])
            if c != 0:
                terms.append(((power,) + (0,) * (dim - 1), complex(c)))
        return terms
    for t in spec:
        powers = tuple(int(p) for p in t["powers"])
        if len(powers) != dim:
            raise MapValidationError("term powers must match the dimension")
        c = t["coeff"]
        if isinstance(c, (list, tuple)):
            c = complex(c[0], c[1])
        terms.append((powers, complex(c)))
    return terms


@dataclass
class RationalComponent:
    numerator: list
    denominator: list

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        num = _poly_eval(self.numerator, pts)
        den = _poly_eval(self.denominator, pts)
        return num / den

    def den_many(self, pts: np.ndarray) -> np.ndarray:
        return _poly_eval(self.denominator, pts)


def _poly_eval(terms, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(len(pts), dtype=complex)
    for powers, coeff in terms:
        mono = np.ones(len(pts), dtype=complex)
        for j, p in enumerate(powers):
            if p:
                mono = mono * pts[:, j] ** p
        out += coeff * mono
    return out


@dataclass
class SelfMap:
    """Component-wise rational self-map of a domain in C^d."""

    components: list
    dim: int
    name: str = ""
    validated: bool = False

    def __call__(self, p) -> np.ndarray:
        return self.eval_many(np.asarray(p, dtype=complex)[None, :])[0]

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        return np.stack([c.eval_many(pts) for c in self.components], axis=1)

    def min_denominator(self, pts: np.ndarray) -> float:
        return float(min(np.min(np.abs(c.den_many(pts)))
                         for c in self.components))

    @classmethod
    def from_json(cls, data: dict, dim: Optional[int] = None) -> "SelfMap":
        comps = data["components"]
        d = dim or len(comps)
        built = []
        for c in comps:
            num = _coerce_terms(c["numerator"], d)
            den = _coerce_terms(c.get("denominator", [1]), d)
            built.append(RationalComponent(num, den))
        return cls(built, d, name=data.get("name", ""))

    def to_json(self) -> dict:
        def dump(terms):
            return [{"powers": list(p), "coeff": [c.real, c.imag]}
                    for p, c in terms]
        return {"name": self.name, "validated": self.validated,
                "components": [{"numerator": dump(c.numerator),
                                "denominator": dump(c.denominator)}
                               for c in self.components]}


def rotation_map(angle: float) -> SelfMap:
    return SelfMap([RationalComponent([((1,), complex(np.exp(1j * angle)))],
                                      [((0,), 1.0 + 0j)])], 1,
                   name=f"rotation({angle:g})")


def disk_automorphism(a: complex) -> SelfMap:
    """z -> (z + a) / (1 + conj(a) z); hyperbolic for real 0 < a < 1."""
    a = complex(a)
    return SelfMap([RationalComponent([((0,), a), ((1,), 1.0 + 0j)],
                                      [((0,), 1.0 + 0j), ((1,), np.conj(a))])],
                   1, name=f"disk_automorphism({a:g})")


def scaling_map(factors: Sequence[complex]) -> SelfMap:
    comps = []
    d = len(factors)
    for j, f in enumerate(factors):
        powers = tuple(1 if k == j else 0 for k in range(d))
        comps.append(RationalComponent([(powers, complex(f))],
                                       [((0,) * d, 1.0 + 0j)]))
    return SelfMap(comps, d, name="scaling")


def ball_boundary_contraction() -> SelfMap:
    """(z1, z2) -> ((1 + z1)/2, z2/2) on the 2-ball; fixes (1, 0)."""
    c1 = RationalComponent([((0, 0), 0.5 + 0j), ((1, 0), 0.5 + 0j)],
                           [((0, 0), 1.0 + 0j)])
    c2 = RationalComponent([((0, 1), 0.5 + 0j)], [((0, 0), 1.0 + 0j)])
    return SelfMap([c1, c2], 2, name="ball_boundary_contraction")


# ---------------------------------------------------------------------------
# Validation


def _stratified_samples(domain: Domain, n_rays: int, seed: int) -> np.ndarray:
    """Interior samples along rays from the witness, with near-boundary strata."""
    dirs = real_unit_directions(n_rays, domain.dim, seed=seed)
    exits = ray_exit_many(domain, domain.witness, dirs)
    fracs = np.array([0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999])
    pts = (domain.witness[None, None, :]
           + (fracs[None, :, None] * exits[:, None, None]) * dirs[:, None, :])
    pts = pts.reshape(-1, domain.dim)
    return pts[domain.contains_many(pts)]


def validate_map(domain: Domain, self_map: SelfMap, n_rays: int = 32,
                 n_pairs: int = 32, seed: int = 0,
                 lipschitz_slack: float = 1e-6,
                 den_floor: float = 1e-9) -> SelfMap:
    """Check that the map sends a stratified grid into the domain and that
    its denominators stay away from zero there; also spot-check the
    distance-decreasing surrogate on random pairs.  Returns the map with
    the validated flag set; raises MapValidationError otherwise.
    """
    if self_map.dim != domain.dim:
        raise MapValidationError("map arity does not match the domain")
    pts = _stratified_samples(domain, n_rays, seed)
    if self_map.min_denominator(pts) < den_floor:
        raise MapValidationError("denominator vanishes on the sample grid")
    images = self_map.eval_many(pts)
    ok = domain.contains_many(images)
    if not ok.all():
        bad = pts[~ok][0]
        raise MapValidationError(
            f"map sends the sample point {bad} outside the domain")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(pts), size=(n_pairs, 2))
    for i, j in idx:
        if i == j:
            continue
        dxy = km.distance(domain, pts[i], pts[j], path_witness=False)
        dfxy = km.distance(domain, images[i], images[j], path_witness=False)
        if dfxy.lower > dxy.upper + lipschitz_slack:
            raise MapValidationError(
                "distance-decreasing surrogate failed at a sampled pair: "
                f"K(f x, f y) >= {dfxy.lower:.6g} > {dxy.upper:.6g} >= K(x, y)")
    return replace(self_map, validated=True)


# ---------------------------------------------------------------------------
# Orbits


@dataclass
class OrbitTrace:
    base: np.ndarray
    points: np.ndarray          # (N+1, d), orbit including the base
    deltas: np.ndarray
    disp_lower: np.ndarray      # bounds for K(f^n(o), o)
    disp_upper: np.ndarray
    return_min: np.ndarray      # min Euclidean distance to earlier points
    boundary_contact: bool
    stopped_at: Optional[int]

    def __len__(self):
        return len(self.points)

    def subsample(self, step: int) -> "OrbitTrace":
        pts = self.points[::step]
        ret = np.full(len(pts), np.inf)
        for n in range(1, len(pts)):
            ret[n] = np.min(np.linalg.norm(pts[:n] - pts[n], axis=1))
        return OrbitTrace(self.base, pts, self.deltas[::step],
                          self.disp_lower[::step], self.disp_upper[::step],
                          ret, self.boundary_contact, self.stopped_at)

    def write_csv(self, fh):
        d = self.points.shape[1]
        cols = ["n"] + [f"{p}_z{k+1}" for k in range(d) for p in ("re", "im")]
        cols += ["delta", "disp_lower", "disp_upper", "return_min"]
        fh.write(",".join(cols) + "\n")
        for n in range(len(self.points)):
            vals = [float(n)]
            for k in range(d):
                z = self.points[n, k]
                vals += [z.real, z.imag]
            vals += [self.deltas[n], self.disp_lower[n], self.disp_upper[n],
                     self.return_min[n] if np.isfinite(self.return_min[n])
                     else -1.0]
            fh.write(",".join(format(v, ".17g") for v in vals) + "\n")


def iterate(domain: Domain, self_map: SelfMap, o, n_iter: int,
            delta_floor: float = 1e-12) -> OrbitTrace:
    """Run the orbit f^n(o), recording boundary distances, displacement
    bounds, and recurrence statistics; stops early with a flag when the
    boundary distance falls below the hard floor."""
    if not self_map.validated:
        raise MapValidationError("map must be validated before iteration")
    base = domain.require_interior(o)
    pts = [base]
    cur = base
    boundary_contact = False
    stopped = None
    for n in range(1, n_iter + 1):
        cur = self_map(cur)
        if not domain.contains(cur):
            raise GeometryError(
                f"orbit left the domain at step {n} (validation gap): {cur}")
        pts.append(cur)
        if domain.boundary_distance(cur) < delta_floor:
            boundary_contact = True
            stopped = n
            break
    pts = np.array(pts)
    deltas = np.array([domain.boundary_distance(p) for p in pts])
    lo = np.zeros(len(pts))
    up = np.zeros(len(pts))
    for n in range(1, len(pts)):
        est = km.distance(domain, pts[n], base, path_witness=False)
        lo[n], up[n] = est.lower, est.upper
    ret = np.full(len(pts), np.inf)
    for n in range(1, len(pts)):
        ret[n] = np.min(np.linalg.norm(pts[:n] - pts[n], axis=1))
    return OrbitTrace(base, pts, deltas, lo, up, ret, boundary_contact,
                      stopped)


@dataclass
class ClassifyThresholds:
    tail_fraction: float = 0.25
    diameter_factor: float = 10.0
    diameter_pad: float = 1e-6
    recurrence_eps: float = 1e-3
    displacement_cap: float = 6.0
    warmup: int = 8
    delta_drop: float = 0.2      # final tail delta must drop below this
                                 # fraction of the early-orbit delta


@dataclass
class OrbitVerdict:
    kind: str                    # Compact | Wolff | Undecided
    wolff_point: Optional[np.ndarray]
    evidence: dict

    def to_json(self):
        return {"kind": self.kind,
                "wolff_point": (None if self.wolff_point is None
                                else complex_to_json(self.wolff_point)),
                "evidence": {k: (float(v) if isinstance(v, (int, float))
                                 else v)
                             for k, v in self.evidence.items()}}


def classify(domain: Domain, trace: OrbitTrace,
             thresholds: Optional[ClassifyThresholds] = None) -> OrbitVerdict:
    """Wolff/compact dichotomy surrogate at a finite horizon.

    Compact: displacement upper bounds stay below the cap and the orbit
    returns within the recurrence tolerance of an earlier point.  Wolff:
    the boundary-distance trend collapses and the orbit tail clusters
    within the diameter threshold; the Wolff point estimate is the
    boundary point nearest the tail centroid.  Oscillating tails stay
    Undecided no matter how small delta gets.
    """
    th = thresholds or ClassifyThresholds()
    n = len(trace.points)
    if n < max(th.warmup, 4):
        raise GeometryError("orbit too short to classify")
    tail_start = int(n * (1 - th.tail_fraction))
    tail = trace.points[tail_start:]
    tail_deltas = trace.deltas[tail_start:]
    head_delta = float(np.median(trace.deltas[: max(2, n // 4)]))

    disp_ok = float(np.max(trace.disp_upper)) <= th.displacement_cap
    recur = float(np.min(trace.return_min[th.warmup:])) if n > th.warmup else math.inf
    if disp_ok and recur <= th.recurrence_eps and not trace.boundary_contact:
        return OrbitVerdict("Compact", None, {
            "max_displacement_upper": float(np.max(trace.disp_upper)),
            "best_return": recur})

    delta_final = float(tail_deltas[-1])
    delta_trend = delta_final <= th.delta_drop * max(head_delta, 1e-300)
    diam = float(np.max(np.linalg.norm(
        tail[:, None, :] - tail[None, :, :], axis=2)))
    diam_cap = th.diameter_factor * (delta_final + th.diameter_pad)
    if delta_trend and diam <= diam_cap:
        centroid = np.mean(tail, axis=0)
        if domain.contains(centroid):
            anchor = centroid
        else:
            anchor = tail[-1]
        xi = domain.nearest_boundary_point(anchor)
        return OrbitVerdict("Wolff", xi, {
            "tail_diameter": diam, "diameter_cap": diam_cap,
            "delta_final": delta_final})
    return OrbitVerdict("Undecided", None, {
        "tail_diameter": diam, "diameter_cap": diam_cap,
        "delta_final": delta_final,
        "max_displacement_upper": float(np.max(trace.disp_upper)),
        "best_return": recur})


@dataclass
class MultiStartReport:
    verdicts: list
    agree: bool
    kind: Optional[str]
    wolff_spread: Optional[float]
    traces: list

    def to_json(self):
        return {"agree": self.agree, "kind": self.kind,
                "wolff_spread": self.wolff_spread,
                "verdicts": [v.to_json() for v in self.verdicts]}


def multi_start_consistency(domain: Domain, self_map: SelfMap, bases,
                            n_iter: int,
                            thresholds: Optional[ClassifyThresholds] = None,
                            ) -> MultiStartReport:
    """Classify orbits from several base points and compare the verdicts.

    Disagreement is reported (with full traces) as a falsification
    candidate, not raised.
    """
    if len(bases) < 2:
        raise ValueError("need at least two base points")
    traces = [iterate(domain, self_map, b, n_iter) for b in bases]
    verdicts = [classify(domain, t, thresholds) for t in traces]
    kinds = {v.kind for v in verdicts}
    agree = len(kinds) == 1
    kind = verdicts[0].kind if agree else None
    spread = None
    if agree and kind == "Wolff":
        pts = np.array([v.wolff_point for v in verdicts])
        centroid = np.mean(pts, axis=0)
        spread = float(np.max(np.linalg.norm(pts - centroid[None, :], axis=1)))
    return MultiStartReport(verdicts, agree, kind, spread, traces)
