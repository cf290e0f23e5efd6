"""Visibility and Gromov-product experiments.

The visibility experiment drives certified almost-geodesics between points
approaching two boundary targets and tracks how close each path comes to a
base point; stabilization of the running supremum of those closest
approaches is the finite-data surrogate for the compact-set property.
The companion experiment tabulates Gromov products over approach grids
and tests boundedness the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domains import Domain, GeometryError
from . import metric as km
from .metric import MetricEstimate
from .geodesics import (
    PathConfig,
    PathSearchError,
    SampledPath,
    certify,
    kob_arclength_params,
    minimize_path,
    unit_speed_reparametrize,
    _delta_lower_many,
    _pairwise_exact,
)
from .goldilocks import estimate_M
from .metric import exact_shell_sup


@dataclass
class ApproachSequence:
    """Interior points converging to a boundary target."""

    target: np.ndarray
    points: list
    mode: str = "custom"

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=complex)
        self.points = [np.asarray(p, dtype=complex) for p in self.points]
        gaps = [np.linalg.norm(p - self.target) for p in self.points]
        if any(b >= a for a, b in zip(gaps, gaps[1:])):
            raise GeometryError(
                "approach distances to the target must strictly decrease")

    def __len__(self):
        return len(self.points)

    @classmethod
    def radial(cls, domain: Domain, target, deltas: Sequence[float],
               inward=None) -> "ApproachSequence":
        """March toward the boundary target along the inward ray."""
        target = np.asarray(target, dtype=complex)
        if inward is None:
            inward = domain.witness - target
        inward = np.asarray(inward, dtype=complex)
        inward = inward / np.linalg.norm(inward)
        pts = []
        for dl in sorted(deltas, reverse=True):
            x = target + dl * inward
            if domain.contains(x):
                pts.append(x)
        if len(pts) < 2:
            raise GeometryError("radial approach produced fewer than 2 points")
        return cls(target, pts, "radial")


def _distance_to_base_many(domain: Domain, o: np.ndarray,
                           pts: np.ndarray):
    """(lower, upper) arrays for the distance from o to each point."""
    both = np.concatenate([o[None, :], pts])
    exact = _pairwise_exact(domain, both)
    if exact is not None:
        row = exact[0, 1:]
        return row, row.copy()
    diff = np.linalg.norm(pts - o[None, :], axis=1)
    lower = domain.c1 * diff
    R = domain.enclosing_radius
    lower = np.maximum(lower, np.array(
        [km.ball_distance(o / R, p / R) for p in pts]))
    upper = np.empty(len(pts))
    for i, p in enumerate(pts):
        seg = np.linspace(0.0, 1.0, 17)[:, None]
        chord = (1 - seg) * o[None, :] + seg * p[None, :]
        if domain.contains_many(chord).all():
            upper[i] = kob_arclength_params(domain, chord)[-1]
        else:
            upper[i] = math.inf
    upper = np.maximum(upper, lower)
    return lower, upper


def _shell_sup_fn(domain: Domain, seed: int = 0):
    """Callable M(delta) upper estimate: closed form or cached interpolation."""
    closed = exact_shell_sup(domain, 0.1)
    if closed is not None:
        return lambda r: exact_shell_sup(domain, float(r))
    grid = np.geomspace(1e-8, 0.5 * domain.enclosing_radius, 16)
    vals = np.array([estimate_M(domain, float(r), n_boundary=16,
                                seed=seed).upper for r in grid])
    vals = np.maximum.accumulate(vals)

    def fn(r):
        return float(np.interp(math.log(max(r, grid[0])),
                               np.log(grid), vals))
    return fn


@dataclass
class VisibilityTrial:
    index: int
    endpoints: tuple
    certificate: Optional[object]
    min_distance_lower: float
    min_distance_upper: float
    closest_point: Optional[np.ndarray]
    max_delta: float
    speed_bound_ok: bool
    skipped: bool = False
    reason: str = ""
    path: Optional[SampledPath] = None  # retained for trace export

    def to_json(self):
        return {"index": self.index,
                "certificate": (None if self.certificate is None
                                else self.certificate.to_json()),
                "min_distance_lower": self.min_distance_lower,
                "min_distance_upper": self.min_distance_upper,
                "max_delta": self.max_delta,
                "speed_bound_ok": self.speed_bound_ok,
                "skipped": self.skipped, "reason": self.reason}


@dataclass
class VisibilityReport:
    trials: list
    running_sup: list
    stabilized: bool
    verdict: str
    lam: float
    kappa_declared: Optional[float]

    @property
    def final_sup(self) -> float:
        return self.running_sup[-1] if self.running_sup else math.nan

    def to_json(self):
        return {"verdict": self.verdict, "stabilized": self.stabilized,
                "lambda": self.lam, "kappa_declared": self.kappa_declared,
                "running_sup": list(self.running_sup),
                "trials": [t.to_json() for t in self.trials]}


def _stabilized(values: Sequence[float], window_frac: float = 0.25,
                rel_tol: float = 0.01, floor: float = 1e-6) -> bool:
    """True when the last quarter of the running sup moves by < 1 percent.

    The floor keeps pure float noise around an exactly-zero statistic from
    reading as growth.
    """
    v = [x for x in values if math.isfinite(x)]
    if len(v) < 4:
        return False
    k = max(1, int(len(v) * window_frac))
    head = v[-k - 1] if len(v) > k else v[0]
    return abs(v[-1] - head) <= rel_tol * max(abs(v[-1]), floor)


def visibility_experiment(domain: Domain, seq_xi: ApproachSequence,
                          seq_eta: ApproachSequence, o, lam: float = 1.0,
                          kappa: Optional[float] = None,
                          config: Optional[PathConfig] = None,
                          speed_tol: float = 0.05,
                          threads: int = 1) -> VisibilityReport:
    """Drive almost-geodesics between paired approach points and record how
    close each one comes to the base point o.

    Each trial builds a solver path, reparametrizes it to unit speed,
    certifies it at the given lambda, and records the closest certified
    approach to o, the deepest boundary penetration, and the pointwise
    Euclidean-speed/shell-bound check.  The verdict is "visible" when the
    running supremum of closest approaches stabilizes over the last
    quarter of the trials.  Trials are independent; with threads > 1 they
    run concurrently and are merged by trial index.
    """
    base = domain.require_interior(o)
    cfg = config or PathConfig(resolution=128)
    m_fn = _shell_sup_fn(domain)
    n = min(len(seq_xi), len(seq_eta))

    def one(i: int) -> VisibilityTrial:
        x = seq_xi.points[i]
        y = seq_eta.points[i]
        try:
            path = minimize_path(domain, x, y, cfg)
            path = unit_speed_reparametrize(domain, path,
                                            n_samples=cfg.resolution)
        except (PathSearchError, GeometryError) as exc:
            return VisibilityTrial(i, (x, y), None, math.nan, math.nan,
                                   None, math.nan, False, True, str(exc))
        cert = certify(domain, path, lambda_target=lam)
        lo, up = _distance_to_base_many(domain, base, path.points)
        j = int(np.argmin(up))
        deltas = _delta_lower_many(domain, path.points)
        # pointwise speed-vs-shell bound along segments
        seg = np.linalg.norm(np.diff(path.points, axis=0), axis=1)
        dt = np.diff(path.params)
        mids = 0.5 * (path.points[:-1] + path.points[1:])
        mid_delta = _delta_lower_many(domain, mids)
        bound = np.array([lam * m_fn(d) for d in mid_delta])
        speed_ok = bool(np.all(seg / dt <= bound * (1 + speed_tol) + 1e-12))
        return VisibilityTrial(i, (x, y), cert, float(lo[j]), float(up[j]),
                               path.points[j], float(np.max(deltas)),
                               speed_ok, path=path)

    if threads > 1 and n > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            trials = list(ex.map(one, range(n)))
    else:
        trials = [one(i) for i in range(n)]

    running = []
    sup = -math.inf
    for t in trials:
        if not t.skipped:
            sup = max(sup, t.min_distance_upper)
        running.append(sup if math.isfinite(sup) else math.nan)
    stab = _stabilized(running)
    verdict = "visible" if stab else "not visible"
    return VisibilityReport(trials, running, stab, verdict, lam, kappa)


# ---------------------------------------------------------------------------
# Gromov products


def gromov_product(domain: Domain, x, y, o) -> MetricEstimate:
    """Interval for (x|y)_o = (K(x,o) + K(o,y) - K(x,y)) / 2."""
    dxo = km.distance(domain, x, o, path_witness=False)
    doy = km.distance(domain, o, y, path_witness=False)
    dxy = km.distance(domain, x, y, path_witness=False)
    lower = 0.5 * (dxo.lower + doy.lower - dxy.upper)
    upper = 0.5 * (dxo.upper + doy.upper - dxy.lower)
    if dxo.is_exact and doy.is_exact and dxy.is_exact:
        return MetricEstimate(max(lower, 0.0), max(upper, 0.0),
                              "exact-formula", "exact-formula")
    return MetricEstimate(max(lower, 0.0), max(upper, lower, 0.0),
                          "interval-arithmetic", "interval-arithmetic")


@dataclass
class GromovReport:
    table: np.ndarray        # upper bounds of (x_n | y_m)_o
    table_lower: np.ndarray
    running_max: list
    stabilized: bool
    verdict: str

    def to_json(self):
        return {"verdict": self.verdict, "stabilized": self.stabilized,
                "running_max": list(self.running_max),
                "max_upper": float(np.max(self.table))}


def gromov_boundedness_experiment(domain: Domain, seq_xi: ApproachSequence,
                                  seq_eta: ApproachSequence, o
                                  ) -> GromovReport:
    """Tabulate Gromov products over the approach grid and test whether the
    running maximum stabilizes."""
    base = domain.require_interior(o)
    n = len(seq_xi)
    m = len(seq_eta)
    upper = np.zeros((n, m))
    lower = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            est = gromov_product(domain, seq_xi.points[i], seq_eta.points[j],
                                 base)
            upper[i, j] = est.upper
            lower[i, j] = est.lower
    running = []
    cur = -math.inf
    for k in range(max(n, m)):
        block = upper[: min(k + 1, n), : min(k + 1, m)]
        cur = max(cur, float(np.max(block)))
        running.append(cur)
    stab = _stabilized(running)
    verdict = "bounded" if stab else "unbounded"
    return GromovReport(upper, lower, running, stab, verdict)
