"""Length-near-minimal paths, unit-speed reparametrization, and
(lambda, kappa)-almost-geodesic certification.

A sampled path is a polyline of interior points with strictly increasing
parameter values.  The solver performs discrete curve shortening: each
interior node is moved, within a small candidate stencil, to reduce the
Kobayashi upper-bound length of its two adjacent segments, coarse
resolutions first, with midpoint insertion between levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domains import (
    ConvexSupport,
    Domain,
    Egg,
    GeometryError,
    Intersection,
    Polydisk,
    PsiSupported,
    UnitBall,
    UnitDisk,
)
from . import metric as km


class PathSearchError(GeometryError):
    """No interior path was found at the maximum resolution."""


class ConstraintViolation(GeometryError):
    """Declared quasi-geodesic constants fail on the supplied samples."""


@dataclass
class SampledPath:
    """Polyline curve: parameter values and matching interior points."""

    params: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.points = np.atleast_2d(np.asarray(self.points, dtype=complex))
        if self.params.ndim != 1 or len(self.params) != len(self.points):
            raise GeometryError("params and points must have matching length")
        if len(self.params) > 1 and not np.all(np.diff(self.params) > 0):
            raise GeometryError("params must be strictly increasing")

    @property
    def resolution(self) -> int:
        return len(self.params) - 1

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subpath(self, i: int, j: int) -> "SampledPath":
        return SampledPath(self.params[i:j + 1], self.points[i:j + 1])

    def to_json(self) -> dict:
        return {"params": self.params.tolist(),
                "points": [[ [z.real, z.imag] for z in row]
                           for row in self.points]}

    def write_csv(self, fh) -> None:
        cols = ["t"]
        for k in range(self.dim):
            cols += [f"re_z{k + 1}", f"im_z{k + 1}"]
        fh.write(",".join(cols) + "\n")
        for t, row in zip(self.params, self.points):
            vals = [t]
            for z in row:
                vals += [z.real, z.imag]
            fh.write(",".join(format(v, ".17g") for v in vals) + "\n")


@dataclass
class AlmostGeodesicCertificate:
    """Measured constants for which a path satisfies the almost-geodesic
    comparison on its samples."""

    lam: float
    kappa: float
    speed_max: float
    speed_ok: bool
    worst_pair: dict
    n_samples: int

    def to_json(self) -> dict:
        return {"lambda": self.lam, "kappa": self.kappa,
                "speed_max": self.speed_max, "speed_ok": self.speed_ok,
                "worst_pair": self.worst_pair, "n_samples": self.n_samples}


@dataclass
class PathConfig:
    resolution: int = 128          # target segment count
    coarse: int = 8                # starting segment count
    stall_tol: float = 1e-7       # relative improvement threshold per window
    stall_sweeps: int = 10         # sweeps in the stall window
    max_sweeps_per_level: int = 400
    max_nodes: int = 4096
    restarts: int = 1
    seed: int = 0
    length_subdivision: int = 8    # per-segment quadrature for arc length


# ---------------------------------------------------------------------------
# Fast interior lower bounds on the boundary distance (for the solver loop)


def _delta_lower_many(domain: Domain, pts: np.ndarray) -> np.ndarray:
    """Vectorized lower bound for delta; exact where cheaply possible."""
    if isinstance(domain, UnitDisk):
        return 1.0 - np.abs(pts[:, 0])
    if isinstance(domain, UnitBall):
        return 1.0 - np.linalg.norm(pts, axis=1)
    if isinstance(domain, Polydisk):
        return np.min(domain.radii[None, :] - np.abs(pts), axis=1)
    if isinstance(domain, Egg):
        gauge = domain._gauge_many(pts)
        lip = 2.0 * float(np.sum(domain.exponents))
        return (1.0 - gauge) / lip
    if isinstance(domain, PsiSupported):
        t = np.abs(pts[:, 0])
        im2 = pts[:, 1].imag
        dpsi = domain.psi(domain.rho) / domain.rho ** (domain.s + 1) * domain.s
        lip = math.sqrt(1.0 + dpsi ** 2)
        ball_gap = domain.rho - np.linalg.norm(pts - domain.center[None, :],
                                               axis=1)
        graph_gap = (im2 - domain.psi(t)) / lip
        return np.minimum(ball_gap, graph_gap)
    if isinstance(domain, ConvexSupport):
        if domain._ball is not None:
            c, r = domain._ball
            return r - np.linalg.norm(pts - c[None, :], axis=1)
        if domain._halfspaces is not None:
            return np.min(domain._gaps_many(pts), axis=1)
        return np.array([domain.boundary_distance(p) if domain.contains(p)
                         else -1.0 for p in pts])
    if isinstance(domain, Intersection):
        a, b = domain.components
        return np.minimum(_delta_lower_many(a, pts), _delta_lower_many(b, pts))
    return np.array([domain.boundary_distance(p) if domain.contains(p)
                     else -1.0 for p in pts])


def _fast_upper_metric(domain: Domain, mids: np.ndarray,
                       segs: np.ndarray) -> np.ndarray:
    """Cheap upper bound for k(mid; seg); +inf where midpoints leave the domain."""
    exact = km._exact_metric_many(domain, mids, segs)
    if exact is not None:
        return exact
    deltas = _delta_lower_many(domain, mids)
    out = np.full(len(mids), np.inf)
    ok = deltas > 0
    out[ok] = np.linalg.norm(segs[ok], axis=1) / deltas[ok]
    return out


def _fast_segment_lengths(domain: Domain, pts: np.ndarray,
                          sub: int = 2) -> np.ndarray:
    n_seg = len(pts) - 1
    fr = (np.arange(sub) + 0.5) / sub
    segs = pts[1:] - pts[:-1]
    mids = pts[:-1, None, :] + fr[None, :, None] * segs[:, None, :]
    sub_segs = np.repeat(segs[:, None, :] / sub, sub, axis=1)
    vals = _fast_upper_metric(domain, mids.reshape(-1, pts.shape[1]),
                              sub_segs.reshape(-1, pts.shape[1]))
    return vals.reshape(n_seg, sub).sum(axis=1)


def _objective(domain: Domain, pts: np.ndarray) -> float:
    return float(np.sum(_fast_segment_lengths(domain, pts)))


def _segment_lengths(domain: Domain, points: np.ndarray, sub: int,
                     side: str = "upper") -> np.ndarray:
    n_seg = len(points) - 1
    fr = (np.arange(sub) + 0.5) / sub
    segs = points[1:] - points[:-1]
    sub_mids = points[:-1, None, :] + fr[None, :, None] * segs[:, None, :]
    sub_segs = np.repeat(segs[:, None, :] / sub, sub, axis=1)
    lower, upper = km.metric_bounds_many(
        domain, sub_mids.reshape(-1, points.shape[1]),
        sub_segs.reshape(-1, points.shape[1]))
    vals = lower if side == "lower" else upper
    return vals.reshape(n_seg, sub).sum(axis=1)


def kob_arclength_params(domain: Domain, points: np.ndarray,
                         sub: int = 4, tol: float = 1e-9,
                         max_sub: Optional[int] = None) -> np.ndarray:
    """Cumulative upper-bound Kobayashi length along the polyline.

    Per-segment midpoint quadrature, with the panel count doubled until the
    total stabilizes, so the parameters are accurate arc lengths rather
    than one-panel estimates.  For kinds whose metric needs a bisection per
    evaluation the panel count is capped much lower; the result is still a
    certified upper bound, just a looser one.
    """
    points = np.atleast_2d(points)
    n_seg = len(points) - 1
    if n_seg <= 0:
        return np.zeros(1)
    if max_sub is None:
        max_sub = 64 if km.is_exact_kind(domain) else 8
    if not km.is_exact_kind(domain):
        sub = max_sub  # single pass: each metric query is itself a bisection
    seg_len = _segment_lengths(domain, points, sub)
    while sub < max_sub:
        sub *= 2
        nxt = _segment_lengths(domain, points, sub)
        done = abs(float(np.sum(nxt) - np.sum(seg_len))) < tol * max(
            1.0, float(np.sum(nxt)))
        seg_len = nxt
        if done:
            break
    return np.concatenate([[0.0], np.cumsum(seg_len)])


# ---------------------------------------------------------------------------
# Curve shortening


def _two_segment_cost(domain, prev, cand, nxt):
    """Two-panel midpoint cost of the two segments adjacent to cand."""
    total = np.zeros(len(cand))
    for a, b in ((prev, cand), (cand, nxt)):
        seg = b - a
        for f in (0.25, 0.75):
            total += _fast_upper_metric(domain, a + f * seg, 0.5 * seg)
    return total


def _sweep(domain: Domain, pts: np.ndarray, h: float) -> float:
    """One red-black node-relaxation sweep; returns the acceptance fraction.

    Each movable node is relaxed along the coordinate directions and the
    chord-straightening direction with a parabolic line search on the cost
    of its two adjacent segments; a move is kept only when it stays
    interior and strictly reduces the cost.
    """
    n_acc, n_tot = 0, 0
    d = pts.shape[1]
    for color in (1, 0):
        idx = np.arange(1, len(pts) - 1)
        idx = idx[idx % 2 == color]
        if len(idx) == 0:
            continue
        prev = pts[idx - 1]
        nxt = pts[idx + 1]
        cur = pts[idx].copy()
        base = _two_segment_cost(domain, prev, cur, nxt)
        dirs = []
        for k in range(d):
            e = np.zeros(d, dtype=complex)
            e[k] = 1.0
            dirs.append(np.broadcast_to(e, cur.shape))
            dirs.append(np.broadcast_to(1j * e, cur.shape))
        pull = 0.5 * (prev + nxt) - cur
        npull = np.linalg.norm(pull, axis=1, keepdims=True)
        dirs.append(np.where(npull > 0, pull / np.where(npull > 0, npull, 1.0), 0))
        for dv in dirs:
            cm = _two_segment_cost(domain, prev, cur - h * dv, nxt)
            cp = _two_segment_cost(domain, prev, cur + h * dv, nxt)
            curv = cm - 2 * base + cp
            step = np.where(curv > 1e-300,
                            0.5 * h * (cm - cp) / np.where(curv > 1e-300, curv, 1.0),
                            np.where(cp < cm, h, -h))
            step = np.clip(step, -2 * h, 2 * h)
            pos = cur + step[:, None] * dv
            inside = domain.contains_many(pos)
            cost = _two_segment_cost(domain, prev, pos, nxt)
            acc = inside & (cost < base - 1e-15)
            cur[acc] = pos[acc]
            base[acc] = cost[acc]
            n_acc += int(acc.sum())
            n_tot += len(idx)
        pts[idx] = cur
    return n_acc / max(n_tot, 1)


def _redistribute(domain: Domain, pts: np.ndarray) -> np.ndarray:
    """Resample the polyline at uniform (fast) Kobayashi arc length.

    Curbs tangential node drift between levels; falls back to the input
    when resampled nodes would leave the domain.
    """
    seg_len = _fast_segment_lengths(domain, pts)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if not np.isfinite(total) or total <= 0:
        return pts
    targets = np.linspace(0.0, total, len(pts))
    seg = np.clip(np.searchsorted(cum, targets, side="left") - 1,
                  0, len(pts) - 2)
    ln = cum[seg + 1] - cum[seg]
    frac = np.where(ln > 0, (targets - cum[seg]) / np.where(ln > 0, ln, 1.0), 0.0)
    out = pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])
    out[0], out[-1] = pts[0], pts[-1]
    if not domain.contains_many(out).all():
        return pts
    return out


def _refine(pts: np.ndarray) -> np.ndarray:
    mids = 0.5 * (pts[:-1] + pts[1:])
    out = np.empty((2 * len(pts) - 1, pts.shape[1]), dtype=complex)
    out[0::2] = pts
    out[1::2] = mids
    return out


def _initial_polyline(domain: Domain, x, y, n_seg: int,
                      rng: Optional[np.random.Generator]) -> np.ndarray:
    fr = np.linspace(0.0, 1.0, n_seg + 1)[:, None]
    chord = (1 - fr) * x[None, :] + fr * y[None, :]
    if domain.contains_many(chord).all():
        pts = chord
    else:
        # detour through the interior witness
        w = domain.witness
        half = max(2, n_seg // 2)
        fr1 = np.linspace(0.0, 1.0, half + 1)[:, None]
        fr2 = np.linspace(0.0, 1.0, n_seg - half + 1)[1:, None]
        pts = np.concatenate([(1 - fr1) * x[None, :] + fr1 * w[None, :],
                              (1 - fr2) * w[None, :] + fr2 * y[None, :]])
        if not domain.contains_many(pts).all():
            raise PathSearchError(
                "no interior polyline between the endpoints (chord and "
                "witness detour both leave the domain)")
    pts = pts.copy()
    if rng is not None and len(pts) > 2:
        scale = 0.05 * float(np.linalg.norm(y - x)) / max(n_seg, 1)
        jitter = scale * (rng.standard_normal(pts[1:-1].shape)
                          + 1j * rng.standard_normal(pts[1:-1].shape))
        trial = pts[1:-1] + jitter
        ok = domain.contains_many(trial)
        pts[1:-1][ok] = trial[ok]
    return pts


def minimize_path(domain: Domain, x, y, config: Optional[PathConfig] = None
                  ) -> SampledPath:
    """Near length-minimizing interior polyline from x to y.

    Coarse-to-fine discrete curve shortening on the upper-bound length;
    deterministic for a fixed config seed.  The returned path is
    parametrized by its cumulative certified upper-bound arc length.
    """
    cfg = config or PathConfig()
    px = domain.require_interior(x)
    py = domain.require_interior(y)
    if np.array_equal(px, py):
        return SampledPath(np.zeros(1), px[None, :])

    best_pts, best_obj = None, np.inf
    for restart in range(max(1, cfg.restarts)):
        rng = (np.random.default_rng((cfg.seed, restart))
               if restart > 0 else None)
        n0 = min(cfg.coarse, cfg.resolution)
        pts = _initial_polyline(domain, px, py, n0, rng)
        while True:
            scale = float(np.mean(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
            h = 0.5 * max(scale, 1e-12)
            history = [_objective(domain, pts)]
            sweeps = 0
            while sweeps < cfg.max_sweeps_per_level:
                frac = _sweep(domain, pts, h)
                history.append(_objective(domain, pts))
                sweeps += 1
                if frac == 0.0:
                    h *= 0.5
                    if h < 1e-10 * max(scale, 1e-12):
                        break
                if len(history) > cfg.stall_sweeps:
                    drop = history[-cfg.stall_sweeps - 1] - history[-1]
                    if drop < cfg.stall_tol * (1.0 + history[-1]):
                        break
            # iterate: each pass re-measures, so strong metric variation
            # inside a single segment is resolved over a few rounds
            for _ in range(6):
                pts = _redistribute(domain, pts)
                seg = _fast_segment_lengths(domain, pts)
                if seg.max() <= 2.0 * max(seg.mean(), 1e-300):
                    break
            if len(pts) - 1 >= cfg.resolution or 2 * (len(pts) - 1) > cfg.max_nodes:
                break
            pts = _refine(pts)
        obj = _objective(domain, pts)
        if obj < best_obj:
            best_obj, best_pts = obj, pts

    params = kob_arclength_params(domain, best_pts, sub=cfg.length_subdivision)
    # collapse numerically coincident nodes so params stay strictly increasing
    keep = np.concatenate([[True], np.diff(params) > 1e-15])
    keep[-1] = True
    return SampledPath(params[keep], best_pts[keep])


# ---------------------------------------------------------------------------
# Unit-speed reparametrization


def unit_speed_reparametrize(domain: Domain, path: SampledPath,
                             n_samples: Optional[int] = None,
                             sub: int = 8) -> SampledPath:
    """Resample a path at equal steps of Kobayashi arc length.

    Discrete inverse-function construction: f = cumulative upper-bound
    length, g = its left-continuous inverse by monotone interpolation.
    Endpoints and total length are preserved.
    """
    pts = path.points
    if len(pts) < 2:
        raise GeometryError("cannot reparametrize a zero-length path")
    m = n_samples or path.resolution
    # refine before resampling: the within-segment inversion is linear in
    # arc fraction, so sampling error scales with the metric variation
    # across one segment
    max_nodes = 4 * (m + 1) if km.is_exact_kind(domain) else 2 * (m + 1)
    while 2 * (len(pts) - 1) + 1 <= max_nodes:
        pts = _refine(pts)
    cum = kob_arclength_params(domain, pts, sub=sub)
    total = float(cum[-1])
    if total <= 0:
        raise GeometryError("cannot reparametrize a zero-length path")
    targets = np.linspace(0.0, total, m + 1)
    seg = np.clip(np.searchsorted(cum, targets, side="left") - 1, 0, len(pts) - 2)
    seg_len = cum[seg + 1] - cum[seg]
    frac = np.where(seg_len > 0, (targets - cum[seg]) / np.where(seg_len > 0, seg_len, 1.0), 0.0)
    out = pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])
    out[0] = pts[0]
    out[-1] = pts[-1]
    params, points = [0.0], [out[0]]
    for t, p in zip(targets[1:], out[1:]):
        if t - params[-1] > 1e-15:
            params.append(float(t))
            points.append(p)
    points = np.array(points)
    return SampledPath(np.array(params), points)


# ---------------------------------------------------------------------------
# Pairwise distance bounds along sampled curves


def _pairwise_exact(domain: Domain, pts: np.ndarray):
    if isinstance(domain, UnitDisk):
        z = pts[:, 0]
        num = np.abs(z[:, None] - z[None, :])
        den = np.abs(1.0 - np.conj(z[:, None]) * z[None, :])
        return np.arctanh(np.clip(num / den, 0.0, 1.0 - 1e-16))
    if isinstance(domain, UnitBall):
        gram = pts @ np.conj(pts).T
        n2 = np.real(np.diag(gram))
        num = np.abs(1.0 - gram)
        den = np.sqrt(np.outer(1.0 - n2, 1.0 - n2))
        return np.arccosh(np.maximum(num / den, 1.0))
    if isinstance(domain, Polydisk):
        z = pts / domain.radii[None, :]
        num = np.abs(z[:, None, :] - z[None, :, :])
        den = np.abs(1.0 - np.conj(z[:, None, :]) * z[None, :, :])
        return np.max(np.arctanh(np.clip(num / den, 0.0, 1.0 - 1e-16)), axis=2)
    return None


def pairwise_distance_bounds(domain: Domain, pts: np.ndarray,
                             cum_upper: Optional[np.ndarray] = None):
    """(lower, upper) matrices of certified Kobayashi distance bounds."""
    exact = _pairwise_exact(domain, pts)
    if exact is not None:
        return exact, exact.copy()
    diff = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    lower = domain.c1 * diff
    R = domain.enclosing_radius
    scaled = pts / R
    gram = scaled @ np.conj(scaled).T
    n2 = np.real(np.diag(gram))
    num = np.abs(1.0 - gram)
    den = np.sqrt(np.outer(1.0 - n2, 1.0 - n2))
    lower = np.maximum(lower, np.arccosh(np.maximum(num / den, 1.0)))
    if cum_upper is None:
        cum_upper = kob_arclength_params(domain, pts)
    upper = np.abs(cum_upper[:, None] - cum_upper[None, :])
    upper = np.maximum(upper, lower)
    return lower, upper


# ---------------------------------------------------------------------------
# Certification


def certify(domain: Domain, path: SampledPath, lambda_target: float = 1.0,
            speed_slack: float = 0.05) -> AlmostGeodesicCertificate:
    """Measure the smallest kappa making the path an almost-geodesic on its
    samples, at the given lambda.

    The left comparison uses certified distance lower bounds and the right
    comparison uses upper bounds, so the certificate is conservative.
    Large kappa is data, not an error.
    """
    lam = float(lambda_target)
    if lam < 1.0:
        raise ValueError("lambda must be >= 1")
    pts = path.points
    t = path.params
    if len(pts) < 2:
        return AlmostGeodesicCertificate(lam, 0.0, 0.0, True, {}, len(pts))
    cum = kob_arclength_params(domain, pts)
    k_lower, k_upper = pairwise_distance_bounds(domain, pts, cum)
    dt = np.abs(t[:, None] - t[None, :])
    iu = np.triu_indices(len(pts), k=1)
    right = k_upper[iu] - lam * dt[iu]
    left = dt[iu] / lam - k_lower[iu]
    kappa = max(0.0, float(right.max()), float(left.max()))
    worst_side = "right" if right.max() >= left.max() else "left"
    w = int(np.argmax(right)) if worst_side == "right" else int(np.argmax(left))
    worst = {"side": worst_side, "i": int(iu[0][w]), "j": int(iu[1][w]),
             "param_gap": float(dt[iu][w]),
             "distance_lower": float(k_lower[iu][w]),
             "distance_upper": float(k_upper[iu][w])}
    seg_len = np.diff(cum)
    seg_dt = np.diff(t)
    speeds = seg_len / seg_dt
    speed_max = float(speeds.max()) if len(speeds) else 0.0
    speed_ok = speed_max <= lam * (1.0 + speed_slack) + 1e-12
    return AlmostGeodesicCertificate(lam, kappa, speed_max, speed_ok, worst,
                                     len(pts))


# ---------------------------------------------------------------------------
# Quasi-geodesic smoothing


@dataclass
class SmoothedQuasiGeodesic:
    path: SampledPath
    lambda0: float
    kappa0: float
    closeness_bound: float
    measured_kappa: float
    measured_hausdorff: float


def _check_declared_constants(domain, qpath, lam, kappa, slack=1e-7):
    pts = qpath.points
    t = qpath.params
    try:
        cum = kob_arclength_params(domain, pts)
        k_lower, k_upper = pairwise_distance_bounds(domain, pts, cum)
    except GeometryError:
        # jump path whose chords leave the domain: no sound upper bound,
        # so only the lower-bound side of the comparison can be refuted
        exact = _pairwise_exact(domain, pts)
        if exact is not None:
            k_lower, k_upper = exact, exact.copy()
        else:
            diff = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
            k_lower = domain.c1 * diff
            k_upper = np.full_like(k_lower, np.inf)
    dt = np.abs(t[:, None] - t[None, :])
    hi_violation = k_lower - (lam * dt + kappa)
    lo_violation = (dt / lam - kappa) - k_upper
    worst = np.maximum(hi_violation, lo_violation)
    np.fill_diagonal(worst, -np.inf)
    i, j = np.unravel_index(np.argmax(worst), worst.shape)
    if worst[i, j] > slack:
        raise ConstraintViolation(
            f"declared ({lam}, {kappa}) quasi-geodesic constants fail at "
            f"sample pair ({i}, {j}): certified violation {worst[i, j]:.3g}")


def quasi_to_almost(domain: Domain, qpath: SampledPath, lam: float,
                    kappa: float, config: Optional[PathConfig] = None,
                    bridge_resolution: int = 32) -> SmoothedQuasiGeodesic:
    """Replace a quasi-geodesic by a nearby almost-geodesic.

    The parameter range is partitioned into cells of width in [1/2, 1]
    (a single cell when shorter than 1/2); consecutive anchor samples are
    joined by near-geodesic unit-speed bridges, and the concatenation is
    returned together with the guaranteed constants
    lambda0 = 2 lam + 2 kappa + 2 and kappa0 = 4 lam + 5 kappa + 4 and the
    closeness bound R = 2 lam + 2 kappa + 2, plus their measured values on
    the samples.
    """
    lam = float(lam)
    kappa = float(kappa)
    if lam < 1 or kappa < 0:
        raise ValueError("need lambda >= 1 and kappa >= 0")
    _check_declared_constants(domain, qpath, lam, kappa)

    t = qpath.params
    pts = qpath.points
    total = float(t[-1] - t[0])
    n_cells = max(1, int(math.ceil(total))) if total > 0 else 1
    edges = np.linspace(t[0], t[-1], n_cells + 1)
    anchor_idx = [int(np.argmin(np.abs(t - e))) for e in edges]
    anchor_idx[0], anchor_idx[-1] = 0, len(t) - 1

    cfg = config or PathConfig(resolution=bridge_resolution, coarse=4)
    out_params = [edges[0]]
    out_points = [pts[anchor_idx[0]]]
    for k in range(n_cells):
        a = pts[anchor_idx[k]]
        b = pts[anchor_idx[k + 1]]
        lo, hi = edges[k], edges[k + 1]
        if np.linalg.norm(b - a) == 0:
            continue
        bridge = minimize_path(domain, a, b, cfg)
        if bridge.resolution >= 1:
            bridge = unit_speed_reparametrize(domain, bridge,
                                              n_samples=bridge_resolution)
        T_k = bridge.params[-1]
        for s, p in zip(bridge.params[1:], bridge.points[1:]):
            new_t = lo + (s / T_k) * (hi - lo)
            if new_t - out_params[-1] > 1e-12:
                out_params.append(float(new_t))
                out_points.append(p)
    out_points[-1] = pts[-1]
    smoothed = SampledPath(np.array(out_params), np.array(out_points))

    lambda0 = 2 * lam + 2 * kappa + 2
    kappa0 = 4 * lam + 5 * kappa + 4
    closeness = 2 * lam + 2 * kappa + 2

    cert = certify(domain, smoothed, lambda_target=lambda0)
    _, cross_ab = _cross_distance_upper(domain, pts, smoothed.points)
    hausdorff = float(cross_ab)
    return SmoothedQuasiGeodesic(smoothed, lambda0, kappa0, closeness,
                                 cert.kappa, hausdorff)


def _cross_distance_upper(domain: Domain, a_pts: np.ndarray,
                          b_pts: np.ndarray):
    """Symmetric Hausdorff-style bound using distance upper bounds."""
    both = np.concatenate([a_pts, b_pts])
    exact = _pairwise_exact(domain, both)
    if exact is not None:
        cross = exact[: len(a_pts), len(a_pts):]
    else:
        # chord upper bounds; +inf when a chord leaves the domain
        cross = np.zeros((len(a_pts), len(b_pts)))
        for i, a in enumerate(a_pts):
            for j, b in enumerate(b_pts):
                seg = np.linspace(0, 1, 17)[:, None]
                chord = (1 - seg) * a[None, :] + seg * b[None, :]
                if domain.contains_many(chord).all():
                    cross[i, j] = km.path_length(domain, chord, "upper",
                                                 tol=1e-4, max_depth=6)
                else:
                    cross[i, j] = np.inf
    h_ab = float(np.max(np.min(cross, axis=1)))
    h_ba = float(np.max(np.min(cross, axis=0)))
    return (h_ab, max(h_ab, h_ba))
