"""Boundary-growth diagnostics.

M(r) denotes the shell degeneracy function: the supremum of 1/k(x; v) over
unit vectors v and points x whose boundary distance is at most r.  The two
conditions tested here are

  1. the integral of M(r)/r over (0, eps] is finite, and
  2. the distance from a base point grows at most like C + alpha log(1/delta).

Both are probed at desk scale: condition 1 by shell estimation plus a
fitted tail extrapolation, condition 2 by a least-squares fit whose
intercept is then inflated into a sound upper envelope of the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .domains import (
    ConeReport,
    Domain,
    GeometryError,
    real_unit_directions,
    ray_exit_many,
)
from . import metric as km


# ---------------------------------------------------------------------------
# Shell estimation


def _shell_points(domain: Domain, r: float, n_boundary: int, seed: int):
    """Near-boundary sample points with delta <= r, concentrated at the
    shell, together with the (approximate outward) ray directions."""
    w = domain.witness
    dirs = real_unit_directions(n_boundary, domain.dim, seed=seed)
    exits = ray_exit_many(domain, w, dirs)
    pts, outs = [], []
    for target in (r, 0.5 * r):
        depth = exits - target
        ok = depth > 1e-12
        pts.append(w[None, :] + depth[ok, None] * dirs[ok])
        outs.append(dirs[ok])
    pts = np.concatenate(pts, axis=0)
    outs = np.concatenate(outs, axis=0)
    inside = domain.contains_many(pts)
    return pts[inside], outs[inside]


def _direction_candidates(domain: Domain, x: np.ndarray, normal: np.ndarray,
                          n_random: int, rng) -> np.ndarray:
    """Unit direction set: coordinate axes, complex-tangential frame, random."""
    d = domain.dim
    dirs = [np.eye(d, dtype=complex)[k] for k in range(d)]
    nn = np.linalg.norm(normal)
    if nn > 0 and d > 1:
        u = normal / nn
        basis = [u]
        for k in range(d):
            e = np.eye(d, dtype=complex)[k]
            for b in basis:
                e = e - np.vdot(b, e) * b
            ne = np.linalg.norm(e)
            if ne > 1e-12:
                basis.append(e / ne)
        dirs.extend(basis[1:])
    if n_random > 0:
        raw = rng.standard_normal((n_random, 2 * d))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        dirs.extend(list(raw[:, :d] + 1j * raw[:, d:]))
    return np.array(dirs)


@dataclass
class ShellEstimate:
    r: float
    lower: float   # from metric upper bounds at the sampled maximizer
    upper: float   # from metric lower bounds: sound per-sample over-estimate
    n_samples: int

    def to_json(self):
        return {"r": self.r, "lower": self.lower, "upper": self.upper,
                "n_samples": self.n_samples}


def estimate_M(domain: Domain, r: float, n_boundary: int = 48,
               n_random_dirs: int = 4, seed: int = 0) -> ShellEstimate:
    """Two-sided estimate of the shell degeneracy M(r).

    The upper estimate takes 1/lower-metric-bound (a per-sample
    over-estimate of 1/k); the lower estimate takes 1/upper-metric-bound
    at the sampled maximizer, which genuinely lower-bounds the supremum.
    """
    if not (0 < r < domain.enclosing_radius):
        raise GeometryError("shell radius must lie in (0, enclosing radius)")
    pts, outward = _shell_points(domain, r, n_boundary, seed)
    if len(pts) == 0:
        raise GeometryError(f"no interior shell points found at r={r}")
    rng = np.random.default_rng((seed, 1))
    all_pts, all_vecs = [], []
    for x, out in zip(pts, outward):
        # the casting ray approximates the boundary normal; it only seeds
        # the tangential frame so a crude proxy is fine
        dirs = _direction_candidates(domain, x, out, n_random_dirs, rng)
        all_pts.append(np.repeat(x[None, :], len(dirs), axis=0))
        all_vecs.append(dirs)
    P = np.concatenate(all_pts, axis=0)
    V = np.concatenate(all_vecs, axis=0)
    lower_k, upper_k = km.metric_bounds_many(domain, P, V)
    m_upper = float(np.max(1.0 / lower_k))
    m_lower = float(np.max(1.0 / upper_k))
    return ShellEstimate(r, m_lower, m_upper, len(P))


def shell_table(domain: Domain, r_grid: Sequence[float], n_boundary: int = 48,
                n_random_dirs: int = 4, seed: int = 0) -> list:
    return [estimate_M(domain, float(r), n_boundary, n_random_dirs, seed)
            for r in sorted(r_grid)]


# ---------------------------------------------------------------------------
# Condition 1: convergence of the shell integral


@dataclass
class TailFit:
    family: str          # "power" or "log"
    amplitude: float
    exponent: float      # power: M ~ a r^s; log: M ~ a (log 1/r)^e
    sse: float
    verdict: str         # converges | diverges | inconclusive
    tail_integral: float


@dataclass
class Condition1Result:
    verdict: str
    integral: float           # grid quadrature + converging tail, if any
    grid_integral: float
    tail: Optional[TailFit]
    alternative: Optional[TailFit]
    r_min: float
    r_max: float

    def to_json(self):
        def tf(t):
            return None if t is None else {
                "family": t.family, "amplitude": t.amplitude,
                "exponent": t.exponent, "sse": t.sse, "verdict": t.verdict,
                "tail_integral": t.tail_integral}
        return {"verdict": self.verdict, "integral": self.integral,
                "grid_integral": self.grid_integral, "tail": tf(self.tail),
                "alternative": tf(self.alternative),
                "r_min": self.r_min, "r_max": self.r_max}


def _fit_power(r, m):
    mask = m > 0
    x = np.log(r[mask])
    y = np.log(m[mask])
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return math.exp(coef[0]), coef[1], float(np.sum(resid ** 2))


def _fit_log(r, m):
    mask = (m > 0) & (r < 1.0)
    u = np.log(np.log(1.0 / r[mask]))
    y = np.log(m[mask])
    A = np.vstack([np.ones_like(u), u]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return math.exp(coef[0]), coef[1], float(np.sum(resid ** 2))


def _tail_verdicts(r_min, a_pow, s_pow, sse_pow, a_log, e_log, sse_log,
                   margin):
    # power family: integral of a r^(s-1) near 0 converges iff s > 0
    if s_pow >= margin:
        v_pow = "converges"
        t_pow = a_pow * r_min ** s_pow / s_pow
    elif s_pow <= -margin:
        v_pow, t_pow = "diverges", math.inf
    else:
        v_pow, t_pow = "inconclusive", math.nan
    power = TailFit("power", a_pow, s_pow, sse_pow, v_pow, t_pow)
    # log family: with u = log 1/r the tail is the integral of a u^e,
    # converging iff e < -1
    u_min = math.log(1.0 / r_min)
    if e_log <= -1.0 - margin:
        v_log = "converges"
        t_log = a_log * u_min ** (e_log + 1.0) / (-e_log - 1.0)
    elif e_log >= -1.0 + margin:
        v_log, t_log = "diverges", math.inf
    else:
        v_log, t_log = "inconclusive", math.nan
    log = TailFit("log", a_log, e_log, sse_log, v_log, t_log)
    return power, log


def condition1_test(domain: Optional[Domain] = None,
                    r_grid: Optional[Sequence[float]] = None,
                    shell_values: Optional[Sequence[float]] = None,
                    n_boundary: int = 48, seed: int = 0,
                    tail_points: int = 8, margin: float = 0.05
                    ) -> Condition1Result:
    """Convergence test for the shell integral of M(r)/r.

    Composite trapezoid quadrature on the (geometric) grid plus a fitted
    tail below the smallest grid point.  Two tail families are fit (power
    a r^s and logarithmic a (log 1/r)^e); the better AIC-style score
    selects the primary model.  The verdict is the primary model's when
    decisive; a decisive contradiction between the two models yields
    "inconclusive".
    """
    if r_grid is None:
        r_grid = np.geomspace(1e-4, 0.25, 20)
    r = np.asarray(sorted(r_grid), dtype=float)
    if shell_values is not None:
        m = np.asarray(shell_values, dtype=float)
        if len(m) != len(r):
            raise ValueError("shell_values must match r_grid")
    else:
        if domain is None:
            raise ValueError("need a domain or explicit shell_values")
        m = np.array([estimate_M(domain, float(rr), n_boundary,
                                 seed=seed).upper for rr in r])

    f = m / r
    grid_integral = float(np.trapezoid(f, r))

    k = min(max(tail_points, 4), len(r))
    a_pow, s_pow, sse_pow = _fit_power(r[:k], m[:k])
    a_log, e_log, sse_log = _fit_log(r[:k], m[:k])
    power, logfit = _tail_verdicts(r[0], a_pow, s_pow, sse_pow,
                                   a_log, e_log, sse_log, margin)
    primary, other = ((power, logfit) if sse_pow <= sse_log
                      else (logfit, power))

    if primary.verdict != "inconclusive":
        verdict = primary.verdict
        if (other.verdict != "inconclusive"
                and other.verdict != primary.verdict):
            verdict = "inconclusive"
    elif other.verdict != "inconclusive":
        verdict = other.verdict
    else:
        verdict = "inconclusive"

    total = grid_integral
    if verdict == "converges":
        chosen = primary if primary.verdict == "converges" else other
        if math.isfinite(chosen.tail_integral):
            total += chosen.tail_integral
    return Condition1Result(verdict, total, grid_integral, primary, other,
                            float(r[0]), float(r[-1]))


# ---------------------------------------------------------------------------
# Condition 2: logarithmic distance growth


@dataclass
class Condition2Fit:
    base_point: np.ndarray
    C: float
    alpha: float
    max_positive_residual: float
    samples: list            # (delta, distance_upper) pairs

    def to_json(self):
        return {"C": self.C, "alpha": self.alpha,
                "max_positive_residual": self.max_positive_residual,
                "n_samples": len(self.samples)}


def approach_samples(domain: Domain, deltas: Sequence[float],
                     n_directions: int = 8, seed: int = 0,
                     base: Optional[np.ndarray] = None) -> list:
    """Interior points marching toward the boundary along fixed rays."""
    w = domain.witness if base is None else np.asarray(base, dtype=complex)
    dirs = real_unit_directions(n_directions, domain.dim, seed=seed)
    exits = ray_exit_many(domain, w, dirs)
    out = []
    for u, t_exit in zip(dirs, exits):
        for dl in deltas:
            if t_exit - dl > 1e-12:
                x = w + (t_exit - dl) * u
                if domain.contains(x):
                    out.append(x)
    return out


def condition2_fit(domain: Domain, x0, samples,
                   distance_upper=None) -> Condition2Fit:
    """Fit distance-from-base against log(1/delta) and inflate the intercept.

    The slope alpha comes from least squares on the distance upper bounds;
    the intercept is then raised so that the line upper-bounds every
    sample, making the reported pair (C, alpha) a sound envelope with zero
    positive residuals by construction.
    """
    base = domain.require_interior(x0)
    pts = [domain.require_interior(p) for p in samples]
    if len(pts) < 3:
        raise GeometryError("need at least 3 approach samples")
    deltas = np.array([domain.boundary_distance(p) for p in pts])
    if deltas.max() / deltas.min() < 10.0:
        raise GeometryError("degenerate sample spread: need deltas spanning "
                            "at least one decade")
    if distance_upper is None:
        ys = np.array([km.distance(domain, base, p).upper for p in pts])
    else:
        ys = np.asarray(distance_upper, dtype=float)
    u = np.log(1.0 / deltas)
    A = np.vstack([np.ones_like(u), u]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    alpha = float(coef[1])
    if alpha <= 0:
        alpha = 1e-12
    C = float(np.max(ys - alpha * u))
    resid = ys - (C + alpha * u)
    return Condition2Fit(base, C, alpha, float(resid.max()),
                         list(zip(deltas.tolist(), ys.tolist())))


# ---------------------------------------------------------------------------
# Envelope threshold


@dataclass
class PsiThresholdResult:
    s: float
    exponent: float          # exponent of u in the substituted integrand
    verdict: str

    def to_json(self):
        return {"s": self.s, "exponent": self.exponent, "verdict": self.verdict}


def psi_threshold_test(s: float) -> PsiThresholdResult:
    """Classify the integral of t^(-1) (log 1/t)^(-1/s) near 0.

    Substituting u = log(1/t) turns the integrand into u^(-1/s) du on
    [u0, infinity), which converges exactly when 1/s > 1; the boundary
    exponent -1 (s = 1) gives the divergent integral of du/u.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    exponent = -1.0 / s
    verdict = "converges" if exponent < -1.0 else "diverges"
    return PsiThresholdResult(float(s), exponent, verdict)


# ---------------------------------------------------------------------------
# Guaranteed pair from a verified cone


@dataclass
class ConeLogBound:
    C: float
    alpha: float             # guaranteed slope (half the wedge exponent)
    wedge_exponent: float
    wedge_scale: float
    core_delta: float

    def to_json(self):
        return {"C": self.C, "alpha": self.alpha,
                "wedge_exponent": self.wedge_exponent,
                "wedge_scale": self.wedge_scale,
                "core_delta": self.core_delta}


def _wedge_map_contained(alpha: float, scale: float, theta: float,
                         reach: float, n_check: int = 2048) -> bool:
    """Check scale*(1+zeta)^(1/alpha) maps the unit disk into the sector of
    half-angle theta/2 clipped at radius reach (sampled on the boundary
    circle, where the extremes occur)."""
    phis = np.linspace(0.0, 2.0 * np.pi, n_check, endpoint=False)
    zeta = (1.0 - 1e-9) * np.exp(1j * phis)
    w = scale * (1.0 + zeta) ** (1.0 / alpha)
    ok_angle = np.abs(np.angle(w)) < theta / 2.0
    ok_radius = np.abs(w) < reach
    return bool(np.all(ok_angle & ok_radius))


def cone_log_bound(domain: Domain, cone_report: ConeReport, x0,
                   n_core: int = 64, seed: int = 0) -> ConeLogBound:
    """Guaranteed (C, alpha) pair for the log-growth bound from a cone.

    A wedge map zeta -> R (1+zeta)^(1/a) is fitted inside the verified
    cone's planar section by a numeric containment search over the
    exponent a >= pi/theta and the scale R; the guaranteed slope is a/2
    and C combines the sampled distance bound over a compact core with
    the wedge geometry via C = C1 + (1/2) log(2 R^a).
    """
    verified = [s.cone for s in cone_report.samples if s.verified]
    if not verified:
        raise GeometryError("cone report contains no verified cones")
    theta = min(c.aperture for c in verified)
    reach = min(c.reach for c in verified)

    base = math.pi / theta
    found = None
    for factor in (1.02, 1.05, 1.1, 1.2, 1.35, 1.5, 2.0, 3.0):
        a = base * factor
        for shrink in (0.98, 0.9, 0.75, 0.5):
            R = shrink * reach * 2.0 ** (-1.0 / a)
            if _wedge_map_contained(a, R, theta, reach):
                found = (a, R)
                break
        if found:
            break
    if found is None:
        raise GeometryError("wedge containment search failed")
    a, R = found

    x0 = domain.require_interior(x0)
    core_delta = 0.5 * R * math.sin(theta / 2.0)
    rng = np.random.default_rng(seed)
    dirs = real_unit_directions(n_core, domain.dim, seed=seed)
    exits = ray_exit_many(domain, domain.witness, dirs)
    core_pts = [domain.witness]
    for u, t_exit in zip(dirs, exits):
        for frac in rng.uniform(0.0, 1.0, 3):
            x = domain.witness + frac * t_exit * u
            if domain.contains(x) and domain.boundary_distance(x) >= core_delta:
                core_pts.append(x)
    c1 = max(km.distance(domain, x0, p, path_witness=False).upper
             for p in core_pts)
    C = c1 + 0.5 * math.log(2.0 * R ** a)
    return ConeLogBound(float(C), a / 2.0, a, R, core_delta)


# ---------------------------------------------------------------------------
# m-convexity gap


def complex_line_gap(domain: Domain, x, v, n_phases: int = 64) -> float:
    """Distance from x to the boundary within the complex line x + C v."""
    pt = domain.require_interior(x)
    vv = np.asarray(v, dtype=complex)
    vv = vv / np.linalg.norm(vv)
    phases = np.exp(2j * np.pi * np.arange(n_phases) / n_phases)
    dirs = phases[:, None] * vv[None, :]
    exits = ray_exit_many(domain, pt, dirs)
    return float(np.min(exits))


# ---------------------------------------------------------------------------
# Report


@dataclass
class GoldilocksReport:
    domain_kind: str
    shell: list
    condition1: Condition1Result
    condition2: Condition2Fit
    cone: Optional[ConeReport]
    psi_thresholds: list = field(default_factory=list)

    def to_json(self):
        return {
            "domain_kind": self.domain_kind,
            "shell_table": [s.to_json() for s in self.shell],
            "condition1": self.condition1.to_json(),
            "condition2": self.condition2.to_json(),
            "cone": None if self.cone is None else self.cone.to_json(),
            "psi_thresholds": [p.to_json() for p in self.psi_thresholds],
        }

    def write_shell_csv(self, fh):
        fh.write("r,m_lower,m_upper\n")
        for s in self.shell:
            fh.write(",".join(format(v, ".17g")
                              for v in (s.r, s.lower, s.upper)) + "\n")
