"""Acceptance gate: every criterion at its stated tolerance and budget.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion.
"""

import math
import time

import numpy as np
import pytest

from kobakit import metric as km
from kobakit.domains import ConvexSupport, UnitBall, UnitDisk
from kobakit.geodesics import (
    PathConfig,
    SampledPath,
    certify,
    kob_arclength_params,
    minimize_path,
    quasi_to_almost,
    unit_speed_reparametrize,
)
from kobakit.goldilocks import (
    approach_samples,
    condition1_test,
    condition2_fit,
    estimate_M,
    psi_threshold_test,
)
from kobakit.visibility import (
    ApproachSequence,
    gromov_boundedness_experiment,
    gromov_product,
    visibility_experiment,
)
from kobakit.dynamics import (
    ball_boundary_contraction,
    disk_automorphism,
    multi_start_consistency,
    rotation_map,
    validate_map,
)

import invariant_suite


class _Budget:
    def __init__(self, criterion, seconds):
        self.criterion = criterion
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"ACCEPTANCE {self.criterion}: {status} "
              f"({elapsed:.2f}s < {self.seconds}s budget)")
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"criterion {self.criterion} exceeded its "
                f"{self.seconds}s budget: {elapsed:.2f}s")
        return False


def test_c01_disk_metric_exactness():
    disk = UnitDisk()
    rng = np.random.default_rng(100)
    with _Budget("1 disk exactness", 1.0):
        zs = rng.uniform(0, 0.999, 1000) * np.exp(
            2j * np.pi * rng.uniform(size=1000))
        vs = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
        for z, v in zip(zs, vs):
            est = km.infinitesimal_metric(disk, [z], [v])
            expect = abs(v) / (1.0 - abs(z) ** 2)
            assert abs(est.lower - expect) <= 1e-12 * max(1.0, expect)
            assert est.upper == est.lower
        for k in range(0, 1000, 2):
            a, b = zs[k], zs[k + 1]
            est = km.distance(disk, [a], [b])
            expect = math.atanh(abs((a - b) / (1 - np.conj(a) * b)))
            assert abs(est.lower - expect) <= 1e-9
            assert est.upper == est.lower


def test_c02_graham_sandwich_soundness():
    ball = UnitBall(2)
    cs = ConvexSupport(2, ball=(np.zeros(2), 1.0))
    rng = np.random.default_rng(101)
    with _Budget("2 sandwich soundness", 30.0):
        n = 1000
        raw = rng.standard_normal((n, 4))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        units = raw[:, :2] + 1j * raw[:, 2:]
        pts = units * (0.97 * rng.uniform(0, 1, n) ** 0.25)[:, None]
        raw2 = rng.standard_normal((n, 4))
        raw2 /= np.linalg.norm(raw2, axis=1, keepdims=True)
        dirs = raw2[:, :2] + 1j * raw2[:, 2:]
        lower, upper = km.metric_bounds_many(cs, pts, dirs)
        exact = np.array([km.ball_metric(z, v) for z, v in zip(pts, dirs)])
        assert np.all(lower <= exact + 1e-9)
        assert np.all(exact <= upper + 1e-9)
        assert np.all(upper / lower <= 2.0 + 1e-6)


def test_c03_shell_sup_closed_forms():
    disk = UnitDisk()
    ball = UnitBall(2)
    with _Budget("3 shell closed forms", 60.0):
        for r in (0.05, 0.1, 0.25):
            est = estimate_M(disk, r)
            assert abs(est.upper - (2 * r - r * r)) <= 1e-3
            est_b = estimate_M(ball, r)
            assert abs(est_b.upper - math.sqrt(2 * r - r * r)) <= 5e-3


def test_c04_condition1_quadrature_and_psi_threshold():
    disk = UnitDisk()
    with _Budget("4 shell integral + envelope threshold", 10.0):
        res = condition1_test(disk, np.geomspace(1e-3, 0.5, 24))
        assert res.verdict == "converges"
        assert abs(res.integral - 0.875) <= 2e-2
        for s in (0.25, 0.5, 0.75):
            assert psi_threshold_test(s).verdict == "converges"
        for s in (1.0, 1.5, 3.0):
            assert psi_threshold_test(s).verdict == "diverges"


def test_c05_condition2_fit():
    disk = UnitDisk()
    with _Budget("5 log-growth fit", 10.0):
        samples = approach_samples(disk, np.geomspace(1e-6, 1e-1, 12),
                                   n_directions=4)
        fit = condition2_fit(disk, [0], samples)
        assert 0.45 <= fit.alpha <= 0.55
        assert fit.C <= 0.4
        assert fit.max_positive_residual <= 0.0


def test_c06_geodesic_solver_accuracy():
    disk = UnitDisk()
    rng = np.random.default_rng(42)
    with _Budget("6 geodesic solver", 120.0):
        for _ in range(20):
            z = rng.uniform(0, 0.95) * np.exp(2j * np.pi * rng.uniform())
            w = rng.uniform(0, 0.95) * np.exp(2j * np.pi * rng.uniform())
            path = minimize_path(disk, [z], [w], PathConfig(resolution=128))
            exact = km.disk_distance(z, w)
            assert abs(path.params[-1] - exact) <= 0.01 * max(exact, 1e-9)
            unit = unit_speed_reparametrize(disk, path, n_samples=128)
            cert = certify(disk, unit, lambda_target=1.0)
            assert cert.kappa <= 0.05


def _measure_quasi_constants(disk, path):
    pts = path.points[:, 0]
    t = path.params
    kappa = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = km.disk_distance(pts[i], pts[j])
            gap = abs(t[j] - t[i])
            kappa = max(kappa, d - gap, gap - d)
    return kappa + 1e-9


def test_c07_quasi_to_almost_smoothing():
    disk = UnitDisk()
    rng = np.random.default_rng(77)
    with _Budget("7 quasi-geodesic smoothing", 120.0):
        corpus = []
        # solver geodesics reparametrized to unit speed
        for (a, b) in [(-0.9, 0.9), (0.2j, 0.85), (-0.5j, 0.6 + 0.4j)]:
            p = minimize_path(disk, [a], [b], PathConfig(resolution=32))
            corpus.append(unit_speed_reparametrize(disk, p, 32))
        # straight chords parametrized by arc length
        for (a, b) in [(0.9 * np.exp(1j * np.pi / 4),
                        0.9 * np.exp(3j * np.pi / 4)), (-0.7, 0.2 + 0.5j)]:
            chord = np.linspace(0, 1, 33)[:, None] * (b - a) + a
            corpus.append(SampledPath(kob_arclength_params(disk, chord),
                                      chord))
        # two-point jumps at bounded distance
        for (a, b) in [(0.6, 0.6j), (-0.5, 0.5)]:
            corpus.append(SampledPath([0.0, 1.0], np.array([[a], [b]])))
        # jittered geodesics
        for (a, b) in [(0.0, 0.9), (-0.8, 0.3j)]:
            p = minimize_path(disk, [a], [b], PathConfig(resolution=32))
            u = unit_speed_reparametrize(disk, p, 32)
            pts = u.points.copy()
            jit = 0.02 * (rng.standard_normal(pts[1:-1].shape)
                          + 1j * rng.standard_normal(pts[1:-1].shape))
            pts[1:-1] += jit
            corpus.append(SampledPath(u.params, pts))
        # a three-anchor polyline
        tri = np.array([[0.7], [0.2j], [-0.6]])
        corpus.append(SampledPath(kob_arclength_params(disk, tri), tri))
        assert len(corpus) == 10

        for qpath in corpus:
            kappa = _measure_quasi_constants(disk, qpath)
            out = quasi_to_almost(disk, qpath, 1.0, kappa)
            lam0 = 2 * 1.0 + 2 * kappa + 2
            kap0 = 4 * 1.0 + 5 * kappa + 4
            assert out.lambda0 == pytest.approx(lam0)
            assert out.kappa0 == pytest.approx(kap0)
            cert = certify(disk, out.path, lambda_target=out.lambda0)
            assert cert.kappa <= kap0
            assert out.measured_hausdorff <= 2 * 1.0 + 2 * kappa + 2


def test_c08_visibility():
    disk = UnitDisk()
    deltas = np.geomspace(0.2, 1e-3, 12)
    with _Budget("8 visibility", 120.0):
        sx = ApproachSequence.radial(disk, [1.0], deltas)
        se = ApproachSequence.radial(disk, [1.0j], deltas)
        rep = visibility_experiment(disk, sx, se, [0.0])
        assert rep.verdict == "visible"
        oracle = math.atanh(math.sqrt(2.0) - 1.0)
        assert abs(rep.final_sup - oracle) <= 0.05 * oracle
        phis = np.sqrt(deltas)
        cx = ApproachSequence([1.0], [np.array([(1 - d) * np.exp(1j * p)])
                                      for d, p in zip(deltas, phis)])
        ce = ApproachSequence([1.0], [np.array([(1 - d) * np.exp(-1j * p)])
                                      for d, p in zip(deltas, phis)])
        ctrl = visibility_experiment(disk, cx, ce, [0.0])
        assert not ctrl.stabilized
        assert ctrl.verdict == "not visible"


def test_c09_gromov_product():
    disk = UnitDisk()
    with _Budget("9 Gromov products", 10.0):
        for r in (0.5, 0.9, 0.99):
            est = gromov_product(disk, [r], [-r], [0.0])
            assert abs(est.upper) <= 1e-9
        deltas = np.geomspace(0.2, 1e-3, 10)
        sx = ApproachSequence.radial(disk, [1.0], deltas)
        se = ApproachSequence.radial(disk, [1.0], deltas)
        rep = gromov_boundedness_experiment(disk, sx, se, [0.0])
        assert rep.running_max[-1] > 3.0
        assert rep.verdict == "unbounded"


def test_c10_wolff_denjoy():
    disk = UnitDisk()
    ball = UnitBall(2)
    with _Budget("10 iteration dichotomy", 30.0):
        rot = validate_map(disk, rotation_map(math.pi / 2))
        rep = multi_start_consistency(
            disk, rot, [[0.1], [0.5], [0.3j], [-0.4], [0.2 - 0.2j]], 80)
        assert rep.agree and rep.kind == "Compact"

        hyp = validate_map(disk, disk_automorphism(0.5))
        rep = multi_start_consistency(
            disk, hyp, [[0.0], [0.5j], [-0.7], [0.3 + 0.3j], [-0.2j]], 60)
        assert rep.agree and rep.kind == "Wolff"
        for v in rep.verdicts:
            assert abs(v.wolff_point[0] - 1.0) < 1e-3

        bmap = validate_map(ball, ball_boundary_contraction())
        rep = multi_start_consistency(
            ball, bmap, [[0.0, 0.0], [0.2, 0.1], [0.0, 0.3j], [-0.2, 0.0],
                         [0.1j, -0.1]], 60)
        assert rep.agree and rep.kind == "Wolff"
        target = np.array([1.0, 0.0])
        for v in rep.verdicts:
            assert np.linalg.norm(v.wolff_point - target) < 1e-3


def test_c11_determinism(tmp_path):
    from kobakit.runner import ExperimentConfig, run
    with _Budget("11 determinism", 60.0):
        for experiment, params, resolutions in [
            ("dynamics", {"corpus_map": "disk_hyperbolic"}, {"orbit": 40}),
            ("goldilocks", {"r_min": 1e-2, "r_max": 0.3, "psi_s": [0.5]},
             {"r_points": 5, "shell_boundary": 12, "fit_deltas": 6,
              "fit_directions": 4, "cone_samples": 2}),
            ("visibility",
             {"xi": {"target": [[1.0, 0.0]], "n": 6},
              "eta": {"target": [[0.0, 1.0]], "n": 6}, "o": [[0.0, 0.0]]},
             {"path": 64}),
        ]:
            cfg = {"schema_version": 1, "experiment": experiment,
                   "domain": {"corpus": "unit_disk"}, "seed": 9,
                   "params": params, "resolutions": resolutions}
            a = tmp_path / f"{experiment}-a"
            b = tmp_path / f"{experiment}-b"
            run(ExperimentConfig.from_json(cfg), a)
            run(ExperimentConfig.from_json(cfg), b)
            names = sorted(p.name for p in a.glob("*.csv"))
            assert names, experiment
            for name in names:
                assert (a / name).read_bytes() == (b / name).read_bytes()


def test_c12_invariant_suites(tmp_path):
    with _Budget("12 invariant suites", 180.0):
        for name, fn in invariant_suite.ALL_CHECKS:
            fn()
        invariant_suite.check_runner(tmp_path)
