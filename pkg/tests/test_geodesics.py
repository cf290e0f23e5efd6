import math

import numpy as np
import pytest

from kobakit import metric as km
from kobakit.domains import GeometryError
from kobakit.geodesics import (
    ConstraintViolation,
    PathConfig,
    PathSearchError,
    SampledPath,
    certify,
    kob_arclength_params,
    minimize_path,
    quasi_to_almost,
    unit_speed_reparametrize,
)


def solve(disk, x, y, res=128):
    return minimize_path(disk, [x], [y], PathConfig(resolution=res))


class TestSampledPath:
    def test_params_must_increase(self):
        with pytest.raises(GeometryError):
            SampledPath([0.0, 0.0], np.zeros((2, 1)))

    def test_csv_round(self, tmp_path):
        p = SampledPath([0.0, 1.0], np.array([[0.1 + 0.2j], [0.3]]))
        f = tmp_path / "p.csv"
        with open(f, "w") as fh:
            p.write_csv(fh)
        lines = f.read_text().splitlines()
        assert lines[0] == "t,re_z1,im_z1"
        assert len(lines) == 3


class TestMinimizePath:
    def test_radial_geodesic(self, disk):
        p = solve(disk, 0.0, 0.9)
        exact = math.atanh(0.9)
        assert p.params[-1] == pytest.approx(exact, rel=0.01)

    def test_diameter(self, disk):
        p = solve(disk, -0.9, 0.9)
        exact = 2 * math.atanh(0.9)
        assert p.params[-1] == pytest.approx(exact, rel=0.01)
        # the diameter geodesic passes through the origin
        assert np.min(np.abs(p.points[:, 0])) < 0.05

    def test_bent_geodesic_beats_chord(self, disk):
        a = 0.9 * np.exp(1j * np.pi / 4)
        b = 0.9 * np.exp(3j * np.pi / 4)
        p = solve(disk, a, b)
        exact = km.disk_distance(a, b)
        chord = np.linspace(0, 1, 129)[:, None] * (b - a) + a
        chord_len = kob_arclength_params(disk, chord[:, None][:, 0, :] if chord.ndim == 3 else chord)[-1]
        assert p.params[-1] < chord_len
        assert p.params[-1] == pytest.approx(exact, rel=0.02)

    def test_deterministic_given_seed(self, disk):
        cfg = PathConfig(resolution=64, seed=3, restarts=2)
        p1 = minimize_path(disk, [0.2j], [0.8], cfg)
        p2 = minimize_path(disk, [0.2j], [0.8], cfg)
        assert np.array_equal(p1.points, p2.points)

    def test_same_point_trivial(self, disk):
        p = minimize_path(disk, [0.1], [0.1], PathConfig())
        assert p.resolution == 0

    def test_no_interior_path_reported(self):
        # two thin disjoint lobes joined in one non-convex defining domain
        from kobakit.domains import ConvexSupport

        def two_lobes(pts):
            z = pts[:, 0]
            left = np.abs(z + 0.6) - 0.25
            right = np.abs(z - 0.6) - 0.25
            return np.minimum(left, right)

        dom = ConvexSupport(1, defining=two_lobes, enclosing_radius=1.0,
                            witness=[-0.6], convex=False)
        with pytest.raises(PathSearchError):
            minimize_path(dom, [-0.6], [0.6], PathConfig(resolution=16))


class TestUnitSpeed:
    def test_speeds_near_one(self, disk):
        p = solve(disk, 0.0, 0.9)
        u = unit_speed_reparametrize(disk, p, n_samples=128)
        cum = kob_arclength_params(disk, u.points)
        speeds = np.diff(cum) / np.diff(u.params)
        assert speeds.min() >= 0.95
        assert speeds.max() <= 1.05

    def test_endpoints_preserved(self, disk):
        p = solve(disk, 0.0, 0.9)
        u = unit_speed_reparametrize(disk, p, n_samples=64)
        assert u.points[0, 0] == 0.0
        assert u.points[-1, 0] == 0.9

    def test_total_length_preserved(self, disk):
        p = solve(disk, 0.1j, 0.7)
        before = kob_arclength_params(disk, p.points)[-1]
        u = unit_speed_reparametrize(disk, p, n_samples=128)
        after = kob_arclength_params(disk, u.points)[-1]
        assert after == pytest.approx(before, rel=1e-6)

    def test_idempotent(self, disk):
        p = solve(disk, 0.0, 0.8)
        u1 = unit_speed_reparametrize(disk, p, n_samples=64)
        u2 = unit_speed_reparametrize(disk, u1, n_samples=64)
        assert np.allclose(u1.points, u2.points, atol=1e-6)
        assert np.allclose(u1.params, u2.params, atol=1e-6)

    def test_zero_length_rejected(self, disk):
        p = SampledPath([0.0], np.array([[0.1]]))
        with pytest.raises(GeometryError):
            unit_speed_reparametrize(disk, p)


class TestCertify:
    def test_geodesic_kappa_small(self, disk):
        u = unit_speed_reparametrize(disk, solve(disk, 0.0, 0.9), 128)
        cert = certify(disk, u, lambda_target=1.0)
        assert cert.kappa <= 0.05
        assert cert.speed_max <= 1.05

    def test_single_point_trivial(self, disk):
        cert = certify(disk, SampledPath([0.0], np.array([[0.2]])), 1.0)
        assert cert.kappa == 0.0 and cert.lam == 1.0

    def test_chord_kappa_exceeds_geodesic_by_length_gap(self, disk):
        a = 0.9 * np.exp(1j * np.pi / 4)
        b = 0.9 * np.exp(3j * np.pi / 4)
        geo = unit_speed_reparametrize(disk, solve(disk, a, b), 128)
        cert_geo = certify(disk, geo, 1.0)
        chord_pts = np.linspace(0, 1, 129)[:, None] * (b - a) + a
        chord = SampledPath(kob_arclength_params(disk, chord_pts[:, None][:, 0, :]
                                                 if chord_pts.ndim == 3
                                                 else chord_pts), chord_pts)
        chord_u = unit_speed_reparametrize(disk, chord, 128)
        cert_chord = certify(disk, chord_u, 1.0)
        gap = chord.params[-1] - km.disk_distance(a, b)
        assert cert_chord.kappa >= cert_geo.kappa + gap - 0.01

    def test_lambda_below_one_rejected(self, disk):
        with pytest.raises(ValueError):
            certify(disk, SampledPath([0.0], np.array([[0.0]])), 0.5)


class TestQuasiToAlmost:
    def test_geodesic_input_stays_close(self, disk):
        g = unit_speed_reparametrize(disk, solve(disk, -0.9, 0.9, 64), 64)
        kap = max(certify(disk, g, 1.0).kappa, 1e-3)
        out = quasi_to_almost(disk, g, 1.0, kap)
        assert out.lambda0 == pytest.approx(4.0 + 2 * kap)
        assert out.kappa0 == pytest.approx(8.0 + 5 * kap)
        assert out.closeness_bound == pytest.approx(4.0 + 2 * kap)
        assert out.measured_hausdorff <= out.closeness_bound
        assert out.measured_kappa <= out.kappa0

    def test_jump_path_becomes_genuine(self, disk):
        x, y = 0.6, 0.6j
        K = km.disk_distance(x, y)
        jump = SampledPath([0.0, 1.0], np.array([[x], [y]]))
        out = quasi_to_almost(disk, jump, 1.0, K + 1.0)
        cert = certify(disk, out.path, out.lambda0)
        assert cert.kappa <= out.kappa0
        assert out.path.resolution >= 8

    def test_short_range_single_piece(self, disk):
        short = SampledPath([0.0, 0.3], np.array([[0.1], [0.15]]))
        out = quasi_to_almost(disk, short, 1.0, 1.0)
        assert out.path.params[-1] == pytest.approx(0.3)

    def test_violating_input_rejected_with_witness(self, disk):
        bad = SampledPath([0.0, 10.0], np.array([[0.0], [0.1]]))
        with pytest.raises(ConstraintViolation) as err:
            quasi_to_almost(disk, bad, 1.0, 0.0)
        assert "pair" in str(err.value)


class TestPathInvariants:
    def test_lipschitz_euclidean_speed(self, disk):
        lam = 1.0
        u = unit_speed_reparametrize(disk, solve(disk, -0.5, 0.9), 128)
        cert = certify(disk, u, lam)
        c1 = disk.c1
        seg = np.linalg.norm(np.diff(u.points, axis=0), axis=1)
        dt = np.diff(u.params)
        assert np.max(seg / dt) <= lam / c1 + 0.05

    def test_restriction_property(self, disk):
        p = solve(disk, 0.1j, 0.85)
        cum = kob_arclength_params(disk, p.points)
        n = len(p.points)
        slack = 0.02
        for (i, j) in [(0, n - 1), (n // 4, 3 * n // 4), (n // 3, n // 2)]:
            piece_len = cum[j] - cum[i]
            d = km.disk_distance(p.points[i, 0], p.points[j, 0])
            assert piece_len <= d + slack

    def test_near_additivity_through_midpoints(self, disk):
        u = unit_speed_reparametrize(disk, solve(disk, -0.7, 0.8), 96)
        cert = certify(disk, u, 1.0)
        kappa = cert.kappa
        a = u.points[0, 0]
        b = u.points[-1, 0]
        dab = km.disk_distance(a, b)
        for t in range(1, u.resolution):
            mid = u.points[t, 0]
            total = km.disk_distance(a, mid) + km.disk_distance(mid, b)
            assert total <= dab + 3 * kappa + 1e-6
