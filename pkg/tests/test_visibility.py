import math

import numpy as np
import pytest

from kobakit import metric as km
from kobakit.domains import GeometryError
from kobakit.visibility import (
    ApproachSequence,
    gromov_boundedness_experiment,
    gromov_product,
    visibility_experiment,
)


DELTAS = np.geomspace(0.2, 1e-3, 12)


def control_pair(deltas):
    """Two sequences converging to the same boundary point 1, separated by a
    shrinking angle, so connecting geodesics hug the boundary."""
    phis = np.sqrt(deltas)
    xs = [np.array([(1 - d) * np.exp(1j * p)]) for d, p in zip(deltas, phis)]
    ys = [np.array([(1 - d) * np.exp(-1j * p)]) for d, p in zip(deltas, phis)]
    return (ApproachSequence([1.0], xs, "custom"),
            ApproachSequence([1.0], ys, "custom"))


@pytest.fixture(scope="module")
def disk_vis_report(disk):
    sx = ApproachSequence.radial(disk, [1.0], DELTAS)
    se = ApproachSequence.radial(disk, [1.0j], DELTAS)
    return visibility_experiment(disk, sx, se, [0.0])


@pytest.fixture(scope="module")
def disk_control_report(disk):
    cx, ce = control_pair(DELTAS)
    return visibility_experiment(disk, cx, ce, [0.0])


class TestApproachSequence:
    def test_radial_constructor(self, disk):
        seq = ApproachSequence.radial(disk, [1.0], [0.1, 0.01])
        assert len(seq) == 2
        assert abs(seq.points[0][0] - 0.9) < 1e-12

    def test_monotonicity_enforced(self):
        with pytest.raises(GeometryError):
            ApproachSequence([1.0], [np.array([0.5]), np.array([0.5])])


class TestVisibilityExperiment:
    def test_distinct_targets_visible(self, disk_vis_report):
        assert disk_vis_report.verdict == "visible"
        assert disk_vis_report.stabilized

    def test_matches_orthogonal_circle_oracle(self, disk_vis_report):
        # geodesic between boundary points 1 and i: circle centered 1+i of
        # radius 1; closest Euclidean approach to 0 is sqrt(2)-1
        oracle = math.atanh(math.sqrt(2.0) - 1.0)
        assert disk_vis_report.final_sup == pytest.approx(oracle, rel=0.05)

    def test_paths_certified(self, disk_vis_report):
        for t in disk_vis_report.trials:
            assert not t.skipped
            assert t.certificate.kappa <= 0.05

    def test_speed_shell_coupling(self, disk_vis_report):
        assert all(t.speed_bound_ok for t in disk_vis_report.trials)

    def test_same_target_control_not_visible(self, disk_control_report):
        assert disk_control_report.verdict == "not visible"
        assert not disk_control_report.stabilized

    def test_control_grows_beyond_test(self, disk_vis_report,
                                       disk_control_report):
        # once delta < 0.01 the control's running sup dominates
        idx = [i for i, d in enumerate(DELTAS) if d < 0.01]
        for i in idx:
            assert (disk_control_report.running_sup[i]
                    > disk_vis_report.running_sup[i])

    def test_diameter_passes_through_origin(self, disk):
        sx = ApproachSequence.radial(disk, [1.0], DELTAS[:8])
        se = ApproachSequence.radial(disk, [-1.0], DELTAS[:8])
        rep = visibility_experiment(disk, sx, se, [0.0])
        assert rep.final_sup <= 0.05

    def test_midpoint_near_additivity_at_closest_approach(self, disk,
                                                          disk_vis_report):
        for t in disk_vis_report.trials:
            x, y = t.endpoints
            kap = t.certificate.kappa
            d_total = km.disk_distance(x[0], y[0])
            mid = t.closest_point[0]
            split = (km.disk_distance(x[0], mid)
                     + km.disk_distance(mid, y[0]))
            assert split <= d_total + 3 * kap + 1e-9


class TestGromovProduct:
    @pytest.mark.parametrize("r", [0.5, 0.9, 0.99])
    def test_symmetric_pair_vanishes(self, disk, r):
        est = gromov_product(disk, [r], [-r], [0.0])
        assert abs(est.lower) <= 1e-9
        assert abs(est.upper) <= 1e-9

    def test_coincident_points(self, disk):
        est = gromov_product(disk, [0.5], [0.5], [0.0])
        assert est.lower == pytest.approx(math.atanh(0.5), abs=1e-12)

    def test_nonnegative_exact(self, disk):
        rng = np.random.default_rng(9)
        for _ in range(20):
            z = rng.uniform(0, 0.9, 3) * np.exp(2j * np.pi * rng.uniform(size=3))
            est = gromov_product(disk, [z[0]], [z[1]], [z[2]])
            assert est.lower >= -1e-12

    def test_basepoint_stability(self, disk):
        rng = np.random.default_rng(10)
        for _ in range(10):
            z = rng.uniform(0, 0.9, 4) * np.exp(2j * np.pi * rng.uniform(size=4))
            a = gromov_product(disk, [z[0]], [z[1]], [z[2]]).upper
            b = gromov_product(disk, [z[0]], [z[1]], [z[3]]).upper
            shift = km.disk_distance(z[2], z[3])
            assert abs(a - b) <= shift + 1e-9

    def test_interval_arithmetic_on_convex_kind(self, ball2_as_convex):
        est = gromov_product(ball2_as_convex, [0.4, 0.0], [-0.4, 0.0],
                             [0.0, 0.0])
        assert est.lower <= est.upper


class TestGromovBoundedness:
    def test_antipodal_vanishes(self, disk):
        sx = ApproachSequence.radial(disk, [1.0], DELTAS[:8])
        se = ApproachSequence.radial(disk, [-1.0], DELTAS[:8])
        rep = gromov_boundedness_experiment(disk, sx, se, [0.0])
        assert rep.verdict == "bounded"
        assert np.max(rep.table) <= 1e-9

    def test_distinct_targets_bounded_matches_oracle(self, disk):
        sx = ApproachSequence.radial(disk, [1.0], DELTAS)
        se = ApproachSequence.radial(disk, [1.0j], DELTAS)
        rep = gromov_boundedness_experiment(disk, sx, se, [0.0])
        assert rep.verdict == "bounded"
        # oracle: all products computed from the closed-form distances
        for i in (0, len(DELTAS) - 1):
            for j in (0, len(DELTAS) - 1):
                x, y = sx.points[i][0], se.points[j][0]
                oracle = 0.5 * (km.disk_distance(x, 0) + km.disk_distance(0, y)
                                - km.disk_distance(x, y))
                assert rep.table[i, j] == pytest.approx(oracle, abs=1e-9)

    def test_same_target_unbounded(self, disk):
        deltas = np.geomspace(0.2, 1e-3, 10)
        sx = ApproachSequence.radial(disk, [1.0], deltas)
        se = ApproachSequence.radial(disk, [1.0], deltas)
        rep = gromov_boundedness_experiment(disk, sx, se, [0.0])
        assert rep.verdict == "unbounded"
        assert rep.running_max[-1] > 3.0
