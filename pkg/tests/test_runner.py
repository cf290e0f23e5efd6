import json
import math
import subprocess
import sys

import numpy as np
import pytest

from kobakit.runner import ConfigError, ExperimentConfig, run
from kobakit.corpus import DOMAINS, MAPS, corpus_listing


def make_config(**over):
    base = {"schema_version": 1, "experiment": "dynamics",
            "domain": {"corpus": "unit_disk"}, "seed": 3,
            "params": {"corpus_map": "rotation"},
            "resolutions": {"orbit": 40}}
    base.update(over)
    return base


class TestConfig:
    def test_valid(self):
        cfg = ExperimentConfig.from_json(make_config())
        assert cfg.experiment == "dynamics"

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(make_config(experiment="bogus"))

    def test_nonpositive_tolerance_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(make_config(tolerances={"x": 0.0}))

    def test_resolution_cap(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(
                make_config(resolutions={"orbit": 100000}))

    def test_unknown_corpus_domain(self):
        cfg = ExperimentConfig.from_json(
            make_config(domain={"corpus": "nope"}))
        with pytest.raises(ConfigError):
            cfg.build_domain()

    def test_explicit_domain_spec(self):
        cfg = ExperimentConfig.from_json(
            make_config(domain={"kind": "UnitBall", "params": {"dim": 2}}))
        assert cfg.build_domain().dim == 2


class TestCorpus:
    def test_expected_members(self):
        for name in ("unit_disk", "unit_ball_2", "unit_ball_3", "polydisk_2",
                     "egg_1_2", "psi_supported_s05", "psi_supported_s15",
                     "ball_lens", "ball_box"):
            assert name in DOMAINS
        for name in ("rotation", "disk_hyperbolic", "disk_contraction",
                     "ball_boundary_contraction"):
            assert name in MAPS

    def test_tags_present(self):
        text = corpus_listing()
        assert "goldilocks_expected" in text
        assert "taut" in text

    def test_all_domains_build(self):
        for entry in DOMAINS.values():
            dom = entry.build()
            assert dom.contains(dom.witness)
            assert dom.convex == entry.convex


class TestRun:
    def test_dynamics_run_and_manifest(self, tmp_path):
        cfg = ExperimentConfig.from_json(make_config())
        manifest = run(cfg, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdicts"][0]["kind"] == "Compact"
        for entry in manifest.outputs:
            f = tmp_path / entry["path"]
            assert f.exists() and f.stat().st_size == entry["bytes"] > 0
        assert (tmp_path / "manifest.json").exists()

    def test_goldilocks_run(self, tmp_path):
        cfg = ExperimentConfig.from_json(make_config(
            experiment="goldilocks",
            params={"r_min": 1e-3, "r_max": 0.4, "fit_delta_min": 1e-4,
                    "psi_s": [0.5, 1.5]},
            resolutions={"r_points": 8, "shell_boundary": 16,
                         "fit_deltas": 8, "fit_directions": 4,
                         "cone_samples": 4}))
        run(cfg, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["condition1"]["verdict"] == "converges"
        assert (tmp_path / "shell_table.csv").exists()
        verdicts = {p["s"]: p["verdict"] for p in report["psi_thresholds"]}
        assert verdicts == {0.5: "converges", 1.5: "diverges"}

    def test_visibility_control_run_exits_zero(self, tmp_path):
        # a control result ("not visible") is data, not an error
        deltas = list(np.geomspace(0.2, 2e-3, 8))
        pts = [[[float((1 - d) * math.cos(math.sqrt(d))),
                 float((1 - d) * math.sin(math.sqrt(d)))]] for d in deltas]
        pts2 = [[[float((1 - d) * math.cos(math.sqrt(d))),
                  float(-(1 - d) * math.sin(math.sqrt(d)))]] for d in deltas]
        cfg = ExperimentConfig.from_json(make_config(
            experiment="visibility",
            params={"xi": {"target": [[1.0, 0.0]], "points": pts},
                    "eta": {"target": [[1.0, 0.0]], "points": pts2},
                    "o": [[0.0, 0.0]]},
            resolutions={"path": 64}))
        run(cfg, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "not visible"

    def test_gromov_run(self, tmp_path):
        cfg = ExperimentConfig.from_json(make_config(
            experiment="gromov",
            params={"xi": {"target": [[1.0, 0.0]], "n": 6},
                    "eta": {"target": [[-1.0, 0.0]], "n": 6},
                    "o": [[0.0, 0.0]]}))
        run(cfg, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] == "bounded"

    def test_geodesic_run(self, tmp_path):
        cfg = ExperimentConfig.from_json(make_config(
            experiment="geodesic",
            params={"x": [[0.0, 0.0]], "y": [[0.9, 0.0]]},
            resolutions={"path": 64}))
        run(cfg, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["length_upper"] == pytest.approx(math.atanh(0.9),
                                                       rel=0.01)

    def test_metric_table_run(self, tmp_path):
        cfg = ExperimentConfig.from_json(make_config(
            experiment="metric-table", params={}))
        run(cfg, tmp_path)
        text = (tmp_path / "metric_table.csv").read_text()
        assert text.splitlines()[0].startswith("point,direction")


class TestDeterminism:
    @pytest.mark.parametrize("experiment,params,resolutions", [
        ("dynamics", {"corpus_map": "disk_hyperbolic"}, {"orbit": 40}),
        ("goldilocks", {"r_min": 1e-2, "r_max": 0.3, "psi_s": [0.5]},
         {"r_points": 5, "shell_boundary": 12, "fit_deltas": 6,
          "fit_directions": 4, "cone_samples": 2}),
    ])
    def test_byte_identical_reruns(self, tmp_path, experiment, params,
                                   resolutions):
        cfg_data = make_config(experiment=experiment, params=params,
                               resolutions=resolutions)
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        run(ExperimentConfig.from_json(cfg_data), out1)
        run(ExperimentConfig.from_json(cfg_data), out2)
        csvs = sorted(p.name for p in out1.glob("*.csv"))
        assert csvs
        for name in csvs:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestCli:
    def run_cli(self, *args):
        return subprocess.run([sys.executable, "-m", "kobakit.cli", *args],
                              capture_output=True, text=True)

    def test_corpus_listing(self):
        r = self.run_cli("corpus")
        assert r.returncode == 0
        assert "unit_disk" in r.stdout

    def test_validate_config(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(make_config()))
        r = self.run_cli("validate-config", "--config", str(p))
        assert r.returncode == 0 and "ok" in r.stdout

    def test_invalid_config_nonzero_exit(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(make_config(experiment="bogus")))
        r = self.run_cli("validate-config", "--config", str(p))
        assert r.returncode != 0

    def test_run_with_seed_override(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(make_config()))
        out = tmp_path / "out"
        r = self.run_cli("run", "--config", str(p), "--out", str(out),
                         "--seed", "11")
        assert r.returncode == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 11

    def test_failed_run_writes_error_report(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(make_config(
            params={"corpus_map": "nope"})))
        out = tmp_path / "out"
        r = self.run_cli("run", "--config", str(p), "--out", str(out))
        assert r.returncode == 1
        err = json.loads((out / "error.json").read_text())
        assert "nope" in err["message"]
