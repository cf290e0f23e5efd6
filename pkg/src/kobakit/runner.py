"""Experiment orchestration: validated configs, deterministic runs,
atomically written reports, CSV tables, and a manifest.

Every run writes a machine-readable report.json plus experiment-specific
CSV tables and finally a manifest.json indexing the outputs.  All files
are written to a temp name and renamed into place.  CSV numbers use 17
significant digits with LF line endings so reruns with the same seed are
byte-identical.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .domains import Domain, GeometryError, domain_from_json, point_from_json
from . import corpus as corpus_mod
from . import metric as km
from .geodesics import PathConfig, certify, minimize_path, unit_speed_reparametrize
from .goldilocks import (
    GoldilocksReport,
    approach_samples,
    condition1_test,
    condition2_fit,
    psi_threshold_test,
    shell_table,
)
from .domains import cone_condition_check, real_unit_directions, ray_exit_many
from .visibility import (
    ApproachSequence,
    gromov_boundedness_experiment,
    visibility_experiment,
)
from .dynamics import (
    ClassifyThresholds,
    SelfMap,
    classify,
    iterate,
    validate_map,
)

THREADS_ENV = "KOBAKIT_THREADS"

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "experiment", "domain"],
    "properties": {
        "schema_version": {"const": 1},
        "experiment": {"enum": ["metric-table", "geodesic", "goldilocks",
                                "visibility", "gromov", "dynamics"]},
        "domain": {
            "oneOf": [
                {"type": "object", "required": ["corpus"],
                 "properties": {"corpus": {"type": "string"}},
                 "additionalProperties": False},
                {"type": "object", "required": ["kind"],
                 "properties": {"kind": {"type": "string"},
                                "params": {"type": "object"}},
                 "additionalProperties": False},
            ]
        },
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1, "maximum": 64},
        "params": {"type": "object"},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
        "resolutions": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 1,
                                     "maximum": 8192},
        },
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    domain_spec: dict
    seed: int = 0
    threads: int = 1
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    resolutions: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config schema violation: {exc.message}") from exc
        return cls(experiment=data["experiment"], domain_spec=data["domain"],
                   seed=data.get("seed", 0), threads=data.get("threads", 1),
                   params=data.get("params", {}),
                   tolerances=data.get("tolerances", {}),
                   resolutions=data.get("resolutions", {}))

    def build_domain(self) -> Domain:
        if "corpus" in self.domain_spec:
            name = self.domain_spec["corpus"]
            if name not in corpus_mod.DOMAINS:
                raise ConfigError(f"unknown corpus domain {name!r}")
            return corpus_mod.DOMAINS[name].build()
        return domain_from_json(self.domain_spec)

    def snapshot(self) -> dict:
        return {"schema_version": 1, "experiment": self.experiment,
                "domain": self.domain_spec, "seed": self.seed,
                "threads": self.threads, "params": self.params,
                "tolerances": self.tolerances,
                "resolutions": self.resolutions}


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_clock_s: float
    timings: dict
    outputs: list
    threads_used: int
    threads_env_override: Optional[str]

    def to_json(self):
        return {"config": self.config, "version": self.version,
                "wall_clock_s": self.wall_clock_s, "timings": self.timings,
                "outputs": self.outputs, "threads_used": self.threads_used,
                "threads_env_override": self.threads_env_override}


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _csv_line(values) -> str:
    return ",".join(v if isinstance(v, str) else format(v, ".17g")
                    for v in values) + "\n"


class _OutputSink:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files = []

    def write_text(self, name: str, text: str):
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, text)
        self.files.append(name)

    def write_json(self, name: str, obj):
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        _write_json(path, obj)
        self.files.append(name)


# ---------------------------------------------------------------------------
# Experiments


def _points_from_params(domain, spec, seed, n_default=16):
    if spec is not None:
        return [point_from_json(p) for p in spec]
    rng = np.random.default_rng(seed)
    dirs = real_unit_directions(n_default, domain.dim, seed=seed)
    exits = ray_exit_many(domain, domain.witness, dirs)
    fracs = rng.uniform(0.1, 0.9, size=len(dirs))
    return [domain.witness + f * t * u
            for f, t, u in zip(fracs, exits, dirs)]


def _run_metric_table(domain, cfg, sink):
    pts = _points_from_params(domain, cfg.params.get("points"), cfg.seed)
    dirs_spec = cfg.params.get("directions")
    if dirs_spec is not None:
        dirs = [point_from_json(v) for v in dirs_spec]
    else:
        dirs = list(real_unit_directions(4, domain.dim, seed=cfg.seed))
    rows = []
    for p in pts:
        for v in dirs:
            est = km.infinitesimal_metric(domain, p, v)
            rows.append((p, v, est))
    lines = ["point,direction,lower,upper,lower_provenance,upper_provenance\n"]
    for p, v, est in rows:
        enc = lambda z: ";".join(format(c, ".17g")
                                 for w in z for c in (w.real, w.imag))
        lines.append(_csv_line([enc(p), enc(v), est.lower, est.upper,
                                est.lower_provenance, est.upper_provenance]))
    sink.write_text("metric_table.csv", "".join(lines))
    sink.write_json("report.json", {
        "n_rows": len(rows),
        "max_ratio": max((r[2].upper / r[2].lower) for r in rows
                         if r[2].lower > 0),
    })
    return {}


def _run_geodesic(domain, cfg, sink):
    p = cfg.params
    x = point_from_json(p["x"])
    y = point_from_json(p["y"])
    res = cfg.resolutions.get("path", 128)
    pc = PathConfig(resolution=res, seed=cfg.seed)
    t0 = time.perf_counter()
    path = minimize_path(domain, x, y, pc)
    t_solve = time.perf_counter() - t0
    unit = unit_speed_reparametrize(domain, path, n_samples=res)
    cert = certify(domain, unit, lambda_target=p.get("lambda", 1.0))
    import io
    buf = io.StringIO()
    unit.write_csv(buf)
    sink.write_text("path.csv", buf.getvalue())
    sink.write_json("certificate.json", cert.to_json())
    sink.write_json("report.json", {
        "length_upper": float(path.params[-1]),
        "certificate": cert.to_json(),
    })
    return {"solve_s": t_solve}


def _run_goldilocks(domain, cfg, sink):
    p = cfg.params
    r_grid = np.geomspace(p.get("r_min", 1e-4), p.get("r_max", 0.25),
                          cfg.resolutions.get("r_points", 16))
    n_boundary = cfg.resolutions.get("shell_boundary", 32)
    t0 = time.perf_counter()
    shells = shell_table(domain, r_grid, n_boundary=n_boundary, seed=cfg.seed)
    t_shell = time.perf_counter() - t0
    cond1 = condition1_test(domain, r_grid,
                            shell_values=[s.upper for s in shells],
                            seed=cfg.seed)
    deltas = np.geomspace(p.get("fit_delta_min", 1e-5),
                          p.get("fit_delta_max", 1e-1),
                          cfg.resolutions.get("fit_deltas", 10))
    samples = approach_samples(domain, deltas,
                               n_directions=cfg.resolutions.get(
                                   "fit_directions", 4), seed=cfg.seed)
    x0 = (point_from_json(p["x0"]) if "x0" in p else domain.witness)
    cond2 = condition2_fit(domain, x0, samples)
    cone = None
    if p.get("cone", True):
        cone_samples = approach_samples(
            domain, [p.get("cone_delta", 0.05)],
            n_directions=cfg.resolutions.get("cone_samples", 6),
            seed=cfg.seed)
        cone = cone_condition_check(domain, cone_samples)
    psi = [psi_threshold_test(s) for s in p.get("psi_s", [0.5, 1.5])]
    report = GoldilocksReport(domain.kind, shells, cond1, cond2, cone, psi)
    import io
    buf = io.StringIO()
    report.write_shell_csv(buf)
    sink.write_text("shell_table.csv", buf.getvalue())
    sink.write_json("report.json", report.to_json())
    return {"shell_s": t_shell}


def _approach_from_params(domain, spec, seed):
    target = point_from_json(spec["target"])
    deltas = np.geomspace(spec.get("delta_max", 0.2),
                          spec.get("delta_min", 1e-3),
                          spec.get("n", 12))
    if "points" in spec:
        return ApproachSequence(target,
                                [point_from_json(q) for q in spec["points"]])
    return ApproachSequence.radial(domain, target, deltas)


def _run_visibility(domain, cfg, sink):
    p = cfg.params
    seq_xi = _approach_from_params(domain, p["xi"], cfg.seed)
    seq_eta = _approach_from_params(domain, p["eta"], cfg.seed)
    o = point_from_json(p.get("o")) if "o" in p else domain.witness
    res = cfg.resolutions.get("path", 128)
    rep = visibility_experiment(domain, seq_xi, seq_eta, o,
                                lam=p.get("lambda", 1.0),
                                config=PathConfig(resolution=res,
                                                  seed=cfg.seed),
                                threads=max(1, cfg.threads))
    lines = ["trial,min_distance_lower,min_distance_upper,max_delta,"
             "kappa,speed_bound_ok,skipped\n"]
    for t in rep.trials:
        lines.append(_csv_line([
            float(t.index), t.min_distance_lower, t.min_distance_upper,
            t.max_delta,
            t.certificate.kappa if t.certificate else math.nan,
            float(t.speed_bound_ok), float(t.skipped)]))
    sink.write_text("trials.csv", "".join(lines))
    import io
    for t in rep.trials:
        if t.path is None:
            continue
        buf = io.StringIO()
        t.path.write_csv(buf)
        sink.write_text(f"traces/trial_{t.index:03d}.csv", buf.getvalue())
    sink.write_json("report.json", rep.to_json())
    return {}


def _run_gromov(domain, cfg, sink):
    p = cfg.params
    seq_xi = _approach_from_params(domain, p["xi"], cfg.seed)
    seq_eta = _approach_from_params(domain, p["eta"], cfg.seed)
    o = point_from_json(p.get("o")) if "o" in p else domain.witness
    rep = gromov_boundedness_experiment(domain, seq_xi, seq_eta, o)
    lines = ["n,m,lower,upper\n"]
    for i in range(rep.table.shape[0]):
        for j in range(rep.table.shape[1]):
            lines.append(_csv_line([float(i), float(j),
                                    rep.table_lower[i, j], rep.table[i, j]]))
    sink.write_text("products.csv", "".join(lines))
    sink.write_json("report.json", rep.to_json())
    return {}


def _build_map(domain, cfg) -> SelfMap:
    p = cfg.params
    if "corpus_map" in p:
        name = p["corpus_map"]
        if name not in corpus_mod.MAPS:
            raise ConfigError(f"unknown corpus map {name!r}")
        return corpus_mod.MAPS[name].build()
    if "map" in p:
        return SelfMap.from_json(p["map"], dim=domain.dim)
    raise ConfigError("dynamics experiment needs 'map' or 'corpus_map'")


def _run_dynamics(domain, cfg, sink):
    p = cfg.params
    m = validate_map(domain, _build_map(domain, cfg), seed=cfg.seed)
    n_iter = cfg.resolutions.get("orbit", 100)
    if "bases" in p:
        bases = [point_from_json(b) for b in p["bases"]]
    else:
        bases = [domain.witness]
    thresholds = ClassifyThresholds(**p.get("thresholds", {}))

    def one(base):
        tr = iterate(domain, m, base, n_iter)
        return tr, classify(domain, tr, thresholds)

    threads = max(1, cfg.threads)
    if threads > 1 and len(bases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, bases))
    else:
        results = [one(b) for b in bases]
    traces = [r[0] for r in results]
    verdicts = [r[1] for r in results]
    import io
    for k, tr in enumerate(traces):
        buf = io.StringIO()
        tr.write_csv(buf)
        name = "orbit.csv" if k == 0 else f"orbit_{k:02d}.csv"
        sink.write_text(name, buf.getvalue())
    report = {"map": m.to_json(), "n_iter": n_iter,
              "verdicts": [v.to_json() for v in verdicts],
              "agree": len({v.kind for v in verdicts}) == 1}
    sink.write_json("report.json", report)
    return {}


_EXPERIMENTS = {
    "metric-table": _run_metric_table,
    "geodesic": _run_geodesic,
    "goldilocks": _run_goldilocks,
    "visibility": _run_visibility,
    "gromov": _run_gromov,
    "dynamics": _run_dynamics,
}


def run(config: ExperimentConfig, out_dir) -> RunManifest:
    """Execute the configured experiment and write its outputs.

    Writes report.json plus experiment tables, then manifest.json, all
    atomically.  Raises ConfigError / GeometryError on invalid input; the
    CLI converts those into a machine-readable error report and a nonzero
    exit status.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    env_threads = os.environ.get(THREADS_ENV)
    if env_threads:
        config.threads = max(1, int(env_threads))
    domain = config.build_domain()
    sink = _OutputSink(out)
    t0 = time.perf_counter()
    timings = _EXPERIMENTS[config.experiment](domain, config, sink) or {}
    wall = time.perf_counter() - t0
    outputs = []
    for name in sink.files:
        path = out / name
        size = path.stat().st_size
        if size == 0:
            raise GeometryError(f"output file {name} is empty")
        outputs.append({"path": name, "bytes": size})
    manifest = RunManifest(config.snapshot(), __version__, wall,
                           {k: float(v) for k, v in timings.items()},
                           outputs, config.threads, env_threads)
    _write_json(out / "manifest.json", manifest.to_json())
    return manifest
