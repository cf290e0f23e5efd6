"""Command-line interface: run experiments, list the corpus, validate configs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import corpus_listing
from .domains import GeometryError
from .runner import ConfigError, ExperimentConfig, run


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        data = json.load(fh)
    return ExperimentConfig.from_json(data)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kobakit",
        description="Kobayashi-geometry experiments on bounded domains")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("--config", required=True, help="config JSON path")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--threads", type=int, default=None,
                       help="override the config worker count")

    sub.add_parser("corpus", help="list built-in domains and maps")

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("--config", required=True)

    args = parser.parse_args(argv)

    if args.command == "corpus":
        print(corpus_listing())
        return 0

    if args.command == "validate-config":
        try:
            cfg = _load_config(args.config)
            cfg.build_domain()
        except (ConfigError, GeometryError, json.JSONDecodeError, OSError) as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 2
        print("ok")
        return 0

    # run
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        manifest = run(cfg, args.out)
    except (ConfigError, GeometryError, json.JSONDecodeError, OSError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "error.json", "w", newline="\n") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
        except OSError:
            pass
        print(json.dumps(report), file=sys.stderr)
        return 1
    print(f"wrote {len(manifest.outputs) + 1} files to {args.out} "
          f"in {manifest.wall_clock_s:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
