"""Command-line entry point.

Every subcommand takes ``--config``, ``--seed`` and ``--out``; the
subcommand name selects the pipeline, overriding ``experiment`` in the
file. Exit codes: 0 success, 2 usage, 3 domain, 4 resource, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import CalibrationLookupError, DomainError, ResourceError
from .experiments import ExperimentConfig, run_experiment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4
EXIT_IO = 5

COMMANDS = {
    "simulate": "simulate the configured words and dump output waveforms",
    "consistency": "consistency curves, window and divergence slope",
    "dimensionality": "K, Gamma and D for one reservoir",
    "sweep": "effective dimensionality over the (N1, N2) grid",
    "train": "fit word classifiers and save them",
    "classify": "error rate against classifier start time",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boolres", description="Boolean delay reservoir experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", help="INI file with an [experiment] section")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    return p


def _load(args) -> ExperimentConfig:
    overrides = {"experiment": args.command, "seed": args.seed, "output": args.out,
                 "workers": args.workers}
    if args.config:
        return ExperimentConfig.load(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _load(args)
        manifest = run_experiment(cfg)
    except (DomainError, CalibrationLookupError) as exc:
        print(f"boolres: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ResourceError, MemoryError) as exc:
        print(f"boolres: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"boolres: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"outputs": manifest["outputs"], "summary": manifest["summary"]}, indent=2))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
