"""Command-line entry point: ``hkbagents {run,sweep,metrics,validate}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .engine import ConfigError, RunConfig, run
from .metrics import summarize
from .output import OutputError, metrics_text, read_trajectories, write_metrics, write_trajectories
from .sweeps import SweepError, SweepSpec, run_sweep

OUT_DIR_ENV = "HKBAGENTS_OUT_DIR"
DEFAULT_OUT_DIR = "hkbagents-out"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2

log = logging.getLogger("hkbagents")


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _load(path: str):
    try:
        return load_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_run(path: str, seed: int | None) -> RunConfig:
    cfg = _load(path)
    if isinstance(cfg, SweepSpec):
        raise ConfigError("document has a sweep section; use the 'sweep' subcommand", "sweep")
    if seed is not None:
        sc = replace(cfg.scenario, seed=seed)
        cfg = replace(sc.build(), scenario=sc)
    return cfg


def _load_sweep(path: str, seed: int | None, resolution: int | None) -> SweepSpec:
    spec = _load(path)
    if not isinstance(spec, SweepSpec):
        raise ConfigError("document has no sweep section; use the 'run' subcommand", "sweep")
    if seed is not None:
        spec = replace(spec, seed_base=seed)
    if resolution is not None:
        spec = replace(spec, resolution=resolution)
    spec.validate()
    return spec


def cmd_run(args) -> int:
    cfg = _load_run(args.config, args.seed)
    opts = cfg.scenario.metric_options()
    record = run(cfg)
    summary = summarize(record, **opts)
    out = _out_dir(args.out_dir)
    traj = write_trajectories(record, out / "trajectory.csv", metric_options=opts)
    met = write_metrics([({}, {"seed": cfg.seed}, summary)], out / "metrics.csv")
    print(f"wrote {traj} and {met}")
    print(f"performance = {summary.performance:.6g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _load_sweep(args.config, args.seed, args.resolution)
    out = _out_dir(args.out_dir) / f"sweep_{spec.family}.csv"
    try:
        result = run_sweep(spec, workers=args.workers)
    except SweepError as exc:
        if exc.partial is not None and exc.partial.rows:
            partial = out.with_name(out.stem + ".partial.csv")
            _write_sweep(exc.partial, partial)
            print(f"partial results written to {partial}", file=sys.stderr)
        raise
    _write_sweep(result, out)
    print(f"wrote {out} ({len(result.rows)} rows)")
    return EXIT_OK


def _write_sweep(result, path):
    coord_names = list(result.rows[0].coords) if result.rows else []
    rows = [(r.coords, {"point_index": r.point_index, "repetition": r.repetition, "seed": r.seed}, r.summary)
            for r in result.rows]
    write_metrics(rows, path, coord_names)


def cmd_metrics(args) -> int:
    try:
        record, opts = read_trajectories(args.trajectory)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.trajectory}: {exc.strerror or exc}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"malformed trajectory file: {exc}", args.trajectory) from None
    summary = summarize(record, **(opts or {}))
    rows = [({}, {"seed": record.config.seed}, summary)]
    if args.out_dir:
        path = write_metrics(rows, _out_dir(args.out_dir) / "metrics.csv")
        print(f"wrote {path}")
    else:
        sys.stdout.write(metrics_text(rows))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    if isinstance(cfg, SweepSpec):
        print(f"ok: sweep '{cfg.family}', {len(cfg.points())} points x {cfg.repetitions} runs")
    else:
        print(f"ok: run with {len(cfg.agents)} agent(s), {cfg.n_ticks} ticks")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hkbagents", description="Oscillator-driven agent simulations.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    out_help = f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})"
    r = sub.add_parser("run", help="simulate one configuration, write trajectory and metrics")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override run.seed")
    r.add_argument("--out-dir", help=out_help)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter sweep, write a metrics table")
    s.add_argument("config")
    s.add_argument("--workers", type=int, help="worker processes (overrides sweep.workers)")
    s.add_argument("--seed", type=int, help="override sweep.seed_base")
    s.add_argument("--resolution", type=int, help="override the ternary lattice resolution")
    s.add_argument("--out-dir", help=out_help)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("metrics", help="recompute metrics from a trajectory file")
    m.add_argument("trajectory")
    m.add_argument("--out-dir", help="write metrics.csv here instead of stdout")
    m.set_defaults(func=cmd_metrics)

    v = sub.add_parser("validate", help="check a configuration file")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
