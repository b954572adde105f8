"""Command-line interface: ``spin-gas run | presets | replay``.

Exit codes: 0 success, 2 configuration error, 3 capacity/packing error,
4 numerical-invariant violation, 5 I/O error.
"""

from __future__ import annotations

import argparse
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .classical import read_event_streams, write_event_streams
from .config import RunConfig, config_to_ini, parse_config, plan_to_dict
from .ensemble import finalize, run_ensemble, run_trajectory, trajectory_events
from .errors import ConfigError, SpinGasError
from .output import (
    OutputError,
    prepare_output_dir,
    write_manifest,
    write_matrix_csv,
    write_series_csv,
    write_snapshot,
)
from .presets import list_presets


def _collect(cfg: RunConfig, events=None) -> tuple[np.ndarray, dict, dict, bool]:
    """Run the plan; returns (times, series, snapshot arrays by step, is_ensemble)."""
    plan = cfg.plan
    if plan.n_traj == 1 and not plan.accumulate_density:
        r = run_trajectory(plan, 0, events=None if events is None else events[0])
        series = {"sigma2": r.sigma2, "ctot": r.ctot, "probs": r.probs}
        states = dict(zip(r.times.tolist(), r.states))
        return r.times, series, states, False
    acc = run_ensemble(plan, cfg.workers, events, cfg.deterministic)
    res = finalize(acc, plan.resolved_engine == "subspace", cfg.pair_tables)
    series = {"cbar": res.cbar, "mean_sigma2": res.mean_sigma2, "sigma2": res.sigma2, "probs": res.probs}
    mats = {}
    if res.rho is not None:
        series.update(entropy=res.entropy, diag_entropy=res.diag_entropy, ctot_rho=res.ctot_rho)
        mats = dict(zip(res.times.tolist(), res.rho))
    if res.pair_tables is not None:
        series["pair_tables"] = res.pair_tables
    return res.times, series, mats, True


def execute(cfg: RunConfig, out=None, force: bool | None = None) -> dict:
    """Run a configuration and write its artifacts; returns the manifest."""
    out = Path(out or cfg.out or Path("spin-gas-out") / (cfg.preset or "run"))
    out = prepare_output_dir(out, cfg.force if force is None else force)
    plan = cfg.plan
    events = None
    if cfg.replay_events is not None:
        try:
            events = read_event_streams(cfg.replay_events)
        except OSError as exc:
            raise OutputError(f"cannot read events {cfg.replay_events}: {exc.strerror}") from exc
        if len(events) != plan.n_traj:
            raise ConfigError(f"{cfg.replay_events}: {len(events)} event streams, "
                              f"configuration has n_traj = {plan.n_traj}")
    started = time.time()
    times, series, snaps, ensemble = _collect(cfg, events)
    files = {}
    for name in cfg.observables:
        if name not in series:
            continue
        path = out / f"{name}.csv"
        if name == "probs":
            write_matrix_csv(path, times, series[name])
        else:
            write_series_csv(path, times, series[name], name)
        files[name] = path.name
    if "pair_tables" in series:
        snapdir = out / "pair_tables"
        snapdir.mkdir(exist_ok=True)
        for t, tab in zip(times.tolist(), series["pair_tables"]):
            write_snapshot(snapdir / f"concurrence_t{t}.bin", tab)
    snapshot_files = []
    if snaps:
        steps = cfg.snapshot_steps if cfg.snapshot_steps is not None else (int(times[-1]),)
        snapdir = out / "snapshots"
        snapdir.mkdir(exist_ok=True)
        kind = "rho" if ensemble else "psi"
        for t in steps:
            path = snapdir / f"{kind}_t{t}.bin"
            write_snapshot(path, snaps[t])
            snapshot_files.append(str(path.relative_to(out)))
    if cfg.dump_events is not None:
        streams = [trajectory_events(plan, s) for s in range(plan.n_traj)]
        write_event_streams(cfg.dump_events, streams)
    config_text = config_to_ini(cfg)
    (out / "config.ini").write_text(config_text)
    manifest = {
        "spingas_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "kernel_backend": kernels.BACKEND,
        "preset": cfg.preset,
        "seed": plan.seed,
        "workers": cfg.workers,
        "deterministic": cfg.deterministic,
        "ensemble": ensemble,
        "plan": plan_to_dict(plan),
        "config_file": "config.ini",
        "config": config_text,
        "series": files,
        "snapshots": snapshot_files,
        "replayed_events": None if cfg.replay_events is None else str(cfg.replay_events),
        "dumped_events": None if cfg.dump_events is None else str(cfg.dump_events),
        "sample_count": int(len(times)),
        "elapsed_seconds": round(time.time() - started, 3),
    }
    write_manifest(out, manifest)
    return manifest


def _overrides(args) -> dict:
    o = {
        ("run", "preset"): getattr(args, "preset", None),
        ("run", "seed"): args.seed,
        ("run", "workers"): args.workers,
        ("run", "out"): args.out,
        ("run", "force"): True if args.force else None,
        ("ensemble", "n_traj"): args.n_traj,
        ("ensemble", "steps"): args.steps,
    }
    if getattr(args, "dump_events", None):
        o[("run", "dump_events")] = args.dump_events
    if getattr(args, "replay_events", None):
        o[("run", "replay_events")] = args.replay_events
    if getattr(args, "no_deterministic", False):
        o[("run", "deterministic")] = False
    if getattr(args, "snapshot_steps", None):
        o[("run", "snapshot_steps")] = tuple(int(x) for x in args.snapshot_steps.split(","))
    return o


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="global seed (64-bit unsigned)")
    p.add_argument("--workers", type=int, help="worker processes for ensembles (default 1)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--force", action="store_true", help="overwrite an existing run in --out")
    p.add_argument("--n-traj", type=int, help="override the number of trajectories")
    p.add_argument("--steps", type=int, help="override the number of steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spin-gas", description="Semi-quantal spin gas simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a configuration file")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="preset name (see 'spin-gas presets')")
    src.add_argument("--config", help="INI configuration file")
    _common(run)
    run.add_argument("--dump-events", help="write the interaction event streams to this file")
    run.add_argument("--replay-events", help="replay interaction events from this file")
    run.add_argument("--snapshot-steps", help="comma-separated sample steps to snapshot")
    run.add_argument("--no-deterministic", action="store_true",
                     help="merge worker results in completion order")

    sub.add_parser("presets", help="list the figure presets")

    rep = sub.add_parser("replay", help="re-run a configuration on a recorded event stream")
    rep.add_argument("--events", required=True, help="event stream file (from --dump-events)")
    rep.add_argument("--config", required=True, help="INI configuration file")
    _common(rep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "presets":
        sys.stdout.write(list_presets())
        return 0
    try:
        overrides = _overrides(args)
        if args.command == "replay":
            overrides[("run", "replay_events")] = args.events
        if args.config is not None and getattr(args, "preset", None):
            raise ConfigError("--preset and --config are mutually exclusive")
        cfg = parse_config(args.config, overrides=overrides)
        manifest = execute(cfg)
    except SpinGasError as exc:
        print(f"spin-gas: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"spin-gas: I/O error: {exc}", file=sys.stderr)
        return 5
    out = cfg.out or Path("spin-gas-out") / (cfg.preset or "run")
    print(f"wrote {len(manifest['series'])} series and {len(manifest['snapshots'])} snapshot(s) to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
