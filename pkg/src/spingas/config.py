"""Run configuration: INI-style files and command-line overrides.

Sections and keys (all optional unless noted)::

    [run]       preset, seed, workers, out, force, deterministic, dump_events,
                replay_events, observables, snapshot_steps, pair_tables
    [model]     kind (required without a preset), particles (required),
                sites, placement, start, diameter, box, mass, velocity_sigma
    [quantum]   coupling, eta, engine, initial
    [ensemble]  steps, n_traj, sample_times, density, track_variance,
                max_samples, chunk_size

``preset`` and the ``[model]``/``[quantum]`` sections are mutually exclusive;
``[ensemble]`` keys and ``seed`` override preset values.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .engines import Coupling
from .ensemble import InitialState, ModelSpec, TrajectoryPlan
from .errors import ConfigError, SpinGasError
from .presets import get_preset

SERIES = ("sigma2", "ctot", "probs", "entropy", "diag_entropy", "cbar", "ctot_rho", "mean_sigma2")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in re.split(r"[,\s]+", text.strip()) if x)


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in re.split(r"[,\s]+", text.strip()) if x)


def _names(text: str) -> tuple:
    names = tuple(x for x in re.split(r"[,\s]+", text.strip()) if x)
    bad = [x for x in names if x not in SERIES]
    if bad:
        raise ValueError(f"unknown observable(s) {', '.join(bad)}; choose from {', '.join(SERIES)}")
    return names


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return v


SCHEMA = {
    "run": {"preset": str, "seed": _seed, "workers": int, "out": str, "force": _bool,
            "deterministic": _bool, "dump_events": str, "replay_events": str, "observables": _names,
            "snapshot_steps": _ints, "pair_tables": _bool},
    "model": {"kind": str, "particles": int, "sites": int, "placement": str, "start": int,
              "diameter": float, "box": _floats, "mass": float, "velocity_sigma": float},
    "quantum": {"coupling": Coupling.parse, "eta": float, "engine": str, "initial": InitialState.parse},
    "ensemble": {"steps": int, "n_traj": int, "sample_times": _ints, "density": _bool,
                 "track_variance": _bool, "max_samples": int, "chunk_size": int},
}


@dataclass
class RunConfig:
    plan: TrajectoryPlan
    preset: str | None = None
    out: Path | None = None
    force: bool = False
    workers: int = 1
    deterministic: bool = True
    dump_events: Path | None = None
    replay_events: Path | None = None
    observables: tuple = SERIES
    snapshot_steps: tuple | None = None
    pair_tables: bool = False


def _line_index(text: str) -> dict:
    """Map (section, key) to the 1-based line number where the key is set."""
    where = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = i
        elif s and s[0] not in "#;" and section is not None:
            key = re.split(r"[=:]", s, 1)[0].strip().lower()
            where[(section, key)] = i
    return where


def _read_sections(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    where = _line_index(text)
    values: dict = {}
    for section in parser.sections():
        if section not in SCHEMA:
            line = where.get((section, None), "?")
            raise ConfigError(f"{source}:{line}: unknown section [{section}] "
                              f"(expected one of {', '.join(SCHEMA)})")
        for key, raw in parser.items(section):
            line = where.get((section, key), "?")
            conv = SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"{source}:{line}: unknown key {section}.{key}")
            try:
                values[(section, key)] = conv(raw)
            except (ValueError, SpinGasError) as exc:
                raise ConfigError(f"{source}:{line}: {section}.{key}: {exc}") from None
    return values


def build_config(values: dict, source: str = "<flags>") -> RunConfig:
    """Validated :class:`RunConfig` from ``{(section, key): value}``."""
    get = values.get
    preset = get(("run", "preset"))
    manual = [k for k in values if k[0] in ("model", "quantum")]
    if preset and manual:
        keys = ", ".join(f"{s}.{k}" for s, k in sorted(manual))
        raise ConfigError(f"{source}: preset {preset!r} cannot be combined with a manual model section ({keys})")
    if preset:
        plan = get_preset(preset).plan
    else:
        missing = [k for k in ("kind", "particles") if ("model", k) not in values]
        if missing:
            raise ConfigError(f"{source}: missing required fields: "
                              + ", ".join(f"model.{k}" for k in missing)
                              + " (or give run.preset)")
        model = ModelSpec(
            get(("model", "kind")), get(("model", "particles")), get(("model", "sites")),
            get(("model", "placement"), "block"), get(("model", "start"), 0),
            get(("model", "diameter"), 1.0), get(("model", "box"), (150.0, 150.0, 150.0)),
            get(("model", "mass"), 1.0), get(("model", "velocity_sigma"), 0.32))
        plan = TrajectoryPlan(model, get(("quantum", "coupling"), Coupling.XX),
                              get(("quantum", "eta"), 0.1), get(("quantum", "engine"), "auto"),
                              get(("quantum", "initial"), InitialState()))
    overrides = {k: v for (s, k), v in values.items() if s == "ensemble"}
    if ("run", "seed") in values:
        overrides["seed"] = values[("run", "seed")]
    plan = replace(plan, **overrides)
    try:
        plan.validate()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    workers = get(("run", "workers"), 1)
    if workers < 1:
        raise ConfigError(f"{source}: run.workers must be positive")
    out = get(("run", "out"))
    dump = get(("run", "dump_events"))
    replay = get(("run", "replay_events"))
    cfg = RunConfig(plan, preset, Path(out) if out else None, get(("run", "force"), False), workers,
                    get(("run", "deterministic"), True), Path(dump) if dump else None,
                    Path(replay) if replay else None, get(("run", "observables"), SERIES),
                    get(("run", "snapshot_steps")), get(("run", "pair_tables"), False))
    if cfg.snapshot_steps is not None:
        times = set(plan.schedule().tolist())
        bad = [t for t in cfg.snapshot_steps if t not in times]
        if bad:
            raise ConfigError(f"{source}: run.snapshot_steps {bad} are not sample times")
    return cfg


def parse_config(path=None, text: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Parse a config file (or text) and apply ``{(section, key): value}`` overrides.

    Override values are already typed (command-line flags). A preset given as
    an override replaces any preset named in the file.
    """
    values: dict = {}
    source = "<flags>"
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    if text is not None:
        source = source if path is not None else "<config>"
        values = _read_sections(text, source)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values, source)


# ------------------------------------------------------------------ serialization

def plan_to_dict(plan: TrajectoryPlan) -> dict:
    m = plan.model
    return {
        "model": {"kind": m.kind, "particles": m.n, "sites": m.length, "placement": m.placement,
                  "start": m.start, "diameter": m.diameter, "box": list(m.box), "mass": m.mass,
                  "velocity_sigma": m.velocity_sigma},
        "quantum": {"coupling": plan.coupling.value, "eta": plan.eta, "engine": plan.resolved_engine,
                    "initial": str(plan.initial)},
        "ensemble": {"steps": plan.steps, "n_traj": plan.n_traj, "seed": plan.seed,
                     "sample_times": None if plan.sample_times is None else list(plan.sample_times),
                     "density": plan.accumulate_density, "track_variance": plan.track_variance,
                     "max_samples": plan.max_samples, "chunk_size": plan.chunk_size},
    }


def config_to_ini(cfg: RunConfig) -> str:
    """A self-contained config (preset resolved to manual sections) reproducing ``cfg``."""
    d = plan_to_dict(cfg.plan)
    lines = ["[run]", f"seed = {cfg.plan.seed}", f"deterministic = {str(cfg.deterministic).lower()}",
             f"observables = {', '.join(cfg.observables)}"]
    if cfg.snapshot_steps is not None:
        lines.append("snapshot_steps = " + ", ".join(str(t) for t in cfg.snapshot_steps))
    if cfg.pair_tables:
        lines.append("pair_tables = true")
    lines += ["", "[model]"]
    for k, v in d["model"].items():
        if v is None:
            continue
        lines.append(f"{k} = {', '.join(repr(x) for x in v) if isinstance(v, list) else v}")
    lines += ["", "[quantum]"] + [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}"
                                  for k, v in d["quantum"].items()]
    lines += ["", "[ensemble]"]
    for k, v in d["ensemble"].items():
        if k == "seed" or v is None:
            continue
        if isinstance(v, bool):
            v = str(v).lower()
        elif isinstance(v, list):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
