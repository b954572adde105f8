"""Named experiment presets for the standard homogenization and randomization runs.

Each preset resolves to a :class:`~spingas.ensemble.TrajectoryPlan`. Labels in
descriptions are 1-based (``|50>`` is particle 50); plans use 0-based labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .engines import Coupling
from .ensemble import InitialState, ModelSpec, TrajectoryPlan
from .errors import ConfigError

N_TRAJ = 3000


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    plan: TrajectoryPlan


def _single(kind, n, steps, eta=0.1, label=0, seed=0, **model):
    return TrajectoryPlan(ModelSpec(kind, n, **model), Coupling.XX, eta,
                          initial=InitialState("excitation", label=label), steps=steps, seed=seed)


def _xx_ensemble(n, length, steps, placement="block"):
    return TrajectoryPlan(ModelSpec("lattice", n, length, placement=placement), Coupling.XX, 1.0,
                          initial=InitialState("excitation", label=0), steps=steps, n_traj=N_TRAJ)


def _ising(n, length, steps):
    return TrajectoryPlan(ModelSpec("lattice", n, length, placement="random"), Coupling.ISING, 1.0,
                          initial=InitialState("bits", bits="1" + "0" * (n - 1)), steps=steps,
                          n_traj=N_TRAJ)


def _build() -> dict[str, Preset]:
    out: list[Preset] = []

    def add(name, description, plan):
        out.append(Preset(name, description, plan))

    add("fig1-A", "fig1-A: random pairs, 100 particles, eta 0.1, initial |1>, 20000 steps",
        _single("random", 100, 20_000))
    add("fig1-B", "fig1-B: lattice gas, 100 particles, 150 sites, eta 0.1, initial |1>, 20000 steps",
        _single("lattice", 100, 20_000, length=150))
    add("fig1-C", "fig1-C: lattice gas, 100 particles, 200 sites, eta 0.1, initial |1>, 20000 steps",
        _single("lattice", 100, 20_000, length=200))
    add("fig2-chain", "fig2-chain: periodic XX chain, 100 qubits, eta 0.1, initial |50>, 300 steps",
        _single("chain", 100, 300, label=49))
    add("fig3-chain-obs", "fig3-chain-obs: periodic XX chain, 100 qubits, eta 0.1, initial |50>, "
        "300 steps (inhomogeneity and net concurrence)", _single("chain", 100, 300, label=49))
    add("fig4-lattice-prop", "fig4-lattice-prop: lattice gas, 100 particles, 150 sites, eta 0.1, "
        "initial |50>, 2000 steps", _single("lattice", 100, 2000, label=49, length=150))
    bb = "box 150×150×150, diameter 1, sigma 0.32, mass 1, 100 balls, eta 0.1, initial |1>, 20000 collisions"
    add("figBB-A", f"figBB-A: billiard, {bb}, seed 0", _single("billiard", 100, 20_000, seed=0))
    add("figBB-B", f"figBB-B: billiard, {bb}, seed 1", _single("billiard", 100, 20_000, seed=1))
    add("figBB-C", "figBB-C: random collision sequence control, 100 particles, eta 0.1, seed 0",
        _single("random", 100, 20_000, seed=0))
    add("figBB-D", "figBB-D: random collision sequence control, 100 particles, eta 0.1, seed 1",
        _single("random", 100, 20_000, seed=1))
    for tag, (n, length, steps) in {"P1": (8, 16, 1000), "P2": (16, 20, 2000),
                                    "P3": (32, 33, 5000), "P4": (32, 40, 5000)}.items():
        text = f"{n} particles, {length} sites, eta 1.0, {N_TRAJ} trajectories, {steps} steps"
        add(f"fig5-{tag}", f"fig5-{tag}: {text} (von Neumann entropy)", _xx_ensemble(n, length, steps))
        add(f"figCbar-{tag}", f"figCbar-{tag}: {text} (averaged net concurrence)",
            _xx_ensemble(n, length, steps))
    for tag, n in (("L1", 8), ("L2", 16)):
        add(f"fig-rhohomog-{tag}", f"fig-rhohomog-{tag}: {n} particles, 40 sites, eta 1.0, "
            f"{N_TRAJ} trajectories, 2000 steps (inhomogeneity of the ensemble state)",
            _xx_ensemble(n, 40, 2000))
    for n in (3, 4, 5, 6):
        add(f"fig6-ising-N{n}", f"fig6-ising-N{n}: Ising, {n} particles, {3 * n} sites (L=3N), random "
            f"placement, eta 1, {N_TRAJ} trajectories, initial |10...0>, 1000 steps", _ising(n, 3 * n, 1000))
    add("fig7-ising-dense", "fig7-ising-dense: Ising, 5 particles, 6 sites, random placement, eta 1, "
        f"{N_TRAJ} trajectories, initial |10000>, 200 steps", _ising(5, 6, 200))
    add("fig7-ising-dilute", "fig7-ising-dilute: Ising, 5 particles, 10 sites, random placement, eta 1, "
        f"{N_TRAJ} trajectories, initial |10000>, 200 steps", _ising(5, 10, 200))
    h = 1 / math.sqrt(2)
    add("eq18-superposition", "eq18-superposition: XX lattice gas, full space, 4 particles, 8 sites, "
        f"eta 1, c0 = c1 = 1/sqrt(2), {N_TRAJ} trajectories, 1000 steps",
        TrajectoryPlan(ModelSpec("lattice", 4, 8), Coupling.XX, 1.0, engine="full",
                       initial=InitialState("superposition", c0=h, c1=h), steps=1000, n_traj=N_TRAJ))
    return {p.name: p for p in out}


PRESETS = _build()
ALIASES = {name.replace("figCbar", "figC̄"): name for name in PRESETS if name.startswith("figCbar")}


def get_preset(name: str) -> Preset:
    key = ALIASES.get(name, name)
    try:
        return PRESETS[key]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; run 'spin-gas presets' for the list") from None


def preset_plan(name: str, **overrides) -> TrajectoryPlan:
    """The preset's plan with optional field overrides (e.g. ``seed``, ``n_traj``, ``steps``)."""
    plan = get_preset(name).plan
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(plan, **overrides).validate()


def list_presets() -> str:
    lines = []
    for p in PRESETS.values():
        if p.name == "figBB-A":
            lines.append("figBB: box 150×150×150, diameter 1, sigma 0.32, mass 1 "
                         "(A, B: billiard collisions; C, D: random collision controls)")
        lines.append(p.description)
    return "\n".join(lines) + "\n"
