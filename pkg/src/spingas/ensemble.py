"""Trajectory evolution and Monte Carlo ensemble averaging.

A :class:`TrajectoryPlan` fixes the classical model, the coupling, the quantum
initial state and the sampling schedule. Every trajectory starts from the same
classical and quantum initial condition; trajectory ``s`` draws its classical
randomness from the stream keyed by ``(seed, s)``.

Ensemble reduction is deterministic: trajectories are grouped in fixed index
chunks, each chunk is summed in index order, and chunk partials are merged by a
pairwise tree over the chunk index. The result therefore does not depend on the
number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from itertools import groupby

import numpy as np

from . import kernels
from .classical import (
    BallState,
    InteractionEvent,
    LatticeConfiguration,
    billiard_init,
    billiard_run,
    block_configuration,
    chain_pairs,
    draw_moves,
    events_to_segments,
    lattice_segments,
    random_configuration,
    random_pair_sequence,
)
from .engines import (
    FULL_CAP,
    FULL_DENSITY_CAP,
    Coupling,
    apply_full,
    apply_subspace,
    basis_state,
    embed_subspace,
    excitation_state,
    lattice_eigen_tables,
    superposition_state,
)
from .errors import CapacityError, ConfigError, InvalidInputError, NumericalInvariantError
from .linalg import diagonal_shannon_entropy, von_neumann_entropy
from .observables import (
    concurrence_table,
    full_concurrence_table,
    full_single_particle_probs,
    inhomogeneity,
    single_particle_probs,
    total_concurrence,
)
from .rng import setup_rng, trajectory_rng

MODEL_KINDS = ("random", "chain", "lattice", "billiard")
DENSE_SAMPLING_LIMIT = 2000
SPARSE_STRIDE = 100
DEFAULT_CHUNK = 64


@dataclass(frozen=True)
class ModelSpec:
    """Classical model parameters.

    ``placement`` is ``block`` (particles on consecutive sites from ``start``)
    or ``random`` (uniform, drawn once from the global seed).
    """

    kind: str
    n: int
    length: int | None = None
    placement: str = "block"
    start: int = 0
    diameter: float = 1.0
    box: tuple = (150.0, 150.0, 150.0)
    mass: float = 1.0
    velocity_sigma: float = 0.32

    def validate(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model: unknown kind {self.kind!r} (expected one of {', '.join(MODEL_KINDS)})")
        if self.n < 1:
            raise ConfigError("model: particle count must be positive")
        if self.kind in ("random", "chain") and self.n < 2:
            raise ConfigError(f"model: {self.kind} model needs at least two particles")
        if self.kind == "lattice":
            if self.length is None or self.length < self.n:
                raise ConfigError("model: lattice length must be given and at least the particle count")
            if self.placement not in ("block", "random"):
                raise ConfigError(f"model: unknown placement {self.placement!r}")
        if self.kind == "billiard":
            if self.diameter <= 0 or len(self.box) != 3 or min(self.box) <= self.diameter:
                raise ConfigError("model: billiard box must exceed the ball diameter on every axis")
            if self.velocity_sigma < 0 or self.mass <= 0:
                raise ConfigError("model: billiard needs mass > 0 and velocity sigma >= 0")


@dataclass(frozen=True)
class InitialState:
    """Quantum initial state.

    kinds: ``excitation`` (qubit ``label`` in |1>, 0-based), ``bits`` (a
    computational basis string, qubit 0 first) and ``superposition``
    (c0 |0...0> + c1 |10...0>).
    """

    kind: str = "excitation"
    label: int = 0
    bits: str = ""
    c0: complex = 0.0
    c1: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))

    @classmethod
    def parse(cls, text: str) -> "InitialState":
        """Parse ``excitation:K`` (1-based), ``bits:1000``, ``superposition:C0,C1`` or a bare bit string."""
        text = text.strip()
        kind, _, arg = text.partition(":")
        try:
            if kind == "excitation":
                return cls("excitation", label=int(arg) - 1)
            if kind == "bits":
                return cls("bits", bits=arg.strip())
            if kind == "superposition":
                c0, c1 = (complex(x.strip().replace(" ", "")) for x in arg.split(","))
                return cls("superposition", c0=c0, c1=c1)
        except ValueError as exc:
            raise ConfigError(f"initial state: cannot parse {text!r}") from exc
        if text and not set(text) - {"0", "1"}:
            return cls("bits", bits=text)
        raise ConfigError(f"initial state: cannot parse {text!r}")

    def __str__(self) -> str:
        if self.kind == "excitation":
            return f"excitation:{self.label + 1}"
        if self.kind == "bits":
            return f"bits:{self.bits}"
        return f"superposition:{self.c0!r},{self.c1!r}".replace("(", "").replace(")", "")

    @property
    def in_subspace(self) -> bool:
        if self.kind == "excitation":
            return True
        return self.kind == "bits" and self.bits.count("1") == 1


@dataclass(frozen=True)
class TrajectoryPlan:
    model: ModelSpec
    coupling: Coupling = Coupling.XX
    eta: float = 0.1
    engine: str = "auto"
    initial: InitialState = InitialState()
    steps: int = 100
    seed: int = 0
    n_traj: int = 1
    sample_times: tuple | None = None
    density: bool | None = None
    track_variance: bool = False
    max_samples: int = 200
    chunk_size: int = DEFAULT_CHUNK

    # -------------------------------------------------------------- derived settings

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def resolved_engine(self) -> str:
        if self.engine != "auto":
            return self.engine
        if self.coupling is Coupling.XX and self.initial.in_subspace:
            return "subspace"
        return "full"

    @property
    def accumulate_density(self) -> bool:
        return self.n_traj > 1 if self.density is None else bool(self.density)

    @property
    def dim(self) -> int:
        return self.n if self.resolved_engine == "subspace" else 1 << self.n

    def validate(self) -> "TrajectoryPlan":
        self.model.validate()
        if not isinstance(self.coupling, Coupling):
            raise ConfigError(f"coupling: expected a Coupling, got {self.coupling!r}")
        if not math.isfinite(self.eta):
            raise ConfigError("eta must be finite")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be positive")
        if self.chunk_size < 1 or self.max_samples < 1:
            raise ConfigError("chunk_size and max_samples must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        engine = self.resolved_engine
        if engine not in ("subspace", "full"):
            raise ConfigError(f"engine: unknown engine {self.engine!r}")
        init = self.initial
        if init.kind == "excitation" and not 0 <= init.label < self.n:
            raise ConfigError(f"initial state: excitation label {init.label + 1} outside 1..{self.n}")
        if init.kind == "bits" and len(init.bits) != self.n:
            raise ConfigError(f"initial state: bit string length {len(init.bits)} != {self.n} particles")
        if engine == "subspace":
            if self.coupling is not Coupling.XX:
                raise ConfigError("engine: the subspace engine supports only the XX coupling")
            if not init.in_subspace:
                raise ConfigError("engine: the subspace engine needs a single-excitation initial state")
        else:
            if self.n > FULL_CAP:
                raise CapacityError(f"full engine limited to {FULL_CAP} qubits, got {self.n}")
            if self.accumulate_density and self.n > FULL_DENSITY_CAP:
                raise CapacityError(
                    f"full-space density accumulation limited to {FULL_DENSITY_CAP} qubits, got {self.n}")
        if self.sample_times is not None:
            st = list(self.sample_times)
            if not st or st != sorted(set(st)) or st[0] < 0 or st[-1] > self.steps:
                raise ConfigError("sample_times must be sorted, unique and within 0..steps")
        return self

    def schedule(self) -> np.ndarray:
        """Sample times: every step up to the dense limit, then every 100th; capped for density runs."""
        if self.sample_times is not None:
            return np.asarray(self.sample_times, dtype=np.int64)
        T = self.steps
        stride = 1 if T <= DENSE_SAMPLING_LIMIT else SPARSE_STRIDE
        if self.accumulate_density and T // stride + 1 > self.max_samples:
            stride = max(stride, math.ceil(T / self.max_samples))
        times = np.arange(0, T + 1, stride, dtype=np.int64)
        if times[-1] != T:
            times = np.append(times, T)
        return times


# ------------------------------------------------------------------ initial conditions

def initial_vector(plan: TrajectoryPlan) -> np.ndarray:
    init, n = plan.initial, plan.n
    if plan.resolved_engine == "subspace":
        label = init.label if init.kind == "excitation" else init.bits.index("1")
        return excitation_state(n, label)
    if init.kind == "excitation":
        return embed_subspace(excitation_state(n, init.label))
    if init.kind == "bits":
        return basis_state(init.bits)
    return superposition_state(n, init.c0, init.c1)


def initial_classical(plan: TrajectoryPlan):
    """The shared classical initial condition (lattice configuration or ball state), or None."""
    m = plan.model
    if m.kind == "lattice":
        if m.placement == "random":
            return random_configuration(m.n, m.length, setup_rng(plan.seed, 0))
        return block_configuration(m.n, m.length, m.start)
    if m.kind == "billiard":
        return billiard_init(m.n, m.diameter, m.box, m.mass, m.velocity_sigma, setup_rng(plan.seed, 0))
    return None


# ------------------------------------------------------------------ trajectories

@dataclass
class TrajectoryResult:
    """Sampled output of one trajectory; ``states`` has one row per sample time."""

    times: np.ndarray
    states: np.ndarray
    ctot: np.ndarray
    probs: np.ndarray

    @property
    def sigma2(self) -> np.ndarray:
        return _row_variance(self.probs)


def _row_variance(p: np.ndarray) -> np.ndarray:
    return np.var(p, axis=-1)


def trajectory_segments(plan: TrajectoryPlan, s: int, classical=None):
    """Run-length encoded interaction stream ``[(pairs, count), ...]`` of trajectory ``s``."""
    m, T = plan.model, plan.steps
    if m.kind == "chain":
        return [(chain_pairs(m.n), T)] if T else []
    rng = trajectory_rng(plan.seed, s)
    if m.kind == "random":
        seq = random_pair_sequence(m.n, T, rng)
        return [(((int(a), int(b)),), sum(1 for _ in grp))
                for (a, b), grp in groupby(map(tuple, seq.tolist()))]
    if classical is None:
        classical = initial_classical(plan)
    if m.kind == "lattice":
        choices, dirs = draw_moves(m.n, T, rng)
        return lattice_segments(classical.copy(), choices, dirs)
    run = billiard_run(classical, T)
    return events_to_segments(run.events)


def trajectory_events(plan: TrajectoryPlan, s: int, classical=None) -> list[InteractionEvent]:
    """Interaction events (steps 1..T) of trajectory ``s``."""
    out = []
    t = 1
    for pairs, count in trajectory_segments(plan, s, classical):
        for _ in range(count):
            out.append(InteractionEvent(t, pairs))
            t += 1
    return out


def _observe(plan: TrajectoryPlan, states: np.ndarray, times: np.ndarray) -> TrajectoryResult:
    if plan.resolved_engine == "subspace":
        probs = np.abs(states) ** 2
        a = np.sqrt(probs)
        ctot = a.sum(axis=1) ** 2 - probs.sum(axis=1)
    else:
        probs = np.array([full_single_particle_probs(x) for x in states])
        if plan.n_traj == 1:
            ctot = np.array([np.triu(full_concurrence_table(x), 1).sum() for x in states])
        else:
            ctot = np.full(len(times), np.nan)
    return TrajectoryResult(times, states, ctot, probs)


def evolve_segments(plan: TrajectoryPlan, psi: np.ndarray, segments, times: np.ndarray) -> np.ndarray:
    """Apply a run-length encoded stream to ``psi`` and return the sampled states.

    Consecutive runs with the same pairs are merged into one exponential; runs
    are split only at sample times.
    """
    psi = np.array(psi, dtype=np.complex128)
    out = np.empty((len(times), len(psi)), dtype=np.complex128)
    subspace = plan.resolved_engine == "subspace"
    kind, eta = plan.coupling, plan.eta
    j, t = 0, 0
    while j < len(times) and times[j] == 0:
        out[j] = psi
        j += 1
    merged = [(p, sum(c for _, c in grp)) for p, grp in groupby(segments, key=lambda x: x[0])]
    for pairs, count in merged:
        while count > 0 and j < len(times):
            take = min(count, int(times[j]) - t)
            if take > 0:
                if subspace:
                    apply_subspace(psi, pairs, eta, take)
                else:
                    psi = apply_full(psi, pairs, kind, eta, take)
                t += take
                count -= take
            if t == times[j]:
                out[j] = psi
                j += 1
        if j == len(times):
            break
    if j < len(times):
        raise InvalidInputError(f"event stream ends at step {t}, before sample time {times[j]}")
    return out


def run_trajectory(plan: TrajectoryPlan, s: int, *, classical=None, events=None,
                   times: np.ndarray | None = None) -> TrajectoryResult:
    """Evolve trajectory ``s`` and sample it; deterministic in ``(plan.seed, s)``.

    ``events`` replays a recorded interaction stream instead of generating one.
    """
    if times is None:
        times = plan.schedule()
    psi = initial_vector(plan)
    m = plan.model
    if events is not None:
        if len(events) < plan.steps:
            raise InvalidInputError(f"event stream has {len(events)} steps, plan needs {plan.steps}")
        states = evolve_segments(plan, psi, events_to_segments(events[:plan.steps]), times)
        return _observe(plan, states, times)
    if classical is None:
        classical = initial_classical(plan)
    engine = plan.resolved_engine
    fast = m.kind == "lattice" and (engine == "subspace" or plan.coupling is Coupling.ISING)
    if fast:
        states = np.empty((len(times), len(psi)), dtype=np.complex128)
        choices, dirs = draw_moves(m.n, plan.steps, trajectory_rng(plan.seed, s))
        occ, sites = classical.occupancy(), classical.sites.copy()
        view, out = psi.view(np.float64), states.view(np.float64)
        if engine == "subspace":
            tables = lattice_eigen_tables(m.n)
            kernels.lattice_xx_run(view, occ, sites, choices, dirs, plan.eta, *tables, times, out)
        else:
            kernels.lattice_ising_run(view, occ, sites, choices, dirs, plan.eta, times, out)
        return _observe(plan, states, times)
    segments = trajectory_segments(plan, s, classical)
    return _observe(plan, evolve_segments(plan, psi, segments, times), times)


# ------------------------------------------------------------------ accumulation

@dataclass
class EnsembleAccumulator:
    """Running sums over trajectories at each sample time.

    ``rho_sum[j]`` is the sum of |psi><psi|; ``re2``/``im2`` hold sums of the
    squared real/imaginary parts of the same elements when variance tracking
    is on.
    """

    times: np.ndarray
    dim: int
    density: bool = True
    track_variance: bool = False
    count: int = 0
    rho_sum: np.ndarray | None = None
    re2: np.ndarray | None = None
    im2: np.ndarray | None = None
    ctot_sum: np.ndarray = field(default=None)
    probs_sum: np.ndarray = field(default=None)
    sigma2_sum: np.ndarray = field(default=None)

    def __post_init__(self):
        S, d = len(self.times), self.dim
        if self.ctot_sum is None:
            self.ctot_sum = np.zeros(S)
        if self.sigma2_sum is None:
            self.sigma2_sum = np.zeros(S)
        if self.density and self.rho_sum is None:
            self.rho_sum = np.zeros((S, d, d), dtype=np.complex128)
            if self.track_variance:
                self.re2 = np.zeros((S, d, d))
                self.im2 = np.zeros((S, d, d))

    @classmethod
    def for_plan(cls, plan: TrajectoryPlan) -> "EnsembleAccumulator":
        return cls(plan.schedule(), plan.dim, plan.accumulate_density, plan.track_variance)

    def empty_like(self) -> "EnsembleAccumulator":
        return EnsembleAccumulator(self.times, self.dim, self.density, self.track_variance)

    def accumulate(self, results) -> "EnsembleAccumulator":
        """Add one :class:`TrajectoryResult` or a list of them (summed in the given order)."""
        if isinstance(results, TrajectoryResult):
            results = [results]
        if not results:
            return self
        states = np.stack([r.states for r in results])
        if states.shape[1:] != (len(self.times), self.dim):
            raise InvalidInputError(
                f"trajectory output shape {states.shape[1:]} does not match accumulator "
                f"({len(self.times)}, {self.dim})")
        self.ctot_sum += np.stack([r.ctot for r in results]).sum(axis=0)
        self.sigma2_sum += np.stack([_row_variance(r.probs) for r in results]).sum(axis=0)
        if self.density:
            for j in range(len(self.times)):
                x = states[:, j, :]
                outer = x[:, :, None] * x.conj()[:, None, :]
                self.rho_sum[j] += outer.sum(axis=0)
                if self.track_variance:
                    self.re2[j] += (outer.real ** 2).sum(axis=0)
                    self.im2[j] += (outer.imag ** 2).sum(axis=0)
        else:
            p = np.stack([r.probs for r in results]).sum(axis=0)
            self.probs_sum = p if self.probs_sum is None else self.probs_sum + p
        self.count += len(results)
        return self

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        """Sum of two accumulators (returns a new object)."""
        if not np.array_equal(self.times, other.times) or self.dim != other.dim \
                or self.density != other.density or self.track_variance != other.track_variance:
            raise InvalidInputError("cannot merge accumulators with different layouts")

        def add(a, b):
            if a is None:
                return None if b is None else b.copy()
            return a.copy() if b is None else a + b

        return EnsembleAccumulator(
            self.times, self.dim, self.density, self.track_variance, self.count + other.count,
            add(self.rho_sum, other.rho_sum), add(self.re2, other.re2), add(self.im2, other.im2),
            self.ctot_sum + other.ctot_sum, add(self.probs_sum, other.probs_sum),
            self.sigma2_sum + other.sigma2_sum)


def tree_merge(parts: list[EnsembleAccumulator]) -> EnsembleAccumulator:
    """Pairwise merge in list order: ((p0+p1)+(p2+p3))+..."""
    if not parts:
        raise InvalidInputError("nothing to merge")
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass
class EnsembleResult:
    """Finalized per-sample-time ensemble observables."""

    times: np.ndarray
    count: int
    cbar: np.ndarray
    mean_sigma2: np.ndarray
    probs: np.ndarray
    sigma2: np.ndarray
    rho: np.ndarray | None = None
    entropy: np.ndarray | None = None
    diag_entropy: np.ndarray | None = None
    ctot_rho: np.ndarray | None = None
    pair_tables: np.ndarray | None = None
    subspace: bool = True


def finalize(acc: EnsembleAccumulator, subspace: bool = True, pair_tables: bool = False,
             atol: float = 1e-9) -> EnsembleResult:
    """Normalize the sums and evaluate entropies, inhomogeneity and concurrences of rho(t)."""
    if acc.count < 1:
        raise InvalidInputError("cannot finalize an empty accumulator")
    c = acc.count
    cbar = acc.ctot_sum / c
    mean_sigma2 = acc.sigma2_sum / c
    if not acc.density:
        probs = acc.probs_sum / c
        return EnsembleResult(acc.times, c, cbar, mean_sigma2, probs,
                              np.array([inhomogeneity(p) for p in probs]), subspace=subspace)
    rho = acc.rho_sum / c
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
    S = len(acc.times)
    entropy = np.empty(S)
    diag_entropy = np.empty(S)
    ctot_rho = np.empty(S)
    tables = [] if pair_tables else None
    probs = []
    for j in range(S):
        r = rho[j]
        tr = np.trace(r).real
        if abs(tr - 1.0) > atol * max(c, 1):
            raise NumericalInvariantError(f"ensemble trace {tr!r} at sample {acc.times[j]}")
        entropy[j] = von_neumann_entropy(r)
        diag_entropy[j] = diagonal_shannon_entropy(r)
        if subspace:
            probs.append(single_particle_probs(r))
            ctot_rho[j] = total_concurrence(r)
            if pair_tables:
                tables.append(concurrence_table(r))
        else:
            probs.append(full_single_particle_probs(r))
            if pair_tables or r.shape[0] <= 64:
                tab = full_concurrence_table(r)
                ctot_rho[j] = np.triu(tab, 1).sum()
                if pair_tables:
                    tables.append(tab)
            else:
                ctot_rho[j] = np.nan
    probs = np.array(probs)
    return EnsembleResult(acc.times, c, cbar, mean_sigma2, probs,
                          np.array([inhomogeneity(p) for p in probs]), rho, entropy, diag_entropy,
                          ctot_rho, np.array(tables) if pair_tables else None, subspace)


@dataclass
class ConvergenceReport:
    times: np.ndarray
    variance: np.ndarray
    sem: np.ndarray

    @property
    def max_sem(self) -> np.ndarray:
        return self.sem.reshape(len(self.times), -1).max(axis=1)


def convergence_monitor(acc: EnsembleAccumulator, window: int | None = None) -> ConvergenceReport:
    """Element-wise variance of |psi><psi| across trajectories and the standard error of rho.

    ``variance`` is the population variance of the complex element (real plus
    imaginary parts); ``window`` keeps only the last ``window`` sample times.
    """
    if acc.count < 2:
        raise InvalidInputError("convergence monitoring needs at least two trajectories")
    if not acc.track_variance or acc.rho_sum is None:
        raise InvalidInputError("accumulator was built without variance tracking")
    sl = slice(None) if window is None else slice(-window, None)
    c = acc.count
    mean = acc.rho_sum[sl] / c
    var = acc.re2[sl] / c - mean.real ** 2 + acc.im2[sl] / c - mean.imag ** 2
    var = np.clip(var, 0.0, None)
    return ConvergenceReport(acc.times[sl], var, np.sqrt(var / c))


# ------------------------------------------------------------------ ensemble driver

def _chunk(plan: TrajectoryPlan, lo: int, hi: int, times: np.ndarray, classical,
           events=None) -> EnsembleAccumulator:
    acc = EnsembleAccumulator(times, plan.dim, plan.accumulate_density, plan.track_variance)
    results = []
    for s in range(lo, hi):
        ev = None if events is None else events[s - lo]
        results.append(run_trajectory(plan, s, classical=classical, events=ev, times=times))
    return acc.accumulate(results)


def _chunk_task(args):
    return _chunk(*args)


def run_ensemble(plan: TrajectoryPlan, workers: int = 1, events=None,
                 deterministic: bool = True) -> EnsembleAccumulator:
    """Run all trajectories and return the merged accumulator.

    ``events`` optionally gives one recorded interaction stream per trajectory.
    In deterministic mode the result does not depend on ``workers``; otherwise
    partial results are merged in completion order.
    """
    plan.validate()
    if events is not None and len(events) != plan.n_traj:
        raise InvalidInputError(f"{len(events)} event streams for {plan.n_traj} trajectories")
    times = plan.schedule()
    classical = None if events is not None else initial_classical(plan)
    bounds = [(lo, min(lo + plan.chunk_size, plan.n_traj)) for lo in range(0, plan.n_traj, plan.chunk_size)]
    tasks = [(plan, lo, hi, times, classical, None if events is None else events[lo:hi])
             for lo, hi in bounds]
    if workers <= 1 or len(tasks) == 1:
        parts = [_chunk_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            if deterministic:
                parts = list(pool.map(_chunk_task, tasks))
            else:
                futures = [pool.submit(_chunk_task, t) for t in tasks]
                acc = None
                for fut in as_completed(futures):
                    part = fut.result()
                    acc = part if acc is None else acc.merge(part)
                return acc
    return tree_merge(parts)


def simulate(plan: TrajectoryPlan, workers: int = 1, pair_tables: bool = False, events=None,
             deterministic: bool = True) -> EnsembleResult:
    """Run the ensemble and finalize it."""
    acc = run_ensemble(plan, workers, events, deterministic)
    return finalize(acc, plan.resolved_engine == "subspace", pair_tables)
