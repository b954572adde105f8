"""Classical dynamics that decide which qubit pairs interact at each step.

Particles and qubits are labelled 0..n-1 internally; the text event format
uses 1-based labels. Four models are provided: uniformly random pairs, a static
periodic chain, the 1D lattice gas with on-site exclusion (periodic), and hard
spheres in a box (event-driven, exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import groupby
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .errors import ConsistencyError, InvalidInputError, PackingError, StasisError

Pair = tuple[int, int]


def normalize_pairs(pairs: Iterable[Sequence[int]]) -> tuple[Pair, ...]:
    """Sorted, de-duplicated unordered pairs ``(a, b)`` with ``a < b``."""
    out = set()
    for a, b in pairs:
        a, b = int(a), int(b)
        if a == b:
            raise InvalidInputError(f"pair ({a}, {b}) couples a qubit to itself")
        out.add((a, b) if a < b else (b, a))
    return tuple(sorted(out))


@dataclass(frozen=True)
class InteractionEvent:
    step: int
    pairs: tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", normalize_pairs(self.pairs))


# ------------------------------------------------------------------ random pairs / chain

def random_pairs_step(n: int, rng: np.random.Generator, step: int = 0) -> InteractionEvent:
    if n < 2:
        raise InvalidInputError("random pairs need at least two particles")
    a = int(rng.integers(n))
    b = int(rng.integers(n - 1))
    if b >= a:
        b += 1
    return InteractionEvent(step, ((a, b),))


def random_pair_sequence(n: int, steps: int, rng: np.random.Generator) -> np.ndarray:
    """``steps`` uniformly random unordered pairs, shape (steps, 2), sorted within rows."""
    if n < 2:
        raise InvalidInputError("random pairs need at least two particles")
    a = rng.integers(n, size=steps)
    b = rng.integers(n - 1, size=steps)
    b = b + (b >= a)
    return np.sort(np.stack([a, b], axis=1), axis=1)


def chain_pairs(n: int) -> tuple[Pair, ...]:
    if n < 2:
        raise InvalidInputError("a chain needs at least two particles")
    return normalize_pairs([(k, (k + 1) % n) for k in range(n)])


def chain_step(n: int, step: int = 0) -> InteractionEvent:
    return InteractionEvent(step, chain_pairs(n))


# ------------------------------------------------------------------ lattice gas

@dataclass
class LatticeConfiguration:
    """Particle ``k`` sits on site ``sites[k]`` of a periodic chain of ``length`` sites."""

    length: int
    sites: np.ndarray

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=np.int64).copy()
        n = len(self.sites)
        if n > self.length:
            raise InvalidInputError(f"{n} particles do not fit on {self.length} sites")
        if n and (self.sites.min() < 0 or self.sites.max() >= self.length):
            raise InvalidInputError("site index out of range")
        if len(np.unique(self.sites)) != n:
            raise InvalidInputError("two particles share a site")

    @property
    def n(self) -> int:
        return len(self.sites)

    def occupancy(self) -> np.ndarray:
        occ = np.full(self.length, -1, dtype=np.int64)
        occ[self.sites] = np.arange(self.n)
        return occ

    def neighbor_pairs(self) -> tuple[Pair, ...]:
        occ = self.occupancy()
        nxt = np.roll(occ, -1)
        both = (occ >= 0) & (nxt >= 0) & (occ != nxt)
        return normalize_pairs(zip(occ[both], nxt[both]))

    def copy(self) -> "LatticeConfiguration":
        return LatticeConfiguration(self.length, self.sites)


def block_configuration(n: int, length: int, start: int = 0) -> LatticeConfiguration:
    """Particles 0..n-1 on consecutive sites starting at ``start``."""
    return LatticeConfiguration(length, (start + np.arange(n)) % length)


def random_configuration(n: int, length: int, rng: np.random.Generator) -> LatticeConfiguration:
    """Uniformly random occupied sites; labels follow site order."""
    return LatticeConfiguration(length, np.sort(rng.choice(length, size=n, replace=False)))


def draw_moves(n: int, steps: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Particle choices and hop directions (1: +1 site, 0: -1 site) for ``steps`` steps."""
    return rng.integers(n, size=steps, dtype=np.int64), rng.integers(2, size=steps, dtype=np.int64)


def lattice_gas_step(cfg: LatticeConfiguration, rng: np.random.Generator, step: int = 0):
    """One hop attempt; returns ``(new_cfg, event)`` with pairs read after the hop."""
    new = cfg.copy()
    if new.n:
        k, d = int(rng.integers(new.n)), int(rng.integers(2))
        occ = new.occupancy()
        kernels.python_backend._hop(occ, new.sites, k, d)
    return new, InteractionEvent(step, new.neighbor_pairs())


def lattice_transition_probability(a: LatticeConfiguration, b: LatticeConfiguration) -> float:
    """Exact single-step probability P(a -> b) of the hop rule, by enumerating all moves."""
    n = a.n
    p = 0.0
    for k in range(n):
        for d in (0, 1):
            sites = a.sites.copy()
            kernels.python_backend._hop(a.occupancy(), sites, k, d)
            if np.array_equal(sites, b.sites):
                p += 1.0 / (2 * n)
    return p


def lattice_segments(cfg: LatticeConfiguration, choices, dirs) -> list[tuple[tuple[Pair, ...], int]]:
    """Run-length encoded event stream ``[(pairs, count), ...]``; mutates ``cfg``.

    A new run starts only when the neighbour-pair set changes.
    """
    occ = cfg.occupancy()
    sites = cfg.sites
    hop = kernels.python_backend._hop
    out: list[list] = []
    pairs = None
    for k, d in zip(choices.tolist(), dirs.tolist()):
        if hop(occ, sites, k, d) or pairs is None:
            new = normalize_pairs(kernels.python_backend.ising_pairs(occ))
            if new != pairs:
                pairs = new
                out.append([pairs, 0])
        out[-1][1] += 1
    return [(p, c) for p, c in out]


# ------------------------------------------------------------------ billiard

@dataclass
class BallState:
    pos: np.ndarray
    vel: np.ndarray
    diameter: float = 1.0
    mass: float = 1.0
    box: np.ndarray = field(default_factory=lambda: np.full(3, 150.0))
    time: float = 0.0

    def __post_init__(self):
        self.pos = np.ascontiguousarray(self.pos, dtype=np.float64).reshape(-1, 3)
        self.vel = np.ascontiguousarray(self.vel, dtype=np.float64).reshape(-1, 3)
        self.box = np.ascontiguousarray(np.broadcast_to(np.asarray(self.box, float), (3,)))

    @property
    def n(self) -> int:
        return len(self.pos)

    def kinetic_energy(self) -> float:
        return 0.5 * self.mass * float(np.sum(self.vel * self.vel))

    def momentum(self) -> np.ndarray:
        return self.mass * self.vel.sum(axis=0)

    def copy(self) -> "BallState":
        return replace(self, pos=self.pos.copy(), vel=self.vel.copy(), box=self.box.copy())

    def min_separation(self) -> float:
        if self.n < 2:
            return math.inf
        d = self.pos[:, None, :] - self.pos[None, :, :]
        r = np.sqrt(np.sum(d * d, axis=-1))
        return float(r[np.triu_indices(self.n, 1)].min())

    def check(self, atol: float = 1e-9) -> None:
        lo, hi = self.diameter / 2, self.box - self.diameter / 2
        if np.any(self.pos < lo - atol) or np.any(self.pos > hi + atol):
            raise ConsistencyError("ball centre outside the box")
        if self.min_separation() < self.diameter - atol:
            raise ConsistencyError("overlapping balls")


def billiard_init(n: int, diameter: float, box, mass: float, velocity_sigma: float,
                  rng: np.random.Generator, max_attempts: int = 10_000) -> BallState:
    """Uniform non-overlapping centres by rejection; Gaussian velocity components."""
    box = np.broadcast_to(np.asarray(box, float), (3,))
    lo, hi = diameter / 2, box - diameter / 2
    if np.any(hi < lo):
        raise PackingError("box smaller than one ball")
    pos = np.empty((n, 3))
    for k in range(n):
        for _ in range(max_attempts):
            trial = rng.uniform(lo, hi)
            if k == 0 or np.min(np.sum((pos[:k] - trial) ** 2, axis=1)) >= diameter * diameter:
                pos[k] = trial
                break
        else:
            raise PackingError(f"could not place ball {k} after {max_attempts} attempts")
    vel = rng.normal(0.0, velocity_sigma, size=(n, 3))
    return BallState(pos, vel, diameter, mass, box)


@dataclass(frozen=True)
class WallHit:
    particle: int
    axis: int


@dataclass(frozen=True)
class PairCollision:
    a: int
    b: int


def _contact_time(r, v, d2):
    bij = float(r @ v)
    if bij >= 0.0:
        return math.inf
    vv = float(v @ v)
    disc = bij * bij - vv * (float(r @ r) - d2)
    if disc <= 0.0:
        return math.inf
    return max((-bij - math.sqrt(disc)) / vv, 0.0)


def billiard_next_event(state: BallState):
    """Brute-force earliest event: ``(dt, WallHit | PairCollision)``.

    Ties go to pair collisions first, then to the lowest indices.
    """
    if not np.any(state.vel):
        raise StasisError("all balls are at rest")
    d2 = state.diameter ** 2
    lo, hi = state.diameter / 2, state.box - state.diameter / 2
    best = (math.inf, 1, 0, 0)
    for a in range(state.n):
        for b in range(a + 1, state.n):
            t = _contact_time(state.pos[a] - state.pos[b], state.vel[a] - state.vel[b], d2)
            best = min(best, (t, 0, a, b))
    for a in range(state.n):
        for ax in range(3):
            v = state.vel[a, ax]
            if v == 0.0:
                continue
            t = ((hi[ax] if v > 0 else lo) - state.pos[a, ax]) / v
            best = min(best, (max(t, 0.0), 1, a, ax))
    t, kind, a, b = best
    if t == math.inf:
        raise StasisError("no future event")
    return t, (PairCollision(a, b) if kind == 0 else WallHit(a, b))


def billiard_advance(state: BallState, dt: float) -> BallState:
    new = state.copy()
    new.pos += new.vel * dt
    new.time += dt
    return new


def billiard_resolve(state: BallState, event) -> BallState:
    """Apply an instantaneous elastic collision; positions must be at the event time."""
    new = state.copy()
    if isinstance(event, WallHit):
        new.vel[event.particle, event.axis] *= -1.0
        return new
    a, b = event.a, event.b
    r = new.pos[a] - new.pos[b]
    rr = float(r @ r)
    if abs(math.sqrt(rr) - new.diameter) > 1e-6:
        raise ConsistencyError(f"balls {a} and {b} are not in contact")
    f = float(r @ (new.vel[a] - new.vel[b])) / rr
    new.vel[a] -= f * r
    new.vel[b] += f * r
    return new


@dataclass
class BilliardRun:
    events: list[InteractionEvent]
    state: BallState
    total_events: int


def billiard_run(state: BallState, max_events: int, max_total_events: int | None = None,
                 first_step: int = 0) -> BilliardRun:
    """Advance until ``max_events`` pair collisions; wall hits advance but emit nothing."""
    new = state.copy()
    if new.n < 2 or max_events <= 0:
        return BilliardRun([], new, 0)
    if not np.any(new.vel):
        raise StasisError("all balls are at rest")
    if max_total_events is None:
        max_total_events = max(1_000_000, 1000 * max_events)
    out = np.zeros((max_events, 2), dtype=np.int64)
    npairs, nevents, elapsed, status = kernels.billiard_run(
        new.pos, new.vel, float(new.diameter), new.box, int(max_events), int(max_total_events), out)
    if status == 1:
        raise StasisError("no future event")
    if status == 2:
        raise ConsistencyError("pair collision resolved away from contact distance")
    new.time += elapsed
    events = [InteractionEvent(first_step + s, (tuple(out[s]),)) for s in range(npairs)]
    return BilliardRun(events, new, nevents)


# ------------------------------------------------------------------ event text format

def format_event(event: InteractionEvent) -> str:
    body = " ".join(f"{a + 1}-{b + 1}" for a, b in event.pairs)
    return f"t {event.step} : {body}".rstrip()


def parse_event_line(line: str, lineno: int = 0) -> InteractionEvent:
    try:
        head, _, body = line.partition(":")
        tag, step = head.split()
        if tag != "t":
            raise ValueError
        pairs = []
        for tok in body.split():
            a, b = tok.split("-")
            pairs.append((int(a) - 1, int(b) - 1))
        return InteractionEvent(int(step), pairs)
    except (ValueError, InvalidInputError) as exc:
        raise InvalidInputError(f"line {lineno}: malformed event {line!r}") from exc


def write_events(path, events: Iterable[InteractionEvent]) -> None:
    with open(path, "w") as fh:
        for ev in events:
            fh.write(format_event(ev) + "\n")


def read_events(path) -> list[InteractionEvent]:
    """Events of a single-stream file (comment lines starting with ``#`` are skipped)."""
    streams = read_event_streams(path)
    if len(streams) != 1:
        raise InvalidInputError(f"{path}: expected one event stream, found {len(streams)}")
    return streams[0]


def write_event_streams(path, streams) -> None:
    """Several streams in one file, each introduced by a ``# trajectory <s>`` line."""
    with open(path, "w") as fh:
        for s, events in enumerate(streams):
            fh.write(f"# trajectory {s}\n")
            for ev in events:
                fh.write(format_event(ev) + "\n")


def read_event_streams(path) -> list[list[InteractionEvent]]:
    streams: list[list[InteractionEvent]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                if text.split()[1:2] == ["trajectory"]:
                    streams.append([])
                continue
            if not streams:
                streams.append([])
            streams[-1].append(parse_event_line(text, lineno))
    return streams or [[]]


def segments_to_events(segments, first_step: int = 1) -> Iterator[InteractionEvent]:
    """Expand ``[(pairs, count), ...]``; the first event is step ``first_step``."""
    t = first_step
    for pairs, count in segments:
        for _ in range(count):
            yield InteractionEvent(t, pairs)
            t += 1


def events_to_segments(events: Iterable[InteractionEvent]):
    return [(pairs, sum(1 for _ in grp)) for pairs, grp in groupby(ev.pairs for ev in events)]
