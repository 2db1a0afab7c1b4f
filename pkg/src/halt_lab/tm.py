"""Random Turing machines on a one-way infinite binary tape.

Model: symbols {0, 1} with blank 0; every (state, symbol) entry is a triple
(write, move, next) where next ranges over the states and HALT.  A move left
from cell 0 falls off the tape, even on a transition into HALT.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterator, Sequence

HALT = 0
LEFT, RIGHT = "L", "R"
OUTCOMES = ("halt", "fall_off", "frontier_repeat", "config_cycle", "unknown")

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, states: int, index: int) -> int:
    return splitmix64(splitmix64(splitmix64(master & _MASK) ^ states) ^ index)


@dataclass(frozen=True)
class TmMachine:
    states: int
    # delta[2 * (state - 1) + symbol] = (write, move, next); next == HALT stops
    delta: tuple[tuple[int, str, int], ...]
    seed: int | None = None

    def __post_init__(self):
        if self.states < 1 or len(self.delta) != 2 * self.states:
            raise ValueError("transition table must have 2 entries per state")
        for write, move, nxt in self.delta:
            if write not in (0, 1) or move not in (LEFT, RIGHT) or not 0 <= nxt <= self.states:
                raise ValueError(f"bad transition {(write, move, nxt)}")

    def entry(self, state: int, symbol: int) -> tuple[int, str, int]:
        return self.delta[2 * (state - 1) + symbol]


def sample_machine(states: int, seed: int) -> TmMachine:
    """Each entry uniform over {0,1} x {L,R} x ({1..states} + HALT), independently."""
    if states < 1:
        raise ValueError("a machine needs at least one state")
    rng = random.Random(seed)
    delta = tuple(
        (rng.randrange(2), (LEFT, RIGHT)[rng.randrange(2)], rng.randrange(states + 1))
        for _ in range(2 * states)
    )
    return TmMachine(states, delta, seed)


def all_entries(states: int) -> list[tuple[int, str, int]]:
    return [(w, mv, nx) for w in (0, 1) for mv in (LEFT, RIGHT) for nx in range(states + 1)]


def enumerate_machines(states: int) -> Iterator[TmMachine]:
    """Every machine with ``states`` states; (4 (states+1)) ** (2 states) of them."""
    entries = all_entries(states)
    for delta in itertools.product(entries, repeat=2 * states):
        yield TmMachine(states, delta)


@dataclass(frozen=True)
class TmOutcome:
    kind: str
    steps: int = 0
    mu: int = 0
    lam: int = 0


class _Run:
    __slots__ = ("m", "state", "head", "tape", "steps")

    def __init__(self, m: TmMachine):
        self.m = m
        self.state = 1
        self.head = 0
        self.tape = bytearray(1)
        self.steps = 0

    def key(self) -> tuple:
        return self.state, self.head, bytes(self.tape.rstrip(b"\0"))

    def step(self) -> str | None:
        """One transition; returns "halt" or "fall_off" when the run ends."""
        write, move, nxt = self.m.delta[2 * (self.state - 1) + self.tape[self.head]]
        self.tape[self.head] = write
        self.steps += 1
        if move == LEFT:
            if self.head == 0:
                return "fall_off"
            self.head -= 1
        else:
            self.head += 1
            if self.head == len(self.tape):
                self.tape.append(0)
        if nxt == HALT:
            return "halt"
        self.state = nxt
        return None


def run_tm(m: TmMachine, budget: int) -> TmOutcome:
    """Simulate until the machine halts, falls off, or is certified to diverge.

    Frontier certificate: the head steps onto a never-visited cell (so it and
    everything right of it are blank) in a state q, having done the same
    earlier at cell c in state q without revisiting any cell left of c since.
    The stretch between the two visits then replays forever, shifted right.
    Full configuration repeats are found with Brent's method.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    delta = m.delta
    state, head, steps = 1, 0, 0
    tape = bytearray(1)
    frontier = 0
    # records of (cell, state) frontier visits still valid, cells increasing
    stack: list[tuple[int, int]] = []
    seen: dict[int, int] = {}
    t_state, t_head, t_tape = 1, 0, b""
    power, lam = 1, 0
    while steps < budget:
        write, move, nxt = delta[2 * (state - 1) + tape[head]]
        tape[head] = write
        steps += 1
        if move == LEFT:
            if head == 0:
                return TmOutcome("fall_off", steps)
            head -= 1
            while stack and stack[-1][0] > head:
                cell, q = stack.pop()
                if seen.get(q) == cell:
                    del seen[q]
        else:
            head += 1
            if head == len(tape):
                tape.append(0)
        if nxt == HALT:
            return TmOutcome("halt", steps)
        state = nxt
        if head > frontier:
            frontier = head
            if state in seen:
                return TmOutcome("frontier_repeat", steps)
            seen[state] = head
            stack.append((head, state))
        lam += 1
        if state == t_state and head == t_head and tape.rstrip(b"\0") == t_tape:
            return TmOutcome("config_cycle", steps, _first_repeat(m, lam), lam)
        if lam == power:
            t_state, t_head, t_tape = state, head, bytes(tape.rstrip(b"\0"))
            power, lam = power * 2, 0
    return TmOutcome("unknown", steps)


def _first_repeat(m: TmMachine, lam: int) -> int:
    a, b = _Run(m), _Run(m)
    for _ in range(lam):
        b.step()
    mu = 0
    while a.key() != b.key():
        a.step()
        b.step()
        mu += 1
    return mu


def verify_outcome(m: TmMachine, outcome: TmOutcome) -> bool:
    """Re-execute with a plain loop and re-check the certificate."""
    if outcome.kind in ("halt", "fall_off"):
        r = _Run(m)
        for _ in range(outcome.steps - 1):
            if r.step() is not None:
                return False
        return r.step() == outcome.kind
    if outcome.kind == "config_cycle":
        a, b = _Run(m), _Run(m)
        for _ in range(outcome.mu):
            if a.step() is not None:
                return False
        for _ in range(outcome.mu + outcome.lam):
            if b.step() is not None:
                return False
        return outcome.lam >= 1 and a.key() == b.key()
    if outcome.kind == "frontier_repeat":
        return _check_frontier(m, outcome.steps)
    return True


def _check_frontier(m: TmMachine, steps: int) -> bool:
    # positions/states after each step, then look for the certifying pair ending at ``steps``
    r = _Run(m)
    trace = [(0, 1)]
    for _ in range(steps):
        if r.step() is not None:
            return False
        trace.append((r.head, r.state))
    head, state = trace[-1]
    if head <= max(h for h, _ in trace[:-1]):
        return False
    best = 0
    for t in range(1, steps):
        h, q = trace[t]
        fresh = h > max(x for x, _ in trace[:t])
        if fresh and q == state and min(x for x, _ in trace[t:]) >= h:
            best = t
    return best > 0


@dataclass(frozen=True)
class FalloffRow:
    states: int
    samples: int
    counts: dict[str, int]

    def fraction(self, kind: str = "fall_off") -> float:
        return self.counts[kind] / self.samples


def _tally(outcomes: Sequence[TmOutcome]) -> dict[str, int]:
    counts = dict.fromkeys(OUTCOMES, 0)
    for o in outcomes:
        counts[o.kind] += 1
    return counts


def _run_batch(args: tuple[int, int, int, int, int]) -> dict[str, int]:
    states, seed, start, stop, budget = args
    return _tally([run_tm(sample_machine(states, derive_seed(seed, states, k)), budget) for k in range(start, stop)])


def falloff_experiment(
    states_list: Sequence[int],
    samples: int,
    seed: int,
    budget: int = 10_000,
    workers: int = 1,
) -> list[FalloffRow]:
    """Outcome counts per state count.  Sample k uses a seed derived from (seed, states, k),
    so the counts do not depend on how samples are split across workers."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rows = []
    for states in states_list:
        chunk = max(1, -(-samples // max(1, workers * 4)))
        jobs = [(states, seed, a, min(a + chunk, samples), budget) for a in range(0, samples, chunk)]
        if workers > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_run_batch, jobs))
        else:
            parts = [_run_batch(j) for j in jobs]
        counts = dict.fromkeys(OUTCOMES, 0)
        for part in parts:
            for k, v in part.items():
                counts[k] += v
        rows.append(FalloffRow(states, samples, counts))
    return rows


def exhaustive_row(states: int, budget: int = 10_000) -> FalloffRow:
    machines = list(enumerate_machines(states))
    return FalloffRow(states, len(machines), _tally([run_tm(m, budget) for m in machines]))


def wilson_interval(successes: int, total: int, confidence: float = 0.95) -> tuple[float, float]:
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return centre - half, centre + half
