"""Imperfect halting testers, tester-to-tester converters and failure-rate evaluation.

A tester maps an instance to a Decision: an Answer plus the number of
simulation steps spent reaching it.  Generic-case testers that would run
forever are cut off at a budget and answer NONTERMINATION, which is kept
distinct from a three-way "I don't know".
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .bf import (
    SYMBOLS,
    BFSyntaxError,
    Diverges,
    Halts,
    Instance,
    Machine,
    TapeCapExceeded,
    Variant,
    Verdict,
    run,
)
from .oracle import DEFAULT_ORACLE, OraclePolicy, SizeCensus, enumerate_instances, size_census


class Answer(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"  # three-way "I don't know"
    NONTERMINATION = "nontermination"  # generic-case tester ran out of budget

    @property
    def decided(self) -> bool:
        return self in (Answer.YES, Answer.NO)


THREE_WAY = "three-way"
GENERIC = "generic"
APPROXIMATING = "approximating"


@dataclass(frozen=True)
class Decision:
    answer: Answer
    cost: int = 0


class Tester:
    name: str = "tester"
    kind: str = THREE_WAY

    def decide(self, instance: Instance) -> Decision:
        raise NotImplementedError

    def __call__(self, instance: Instance) -> Answer:
        return self.decide(instance).answer

    def __repr__(self) -> str:
        return f"<{self.kind} tester {self.name}>"


def _compiles(instance: Instance) -> bool:
    try:
        instance.program
    except BFSyntaxError:
        return False
    return True


class DontKnowTester(Tester):
    """Answers "I don't know" on everything."""

    name = "dontknow"

    def decide(self, instance):
        return Decision(Answer.UNKNOWN)


class BoundedSimTester(Tester):
    """Simulate for at most ``budget`` steps: yes on a halt, no on a repeated configuration."""

    def __init__(self, budget: int, policy: OraclePolicy = DEFAULT_ORACLE):
        if budget < 1:
            raise ValueError("budget must be at least 1")
        self.budget = budget
        self.policy = policy
        self.name = f"bounded:{budget}"

    def decide(self, instance):
        if not _compiles(instance):
            return Decision(Answer.NO)
        v = run(instance, self.budget, self.policy.tape_cap, self.policy.semantics)
        if isinstance(v, Halts):
            return Decision(Answer.YES, v.steps)
        if isinstance(v, Diverges):
            return Decision(Answer.NO, v.mu + v.lam)
        return Decision(Answer.UNKNOWN, self.budget)


class SyntaxTester(Tester):
    """No when the text fails to compile, "I don't know" otherwise."""

    name = "syntax"

    def decide(self, instance):
        return Decision(Answer.UNKNOWN if _compiles(instance) else Answer.NO)


class CensusTester(Tester):
    """Dovetail every instance of the given size until ceil(i*p(n)/C) have halted.

    The answer is yes iff the instance is among those that halted.  Sizes below
    ``j`` are answered without simulating.  A dovetail that exceeds
    ``global_budget`` total steps stands in for one that never finishes.
    """

    def __init__(
        self,
        i: int,
        C: int,
        j: int = 0,
        mode: str = "threeway",
        global_budget: int = 10_000_000,
        policy: OraclePolicy = DEFAULT_ORACLE,
    ):
        if C < 1 or not 0 <= i <= C:
            raise ValueError("census tester needs C >= 1 and 0 <= i <= C")
        if mode not in ("threeway", "approximating"):
            raise ValueError(f"unknown census tester mode {mode!r}")
        self.i, self.C, self.j, self.mode = i, C, j, mode
        self.global_budget = global_budget
        self.policy = policy
        self.kind = THREE_WAY if mode == "threeway" else APPROXIMATING
        self.name = f"census:{i},{C},{j},{mode}"
        self._runs: dict[tuple[Variant, int], tuple[frozenset[Instance] | None, int]] = {}

    def target(self, p: int) -> int:
        return -(-self.i * p // self.C)

    def dovetail(self, variant: Variant, n: int) -> tuple[frozenset[Instance] | None, int]:
        """Halted set (None if the budget ran out first) and the total steps used."""
        key = (variant, n)
        if key not in self._runs:
            self._runs[key] = self._dovetail(variant, n)
        return self._runs[key]

    def _dovetail(self, variant, n):
        instances = list(enumerate_instances(variant, n, self.policy.input_alphabet))
        target = self.target(len(instances))
        pol = self.policy
        machines = [Machine(inst.program, inst.input, pol.semantics, pol.tape_cap) for inst in instances]
        # Round r gives one step to each machine still running; a machine halting
        # after s steps therefore halts in round s, and ties go in shortlex order.
        halt_at: list[int | None] = [0 if m.halted else None for m in machines]
        done = sorted(k for k, s in enumerate(halt_at) if s == 0)
        if len(done) >= target:
            return frozenset(instances[k] for k in done[:target]), 0
        live = [k for k, s in enumerate(halt_at) if s is None]
        reached = 0
        while live:
            # double the horizon, but never overshoot the budget by more than one round
            spent = self._used(halt_at, reached, None)
            horizon = min(max(1, 2 * reached), reached + 1 + (self.global_budget - spent) // len(live))
            still = []
            for k in live:
                m = machines[k]
                try:
                    m.advance(horizon - m.steps)
                except TapeCapExceeded:
                    return None, self._used(halt_at, reached, None)
                if m.halted:
                    halt_at[k] = m.steps
                else:
                    still.append(k)
            live = still
            order = sorted((s, k) for k, s in enumerate(halt_at) if s is not None)
            if len(order) >= target:
                s_star, k_star = order[target - 1]
                used = self._used(halt_at, s_star - 1, (s_star, k_star))
                if used > self.global_budget:
                    return None, self.global_budget
                return frozenset(instances[k] for _, k in order[:target]), used
            reached = horizon
            if self._used(halt_at, reached, None) >= self.global_budget:
                return None, self.global_budget
        return None, self._used(halt_at, reached, None)

    @staticmethod
    def _used(halt_at, rounds, partial):
        total = sum(rounds if s is None else min(s, rounds) for s in halt_at)
        if partial is not None:
            s_star, k_star = partial
            total += sum(1 for k, s in enumerate(halt_at[:k_star + 1]) if s is None or s >= s_star)
        return total

    def decide(self, instance):
        n = instance.size
        negative = Answer.UNKNOWN if self.mode == "threeway" else Answer.NO
        if n < self.j:
            return Decision(negative)
        halted, used = self.dovetail(instance.variant, n)
        if halted is None:
            return Decision(Answer.NONTERMINATION, used)
        return Decision(Answer.YES if instance in halted else negative, used)


class TableTester(Tester):
    """Answer from the oracle's census table up to ``depth``, else ask ``fallback``.

    Table holes (oracle-unknown instances) are also delegated.
    """

    def __init__(self, depth: int, fallback: Tester, policy: OraclePolicy = DEFAULT_ORACLE):
        self.depth = depth
        self.fallback = fallback
        self.policy = policy
        self.kind = fallback.kind
        self.name = f"table:{depth}+{fallback.name}"
        self._tables: dict[tuple[Variant, int], dict[Instance, Verdict]] = {}

    def _table(self, variant, n):
        key = (variant, n)
        if key not in self._tables:
            self._tables[key] = dict(size_census(variant, n, self.policy).records)
        return self._tables[key]

    def decide(self, instance):
        if instance.size <= self.depth:
            if not _compiles(instance):
                return Decision(Answer.NO)
            v = self._table(instance.variant, instance.size).get(instance)
            if isinstance(v, Halts):
                return Decision(Answer.YES)
            if isinstance(v, Diverges):
                return Decision(Answer.NO)
        return self.fallback.decide(instance)


class ToApproximating(Tester):
    """Replace "I don't know" with a fixed yes or no."""

    def __init__(self, inner: Tester, bias: Answer | str):
        bias = Answer(bias)
        if not bias.decided:
            raise ValueError("bias must be yes or no")
        if inner.kind != THREE_WAY:
            raise ValueError("only three-way testers convert to approximating ones")
        self.inner, self.bias = inner, bias
        self.kind = APPROXIMATING
        self.name = f"approx:{bias.value}({inner.name})"

    def decide(self, instance):
        d = self.inner.decide(instance)
        if d.answer is Answer.UNKNOWN:
            return Decision(self.bias, d.cost)
        return d


class ToGeneric(Tester):
    """Replace "I don't know" with running forever."""

    def __init__(self, inner: Tester):
        if inner.kind == APPROXIMATING:
            raise ValueError("approximating testers have no 'I don't know' to replace")
        self.inner = inner
        self.kind = GENERIC
        self.name = f"generic({inner.name})"

    def decide(self, instance):
        d = self.inner.decide(instance)
        if d.answer is Answer.UNKNOWN:
            return Decision(Answer.NONTERMINATION, d.cost)
        return d


class DovetailImprove(Tester):
    """Run ``inner`` alongside a direct simulation; a halt seen first means yes.

    Steps alternate, inner first, so inner wins ties.  Nothing within
    ``sim_budget`` rounds means NONTERMINATION.
    """

    def __init__(self, inner: Tester, sim_budget: int, policy: OraclePolicy = DEFAULT_ORACLE):
        self.inner = inner
        self.sim_budget = sim_budget
        self.policy = policy
        self.kind = inner.kind
        self.name = f"dovetail:{sim_budget}({inner.name})"

    def decide(self, instance):
        d = self.inner.decide(instance)
        inner_done = d.cost if d.answer is not Answer.NONTERMINATION else None
        if not _compiles(instance):
            return d if inner_done is not None else Decision(Answer.NONTERMINATION, self.sim_budget)
        limit = self.sim_budget if inner_done is None else min(self.sim_budget, inner_done - 1)
        m = Machine(instance.program, instance.input, self.policy.semantics, self.policy.tape_cap)
        try:
            m.advance(max(0, limit))
        except TapeCapExceeded:
            pass
        if m.halted and m.steps <= limit:
            return Decision(Answer.YES, m.steps)
        if inner_done is not None and inner_done <= self.sim_budget:
            return d
        return Decision(Answer.NONTERMINATION, self.sim_budget)


@dataclass(frozen=True)
class TesterStats:
    tester: str
    variant: Variant
    n: int
    p: int
    easy_h: int
    hard_h: int
    easy_d: int
    hard_d: int
    unverifiable: int
    wrong: int
    wrong_instances: tuple[bytes, ...] = field(default=(), repr=False)

    @property
    def failure_rate(self) -> Fraction:
        return Fraction(self.hard_h + self.hard_d, self.p) if self.p else Fraction(0)


def universe(census: SizeCensus, strings: bool = False) -> Iterator[tuple[Instance, Verdict | None]]:
    """(instance, certified truth) pairs.

    With ``strings`` every length-n string is an instance and a compile error
    counts as certified non-halting (truth None marks it).
    """
    if not strings:
        yield from census.records
        return
    if census.variant is Variant.G:
        raise ValueError("the raw-string universe is defined for variants E and S")
    truth = dict(census.records)
    for t in itertools.product(SYMBOLS, repeat=census.n):
        inst = Instance.of(census.variant, bytes(t))
        yield inst, truth.get(inst)


def evaluate(tester: Tester, census: SizeCensus, strings: bool = False) -> TesterStats:
    """Run ``tester`` on every instance of the census size and score it against certified truth."""
    easy_h = hard_h = easy_d = hard_d = unverifiable = 0
    wrong: list[bytes] = []
    p = 0
    for inst, truth in universe(census, strings):
        p += 1
        answer = tester(inst)
        halts = isinstance(truth, Halts)
        diverges = truth is None or isinstance(truth, Diverges)
        if halts:
            if answer is Answer.YES:
                easy_h += 1
            else:
                hard_h += 1
                if answer is Answer.NO:
                    wrong.append(inst.text if inst.variant is not Variant.G else inst.text + b"|" + inst.input)
        elif diverges:
            if answer is Answer.NO:
                easy_d += 1
            else:
                hard_d += 1
                if answer is Answer.YES:
                    wrong.append(inst.text if inst.variant is not Variant.G else inst.text + b"|" + inst.input)
        elif answer.decided:
            unverifiable += 1
    return TesterStats(tester.name, census.variant, census.n, p, easy_h, hard_h, easy_d, hard_d,
                       unverifiable, len(wrong), tuple(wrong))


def evaluate_sizes(tester: Tester, censuses: Iterable[SizeCensus], strings: bool = False) -> list[TesterStats]:
    return [evaluate(tester, c, strings) for c in censuses]


_INT = r"\d+(?:e\d+)?"


def _to_int(text: str) -> int:
    if "e" in text:
        mant, exp = text.split("e")
        return int(mant) * 10 ** int(exp)
    return int(text)


class TesterSpecError(ValueError):
    pass


def parse_tester(spec: str, policy: OraclePolicy = DEFAULT_ORACLE, global_budget: int = 10_000_000) -> Tester:
    """Build a tester from its command-line description, e.g. ``approx:no(bounded:1000)``."""
    tester, rest = _parse(spec.strip().replace(" ", ""), policy, global_budget)
    if rest:
        raise TesterSpecError(f"unexpected trailing text {rest!r} in tester spec {spec!r}")
    return tester


def _parse(s: str, policy: OraclePolicy, gb: int) -> tuple[Tester, str]:
    if m := re.match(rf"bounded:({_INT})", s):
        return BoundedSimTester(_to_int(m[1]), policy), s[m.end():]
    if m := re.match(r"syntax", s):
        return SyntaxTester(), s[m.end():]
    if m := re.match(r"(dontknow|silent)", s):
        t = DontKnowTester()
        return (t if m[1] == "dontknow" else ToGeneric(t)), s[m.end():]
    if m := re.match(r"census:(\d+),(\d+),(\d+),(threeway|approximating)", s):
        t = CensusTester(int(m[1]), int(m[2]), int(m[3]), m[4], gb, policy)
        return t, s[m.end():]
    if m := re.match(r"table:(\d+)\+", s):
        fallback, rest = _parse(s[m.end():], policy, gb)
        return TableTester(int(m[1]), fallback, policy), rest
    for pattern, build in (
        (r"approx:(yes|no)\(", lambda g, t: ToApproximating(t, g)),
        (r"generic\(", lambda g, t: ToGeneric(t)),
        (rf"dovetail:({_INT})\(", lambda g, t: DovetailImprove(t, _to_int(g), policy)),
    ):
        if m := re.match(pattern, s):
            inner, rest = _parse(s[m.end():], policy, gb)
            if not rest.startswith(")"):
                raise TesterSpecError(f"missing ')' before {rest!r}")
            return build(m[1] if m.groups() else None, inner), rest[1:]
    raise TesterSpecError(f"cannot parse tester spec at {s!r}")
