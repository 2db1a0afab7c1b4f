"""Ground truth by exhaustive classification of every instance of a size.

Exact h(n) is uncomputable, so a census reports certified lower bounds for
halting and diverging instances and leaves the rest as an explicit residue.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .bf import (
    DEFAULT_POLICY,
    Diverges,
    Halts,
    Instance,
    Reason,
    SemanticsPolicy,
    Unknown,
    Verdict,
    Variant,
    run,
)
from .census import count_programs, enumerate_texts


class ResourceLimitError(RuntimeError):
    pass


class CensusError(ValueError):
    pass


@dataclass(frozen=True)
class OraclePolicy:
    budget: int = 100_000
    tape_cap: int = 1 << 16
    semantics: SemanticsPolicy = DEFAULT_POLICY
    input_alphabet: bytes = b"\x00\x01"  # variant G only
    max_instances: int = 5_000_000

    def as_dict(self) -> dict:
        return {
            "budget": self.budget,
            "tape_cap": self.tape_cap,
            **self.semantics.as_dict(),
            "input_alphabet": self.input_alphabet.hex(),
        }


DEFAULT_ORACLE = OraclePolicy()


def count_instances(variant: Variant | str, n: int, input_alphabet: bytes = b"\x00\x01") -> int:
    variant = Variant(variant)
    if variant is not Variant.G:
        return count_programs(n)
    k = len(input_alphabet)
    return sum(count_programs(m) * k ** (n - m) for m in range(n + 1))


def enumerate_instances(
    variant: Variant | str, n: int, input_alphabet: bytes = b"\x00\x01"
) -> Iterator[Instance]:
    """All instances of size n: programs in shortlex order; for G, shorter programs first
    and inputs in lexicographic order within each program."""
    variant = Variant(variant)
    if variant is Variant.E:
        for text in enumerate_texts(n):
            yield Instance(variant, text)
    elif variant is Variant.S:
        for text in enumerate_texts(n):
            yield Instance(variant, text, text)
    else:
        alphabet = sorted(input_alphabet)
        for m in range(n + 1):
            inputs = [bytes(t) for t in itertools.product(alphabet, repeat=n - m)]
            for text in enumerate_texts(m):
                for inp in inputs:
                    yield Instance(variant, text, inp)


@lru_cache(maxsize=1 << 20)
def classify(instance: Instance, policy: OraclePolicy = DEFAULT_ORACLE) -> Verdict:
    return run(instance, policy.budget, policy.tape_cap, policy.semantics)


def _classify_chunk(args: tuple[list[Instance], OraclePolicy]) -> list[Verdict]:
    chunk, policy = args
    return [classify(inst, policy) for inst in chunk]


def classify_all(
    instances: Sequence[Instance], policy: OraclePolicy, workers: int = 1
) -> list[Verdict]:
    """Verdicts in input order; the result does not depend on ``workers``."""
    if workers <= 1 or len(instances) < 256:
        return [classify(inst, policy) for inst in instances]
    size = max(64, len(instances) // (workers * 8))
    chunks = [(list(instances[i:i + size]), policy) for i in range(0, len(instances), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [v for part in pool.map(_classify_chunk, chunks) for v in part]


@dataclass(frozen=True)
class SizeCensus:
    variant: Variant
    n: int
    p: int
    h_min: int
    d_min: int
    unknown: int
    policy: OraclePolicy
    records: tuple[tuple[Instance, Verdict], ...] = field(default=(), compare=False, repr=False)

    @property
    def budget(self) -> int:
        return self.policy.budget

    @property
    def tape_cap(self) -> int:
        return self.policy.tape_cap

    def h_interval(self) -> tuple[int, int]:
        return self.h_min, self.p - self.d_min

    def d_interval(self) -> tuple[int, int]:
        return self.d_min, self.p - self.h_min


def size_census(
    variant: Variant | str,
    n: int,
    policy: OraclePolicy = DEFAULT_ORACLE,
    workers: int = 1,
    keep_records: bool = True,
) -> SizeCensus:
    variant = Variant(variant)
    total = count_instances(variant, n, policy.input_alphabet)
    if total > policy.max_instances:
        raise ResourceLimitError(
            f"{total} instances of size {n} exceed the cap of {policy.max_instances}; "
            f"lower the size or raise max_instances"
        )
    instances = list(enumerate_instances(variant, n, policy.input_alphabet))
    verdicts = classify_all(instances, policy, workers)
    h = sum(isinstance(v, Halts) for v in verdicts)
    d = sum(isinstance(v, Diverges) for v in verdicts)
    records = tuple(zip(instances, verdicts)) if keep_records else ()
    return SizeCensus(variant, n, len(instances), h, d, len(instances) - h - d, policy, records)


@dataclass(frozen=True)
class CumulativeRow:
    n: int
    P: int
    H_min: int
    D_min: int
    unknown: int


def cumulative(censuses: Sequence[SizeCensus]) -> list[CumulativeRow]:
    """Prefix sums over sizes 0..n; sizes must be contiguous from 0."""
    rows: list[CumulativeRow] = []
    P = H = D = U = 0
    for expected, c in enumerate(sorted(censuses, key=lambda c: c.n)):
        if c.n != expected:
            raise CensusError(f"census sizes are not contiguous: missing size {expected}")
        if c.variant != censuses[0].variant or c.policy != censuses[0].policy:
            raise CensusError("censuses mix variants or policies")
        P, H, D, U = P + c.p, H + c.h_min, D + c.d_min, U + c.unknown
        rows.append(CumulativeRow(c.n, P, H, D, U))
    return rows


def verdict_to_json(v: Verdict) -> dict:
    if isinstance(v, Halts):
        return {"verdict": "halts", "steps": v.steps}
    if isinstance(v, Diverges):
        return {"verdict": "diverges", "mu": v.mu, "lambda": v.lam}
    return {"verdict": "unknown", "reason": v.reason.value}


def verdict_from_json(d: dict) -> Verdict:
    if d["verdict"] == "halts":
        return Halts(d["steps"])
    if d["verdict"] == "diverges":
        return Diverges(d["mu"], d["lambda"])
    return Unknown(Reason(d["reason"]))
