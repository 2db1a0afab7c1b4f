"""Counting and enumerating BF programs, plus the numberings used for pairs."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterator, Sequence

from .bf import NEUTRAL, SYMBOLS, Program, parse

SIGMA = len(SYMBOLS)


class InequalityViolation(AssertionError):
    pass


@lru_cache(maxsize=None)
def _depth_profile(n: int) -> tuple[int, ...]:
    """Number of prefix-valid strings of length n ending at each bracket depth."""
    if n == 0:
        return (1,)
    prev = _depth_profile(n - 1)
    neutral = len(NEUTRAL)
    out = [0] * (n + 1)
    for d, ways in enumerate(prev):
        if not ways:
            continue
        out[d] += neutral * ways
        out[d + 1] += ways
        if d:
            out[d - 1] += ways
    return tuple(out)


def count_programs(n: int) -> int:
    return _depth_profile(n)[0]


def count_prefixes(n: int) -> int:
    return sum(_depth_profile(n))


def _generate(n: int, prefix: bytearray, depth: int) -> Iterator[bytes]:
    remaining = n - len(prefix)
    if remaining == 0:
        if depth == 0:
            yield bytes(prefix)
        return
    for c in SYMBOLS:
        if c == 0x5B:
            d = depth + 1
        elif c == 0x5D:
            if depth == 0:
                continue
            d = depth - 1
        else:
            d = depth
        if d > remaining - 1:
            continue
        prefix.append(c)
        yield from _generate(n, prefix, d)
        prefix.pop()


def enumerate_texts(n: int) -> Iterator[bytes]:
    """Program texts of length n in lexicographic (byte) order, never touching invalid strings."""
    return _generate(n, bytearray(), 0)


def enumerate_programs(n: int) -> Iterator[Program]:
    for text in enumerate_texts(n):
        yield parse(text)


def shortlex_index(s: bytes | str, alphabet: bytes = SYMBOLS) -> int:
    """Position of ``s`` in the shortlex order of all strings over ``alphabet``.

    This is bijective base-k numeration: digits run 1..k instead of 0..k-1.
    """
    if isinstance(s, str):
        s = s.encode("latin-1")
    k = len(alphabet)
    rank = {c: i for i, c in enumerate(alphabet)}
    index = 0
    for c in s:
        index = index * k + rank[c] + 1
    return index


def shortlex_string(index: int, alphabet: bytes = SYMBOLS) -> bytes:
    if index < 0:
        raise ValueError("shortlex indices are natural numbers")
    k = len(alphabet)
    out = bytearray()
    while index:
        index, digit = divmod(index - 1, k)
        out.append(alphabet[digit])
    return bytes(reversed(out))


def cantor_pair(x: int, y: int) -> int:
    if x < 0 or y < 0:
        raise ValueError("pairing is defined on natural numbers")
    return x + (x + y) * (x + y + 1) // 2


def cantor_unpair(z: int) -> tuple[int, int]:
    if z < 0:
        raise ValueError("pairing is defined on natural numbers")
    w = (isqrt(8 * z + 1) - 1) // 2
    x = z - w * (w + 1) // 2
    return x, w - x


@dataclass(frozen=True)
class CountTable:
    n: int
    p: int
    q: int
    sigma_pow: int

    @property
    def p_ratio(self) -> Fraction:
        return Fraction(self.p, self.sigma_pow)

    @property
    def q_ratio(self) -> Fraction:
        return Fraction(self.q, self.sigma_pow)


def vanishing_report(n_max: int) -> list[CountTable]:
    """Exact p(n), q(n), 8**n for n <= n_max, checking q(n+1) <= 8 q(n) - p(n).

    The bound holds because appending ``]`` to a complete program never leaves
    a prefix of a program.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rows = [CountTable(n, count_programs(n), count_prefixes(n), SIGMA**n) for n in range(n_max + 1)]
    check_prefix_inequality(rows)
    return rows


def check_prefix_inequality(rows: Sequence[CountTable]) -> None:
    for a, b in zip(rows, rows[1:]):
        if b.q > SIGMA * a.q - a.p:
            raise InequalityViolation(
                f"q({b.n}) = {b.q} exceeds {SIGMA}*q({a.n}) - p({a.n}) = {SIGMA * a.q - a.p}"
            )


def format_ratio(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"
