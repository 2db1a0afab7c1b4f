from __future__ import annotations

import pytest

from halt_lab.bf import HALTED, Configuration, Diverges, Halts, Instance, SemanticsPolicy, step

_CRITERIA: list[tuple[str, bool, str]] = []


def reference_classify(instance: Instance, budget: int, policy: SemanticsPolicy = SemanticsPolicy()):
    """Independent oracle: reference ``step`` plus a table of every configuration seen.

    Returns Halts(s) for s <= budget, Diverges(mu, lam) for the first repeat with
    mu + lam <= budget, or None.
    """
    program = instance.program
    cfg = Configuration()
    seen = {cfg: 0}
    for t in range(1, budget + 1):
        nxt = step(program, cfg, instance.input, policy)
        if nxt is HALTED:
            return Halts(t - 1)
        cfg = nxt
        if cfg in seen:
            return Diverges(seen[cfg], t - seen[cfg])
        seen[cfg] = t
    if step(program, cfg, instance.input, policy) is HALTED:
        return Halts(budget)
    return None


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _CRITERIA.append((name, ok, detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def brute_counts(n: int) -> tuple[int, int]:
    """(programs, prefixes) of length n by scanning all 8**n strings with numpy."""
    import numpy as np

    # symbol ranks in byte order "+,-.<>[]": 6 is '[' and 7 is ']'
    step_of = np.array([0, 0, 0, 0, 0, 0, 1, -1], dtype=np.int8)
    tail = min(n, 6)
    codes = np.arange(8**tail, dtype=np.int64)
    tail_steps = np.stack([step_of[(codes >> (3 * (tail - 1 - k))) & 7] for k in range(tail)]) if tail else None
    p = q = 0
    for lead in range(8 ** (n - tail)):
        depth = np.zeros(8**tail, dtype=np.int16)
        low = np.zeros(8**tail, dtype=np.int16)
        for k in range(n - tail):
            depth += step_of[(lead >> (3 * (n - tail - 1 - k))) & 7]
            np.minimum(low, depth, out=low)
        for k in range(tail):
            depth += tail_steps[k]
            np.minimum(low, depth, out=low)
        ok = low >= 0
        q += int(ok.sum())
        p += int((ok & (depth == 0)).sum())
    return p, q
