from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_classify
from halt_lab.bf import (
    HALTED,
    BFSyntaxError,
    Configuration,
    Diverges,
    Halts,
    Instance,
    Reason,
    SemanticsPolicy,
    Unknown,
    configuration_after,
    detection_window,
    is_prefix_valid,
    is_valid,
    parse,
    run,
    step,
    verify,
)

programs = st.text(alphabet="+-<>.,[]", max_size=10).map(str.encode).filter(is_valid)
raw = st.binary(max_size=8) | st.text(alphabet="+-<>.,[]", max_size=8).map(str.encode)


def brute_matches(text: str) -> dict[int, int] | None:
    # pair each '[' with the first later ']' at the same nesting level, by rescanning
    out = {}
    for i, c in enumerate(text):
        if c == "[":
            level = 0
            for j in range(i, len(text)):
                level += {"[": 1, "]": -1}.get(text[j], 0)
                if level == 0:
                    out[i], out[j] = j, i
                    break
            else:
                return None
    closes = [i for i, c in enumerate(text) if c == "]"]
    return out if all(i in out for i in closes) else None


def test_parse_examples():
    assert parse(b"").text == b""
    assert parse("").matches == {}
    with pytest.raises(BFSyntaxError) as exc:
        parse("]")
    assert exc.value.position == 0
    assert parse("+[>+]").matches == {1: 4, 4: 1} == brute_matches("+[>+]")


def test_parse_errors():
    with pytest.raises(BFSyntaxError) as exc:
        parse("[[]")
    assert exc.value.position is None
    assert "unclosed" in str(exc.value)
    with pytest.raises(BFSyntaxError) as exc:
        parse("+a")
    assert exc.value.position == 1
    with pytest.raises(BFSyntaxError) as exc:
        parse("[]]+")
    assert exc.value.position == 2


@given(st.text(alphabet="+[]", max_size=12))
def test_parse_agrees_with_brute_matcher(text):
    expected = brute_matches(text)
    if expected is None:
        with pytest.raises(BFSyntaxError):
            parse(text)
    else:
        prog = parse(text)
        assert prog.matches == expected
        for a, b in prog.matches.items():
            assert prog.matches[b] == a
            if text[a] == "[":
                assert b > a


def test_prefix_examples():
    assert is_prefix_valid("[[+")
    assert not is_prefix_valid("+]")
    assert is_prefix_valid("[]")
    assert not is_prefix_valid(b"+x")


def _depth(x: str) -> int:
    return x.count("[") - x.count("]")


def test_prefix_valid_iff_extendable():
    # All six non-bracket symbols behave alike for bracket structure, so "+" stands for them.
    ext = ["".join(t) for k in range(5) for t in itertools.product("+[]", repeat=k)]
    for k in range(7):
        for t in itertools.product("+[]", repeat=k):
            x = "".join(t)
            extendable = any(is_valid((x + y).encode()) for y in ext)
            if is_prefix_valid(x) and _depth(x) > 4:
                assert is_valid((x + "]" * _depth(x)).encode())
            else:
                assert is_prefix_valid(x) == extendable, x
    for k in range(4):
        for t in itertools.product("+,-.<>[]", repeat=k):
            x = "".join(t)
            assert is_prefix_valid(x) == any(is_valid((x + "]" * j).encode()) for j in range(4))


def test_step_examples():
    prog = parse("+")
    assert step(prog, Configuration()) == Configuration(pc=1, tape=b"\x01")
    prog = parse("+[]")
    cfg = configuration_after(Instance.of("E", "+[]"), 2)
    assert cfg == Configuration(pc=2, tape=b"\x01")
    assert step(prog, cfg) == cfg
    assert step(parse(","), Configuration()) == Configuration(pc=1)
    assert step(parse(""), Configuration()) is HALTED


def test_step_semantics_table():
    cfg = configuration_after(Instance.of("E", "-"), 1)
    assert cfg.tape == b"\xff"
    cfg = configuration_after(Instance.of("E", "-+"), 2)
    assert cfg.tape == b""  # canonical: wrapped back to zero and trimmed
    cfg = configuration_after(Instance.of("E", ">>+<"), 4)
    assert (cfg.head, cfg.tape) == (1, b"\x00\x00\x01")
    assert configuration_after(Instance.of("E", "<+"), 1) == Configuration(pc=2)
    noop = SemanticsPolicy(underflow="noop")
    assert configuration_after(Instance.of("E", "<+"), 2, noop) == Configuration(pc=2, tape=b"\x01")
    inst = Instance.of("G", ",>,,", b"\x07\x09")
    cfg = configuration_after(inst, 4)
    assert cfg.tape == b"\x07" and cfg.in_cursor == 2
    keep = SemanticsPolicy(eof="unchanged")
    cfg = configuration_after(Instance.of("E", "+,"), 2, keep)
    assert cfg.tape == b"\x01"
    assert configuration_after(Instance.of("E", "+."), 2).tape == b"\x01"


def test_policy_rejects_unknown_names():
    with pytest.raises(ValueError):
        SemanticsPolicy(eof="minus-one")
    with pytest.raises(ValueError):
        SemanticsPolicy(underflow="wrap")


def test_instance_rules():
    assert Instance.of("S", "+,").input == b"+,"
    assert Instance.of("G", "+,", b"\x01\x00").size == 4
    assert Instance.of("S", "+,").size == 2
    with pytest.raises(ValueError):
        Instance("E", b"+", b"\x01")
    with pytest.raises(ValueError):
        Instance("S", b"+", b"")


def test_run_examples():
    assert run(Instance.of("E", ""), 1) == Halts(0)
    assert run(Instance.of("E", "+[]"), 10) == Diverges(2, 1)
    assert run(Instance.of("E", "+[>+]"), 10**4) == Unknown(Reason.NO_CYCLE_FOUND)


def test_run_cycle_needs_budget_to_close():
    assert run(Instance.of("E", "+[]"), 3) == Diverges(2, 1)
    assert run(Instance.of("E", "+[]"), 2) == Unknown(Reason.NO_CYCLE_FOUND)
    assert run(Instance.of("E", "+[-]"), 3) == Unknown(Reason.STEP_BUDGET)
    assert run(Instance.of("E", "+[-]"), 4) == Halts(4)
    with pytest.raises(ValueError):
        run(Instance.of("E", "+"), 0)


def test_tape_cap():
    # the cap is hit within the budget: memory, not steps, is the limit
    assert run(Instance.of("E", "+[>+]"), 10**6) == Unknown(Reason.TAPE_CAP)
    assert run(Instance.of("E", "+[>+]"), 10**6, tape_cap=1 << 22) == Unknown(Reason.NO_CYCLE_FOUND)
    assert run(Instance.of("E", ">>>"), 10, tape_cap=2) == Unknown(Reason.TAPE_CAP)
    assert run(Instance.of("E", ">>>"), 10, tape_cap=4) == Halts(3)


def test_detection_window():
    assert detection_window(1) == 1
    assert detection_window(3) == 3 + 3
    assert detection_window(4) == 3 + 4
    assert detection_window(5) == 7 + 5


def test_outputs_do_not_break_cycles():
    assert run(Instance.of("E", "+[.]"), 10) == Diverges(2, 2)


@settings(max_examples=300, deadline=None)
@given(programs, st.sampled_from(["E", "S"]), st.integers(1, 200))
def test_run_matches_reference_simulator(text, variant, budget):
    inst = Instance.of(variant, text)
    v = run(inst, budget)
    expected = reference_classify(inst, budget)
    if expected is None:
        assert isinstance(v, Unknown)
    else:
        assert v == expected
    assert verify(inst, v)


@settings(max_examples=150, deadline=None)
@given(programs, st.binary(max_size=4), st.sampled_from(["zero", "unchanged"]),
       st.sampled_from(["halt", "noop"]))
def test_run_matches_reference_under_every_policy(text, data, eof, underflow):
    policy = SemanticsPolicy(eof, underflow)
    inst = Instance.of("G", text, data)
    v = run(inst, 150, policy=policy)
    expected = reference_classify(inst, 150, policy)
    assert v == expected if expected is not None else isinstance(v, Unknown)
    assert verify(inst, v, policy)


@settings(max_examples=150, deadline=None)
@given(programs, st.integers(1, 300), st.integers(0, 300))
def test_run_is_budget_monotone(text, budget, extra):
    inst = Instance.of("E", text)
    v = run(inst, budget)
    assert run(inst, budget) == v
    if not isinstance(v, Unknown):
        assert run(inst, budget + extra) == v


def test_verify_rejects_bad_witnesses():
    inst = Instance.of("E", "+[]")
    assert verify(inst, Diverges(2, 1))
    assert not verify(inst, Diverges(1, 1))
    assert not verify(inst, Halts(3))
    assert verify(Instance.of("E", "++"), Halts(2))
    assert not verify(Instance.of("E", "++"), Halts(1))
