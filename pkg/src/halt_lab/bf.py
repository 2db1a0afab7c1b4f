"""BF toy language: parsing, step semantics and budgeted execution.

Execution is deterministic, so a repeated configuration certifies that the
program never halts.  ``run`` finds repeats with Brent's cycle-finding
algorithm, which needs one saved configuration at a time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

SYMBOLS = b"+,-.<>[]"  # sorted by byte value: this is the shortlex order
NEUTRAL = b"+,-.<>"

_INC, _DEC, _LEFT, _RIGHT, _OUT, _IN, _OPEN, _CLOSE = range(8)
_OPCODE = {
    ord("+"): _INC,
    ord("-"): _DEC,
    ord("<"): _LEFT,
    ord(">"): _RIGHT,
    ord("."): _OUT,
    ord(","): _IN,
    ord("["): _OPEN,
    ord("]"): _CLOSE,
}


class BFSyntaxError(ValueError):
    """Unmatched bracket or foreign byte.  ``position`` is None for an unclosed ``[``."""

    def __init__(self, message: str, position: int | None):
        super().__init__(message)
        self.position = position


class Variant(str, enum.Enum):
    E = "E"  # empty input
    S = "S"  # program text as its own input
    G = "G"  # given input


@dataclass(frozen=True)
class SemanticsPolicy:
    """Edge semantics the folklore definition of BF leaves open.

    eof: ``zero`` writes 0 on ``,`` past the end of input, ``unchanged`` keeps the cell.
    underflow: ``halt`` stops the program on ``<`` at cell 0, ``noop`` ignores the move.
    """

    eof: str = "zero"
    underflow: str = "halt"

    def __post_init__(self):
        if self.eof not in ("zero", "unchanged"):
            raise ValueError(f"unknown EOF policy {self.eof!r}")
        if self.underflow not in ("halt", "noop"):
            raise ValueError(f"unknown underflow policy {self.underflow!r}")

    def as_dict(self) -> dict:
        return {"eof": self.eof, "underflow": self.underflow}


DEFAULT_POLICY = SemanticsPolicy()


@dataclass(frozen=True)
class Program:
    text: bytes
    matches: dict[int, int] = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.text)

    @cached_property
    def _code(self) -> tuple[list[int], list[int]]:
        ops = [_OPCODE[c] for c in self.text]
        jumps = [0] * len(ops)
        for a, b in self.matches.items():
            jumps[a] = b
        return ops, jumps


def parse(text: bytes | str) -> Program:
    if isinstance(text, str):
        text = text.encode("latin-1")
    text = bytes(text)
    stack: list[int] = []
    matches: dict[int, int] = {}
    for i, c in enumerate(text):
        if c not in _OPCODE:
            raise BFSyntaxError(f"invalid symbol {c!r} at position {i}", i)
        if c == 0x5B:
            stack.append(i)
        elif c == 0x5D:
            if not stack:
                raise BFSyntaxError(f"unmatched ']' at position {i}", i)
            j = stack.pop()
            matches[i] = j
            matches[j] = i
    if stack:
        raise BFSyntaxError("unclosed bracket", None)
    return Program(text, matches)


def is_valid(text: bytes) -> bool:
    try:
        parse(text)
    except BFSyntaxError:
        return False
    return True


def is_prefix_valid(text: bytes | str) -> bool:
    """True iff some suffix completes ``text`` to a program."""
    if isinstance(text, str):
        text = text.encode("latin-1")
    depth = 0
    for c in text:
        if c == 0x5B:
            depth += 1
        elif c == 0x5D:
            depth -= 1
            if depth < 0:
                return False
        elif c not in _OPCODE:
            return False
    return True


@dataclass(frozen=True)
class Instance:
    variant: Variant
    text: bytes
    input: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is Variant.E and self.input:
            raise ValueError("variant E instances have empty input")
        if self.variant is Variant.S and self.input != self.text:
            raise ValueError("variant S instances read their own text")

    @classmethod
    def of(cls, variant: Variant | str, text: bytes | str, input: bytes = b"") -> Instance:
        if isinstance(text, str):
            text = text.encode("latin-1")
        variant = Variant(variant)
        if variant is Variant.S:
            input = text
        return cls(variant, bytes(text), bytes(input))

    @property
    def size(self) -> int:
        if self.variant is Variant.G:
            return len(self.text) + len(self.input)
        return len(self.text)

    @cached_property
    def program(self) -> Program:
        return parse(self.text)


@dataclass(frozen=True)
class Configuration:
    """Canonical machine state; the tape never ends in a zero cell."""

    pc: int = 0
    head: int = 0
    tape: bytes = b""
    in_cursor: int = 0

    def cell(self) -> int:
        return self.tape[self.head] if self.head < len(self.tape) else 0


class _Halted:
    __slots__ = ()

    def __repr__(self):
        return "HALTED"


HALTED = _Halted()


def _canonical(pc: int, head: int, tape: bytes | bytearray, cur: int) -> Configuration:
    return Configuration(pc, head, bytes(tape).rstrip(b"\0"), cur)


def step(
    program: Program,
    cfg: Configuration,
    input: bytes = b"",
    policy: SemanticsPolicy = DEFAULT_POLICY,
) -> Configuration | _Halted:
    """Execute one instruction, or report HALTED when pc is past the end."""
    text = program.text
    pc, head, cur = cfg.pc, cfg.head, cfg.in_cursor
    if pc >= len(text):
        return HALTED
    tape = bytearray(cfg.tape)
    if head >= len(tape):
        tape.extend(bytes(head + 1 - len(tape)))
    c = chr(text[pc])
    if c == "+":
        tape[head] = (tape[head] + 1) % 256
    elif c == "-":
        tape[head] = (tape[head] - 1) % 256
    elif c == ">":
        head += 1
    elif c == "<":
        if head > 0:
            head -= 1
        elif policy.underflow == "halt":
            return _canonical(len(text), head, tape, cur)
    elif c == ".":
        pass
    elif c == ",":
        if cur < len(input):
            tape[head] = input[cur]
            cur += 1
        elif policy.eof == "zero":
            tape[head] = 0
    elif c == "[":
        if tape[head] == 0:
            pc = program.matches[pc]
    elif c == "]":
        if tape[head] != 0:
            pc = program.matches[pc]
    return _canonical(pc + 1, head, tape, cur)


class Reason(str, enum.Enum):
    STEP_BUDGET = "StepBudget"
    TAPE_CAP = "TapeCap"
    NO_CYCLE_FOUND = "NoCycleFound"


@dataclass(frozen=True)
class Halts:
    steps: int

    kind = "halts"


@dataclass(frozen=True)
class Diverges:
    mu: int
    lam: int

    kind = "diverges"


@dataclass(frozen=True)
class Unknown:
    reason: Reason

    kind = "unknown"


Verdict = Halts | Diverges | Unknown


class TapeCapExceeded(Exception):
    pass


class Machine:
    """Mutable interpreter state with a fast multi-step loop."""

    __slots__ = ("ops", "jumps", "n", "input", "eof_zero", "left_halts", "tape_cap",
                 "pc", "head", "tape", "cur", "steps", "output")

    def __init__(
        self,
        program: Program,
        input: bytes = b"",
        policy: SemanticsPolicy = DEFAULT_POLICY,
        tape_cap: int | None = None,
    ):
        self.ops, self.jumps = program._code
        self.n = len(self.ops)
        self.input = input
        self.eof_zero = policy.eof == "zero"
        self.left_halts = policy.underflow == "halt"
        self.tape_cap = tape_cap
        self.pc = 0
        self.head = 0
        self.tape = bytearray(1)
        self.cur = 0
        self.steps = 0
        self.output = 0

    @property
    def halted(self) -> bool:
        return self.pc >= self.n

    def key(self) -> tuple:
        return (self.pc, self.head, self.cur, bytes(self.tape.rstrip(b"\0")))

    def same_state(self, other: Machine) -> bool:
        return (self.pc == other.pc and self.head == other.head and self.cur == other.cur
                and self.tape.rstrip(b"\0") == other.tape.rstrip(b"\0"))

    def configuration(self) -> Configuration:
        return _canonical(self.pc, self.head, self.tape, self.cur)

    def advance(self, limit: int) -> int:
        """Run until halted or ``limit`` more steps; return the steps taken.

        Raises TapeCapExceeded if ``>`` would leave the capped tape.
        """
        ops, jumps, n = self.ops, self.jumps, self.n
        tape, inp = self.tape, self.input
        pc, head, cur = self.pc, self.head, self.cur
        cap = self.tape_cap
        taken = 0
        try:
            while pc < n and taken < limit:
                op = ops[pc]
                if op == _INC:
                    tape[head] = (tape[head] + 1) & 255
                elif op == _DEC:
                    tape[head] = (tape[head] - 1) & 255
                elif op == _RIGHT:
                    head += 1
                    if head == len(tape):
                        if cap is not None and head >= cap:
                            head -= 1
                            raise TapeCapExceeded
                        tape.append(0)
                elif op == _LEFT:
                    if head:
                        head -= 1
                    elif self.left_halts:
                        pc = n - 1
                elif op == _OPEN:
                    if not tape[head]:
                        pc = jumps[pc]
                elif op == _CLOSE:
                    if tape[head]:
                        pc = jumps[pc]
                elif op == _IN:
                    if cur < len(inp):
                        tape[head] = inp[cur]
                        cur += 1
                    elif self.eof_zero:
                        tape[head] = 0
                else:
                    self.output += 1
                pc += 1
                taken += 1
        finally:
            self.pc, self.head, self.cur = pc, head, cur
            self.steps += taken
        return taken


def detection_window(budget: int) -> int:
    """Steps Brent's method needs to expose every cycle with mu + lambda <= budget.

    The tortoise sits at step 2**k - 1; once 2**k >= budget it is inside any such
    cycle and the hare meets it within ``budget`` further steps.
    """
    power = 1
    while power < budget:
        power *= 2
    return power - 1 + budget


def run(
    instance: Instance,
    budget: int,
    tape_cap: int = 1 << 16,
    policy: SemanticsPolicy = DEFAULT_POLICY,
) -> Verdict:
    """Classify ``instance`` by simulation.

    Halts(s) iff the program halts after s <= budget steps; Diverges(mu, lam)
    iff configuration mu equals configuration mu + lam for some mu + lam <= budget
    (mu minimal, lam the least period).  Anything else is Unknown, naming the
    resource that ran out.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    m = Machine(instance.program, instance.input, policy, tape_cap)
    if m.halted:
        return Halts(0)
    window = detection_window(budget)
    ops, jumps, n = m.ops, m.jumps, m.n
    tape, inp = m.tape, m.input
    eof_zero, left_halts = m.eof_zero, m.left_halts
    pc = head = cur = 0
    t_pc, t_head, t_cur, t_tape = 0, 0, 0, b""
    power, lam, steps = 1, 0, 0
    while steps < window:
        op = ops[pc]
        if op == _INC:
            tape[head] = (tape[head] + 1) & 255
        elif op == _DEC:
            tape[head] = (tape[head] - 1) & 255
        elif op == _RIGHT:
            head += 1
            if head == len(tape):
                if head >= tape_cap:
                    # past the budget, a short cycle would have stayed inside the cap
                    return Unknown(Reason.TAPE_CAP if steps < budget else Reason.NO_CYCLE_FOUND)
                tape.append(0)
        elif op == _LEFT:
            if head:
                head -= 1
            elif left_halts:
                pc = n - 1
        elif op == _OPEN:
            if not tape[head]:
                pc = jumps[pc]
        elif op == _CLOSE:
            if tape[head]:
                pc = jumps[pc]
        elif op == _IN:
            if cur < len(inp):
                tape[head] = inp[cur]
                cur += 1
            elif eof_zero:
                tape[head] = 0
        pc += 1
        steps += 1
        lam += 1
        if pc >= n:
            return Halts(steps) if steps <= budget else Unknown(Reason.STEP_BUDGET)
        if pc == t_pc and head == t_head and cur == t_cur and tape.rstrip(b"\0") == t_tape:
            mu = _first_repeat(instance, lam, policy, tape_cap)
            return Diverges(mu, lam) if mu + lam <= budget else Unknown(Reason.STEP_BUDGET)
        if lam == power:
            t_pc, t_head, t_cur, t_tape = pc, head, cur, bytes(tape.rstrip(b"\0"))
            power *= 2
            lam = 0
    return Unknown(Reason.NO_CYCLE_FOUND)


def _first_repeat(instance: Instance, lam: int, policy: SemanticsPolicy, tape_cap: int) -> int:
    """Smallest mu with configuration mu == configuration mu + lam."""
    tortoise = Machine(instance.program, instance.input, policy, tape_cap)
    hare = Machine(instance.program, instance.input, policy, tape_cap)
    hare.advance(lam)
    mu = 0
    while not tortoise.same_state(hare):
        tortoise.advance(1)
        hare.advance(1)
        mu += 1
    return mu


def configuration_after(
    instance: Instance, steps: int, policy: SemanticsPolicy = DEFAULT_POLICY
) -> Configuration | _Halted:
    """Replay with the reference ``step``; HALTED if the program stops first."""
    program = instance.program
    cfg: Configuration | _Halted = Configuration()
    for _ in range(steps):
        cfg = step(program, cfg, instance.input, policy)
        if cfg is HALTED:
            return HALTED
    return cfg


def verify(instance: Instance, verdict: Verdict, policy: SemanticsPolicy = DEFAULT_POLICY) -> bool:
    """Re-check a Halts or Diverges witness by independent re-execution."""
    if isinstance(verdict, Halts):
        before = configuration_after(instance, verdict.steps, policy)
        return before is not HALTED and step(instance.program, before, instance.input, policy) is HALTED
    if isinstance(verdict, Diverges):
        a = configuration_after(instance, verdict.mu, policy)
        b = configuration_after(instance, verdict.mu + verdict.lam, policy)
        return verdict.lam >= 1 and a is not HALTED and a == b
    return True
