"""``halt-lab`` command line.

Exit status: 0 on success, 1 on a usage error, 2 when a soundness check fails
(a three-way or generic tester contradicts a certified verdict, a witness
does not re-verify, or the prefix inequality breaks).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import census as cen
from . import report as rep
from . import tm
from .bf import SemanticsPolicy, Variant, verify
from .oracle import OraclePolicy, ResourceLimitError, size_census, verdict_to_json
from .testers import APPROXIMATING, TesterSpecError, evaluate, parse_tester

WORKERS_ENV = "HALT_LAB_WORKERS"


class UsageError(Exception):
    pass


class SoundnessError(Exception):
    def __init__(self, message: str, artifact: str | None = None):
        super().__init__(message)
        self.artifact = artifact


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int(text: str) -> int:
    """Accept 100000, 100_000, 1e5 or 10**5."""
    t = text.replace("_", "")
    try:
        if "**" in t:
            base, exp = t.split("**")
            return int(base) ** int(exp)
        if "e" in t.lower():
            mant, exp = t.lower().split("e")
            return int(mant) * 10 ** int(exp)
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _sizes(text: str) -> list[int]:
    """``4``, ``0-6`` or ``1,3,5``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list: {text!r}") from None
    if not out or min(out) < 0:
        raise argparse.ArgumentTypeError(f"bad size list: {text!r}")
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list: {text!r}") from None


def _add_oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=[v.value for v in Variant], default="E")
    p.add_argument("--size", type=_sizes, required=True)
    p.add_argument("--budget", type=_int, default=100_000)
    p.add_argument("--tape-cap", type=_int, default=1 << 16)
    p.add_argument("--eof", choices=["zero", "unchanged"], default="zero")
    p.add_argument("--underflow", choices=["halt", "noop"], default="halt")
    p.add_argument("--input-alphabet", choices=["binary", "bytes"], default="binary",
                   help="variant G input symbols: {0,1} or all 256 bytes")
    p.add_argument("--max-instances", type=_int, default=5_000_000)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default ${WORKERS_ENV} or 1); never changes the output")
    common.add_argument("--out", default=None, help="write the artifact here instead of stdout")

    parser = _Parser(prog="halt-lab", description="Measure hard instances of the halting problem.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", parents=[common], help="exact program and prefix counts")
    p.add_argument("--max-n", type=int, required=True)

    p = sub.add_parser("census", parents=[common], help="oracle census of every instance of a size")
    _add_oracle_args(p)
    p.add_argument("--log", default=None, help="per-instance JSON-lines witness log")
    p.add_argument("--verify", action="store_true",
                   help="re-execute witnesses (all for n <= 6, every 100th beyond)")

    p = sub.add_parser("eval", parents=[common], help="score a tester against the oracle census")
    _add_oracle_args(p)
    p.add_argument("--tester", required=True)
    p.add_argument("--global-budget", type=_int, default=10_000_000,
                   help="total dovetail steps for census testers")
    p.add_argument("--universe", choices=["programs", "strings"], default="programs",
                   help="strings: all 8^n texts, compile errors count as non-halting")

    p = sub.add_parser("tm", help="random Turing machine experiments")
    tsub = p.add_subparsers(dest="tm_command", required=True, parser_class=_Parser)
    f = tsub.add_parser("falloff", parents=[common], help="outcome fractions of random machines")
    f.add_argument("--states", type=_int_list, default=[1, 2, 4, 8, 16])
    f.add_argument("--samples", type=_int, default=10_000)
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--budget", type=_int, default=10_000)
    f.add_argument("--exhaustive", action="store_true",
                   help="enumerate every machine instead of sampling")

    p = sub.add_parser("report", parents=[common], help="merge census or eval artifacts, adding cumulative columns")
    p.add_argument("inputs", nargs="+")
    return parser


def _oracle_policy(args) -> OraclePolicy:
    alphabet = b"\x00\x01" if args.input_alphabet == "binary" else bytes(range(256))
    return OraclePolicy(args.budget, args.tape_cap, SemanticsPolicy(args.eof, args.underflow),
                        alphabet, args.max_instances)


def _oracle_config(args) -> dict:
    return {
        "variant": args.variant,
        "sizes": args.size,
        "budget": args.budget,
        "tape_cap": args.tape_cap,
        "eof": args.eof,
        "underflow": args.underflow,
        "input_alphabet": args.input_alphabet,
    }


def _cmd_count(args, workers):
    rows = cen.vanishing_report(max(args.max_n, 2))[: args.max_n + 1]
    config = {"command": "count", "max_n": args.max_n, "alphabet": cen.SYMBOLS.decode()}
    body = [[r.n, r.p, r.q, r.sigma_pow, cen.format_ratio(r.p_ratio), cen.format_ratio(r.q_ratio)]
            for r in rows]
    return rep.render(config, rep.COUNT_HEADER, body)


def _census_rows(args, workers):
    policy = _oracle_policy(args)
    return policy, [size_census(args.variant, n, policy, workers) for n in args.size]


def _cmd_census(args, workers):
    policy, censuses = _census_rows(args, workers)
    if args.verify:
        for c in censuses:
            for k, (inst, v) in enumerate(c.records):
                if (c.n <= 6 or k % 100 == 0) and not verify(inst, v, policy.semantics):
                    raise SoundnessError(f"witness {v} for {inst.text!r} does not re-verify")
    if args.log:
        with open(args.log, "w", encoding="utf-8", newline="\n") as fh:
            for c in censuses:
                for inst, v in c.records:
                    rec = {"variant": inst.variant.value, "n": c.n, "text": inst.text.decode("latin-1"),
                           "input": inst.input.hex(), **verdict_to_json(v)}
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
    config = {"command": "census", **_oracle_config(args)}
    body = [[c.variant.value, c.n, c.p, c.h_min, c.d_min, c.unknown, policy.budget, policy.tape_cap]
            for c in censuses]
    return rep.render(config, rep.CENSUS_HEADER, body)


def _cmd_eval(args, workers):
    policy, censuses = _census_rows(args, workers)
    try:
        tester = parse_tester(args.tester, policy, args.global_budget)
    except (TesterSpecError, ValueError) as exc:
        raise UsageError(f"--tester: {exc}") from None
    stats = [evaluate(tester, c, strings=args.universe == "strings") for c in censuses]
    config = {"command": "eval", **_oracle_config(args), "tester": tester.name,
              "tester_kind": tester.kind, "global_budget": args.global_budget, "universe": args.universe}
    body = [[s.tester, s.variant.value, s.n, s.p, s.easy_h, s.hard_h, s.easy_d, s.hard_d,
             s.unverifiable, s.wrong, cen.format_ratio(s.failure_rate)] for s in stats]
    notes = []
    if "census:" in tester.name:
        notes.append("census tester dovetails are budgeted: 'nontermination' answers stand for runs "
                     "that would not finish")
    text = rep.render(config, rep.EVAL_HEADER, body, notes)
    if tester.kind != APPROXIMATING:
        bad = [(s.n, w.decode("latin-1")) for s in stats for w in s.wrong_instances]
        if bad:
            raise SoundnessError(f"{tester.name} contradicts certified verdicts on {bad[:10]}", text)
    return text


def _cmd_tm(args, workers):
    if args.exhaustive:
        rows = [tm.exhaustive_row(n, args.budget) for n in args.states]
    else:
        rows = tm.falloff_experiment(args.states, args.samples, args.seed, args.budget, workers)
    config = {"command": "tm falloff", "states": args.states, "samples": args.samples,
              "seed": args.seed, "budget": args.budget, "exhaustive": args.exhaustive,
              "model": {"alphabet": "0,1", "blank": 0, "halt": "transition target",
                        "repeat": "frontier-state repeat", "left_move_at_cell_0": "falls off"}}
    body = [[r.states, r.samples, *(r.counts[k] for k in tm.OUTCOMES)] for r in rows]
    return rep.render(config, rep.FALLOFF_HEADER, body)


def _cmd_report(args, workers):
    artifacts = [rep.read_artifact(p) for p in args.inputs]
    shared, header, rows, notes = rep.merge(artifacts)
    config = {"command": "report", "merged": shared}
    return rep.render(config, header, rows, notes)


def _dispatch(args, workers) -> str:
    if args.command == "count":
        return _cmd_count(args, workers)
    if args.command == "census":
        return _cmd_census(args, workers)
    if args.command == "eval":
        return _cmd_eval(args, workers)
    if args.command == "tm":
        return _cmd_tm(args, workers)
    return _cmd_report(args, workers)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        workers = args.workers if args.workers is not None else int(os.environ.get(WORKERS_ENV, "1"))
        text = _dispatch(args, max(1, workers))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (rep.ProvenanceError, ResourceLimitError, FileNotFoundError, ValueError) as exc:
        print(f"halt-lab: {exc}", file=sys.stderr)
        return 1
    except (SoundnessError, cen.InequalityViolation) as exc:
        if getattr(exc, "artifact", None):
            _emit(exc.artifact, args.out)
        print(f"halt-lab: soundness failure: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
