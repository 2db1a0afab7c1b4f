"""CSV artifacts with embedded provenance, and merging them into summaries."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

FORMAT = "halt-lab/1"

COUNT_HEADER = ["n", "p", "q", "sigma_pow", "p_ratio", "q_ratio"]
CENSUS_HEADER = ["variant", "n", "p", "h_min", "d_min", "unknown", "budget", "tape_cap"]
EVAL_HEADER = ["tester", "variant", "n", "p", "easy_h", "hard_h", "easy_d", "hard_d",
               "unverifiable", "wrong", "failure_rate"]
FALLOFF_HEADER = ["states", "samples", "halt", "fall_off", "frontier_repeat", "config_cycle", "unknown"]

# config keys that may differ between artifacts merged by ``report``
_PER_FILE_KEYS = {"size", "sizes", "command"}


class ProvenanceError(ValueError):
    pass


def render(config: dict, header: Sequence[str], rows: Iterable[Sequence], notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# format: {FORMAT}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    for note in notes:
        buf.write(f"# {note}\n")
    return buf.getvalue()


@dataclass
class Artifact:
    path: str
    config: dict
    header: list[str]
    rows: list[dict[str, str]]


def read_artifact(path: str | Path) -> Artifact:
    text = Path(path).read_text(encoding="utf-8")
    config = None
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            body.append(line)
    if config is None:
        raise ProvenanceError(f"{path}: no embedded config, not a halt-lab artifact")
    reader = csv.DictReader(body)
    rows = list(reader)
    return Artifact(str(path), config, list(reader.fieldnames or []), rows)


def _ratio(num: int, den: int) -> tuple[str, str]:
    if den == 0:
        return "", ""
    r = Fraction(num, den)
    return f"{r.numerator}/{r.denominator}", f"{float(r):.6f}"


def _shared(config: dict) -> dict:
    return {k: v for k, v in config.items() if k not in _PER_FILE_KEYS}


def merge(artifacts: Sequence[Artifact]) -> tuple[dict, list[str], list[list], list[str]]:
    """Combine per-size census or eval artifacts into one table with cumulative columns."""
    if not artifacts:
        raise ProvenanceError("nothing to report")
    shared = _shared(artifacts[0].config)
    for a in artifacts[1:]:
        if _shared(a.config) != shared:
            diff = sorted(k for k in set(shared) | set(_shared(a.config))
                          if shared.get(k) != a.config.get(k))
            raise ProvenanceError(f"{a.path}: provenance differs from {artifacts[0].path} in {diff}")
    header = artifacts[0].header
    if any(a.header != header for a in artifacts):
        raise ProvenanceError("artifacts of different kinds cannot be merged")
    if header == CENSUS_HEADER:
        return _merge_census(shared, artifacts)
    if header == EVAL_HEADER:
        return _merge_eval(shared, artifacts)
    raise ProvenanceError(f"report merges census and eval artifacts, not {header}")


def _by_size(artifacts: Sequence[Artifact]) -> list[dict[str, str]]:
    rows: dict[int, dict[str, str]] = {}
    for a in artifacts:
        for row in a.rows:
            n = int(row["n"])
            if n in rows:
                raise ProvenanceError(f"size {n} appears twice")
            rows[n] = row
    sizes = sorted(rows)
    if sizes != list(range(len(sizes))):
        raise ProvenanceError(f"sizes must run contiguously from 0, got {sizes}")
    return [rows[n] for n in sizes]


def _merge_census(shared, artifacts):
    header = CENSUS_HEADER[:6] + ["P", "H_min", "D_min", "Unknown", "h_min_ratio",
                                  "h_min_ratio_decimal", "h_min_trend"]
    out = []
    P = H = D = U = 0
    prev = None
    direction_changes, last_dir = 0, None
    for row in _by_size(artifacts):
        p, h, d, u = (int(row[k]) for k in ("p", "h_min", "d_min", "unknown"))
        P, H, D, U = P + p, H + h, D + d, U + u
        ratio = Fraction(h, p)
        trend = ""
        if prev is not None:
            trend = "up" if ratio > prev else "down" if ratio < prev else "flat"
            if trend != "flat":
                if last_dir is not None and trend != last_dir:
                    direction_changes += 1
                last_dir = trend
        prev = ratio
        out.append([row[k] for k in CENSUS_HEADER[:6]] + [P, H, D, U, *_ratio(h, p), trend])
    monotone = "no" if direction_changes else "yes"
    notes = [f"h_min/p monotone over the observed sizes: {monotone} ({direction_changes} direction changes)"]
    return shared, header, out, notes


def _merge_eval(shared, artifacts):
    header = ["tester", "variant", "n", "p", "hard_h", "hard_d", "failure_rate", "failure_rate_decimal",
              "P", "Hard_H", "Hard_D", "cumulative_failure_rate", "cumulative_failure_rate_decimal"]
    out = []
    P = HH = HD = 0
    for row in _by_size(artifacts):
        p, hh, hd = int(row["p"]), int(row["hard_h"]), int(row["hard_d"])
        P, HH, HD = P + p, HH + hh, HD + hd
        out.append([row["tester"], row["variant"], row["n"], p, hh, hd, *_ratio(hh + hd, p),
                    P, HH, HD, *_ratio(HH + HD, P)])
    return shared, header, out, []
