from __future__ import annotations

import pytest

from conftest import reference_classify
from halt_lab.bf import Diverges, Halts, Instance, Reason, Unknown, Variant, verify
from halt_lab.census import count_programs
from halt_lab.oracle import (
    CensusError,
    OraclePolicy,
    ResourceLimitError,
    classify,
    count_instances,
    cumulative,
    enumerate_instances,
    size_census,
    verdict_from_json,
    verdict_to_json,
)


def test_classify_examples():
    assert classify(Instance.of("E", "+")) == Halts(1)
    assert classify(Instance.of("E", "+[]")) == Diverges(2, 1)
    wide = OraclePolicy(budget=10**6, tape_cap=1 << 22)
    assert classify(Instance.of("E", "+[>+]"), wide) == Unknown(Reason.NO_CYCLE_FOUND)


def test_census_examples():
    c = size_census("E", 1)
    assert (c.p, c.h_min, c.d_min, c.unknown) == (6, 6, 0, 0)
    assert all(v == Halts(1) for _, v in c.records)
    c = size_census("E", 0)
    assert (c.p, c.h_min) == (1, 1)
    c = size_census("E", 3)
    assert c.d_min >= 1
    assert dict(c.records)[Instance.of("E", "+[]")] == Diverges(2, 1)


@pytest.mark.parametrize("variant", ["E", "S", "G"])
@pytest.mark.parametrize("n", range(5))
def test_census_invariants_and_witnesses(variant, n):
    c = size_census(variant, n, OraclePolicy(budget=2000))
    assert c.h_min + c.d_min + c.unknown == c.p == count_instances(variant, n)
    lo, hi = c.h_interval()
    assert lo <= hi
    for inst, v in c.records:
        assert inst.size == n
        assert verify(inst, v)


def test_census_matches_reference_oracle():
    c = size_census("S", 4, OraclePolicy(budget=300))
    for inst, v in c.records:
        ref = reference_classify(inst, 300)
        assert v == ref if ref is not None else isinstance(v, Unknown)


def test_variant_s_reads_own_text():
    c = size_census("S", 3)
    assert c.p == count_programs(3)
    assert all(inst.input == inst.text for inst, _ in c.records)


def test_variant_g_instances():
    insts = list(enumerate_instances("G", 2))
    assert len(insts) == count_instances("G", 2) == 1 * 4 + 6 * 2 + 37
    assert insts[0] == Instance(Variant.G, b"", b"\x00\x00")
    assert count_instances("G", 1, bytes(range(256))) == 256 + 6


def test_census_is_budget_monotone():
    small = size_census("E", 4, OraclePolicy(budget=50))
    large = size_census("E", 4, OraclePolicy(budget=5000))
    big = dict(large.records)
    for inst, v in small.records:
        if not isinstance(v, Unknown):
            assert big[inst] == v
    assert large.unknown <= small.unknown


def test_census_independent_of_workers():
    a = size_census("E", 5, OraclePolicy(budget=3000), workers=1)
    b = size_census("E", 5, OraclePolicy(budget=3000), workers=3)
    assert a == b
    assert a.records == b.records


def test_resource_cap():
    with pytest.raises(ResourceLimitError, match="exceed"):
        size_census("E", 5, OraclePolicy(max_instances=100))


def test_cumulative():
    cs = [size_census("E", n) for n in range(3)]
    rows = cumulative(cs)
    assert rows[-1].P == 1 + 6 + 37 == 44
    assert rows[1].H_min == 7
    assert cumulative(cs[:1])[0].P == 1
    with pytest.raises(CensusError):
        cumulative([cs[0], cs[2]])
    with pytest.raises(CensusError):
        cumulative([cs[0], size_census("E", 1, OraclePolicy(budget=10))])


@pytest.mark.parametrize("v", [Halts(3), Diverges(2, 1), Unknown(Reason.TAPE_CAP)])
def test_verdict_json_roundtrip(v):
    assert verdict_from_json(verdict_to_json(v)) == v
