import json

import pytest
from hypothesis import given, settings, strategies as st

from gpcforge.bitheap import parse_shape, shape_columns, shape_multiplier
from gpcforge.gpc_core import COUNTER_6, FULL_ADDER, CounterSpec, default_catalog
from gpcforge.scheduler import (
    NOT_ACCEPTABLE, AnchorState, CpKind, SchedulingError, apply_placements, build_schedule,
    cp_select, finish_chain, fits, schedule_stats, speculative_targets, update_anchor,
)

E, CP, FA, TE = CpKind.EMPTY, CpKind.CP, CpKind.FA, CpKind.TE
NA = NOT_ACCEPTABLE

# carries x height 0..5 ("5" stands for every height above 4)
TABLE = {
    0: [E, CP, FA, FA, TE, NA],
    1: [CP, FA, FA, TE, TE, NA],
    2: [FA, FA, TE, TE, NA, NA],
}


@pytest.mark.parametrize("carries", [0, 1, 2])
@pytest.mark.parametrize("height", range(6))
def test_cp_table(carries, height):
    assert cp_select(carries, height) is TABLE[carries][height]


def test_cp_table_counts():
    cells = [cp_select(c, h) for c in range(3) for h in range(6)]
    assert len(cells) == 18
    assert cells.count(NA) == 4
    assert cells.count(E) == 1


def test_cp_predicate():
    for c in range(3):
        for h in range(12):
            ok = h <= 4 and h + c <= 5
            assert (cp_select(c, h) is not NA) == ok
    assert cp_select(3, 0) is NA
    assert cp_select(0, -1) is NA


def test_cp_capacity_matches_inputs():
    for c in range(3):
        for h in range(5):
            kind = cp_select(c, h)
            if kind is not NA:
                assert c + h <= kind.capacity
                assert kind is not CP or c + h == 1


def ref_anchor(heights, carries=0):
    """The anchor loop guard written out directly; returns (anchor, carries)."""
    anchor = 0
    while anchor < len(heights) and heights[anchor] <= 4 and heights[anchor] + carries <= 5:
        carries = (carries + heights[anchor]) // 2
        anchor += 1
    return anchor, carries


def test_update_anchor_examples():
    s = update_anchor(AnchorState(), [3, 2, 0, 0])
    assert [k for _, k in s.cp_chain] == [FA, FA, CP, E]
    assert s.carry_trace == (1, 1, 0, 0)
    assert s.anchor == 4

    s = update_anchor(AnchorState(), [4, 3])
    assert [k for _, k in s.cp_chain] == [TE, TE]
    assert (s.anchor, s.carries) == (2, 2)

    s = update_anchor(AnchorState(), [5, 1])
    assert (s.anchor, s.cp_chain) == (0, ())


@given(st.lists(st.integers(0, 7), min_size=1, max_size=20))
def test_update_anchor_matches_reference(heights):
    s = update_anchor(AnchorState(), heights)
    assert (s.anchor, s.carries) == ref_anchor(heights)
    assert all(c <= 2 for c in s.carry_trace)


def test_update_anchor_resumes():
    s = update_anchor(AnchorState(), [4, 6, 1])
    assert s.anchor == 1
    s2 = update_anchor(s, [4, 3, 1])
    assert s2.anchor == 3
    assert [k for _, k in s2.cp_chain] == [TE, TE, FA]


def test_ragged_acceptance():
    heights = [4, 3, 2, 3, 2, 2]
    s = finish_chain(update_anchor(AnchorState(), heights))
    kinds = [k for _, k in s.cp_chain]
    assert kinds[:6] == [TE] * 6
    assert kinds[6:] == [FA, CP]
    assert max(s.carry_trace) == 2


def test_finish_chain():
    s = finish_chain(AnchorState(3, 1, ((0, FA),) * 3))
    assert s.cp_chain[-1] == (3, CP)
    assert s.carries == 0


def test_speculative_targets():
    assert speculative_targets(0, 4) == [4, 3, 3, 3]
    assert speculative_targets(2, 3) == [3, 3, 3]
    assert speculative_targets(1, 1) == [4]
    assert speculative_targets(0, 0) == []


def test_fits_examples():
    assert fits(FULL_ADDER, [7], [0], [4], 0, 0)
    assert fits(FULL_ADDER, [4], [1], [4], 0, 0)
    assert not fits(FULL_ADDER, [4], [0], [4], 0, 0)
    assert not fits(COUNTER_6, [3], [0], [4], 0, 0)
    assert not fits(FULL_ADDER, [7, 7], [0, 0], [4, 3], 0, 1)


def test_fits_counts_only_fed_columns():
    c25 = default_catalog()[6]
    assert c25.name == "(2,5)"
    # weight-2 column is tall, weight-1 column is at target: still useful
    assert fits(c25, [5, 9], [0, 0], [4, 3], 0, 0)
    assert not fits(c25, [5, 1], [0, 0], [4, 3], 0, 0)


def _kinds(schedule):
    return [e.kind for e in schedule.cp_chain]


def test_popcount7_efficiency_literal_tie_break():
    sched = build_schedule(parse_shape("popcount:7"), default_catalog("efficiency", "slack"))
    assert [p.counter.name for p in sched.placements] == ["FA", "FA"]
    assert sched.heights == ((7,), (3, 2))
    assert _kinds(sched) == [FA, FA, CP]
    assert str(schedule_stats(sched)) == "FA:2 stages:1"


def test_popcount7_strength():
    sched = build_schedule(parse_shape("popcount:7"), default_catalog("strength"))
    assert [p.counter.name for p in sched.placements] == ["(6)"]
    assert sched.heights == ((7,), (2, 1, 1))
    assert _kinds(sched) == [FA, FA, FA, CP]
    stats = schedule_stats(sched)
    assert stats.count("(6)") == 1 and stats.stages == 1
    assert str(stats) == "(6):1 stages:1"


def test_popcount128_strength_mix():
    stats = schedule_stats(build_schedule(parse_shape("popcount:128"), default_catalog("strength")))
    assert stats.stages == 3
    assert (stats.count("FA"), stats.count("(2,5)"), stats.count("(6)"), stats.slice_total) == (2, 0, 25, 5)


@pytest.mark.parametrize("order", ["efficiency", "strength", "product"])
def test_mul16_three_stages(order):
    assert build_schedule(shape_multiplier(16, 16), default_catalog(order)).n_stages == 3


def test_no_compression_needed():
    sched = build_schedule(shape_columns([3, 3, 3]), default_catalog())
    assert sched.n_stages == 0
    assert _kinds(sched) == [FA, TE, TE, FA, CP]
    assert len(sched.sum_bits) == sched.sum_width == 5


def test_single_bit():
    sched = build_schedule(shape_columns([1]), default_catalog())
    assert sched.n_stages == 0
    assert _kinds(sched) == [CP]
    assert sched.sum_width == 1


def test_empty_low_column():
    sched = build_schedule(shape_columns([0, 3]), default_catalog())
    assert _kinds(sched) == [E, FA, CP]
    assert sched.sum_bits[0] is None


def test_non_progress_reported():
    with pytest.raises(SchedulingError, match="fallback"):
        build_schedule(shape_columns([5]), [COUNTER_6])
    with pytest.raises(SchedulingError):
        build_schedule(shape_columns([5]), [])


def test_deterministic():
    a = build_schedule(parse_shape("mul:8x8"), default_catalog("product"))
    b = build_schedule(parse_shape("mul:8x8"), default_catalog("product"))
    assert a.to_json() == b.to_json()


def test_pipeline_registers():
    mat = parse_shape("popcount:40")
    base = build_schedule(mat, default_catalog())
    assert base.n_stages >= 2
    sched = build_schedule(mat, default_catalog(), pipeline_after=[1, 99])
    assert sched.pipeline_after == {1}
    assert len(sched.registers) == 1
    bank = sched.registers[0]
    assert len(bank.pairs) == sched.live_counts[1]
    # second stage consumes register outputs only
    reg_out = {b.id for _, b in bank.pairs}
    stage2_in = {r.id for p in sched.stages[1] for col in p.consumed for r in col}
    assert stage2_in <= reg_out
    assert sched.heights == base.heights


def test_placement_invariants():
    sched = build_schedule(parse_shape("cols:64,64,64"), default_catalog("strength"))
    for p in sched.placements:
        sig = p.counter.signature
        assert [len(c) for c in p.consumed] == list(sig.inputs)
        assert [len(c) for c in p.produced] == list(sig.outputs)
        for j, col in enumerate(p.consumed):
            assert all(r.weight == p.position + j for r in col)


def test_schedule_json_layout():
    sched = build_schedule(parse_shape("popcount:7"), default_catalog("efficiency", "slack"))
    doc = json.loads(sched.to_json())
    assert list(doc) == ["stages", "cp_chain", "pipeline_after", "sum_width"]
    assert list(doc["stages"][0][0]) == ["counter", "position", "consumed", "produced"]
    assert doc["cp_chain"] == [
        {"column": 0, "kind": "FA"}, {"column": 1, "kind": "FA"}, {"column": 2, "kind": "CP"}
    ]
    assert doc["sum_width"] == 3


def test_stats_lut_estimate():
    sched = build_schedule(parse_shape("popcount:7"), default_catalog("efficiency", "slack"))
    stats = schedule_stats(sched)
    assert stats.counter_luts == 2
    assert stats.lut_estimate == 5
    assert stats.slice_total == 0


def test_apply_placements():
    mat = shape_columns([6, 3])
    out, placed = apply_placements(mat, [(COUNTER_6, 0), (FULL_ADDER, 1)])
    assert out.heights == [1, 2, 2]
    assert len(placed) == 2
    with pytest.raises(SchedulingError):
        apply_placements(mat, [(COUNTER_6, 1)])


shapes = st.lists(st.integers(0, 12), min_size=1, max_size=16).filter(any)


@settings(max_examples=150, deadline=None)
@given(shapes, st.sampled_from(["efficiency", "strength", "product"]),
       st.sampled_from(["metric", "slack"]))
def test_progress_property(heights, order, tie_break):
    sched = build_schedule(shape_columns(heights), default_catalog(order, tie_break))
    live = sched.live_counts
    assert all(a > b for a, b in zip(live, live[1:]))
    assert all(0 <= c <= 2 for c in sched.carry_trace)
    assert len(sched.cp_chain) >= len(heights) - (heights[-1] == 0)
    assert all(stage for stage in sched.stages)
    for e in sched.cp_chain:
        assert len(e.bits) + len(e.carries_in) <= e.kind.capacity
        assert len(e.carries_in) <= 2
    # every stage reached only a table-acceptable final profile
    final = sched.heights[-1]
    s = update_anchor(AnchorState(), final)
    assert s.anchor == len(final)


def test_user_catalog_without_slices():
    cat = [CounterSpec.parse("(3:1,1]", 1, name="FA")]
    sched = build_schedule(parse_shape("popcount:30"), cat)
    assert {p.counter.name for p in sched.placements} == {"FA"}
