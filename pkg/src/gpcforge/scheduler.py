"""Greedy anchor-driven counter placement with a flexible carry-propagate goal.

Compression stages are built right to left.  An *anchor* marks the lowest
column not yet absorbed by the final carry-propagate (CP) chain; a column
is absorbed as soon as its height, together with the carries arriving from
below, fits one of the CP elements.  Counters are only placed at or above
the anchor and only while they help some column exceed its CP target.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .bitheap import BitMatrix, Origin, SignalRef, result_width
from .gpc_core import CounterKind, CounterSpec

__all__ = [
    "CpKind",
    "NOT_ACCEPTABLE",
    "AnchorState",
    "Placement",
    "CpElement",
    "RegisterBank",
    "Schedule",
    "ScheduleStats",
    "SchedulingError",
    "cp_select",
    "update_anchor",
    "finish_chain",
    "speculative_targets",
    "fits",
    "apply_placements",
    "build_schedule",
    "schedule_stats",
]


class SchedulingError(RuntimeError):
    pass


class CpKind(str, Enum):
    EMPTY = "empty"
    CP = "CP"  # bit copy
    FA = "FA"  # full adder
    TE = "TE"  # ternary element

    @property
    def capacity(self) -> int:
        return {"empty": 0, "CP": 1, "FA": 3, "TE": 5}[self.value]


NOT_ACCEPTABLE = None

# rows: incoming carries, columns: column height 0..4
_CP_TABLE = {
    0: (CpKind.EMPTY, CpKind.CP, CpKind.FA, CpKind.FA, CpKind.TE),
    1: (CpKind.CP, CpKind.FA, CpKind.FA, CpKind.TE, CpKind.TE),
    2: (CpKind.FA, CpKind.FA, CpKind.TE, CpKind.TE),
}


def cp_select(carries: int, height: int) -> CpKind | None:
    """CP element for a column, or ``NOT_ACCEPTABLE`` (``None``)."""
    row = _CP_TABLE.get(carries)
    if row is None or not 0 <= height < len(row):
        return NOT_ACCEPTABLE
    return row[height]


@dataclass(frozen=True)
class AnchorState:
    anchor: int = 0
    carries: int = 0
    cp_chain: tuple[tuple[int, CpKind], ...] = ()
    carry_trace: tuple[int, ...] = ()


def update_anchor(state: AnchorState, heights: Sequence[int]) -> AnchorState:
    """Absorb columns into the CP chain for as long as they are acceptable."""
    anchor, carries = state.anchor, state.carries
    chain = list(state.cp_chain)
    trace = list(state.carry_trace)
    while anchor < len(heights):
        kind = cp_select(carries, heights[anchor])
        if kind is NOT_ACCEPTABLE:
            break
        chain.append((anchor, kind))
        carries = (carries + heights[anchor]) // 2
        trace.append(carries)
        anchor += 1
    return AnchorState(anchor, carries, tuple(chain), tuple(trace))


def finish_chain(state: AnchorState) -> AnchorState:
    """Extend the chain beyond the matrix until no carries are left."""
    anchor, carries = state.anchor, state.carries
    chain = list(state.cp_chain)
    trace = list(state.carry_trace)
    while carries:
        chain.append((anchor, cp_select(carries, 0)))
        carries //= 2
        trace.append(carries)
        anchor += 1
    return AnchorState(anchor, carries, tuple(chain), tuple(trace))


def speculative_targets(carries: int, width: int) -> list[int]:
    """Largest acceptable height per column from the anchor upwards.

    Assumes every column ends up at its target, which maximises the carries
    into the next column (pessimistic recurrence).
    """
    out = []
    c = carries
    for _ in range(width):
        t = max(h for h in range(5) if cp_select(c, h) is not NOT_ACCEPTABLE)
        out.append(t)
        c = (c + t) // 2
    return out


def fits(counter: CounterSpec, remaining, produced, targets, pos: int, anchor: int) -> bool:
    """Whether ``counter`` can be placed with its LSB column at ``pos``.

    Every input column must be fully fed by unconsumed bits, and at least one
    column it consumes from must still exceed its target in effective height
    (unconsumed plus produced this stage).
    """
    if pos < anchor:
        return False
    ins = counter.signature.inputs[: counter.width]
    if pos + len(ins) > len(remaining):
        return False
    useful = False
    for j, p in enumerate(ins):
        if not p:
            continue
        c = pos + j
        if remaining[c] < p:
            return False
        if remaining[c] + produced[c] > targets[c]:
            useful = True
    return useful


@dataclass(frozen=True)
class Placement:
    counter: CounterSpec
    position: int
    stage: int
    consumed: tuple[tuple[SignalRef, ...], ...]
    produced: tuple[tuple[SignalRef, ...], ...]

    def to_dict(self) -> dict:
        return {
            "counter": self.counter.name,
            "position": self.position,
            "consumed": [[r.id for r in col] for col in self.consumed],
            "produced": [[r.id for r in col] for col in self.produced],
        }


@dataclass(frozen=True)
class CpElement:
    column: int
    kind: CpKind
    bits: tuple[SignalRef, ...]
    carries_in: tuple[SignalRef, ...]
    sum: SignalRef | None
    carries_out: tuple[SignalRef, ...]


@dataclass(frozen=True)
class RegisterBank:
    after_stage: int
    pairs: tuple[tuple[SignalRef, SignalRef], ...]


class _Stage:
    """Mutable workspace for one compression stage."""

    def __init__(self, columns, ids, stage: int):
        self.cols = [list(c) for c in columns]
        self.ids = ids
        self.stage = stage
        self.remaining = [len(c) for c in self.cols]
        self.produced_refs: list[list[SignalRef]] = [[] for _ in self.cols]
        self.produced = [0] * len(self.cols)
        self.placements: list[Placement] = []

    def place(self, counter: CounterSpec, pos: int) -> Placement:
        sig = counter.signature
        if pos < 0 or pos + counter.width > len(self.cols):
            raise SchedulingError(f"{counter.name} at {pos} exceeds the matrix")
        ins = sig.inputs[: counter.width]
        for j, p in enumerate(ins):
            if self.remaining[pos + j] < p:
                raise SchedulingError(f"{counter.name} at {pos}: column {pos + j} too low")
        consumed = []
        for j, p in enumerate(ins):
            col = self.cols[pos + j]
            consumed.append(tuple(col.pop() for _ in range(p)))
            self.remaining[pos + j] -= p
        consumed += [()] * (sig.width - counter.width)
        need = pos + sig.out_width
        while len(self.produced_refs) < need:
            self.produced_refs.append([])
            self.produced.append(0)
            self.cols.append([])
            self.remaining.append(0)
        produced = []
        for i, q in enumerate(sig.outputs):
            w = pos + i
            refs = tuple(SignalRef(next(self.ids), w, Origin.COUNTER_OUTPUT) for _ in range(q))
            produced.append(refs)
            self.produced_refs[w].extend(refs)
            self.produced[w] += q
        pl = Placement(counter, pos, self.stage, tuple(consumed), tuple(produced))
        self.placements.append(pl)
        return pl

    def result(self) -> list[list[SignalRef]]:
        cols = [c + p for c, p in zip(self.cols, self.produced_refs)]
        while cols and not cols[-1]:
            cols.pop()
        return cols


def apply_placements(matrix: BitMatrix, placements: Iterable[tuple[CounterSpec, int]]):
    """Run one compression stage with explicitly given ``(counter, position)`` pairs.

    Returns the compressed matrix and the list of placements.
    """
    ids = itertools.count(_next_id(matrix.columns))
    stage = _Stage(matrix.columns, ids, 1)
    for counter, pos in placements:
        stage.place(counter, pos)
    return BitMatrix(tuple(stage.result())), stage.placements


def _next_id(columns) -> int:
    return max((r.id for c in columns for r in c), default=-1) + 1


@dataclass(frozen=True)
class Schedule:
    matrix: BitMatrix
    stages: tuple[tuple[Placement, ...], ...]
    pipeline_after: frozenset[int]
    registers: tuple[RegisterBank, ...]
    cp_chain: tuple[CpElement, ...]
    sum_width: int
    heights: tuple[tuple[int, ...], ...]  # before stage 1, then after each stage
    carry_trace: tuple[int, ...] = field(default=())

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def placements(self) -> list[Placement]:
        return [p for s in self.stages for p in s]

    @property
    def chain_sums(self) -> list[SignalRef | None]:
        sums = [e.sum for e in self.cp_chain]
        return sums + [None] * (self.sum_width - len(sums))

    @property
    def sum_bits(self) -> list[SignalRef | None]:
        """Sum outputs trimmed to the result width."""
        return self.chain_sums[: self.sum_width]

    @property
    def phantom_bits(self) -> list[SignalRef | None]:
        """Chain outputs at weights that the matrix can never reach."""
        return self.chain_sums[self.sum_width:]

    @property
    def live_counts(self) -> list[int]:
        return [sum(h) for h in self.heights]

    def to_dict(self) -> dict:
        return {
            "stages": [[p.to_dict() for p in s] for s in self.stages],
            "cp_chain": [{"column": e.column, "kind": e.kind.value} for e in self.cp_chain],
            "pipeline_after": sorted(self.pipeline_after),
            "sum_width": self.sum_width,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _heights(cols) -> list[int]:
    return [len(c) for c in cols]


def build_schedule(
    matrix: BitMatrix, catalog: Sequence[CounterSpec], pipeline_after: Iterable[int] = ()
) -> Schedule:
    """Greedy compressor construction.

    ``catalog`` is tried in order of preference; ``pipeline_after`` lists the
    (1-based) compression stages followed by a register bank.  Requests for
    stages that do not exist are dropped.
    """
    if not catalog:
        raise SchedulingError("empty counter catalog")
    pipeline_after = frozenset(int(s) for s in pipeline_after)
    ids = itertools.count(_next_id(matrix.columns))
    cols = [list(c) for c in matrix.columns]
    while cols and not cols[-1]:
        cols.pop()
    trace = [tuple(_heights(cols))]
    state = update_anchor(AnchorState(), _heights(cols))
    stages, registers = [], []

    while state.anchor < len(cols):
        n = len(stages) + 1
        width = len(cols)
        targets = [0] * state.anchor + speculative_targets(state.carries, width - state.anchor)
        stage = _Stage(cols, ids, n)
        for counter in catalog:
            for pos in range(state.anchor, width - counter.width + 1):
                while fits(counter, stage.remaining, stage.produced, targets, pos, state.anchor):
                    stage.place(counter, pos)
        if not stage.placements:
            raise SchedulingError(
                f"no counter fits at anchor {state.anchor} (height {len(cols[state.anchor])}, "
                f"carries {state.carries}); the catalog lacks a fallback such as a full adder"
            )
        stages.append(tuple(stage.placements))
        cols = stage.result()
        if n in pipeline_after:
            pairs = []
            for w, col in enumerate(cols):
                new = [SignalRef(next(ids), w, Origin.REGISTER_OUTPUT) for _ in col]
                pairs.extend(zip(col, new))
                cols[w] = new
            registers.append(RegisterBank(n, tuple(pairs)))
        trace.append(tuple(_heights(cols)))
        state = update_anchor(state, _heights(cols))

    state = finish_chain(state)
    chain = []
    carries: tuple[SignalRef, ...] = ()
    for col, kind in state.cp_chain:
        bits = tuple(cols[col]) if col < len(cols) else ()
        if kind is CpKind.EMPTY:
            chain.append(CpElement(col, kind, bits, carries, None, ()))
            continue
        n_out = (len(bits) + len(carries)) // 2
        s = SignalRef(next(ids), col, Origin.CP_OUTPUT)
        outs = tuple(SignalRef(next(ids), col + 1, Origin.CP_OUTPUT) for _ in range(n_out))
        chain.append(CpElement(col, kind, bits, carries, s, outs))
        carries = outs

    applied = frozenset(r.after_stage for r in registers)
    return Schedule(
        matrix=matrix,
        stages=tuple(stages),
        pipeline_after=applied,
        registers=tuple(registers),
        cp_chain=tuple(chain),
        sum_width=result_width(matrix),
        heights=tuple(trace),
        carry_trace=state.carry_trace,
    )


@dataclass(frozen=True)
class ScheduleStats:
    counts: dict[str, int]
    slice_total: int
    stages: int
    counter_luts: int
    lut_estimate: int

    def count(self, name: str) -> int:
        return self.counts.get(name, 0)

    def __str__(self):
        parts = [f"{k}:{v}" for k, v in self.counts.items()]
        return " ".join(parts + [f"stages:{self.stages}"])


def schedule_stats(schedule: Schedule) -> ScheduleStats:
    """Counter mix and a LUT estimate (every non-empty CP element counts as one LUT)."""
    placements = schedule.placements
    counts = Counter(p.counter.name for p in placements)
    order = {}
    for p in placements:
        order.setdefault(p.counter.name, (-p.counter.signature.p, p.counter.name))
    names = sorted(counts, key=lambda n: order[n])
    slices = sum(1 for p in placements if p.counter.kind is CounterKind.SLICE)
    counter_luts = sum(p.counter.luts for p in placements)
    cp_luts = sum(1 for e in schedule.cp_chain if e.kind is not CpKind.EMPTY)
    return ScheduleStats(
        counts={n: counts[n] for n in names},
        slice_total=slices,
        stages=schedule.n_stages,
        counter_luts=counter_luts,
        lut_estimate=counter_luts + cp_luts,
    )
