"""Netlist elaboration, bit-parallel simulation, oracle verification and emitters."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .bitheap import BitMatrix, SignalRef, check_assignment
from .gpc_core import CounterSpec, evaluate_batch, validate
from .scheduler import CpKind, Schedule

__all__ = [
    "NodeKind",
    "Node",
    "Netlist",
    "ElaborationError",
    "SimResult",
    "RandomVectors",
    "EXHAUSTIVE",
    "VerifyReport",
    "elaborate",
    "simulate",
    "simulate_batch",
    "oracle_sum",
    "verify",
    "emit_json",
    "emit_hdl",
]

MAX_EXHAUSTIVE_BITS = 20


class ElaborationError(ValueError):
    pass


class NodeKind(str, Enum):
    COUNTER = "counter"
    CP = "cp"
    REGISTER = "register"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str
    consumes: tuple[SignalRef, ...]
    produces: tuple[SignalRef, ...]
    spec: CounterSpec | None = None
    position: int = 0
    carries_in: int = 0  # CP nodes: trailing inputs that are chain carries


@dataclass(frozen=True)
class Netlist:
    inputs: tuple[SignalRef, ...]
    nodes: tuple[Node, ...]
    sum: tuple[SignalRef | None, ...]
    phantom: tuple[SignalRef | None, ...] = ()
    label: str = ""
    stage_signals: tuple[int, ...] = ()

    def nodes_of(self, kind: NodeKind) -> list[Node]:
        return [n for n in self.nodes if n.kind is kind]

    @property
    def counters_used(self) -> list[CounterSpec]:
        seen = {}
        for n in self.nodes_of(NodeKind.COUNTER):
            seen.setdefault(n.spec.name, n.spec)
        return list(seen.values())


def elaborate(schedule: Schedule, matrix: BitMatrix) -> Netlist:
    """Turn a schedule into a topologically ordered netlist and check its wiring."""
    inputs = tuple(matrix.inputs)
    nodes: list[Node] = []
    registers = {r.after_stage: r for r in schedule.registers}
    for s, stage in enumerate(schedule.stages, start=1):
        for k, pl in enumerate(stage):
            consumes = tuple(r for col in pl.consumed for r in col)
            produces = tuple(r for col in pl.produced for r in col)
            nodes.append(
                Node(f"s{s}_{k}", NodeKind.COUNTER, pl.counter.name, consumes, produces,
                     pl.counter, pl.position)
            )
        if s in registers:
            pairs = registers[s].pairs
            nodes.append(
                Node(f"reg{s}", NodeKind.REGISTER, "reg",
                     tuple(a for a, _ in pairs), tuple(b for _, b in pairs))
            )
    for e in schedule.cp_chain:
        if e.kind is CpKind.EMPTY:
            continue
        nodes.append(
            Node(f"cp{e.column}", NodeKind.CP, e.kind.value, e.bits + e.carries_in,
                 (e.sum,) + e.carries_out, position=e.column, carries_in=len(e.carries_in))
        )

    driven = {r.id for r in inputs}
    for node in nodes:
        for r in node.consumes:
            if r.id not in driven:
                raise ElaborationError(f"node {node.id}: dangling signal {r!r}")
        for r in node.produces:
            if r.id in driven:
                raise ElaborationError(f"node {node.id}: signal {r!r} has two drivers")
            driven.add(r.id)
        if node.kind is NodeKind.COUNTER and validate(node.spec):
            raise ElaborationError(f"node {node.id}: invalid counter {node.spec.name}")
        if node.kind is NodeKind.CP:
            kind = CpKind(node.label)
            if len(node.consumes) > kind.capacity or node.carries_in > 2:
                raise ElaborationError(f"node {node.id}: {kind.value} overloaded")
    for r in schedule.chain_sums:
        if r is not None and r.id not in driven:
            raise ElaborationError(f"sum bit {r!r} is not driven")

    return Netlist(
        inputs=inputs,
        nodes=tuple(nodes),
        sum=tuple(schedule.sum_bits),
        phantom=tuple(schedule.phantom_bits),
        label=matrix.label,
        stage_signals=tuple(schedule.live_counts),
    )


def _weighted_total(refs, position, values, n):
    total = np.zeros(n, dtype=np.int64)
    for r in refs:
        total += values[r.id].astype(np.int64) << (r.weight - position)
    return total


def _run(netlist: Netlist, bits: np.ndarray) -> dict[int, np.ndarray]:
    """Propagate a batch of input vectors (rows) through the netlist."""
    n = bits.shape[0]
    values = {r.id: bits[:, i] for i, r in enumerate(netlist.inputs)}
    for node in netlist.nodes:
        if node.kind is NodeKind.REGISTER:
            for a, b in zip(node.consumes, node.produces):
                values[b.id] = values[a.id]
        elif node.kind is NodeKind.COUNTER:
            total = _weighted_total(node.consumes, node.position, values, n)
            for r, v in zip(node.produces, evaluate_batch(node.spec, total)):
                values[r.id] = v
        else:
            total = np.zeros(n, dtype=np.int64)
            for r in node.consumes:
                total += values[r.id]
            values[node.produces[0].id] = (total & 1).astype(np.uint8)
            half = total >> 1
            carries = node.produces[1:]
            if carries:
                values[carries[0].id] = (half >= 1).astype(np.uint8)
            if len(carries) > 1:
                values[carries[1].id] = (half >= 2).astype(np.uint8)
    return values


def _pack(bit_refs, values, n) -> np.ndarray:
    wide = len(bit_refs) > 62
    out = np.zeros(n, dtype=object if wide else np.int64)
    for i, r in enumerate(bit_refs):
        if r is None:
            continue
        v = values[r.id]
        out += (v.astype(object) << i) if wide else (v.astype(np.int64) << i)
    return out


@dataclass(frozen=True)
class SimResult:
    value: int
    trace: dict[str, tuple[int, ...]]
    phantom: tuple[int, ...] = ()


def _input_rows(netlist: Netlist, assignment: Mapping[SignalRef, int]) -> np.ndarray:
    missing = [r for r in netlist.inputs if r not in assignment]
    if missing:
        raise KeyError(f"assignment misses input {missing[0]!r}")
    return np.array([[assignment[r] for r in netlist.inputs]], dtype=np.uint8)


def simulate(netlist: Netlist, assignment: Mapping[SignalRef, int]) -> SimResult:
    """Evaluate one input assignment; registers behave as wires."""
    values = _run(netlist, _input_rows(netlist, assignment))
    trace = {n.id: tuple(int(values[r.id][0]) for r in n.produces) for n in netlist.nodes}
    value = int(_pack(netlist.sum, values, 1)[0])
    phantom = tuple(0 if r is None else int(values[r.id][0]) for r in netlist.phantom)
    return SimResult(value, trace, phantom)


def simulate_batch(netlist: Netlist, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values of a batch of input rows: (trimmed sums, untrimmed chain totals)."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    values = _run(netlist, bits)
    n = bits.shape[0]
    trimmed = _pack(netlist.sum, values, n)
    full = _pack(netlist.sum + netlist.phantom, values, n)
    return trimmed, full


def oracle_sum(matrix: BitMatrix, assignment: Mapping[SignalRef, int]) -> int:
    """Weighted sum of the input bits, no counters involved."""
    check_assignment(matrix, assignment)
    return sum(int(assignment[r]) << r.weight for r in matrix.inputs)


def _oracle_batch(matrix: BitMatrix, bits: np.ndarray) -> np.ndarray:
    weights = [r.weight for r in matrix.inputs]
    wide = max(weights) + len(weights).bit_length() > 62
    w = np.array([1 << x for x in weights], dtype=object if wide else np.int64)
    return bits.astype(w.dtype) @ w


EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class RandomVectors:
    samples: int
    seed: int = 1


@dataclass
class VerifyReport:
    samples: int
    exhaustive: bool
    mismatches: list[tuple[int, int, int]] = field(default_factory=list)
    mismatch_count: int = 0
    stage_signals: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return self.mismatch_count == 0

    @property
    def max_stage_signals(self) -> int:
        return max(self.stage_signals, default=0)

    def __str__(self):
        mode = "exhaustive" if self.exhaustive else "random"
        status = "pass" if self.passed else f"FAIL ({self.mismatch_count} mismatches)"
        return f"{status}: {self.samples} {mode} vectors"


def _vectors(n_bits: int, strategy, chunk: int):
    if strategy == EXHAUSTIVE:
        if n_bits > MAX_EXHAUSTIVE_BITS:
            raise ValueError(
                f"exhaustive verification limited to {MAX_EXHAUSTIVE_BITS} input bits, got {n_bits}"
            )
        total = 1 << n_bits
        shifts = np.arange(n_bits, dtype=np.int64)
        for start in range(0, total, chunk):
            idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
            yield ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    elif isinstance(strategy, RandomVectors):
        rng = np.random.default_rng(strategy.seed)
        left = strategy.samples
        while left > 0:
            k = min(chunk, left)
            yield rng.integers(0, 2, size=(k, n_bits), dtype=np.uint8)
            left -= k
    else:
        raise ValueError(f"unknown verification strategy {strategy!r}")


def _row_int(row) -> int:
    return sum(int(b) << i for i, b in enumerate(row))


def verify(netlist: Netlist, matrix: BitMatrix, strategy=EXHAUSTIVE, *,
           chunk: int = 1 << 15, keep: int = 16) -> VerifyReport:
    """Compare simulation with the oracle sum.

    A vector fails if the trimmed sum differs from the oracle or if any
    chain output above the result width is set.  Up to ``keep`` failures are
    recorded as ``(input vector as int, expected, untrimmed value)``.
    """
    if [r.id for r in netlist.inputs] != [r.id for r in matrix.inputs]:
        raise ElaborationError("netlist was not elaborated from this matrix")
    report = VerifyReport(0, strategy == EXHAUSTIVE, stage_signals=netlist.stage_signals)
    for bits in _vectors(len(netlist.inputs), strategy, chunk):
        trimmed, full = simulate_batch(netlist, bits)
        expected = _oracle_batch(matrix, bits)
        bad = np.flatnonzero((trimmed != expected) | (full != trimmed))
        report.samples += bits.shape[0]
        report.mismatch_count += len(bad)
        for i in bad[: max(0, keep - len(report.mismatches))]:
            report.mismatches.append((_row_int(bits[i]), int(expected[i]), int(full[i])))
    return report


# ---------------------------------------------------------------- emitters


def emit_json(netlist: Netlist) -> str:
    doc = {
        "inputs": [r.id for r in netlist.inputs],
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "counter": n.label,
                "consumes": [r.id for r in n.consumes],
                "produces": [r.id for r in n.produces],
            }
            for n in netlist.nodes
        ],
        "sum": [None if r is None else r.id for r in netlist.sum],
    }
    return json.dumps(doc, indent=2) + "\n"


def module_name(spec: CounterSpec) -> str:
    ins, outs = spec.signature.msb_first()
    return "gpc_" + "_".join(map(str, ins)) + "__" + "_".join(map(str, outs))


def _ident(text: str) -> str:
    name = re.sub(r"\W+", "_", text).strip("_") or "matrix"
    return name if name[0].isalpha() else "m_" + name


def _sig(r: SignalRef | None, zero: str) -> str:
    return zero if r is None else f"s{r.id}"


def _case_rows(spec: CounterSpec):
    """(total, flat output bits LSB-first) for every achievable total."""
    sig = spec.signature
    totals = np.arange(sig.max_input + 1)
    bits = evaluate_batch(spec, totals)
    return [(int(t), [int(b[t]) for b in bits]) for t in totals]


def _group(refs: Sequence[SignalRef], pos: int, widths):
    cols = [[] for _ in widths]
    for r in refs:
        cols[r.weight - pos].append(r)
    return cols


def _verilog_counter(spec: CounterSpec) -> list[str]:
    sig = spec.signature
    q = sig.q
    tw = max(sig.max_input.bit_length(), 1)
    ports = [f"input wire [{p - 1}:0] i{j}" for j, p in enumerate(sig.inputs) if p]
    ports += [f"output wire [{c - 1}:0] o{j}" for j, c in enumerate(sig.outputs) if c]
    terms = [f"(i{j}[{b}] << {j})" if j else f"i{j}[{b}]"
             for j, p in enumerate(sig.inputs) for b in range(p)]
    lines = [f"// {sig}, {spec.luts} LUT(s)", f"module {module_name(spec)} ("]
    lines += [f"  {p}," for p in ports[:-1]] + [f"  {ports[-1]}", ");"]
    lines.append(f"  wire [{tw - 1}:0] total = " + " + ".join(terms) + ";")
    lines.append(f"  reg [{q - 1}:0] y;")
    lines.append("  always @* begin")
    lines.append("    case (total)")
    for t, bits in _case_rows(spec):
        word = "".join(str(b) for b in reversed(bits))
        lines.append(f"      {tw}'d{t}: y = {q}'b{word};")
    lines.append(f"      default: y = {{{q}{{1'bx}}}};")
    lines.append("    endcase")
    lines.append("  end")
    k = 0
    for j, c in enumerate(sig.outputs):
        if c:
            lines.append(f"  assign o{j} = y[{k + c - 1}:{k}];")
            k += c
    lines.append("endmodule")
    return lines


def _vcat(refs) -> str:
    return "{" + ", ".join(f"s{r.id}" for r in reversed(refs)) + "}"


def _verilog_top(netlist: Netlist, top: str) -> list[str]:
    regs = netlist.nodes_of(NodeKind.REGISTER)
    n_in, n_sum = len(netlist.inputs), len(netlist.sum)
    ports = ([" input wire clk"] if regs else []) + [
        f" input wire [{n_in - 1}:0] x",
        f" output wire [{n_sum - 1}:0] s",
    ]
    lines = [f"module {top} (", ",\n".join(" " + p for p in ports), ");"]
    reg_ids = {r.id for n in regs for r in n.produces}
    decl = [r for r in netlist.inputs] + [r for n in netlist.nodes for r in n.produces]
    for r in decl:
        lines.append(f"  {'reg ' if r.id in reg_ids else 'wire'} s{r.id};")
    for i, r in enumerate(netlist.inputs):
        lines.append(f"  assign s{r.id} = x[{i}];")
    for node in netlist.nodes:
        if node.kind is NodeKind.COUNTER:
            sig = node.spec.signature
            conns = []
            for j, col in enumerate(_group(node.consumes, node.position, sig.inputs)):
                if col:
                    conns.append(f".i{j}({_vcat(col)})")
            for j, col in enumerate(_group(node.produces, node.position, sig.outputs)):
                if col:
                    conns.append(f".o{j}({_vcat(col)})")
            lines.append(f"  {module_name(node.spec)} u_{node.id} ({', '.join(conns)});")
        elif node.kind is NodeKind.REGISTER:
            lines.append("  always @(posedge clk) begin")
            for a, b in zip(node.consumes, node.produces):
                lines.append(f"    s{b.id} <= s{a.id};")
            lines.append("  end")
        else:
            t = f"t_{node.id}"
            total = " + ".join(f"s{r.id}" for r in node.consumes)
            lines.append(f"  wire [2:0] {t} = {total};  // {node.label}")
            out = node.produces
            lines.append(f"  assign s{out[0].id} = {t}[0];")
            if len(out) > 1:
                lines.append(f"  assign s{out[1].id} = |{t}[2:1];")
            if len(out) > 2:
                lines.append(f"  assign s{out[2].id} = {t}[2];")
    bits = ", ".join(_sig(r, "1'b0") for r in reversed(netlist.sum))
    lines.append(f"  assign s = {{{bits}}};")
    lines.append("endmodule")
    return lines


def _vhdl_counter(spec: CounterSpec) -> list[str]:
    sig = spec.signature
    q = sig.q
    name = module_name(spec)
    ports = [f"i{j} : in  std_logic_vector({p - 1} downto 0)" for j, p in enumerate(sig.inputs) if p]
    ports += [f"o{j} : out std_logic_vector({c - 1} downto 0)" for j, c in enumerate(sig.outputs) if c]
    lines = [
        f"-- {sig}, {spec.luts} LUT(s)",
        "library ieee;",
        "use ieee.std_logic_1164.all;",
        "",
        f"entity {name} is",
        "  port (",
    ]
    lines += [f"    {p};" for p in ports[:-1]] + [f"    {ports[-1]}", "  );", f"end {name};", ""]
    lines += [f"architecture behav of {name} is", f"  signal y : std_logic_vector({q - 1} downto 0);", "begin"]
    sens = ", ".join(f"i{j}" for j, p in enumerate(sig.inputs) if p)
    lines += [f"  process({sens})", "    variable total : natural;", "  begin", "    total := 0;"]
    for j, p in enumerate(sig.inputs):
        for b in range(p):
            lines.append(f"    if i{j}({b}) = '1' then total := total + {1 << j}; end if;")
    lines.append("    case total is")
    for t, bits in _case_rows(spec):
        word = "".join(str(b) for b in reversed(bits))
        lines.append(f'      when {t} => y <= "{word}";')
    lines += ["      when others => y <= (others => 'X');", "    end case;", "  end process;"]
    k = 0
    for j, c in enumerate(sig.outputs):
        if c:
            lines.append(f"  o{j} <= y({k + c - 1} downto {k});")
            k += c
    lines.append("end behav;")
    return lines


def _vhdl_top(netlist: Netlist, top: str) -> list[str]:
    regs = netlist.nodes_of(NodeKind.REGISTER)
    n_in, n_sum = len(netlist.inputs), len(netlist.sum)
    lines = ["library ieee;", "use ieee.std_logic_1164.all;", "use ieee.numeric_std.all;", "",
             f"entity {top} is", "  port ("]
    if regs:
        lines.append("    clk : in  std_logic;")
    lines += [f"    x   : in  std_logic_vector({n_in - 1} downto 0);",
              f"    s   : out std_logic_vector({n_sum - 1} downto 0)", "  );", f"end {top};", "",
              f"architecture struct of {top} is"]
    for r in list(netlist.inputs) + [r for n in netlist.nodes for r in n.produces]:
        lines.append(f"  signal s{r.id} : std_logic;")
    lines.append("begin")
    for i, r in enumerate(netlist.inputs):
        lines.append(f"  s{r.id} <= x({i});")
    for node in netlist.nodes:
        if node.kind is NodeKind.COUNTER:
            sig = node.spec.signature
            conns = []
            for j, col in enumerate(_group(node.consumes, node.position, sig.inputs)):
                for b, r in enumerate(col):
                    conns.append(f"i{j}({b}) => s{r.id}")
            for j, col in enumerate(_group(node.produces, node.position, sig.outputs)):
                for b, r in enumerate(col):
                    conns.append(f"o{j}({b}) => s{r.id}")
            lines.append(f"  u_{node.id} : entity work.{module_name(node.spec)}")
            lines.append("    port map (" + ", ".join(conns) + ");")
        elif node.kind is NodeKind.REGISTER:
            lines.append(f"  {node.id} : process(clk) begin")
            lines.append("    if rising_edge(clk) then")
            for a, b in zip(node.consumes, node.produces):
                lines.append(f"      s{b.id} <= s{a.id};")
            lines += ["    end if;", "  end process;"]
        else:
            terms = " + ".join(f"unsigned'(\"00\" & s{r.id})" for r in node.consumes)
            lines.append(f"  {node.id} : block  -- {node.label}")
            lines.append("    signal t : unsigned(2 downto 0);")
            lines.append("  begin")
            lines.append(f"    t <= {terms};")
            out = node.produces
            lines.append(f"    s{out[0].id} <= t(0);")
            if len(out) > 1:
                lines.append(f"    s{out[1].id} <= t(2) or t(1);")
            if len(out) > 2:
                lines.append(f"    s{out[2].id} <= t(2);")
            lines.append("  end block;")
    for i, r in enumerate(netlist.sum):
        lines.append(f"  s({i}) <= {_sig(r, chr(39) + '0' + chr(39))};")
    lines.append("end struct;")
    return lines


def emit_hdl(netlist: Netlist, dialect: str = "verilog", top: str | None = None) -> str:
    """Behavioural module per counter type plus a structural top level.

    ``dialect`` is ``"verilog"`` or ``"vhdl"``.
    """
    top = _ident(top or f"sum_{netlist.label}")
    counters = sorted(netlist.counters_used, key=module_name)
    if dialect in ("verilog", "verilog-like"):
        blocks = [_verilog_counter(c) for c in counters] + [_verilog_top(netlist, top)]
        header = f"// matrix summation: {netlist.label}"
    elif dialect in ("vhdl", "vhdl-like"):
        blocks = [_vhdl_counter(c) for c in counters] + [_vhdl_top(netlist, top)]
        header = f"-- matrix summation: {netlist.label}"
    else:
        raise ValueError(f"unknown HDL dialect {dialect!r}")
    return header + "\n\n" + "\n\n".join("\n".join(b) for b in blocks) + "\n"
