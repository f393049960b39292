"""Generalized parallel counters: signatures, metrics, behaviour and the default catalog.

A counter ``(p_{m-1},...,p_0:q_{n-1},...,q_0]`` sums ``p_i`` input bits of
weight ``2**i`` into ``q_i`` output bits of weight ``2**i``.  Internally all
column lists are stored LSB first; the textual notation is MSB first.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GpcSignature",
    "CounterKind",
    "CounterSpec",
    "SliceAtom",
    "Metrics",
    "Ordering",
    "EncodingError",
    "metrics",
    "compose_slice",
    "validate",
    "evaluate",
    "evaluate_batch",
    "default_catalog",
    "catalog_csv",
    "FULL_ADDER",
    "HALF_ADDER",
    "COUNTER_6",
    "COUNTER_25",
    "COUNTER_1325",
]


class EncodingError(ValueError):
    """A total could not be recoded into the output columns of a counter."""


@dataclass(frozen=True, order=True)
class GpcSignature:
    """Right-aligned input/output column bit counts, LSB first."""

    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(x) for x in self.inputs))
        object.__setattr__(self, "outputs", tuple(int(x) for x in self.outputs))
        if not self.inputs or not self.outputs:
            raise ValueError("a signature needs at least one input and one output column")
        if any(x < 0 for x in self.inputs + self.outputs):
            raise ValueError("column bit counts must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "GpcSignature":
        """Parse counter notation such as ``"(2,5:1,2,1]"``."""
        m = re.fullmatch(r"\s*\(([\d,\s]+):([\d,\s]+)\]\s*", text)
        if m is None:
            raise ValueError(f"not a counter signature: {text!r}")
        ins = [int(x) for x in m.group(1).split(",")]
        outs = [int(x) for x in m.group(2).split(",")]
        return cls(tuple(reversed(ins)), tuple(reversed(outs)))

    def __str__(self):
        ins = ",".join(str(x) for x in reversed(self.inputs))
        outs = ",".join(str(x) for x in reversed(self.outputs))
        return f"({ins}:{outs}]"

    @property
    def width(self) -> int:
        """Number of input columns (``m``), including zero columns."""
        return len(self.inputs)

    @property
    def span(self) -> int:
        """Input columns up to the most significant one actually fed."""
        return max((i + 1 for i, c in enumerate(self.inputs) if c), default=1)

    @property
    def out_width(self) -> int:
        return len(self.outputs)

    @property
    def p(self) -> int:
        return sum(self.inputs)

    @property
    def q(self) -> int:
        return sum(self.outputs)

    @property
    def max_input(self) -> int:
        """Largest achievable input total."""
        return sum(c << i for i, c in enumerate(self.inputs))

    @property
    def max_output(self) -> int:
        return sum(c << i for i, c in enumerate(self.outputs))

    def msb_first(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(reversed(self.inputs)), tuple(reversed(self.outputs))


class CounterKind(str, Enum):
    FLOATING = "floating"
    SLICE = "slice"
    CP_ELEMENT = "cp-element"


# Upper LUT count per kind; a slice holds four LUTs.
KIND_LUT_BOUND = {
    CounterKind.FLOATING: 3,
    CounterKind.SLICE: 4,
    CounterKind.CP_ELEMENT: 1,
}


@dataclass(frozen=True)
class Metrics:
    efficiency: Fraction
    strength: Fraction
    slack: Fraction

    @property
    def product(self) -> Fraction:
        return self.efficiency * self.strength


@dataclass(frozen=True)
class CounterSpec:
    signature: GpcSignature
    luts: int
    kind: CounterKind = CounterKind.FLOATING
    name: str = ""
    metrics: Metrics = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", CounterKind(self.kind))
        if self.luts < 1:
            raise ValueError("a counter occupies at least one LUT")
        if not self.name:
            object.__setattr__(self, "name", str(self.signature))
        object.__setattr__(self, "metrics", _metrics(self.signature, self.luts))

    @classmethod
    def parse(cls, text: str, luts: int, kind=CounterKind.FLOATING, name: str = ""):
        return cls(GpcSignature.parse(text), luts, kind, name)

    @property
    def width(self) -> int:
        """Columns the counter needs for placement."""
        return self.signature.span

    def __str__(self):
        return self.name


def _metrics(sig: GpcSignature, luts: int) -> Metrics:
    p, q = sig.p, sig.q
    eff = Fraction(p - q, luts)
    strength = Fraction(p, q) if q else Fraction(0)
    slack = 1 - Fraction(1 + sig.max_input, 1 + sig.max_output)
    return Metrics(eff, strength, slack)


def metrics(spec: CounterSpec) -> Metrics:
    """Efficiency ``(p-q)/k``, strength ``p/q`` and arithmetic slack as exact rationals."""
    return _metrics(spec.signature, spec.luts)


class SliceAtom(Enum):
    """Two-column slice fragment, tagged (weight-2 count, weight-1 count)."""

    A22 = (2, 2)
    A14 = (1, 4)
    A06 = (0, 6)

    @classmethod
    def from_tag(cls, tag) -> "SliceAtom":
        return cls(tuple(tag))


def _slice_name(sig: GpcSignature) -> str:
    return "(" + ",".join(str(x) for x in reversed(sig.inputs)) + ")"


def compose_slice(low: SliceAtom, high: SliceAtom) -> CounterSpec:
    """Combine two atoms into a four-column whole-slice counter.

    The low atom may take one extra weight-1 bit on the carry-chain input,
    except for ``(0,6)`` whose LUT bypass blocks that input.
    """
    low, high = SliceAtom(low), SliceAtom(high)
    lo2, lo1 = low.value
    hi2, hi1 = high.value
    if low is not SliceAtom.A06:
        lo1 += 1
    sig = GpcSignature((lo1, lo2, hi1, hi2), (1, 1, 1, 1, 1))
    return CounterSpec(sig, 4, CounterKind.SLICE, _slice_name(sig))


def _encode(sig: GpcSignature, total: int) -> list[list[int]]:
    rem = total
    out: list[list[int]] = [[] for _ in sig.outputs]
    for i in range(sig.out_width - 1, -1, -1):
        q = sig.outputs[i]
        ones = min(q, rem >> i)
        rem -= ones << i
        out[i] = [1] * ones + [0] * (q - ones)
    if rem:
        raise EncodingError(f"{sig}: total {total} leaves remainder {rem}")
    return out


def validate(spec: CounterSpec) -> list[str]:
    """Return the list of violation codes for ``spec``; empty means valid.

    Codes: ``signature`` (redundant leading zero output columns or empty
    totals; zero input columns may pad a slice footprint as in ``(0,6,1,5]``),
    ``slack`` (negative arithmetic slack), ``luts`` (LUT count beyond the
    kind bound) and ``encoding`` (some achievable total cannot be recoded).
    """
    sig = spec.signature
    violations = []
    if (
        (sig.out_width > 1 and sig.outputs[-1] == 0)
        or sig.p < 1
        or sig.q < 1
    ):
        violations.append("signature")
    if metrics(spec).slack < 0:
        violations.append("slack")
    if not 1 <= spec.luts <= KIND_LUT_BOUND[spec.kind]:
        violations.append("luts")
    for v in range(sig.max_input + 1):
        try:
            _encode(sig, v)
        except EncodingError:
            violations.append("encoding")
            break
    return violations


def evaluate(spec: CounterSpec, input_bits: Sequence[Sequence[int]]) -> list[list[int]]:
    """Behavioural model: recode the weighted input total canonically.

    Output columns are filled from the most significant one down, setting
    as many bits (in index order) as fit the remaining total.
    """
    sig = spec.signature
    if len(input_bits) != sig.width:
        raise ValueError(f"{spec.name}: expected {sig.width} input columns")
    total = 0
    for i, (col, p) in enumerate(zip(input_bits, sig.inputs)):
        if len(col) != p:
            raise ValueError(f"{spec.name}: column {i} needs {p} bits, got {len(col)}")
        if any(b not in (0, 1) for b in col):
            raise ValueError("input bits must be 0 or 1")
        total += sum(col) << i
    return _encode(sig, total)


def evaluate_batch(spec: CounterSpec, totals: np.ndarray) -> list[np.ndarray]:
    """Vectorised canonical encoding of input totals.

    Returns one ``uint8`` array per output bit, ordered column by column
    (LSB column first), bits within a column in index order.
    """
    sig = spec.signature
    rem = np.asarray(totals, dtype=np.int64).copy()
    per_col: list[list[np.ndarray]] = [[] for _ in sig.outputs]
    for i in range(sig.out_width - 1, -1, -1):
        ones = np.minimum(sig.outputs[i], rem >> i)
        rem -= ones << i
        per_col[i] = [(ones > j).astype(np.uint8) for j in range(sig.outputs[i])]
    if rem.any():
        raise EncodingError(f"{sig}: some totals are not representable")
    return [b for col in per_col for b in col]


FULL_ADDER = CounterSpec(GpcSignature((3,), (1, 1)), 1, CounterKind.FLOATING, "FA")
HALF_ADDER = CounterSpec(GpcSignature((2,), (1, 1)), 1, CounterKind.FLOATING, "HA")
COUNTER_6 = CounterSpec(GpcSignature((6,), (1, 1, 1)), 3, CounterKind.FLOATING, "(6)")
COUNTER_25 = CounterSpec(GpcSignature((5, 2), (1, 2, 1)), 2, CounterKind.FLOATING, "(2,5)")
COUNTER_1325 = CounterSpec(
    GpcSignature((5, 2, 3, 1), (1, 1, 1, 1, 1)), 4, CounterKind.SLICE, "(1,3,2,5)"
)


class Ordering(str, Enum):
    EFFICIENCY = "efficiency"
    STRENGTH = "strength"
    PRODUCT = "product"


def _primary(m: Metrics, ordering: Ordering) -> Fraction:
    if ordering is Ordering.EFFICIENCY:
        return m.efficiency
    if ordering is Ordering.STRENGTH:
        return m.strength
    return m.product


def _secondary(m: Metrics, ordering: Ordering) -> Fraction:
    # efficiency ranks ties by strength; strength and product by efficiency
    return m.strength if ordering is Ordering.EFFICIENCY else m.efficiency


TIE_BREAKS = ("metric", "slack")


def sort_key(spec: CounterSpec, ordering, tie_break: str = "metric") -> tuple:
    """Descending preference key.

    ``tie_break="metric"`` ranks ties on the primary metric by the other
    metric before slack; ``"slack"`` goes straight to slack.  Remaining ties
    fall to more inputs first, then the MSB-first signature.
    """
    ordering = Ordering(ordering)
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    m = spec.metrics
    ins, outs = spec.signature.msb_first()
    second = -_secondary(m, ordering) if tie_break == "metric" else 0
    return (-_primary(m, ordering), second, m.slack, -spec.signature.p, ins, outs)


def order_catalog(counters: Iterable[CounterSpec], ordering, tie_break: str = "metric") -> list[CounterSpec]:
    return sorted(counters, key=lambda c: sort_key(c, ordering, tie_break))


def catalog_members() -> list[CounterSpec]:
    """The thirteen curated counters, unordered."""
    slices = [compose_slice(lo, hi) for hi in SliceAtom for lo in SliceAtom]
    return slices + [COUNTER_1325, FULL_ADDER, COUNTER_6, COUNTER_25]


def default_catalog(ordering="efficiency", tie_break: str = "metric") -> list[CounterSpec]:
    """The thirteen catalog counters in order of preference."""
    return order_catalog(catalog_members(), ordering, tie_break)


def _ratio(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def catalog_csv(catalog: Sequence[CounterSpec]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "signature", "k", "kind", "E", "S", "A"])
    for c in catalog:
        m = c.metrics
        w.writerow(
            [c.name, str(c.signature), c.luts, c.kind.value,
             _ratio(m.efficiency), _ratio(m.strength), _ratio(m.slack)]
        )
    return buf.getvalue()
