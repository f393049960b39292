"""Bit matrices to be summed and their dot-diagram rendering."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

__all__ = [
    "Origin",
    "SignalRef",
    "BitMatrix",
    "shape_columns",
    "shape_multiplier",
    "mul_partial_products",
    "result_width",
    "render_dots",
    "parse_shape",
    "read_shape_file",
]


class Origin(str, Enum):
    PRIMARY_INPUT = "primary-input"
    COUNTER_OUTPUT = "counter-output"
    CP_OUTPUT = "cp-output"
    REGISTER_OUTPUT = "register-output"


@dataclass(frozen=True)
class SignalRef:
    id: int
    weight: int
    origin: Origin = Origin.PRIMARY_INPUT

    def __repr__(self):
        return f"s{self.id}@{self.weight}"


@dataclass(frozen=True)
class BitMatrix:
    """Columns of signals indexed by weight exponent."""

    columns: tuple[tuple[SignalRef, ...], ...]
    label: str = ""

    def __post_init__(self):
        cols = tuple(tuple(c) for c in self.columns)
        object.__setattr__(self, "columns", cols)
        if not any(cols):
            raise ValueError("a bit matrix needs at least one bit")
        for i, col in enumerate(cols):
            if any(ref.weight != i for ref in col):
                raise ValueError(f"column {i} holds a signal of another weight")

    @property
    def width(self) -> int:
        return len(self.columns)

    @property
    def heights(self) -> list[int]:
        return [len(c) for c in self.columns]

    @property
    def inputs(self) -> list[SignalRef]:
        return [ref for col in self.columns for ref in col]

    @property
    def max_total(self) -> int:
        return sum(h << i for i, h in enumerate(self.heights))

    @property
    def result_width(self) -> int:
        return result_width(self)

    def __len__(self):
        return sum(self.heights)


def shape_columns(heights: Sequence[int], label: str = "") -> BitMatrix:
    """Matrix with ``heights[i]`` fresh primary inputs of weight ``2**i``."""
    heights = [int(h) for h in heights]
    if any(h < 0 for h in heights):
        raise ValueError("column heights must be non-negative")
    if not any(heights):
        raise ValueError("at least one column height must be positive")
    next_id = 0
    cols = []
    for w, h in enumerate(heights):
        cols.append(tuple(SignalRef(next_id + j, w) for j in range(h)))
        next_id += h
    return BitMatrix(tuple(cols), label or "cols:" + ",".join(map(str, heights)))


def _pp_index(n: int, m: int) -> list[list[tuple[int, int]]]:
    # (j, k) pairs of each column, j indexing the n-bit operand
    cols: list[list[tuple[int, int]]] = [[] for _ in range(n + m - 1)]
    for j in range(n):
        for k in range(m):
            cols[j + k].append((j, k))
    return cols


def shape_multiplier(n: int, m: int) -> BitMatrix:
    """Partial-product trapezoid of an unsigned ``n`` x ``m`` multiplication."""
    if n < 1 or m < 1:
        raise ValueError("operand widths must be positive")
    heights = [len(c) for c in _pp_index(n, m)]
    mat = shape_columns(heights)
    return BitMatrix(mat.columns, f"mul:{n}x{m}")


def mul_partial_products(a: int, b: int, n: int, m: int) -> dict[SignalRef, int]:
    """Input assignment of ``shape_multiplier(n, m)`` for operands ``a``, ``b``."""
    if not (0 <= a < 1 << n and 0 <= b < 1 << m):
        raise ValueError(f"operands out of range for {n}x{m}")
    mat = shape_multiplier(n, m)
    out = {}
    for col, pairs in zip(mat.columns, _pp_index(n, m)):
        for ref, (j, k) in zip(col, pairs):
            out[ref] = (a >> j) & (b >> k) & 1
    return out


def result_width(matrix: BitMatrix) -> int:
    """Bits needed for the largest achievable sum."""
    return max(matrix.max_total.bit_length(), 1)


def render_dots(matrix: BitMatrix | Sequence[int], dot: str = "o") -> str:
    """Monospaced dot diagram, MSB column on the left, dots hanging from the top."""
    heights = matrix.heights if isinstance(matrix, BitMatrix) else list(matrix)
    rows = []
    for r in range(max(heights)):
        cells = [dot if h > r else " " for h in reversed(heights)]
        rows.append(" ".join(cells).rstrip())
    return "\n".join(rows) + "\n"


def parse_shape(text: str) -> BitMatrix:
    """Build a matrix from ``popcount:N``, ``cols:h0,h1,...``, ``mul:NxM`` or ``file:PATH``."""
    kind, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(f"shape needs a 'kind:' prefix: {text!r}")
    try:
        if kind == "popcount":
            n = int(arg)
            return BitMatrix(shape_columns([n]).columns, f"popcount:{n}")
        if kind == "cols":
            return shape_columns([int(h) for h in arg.split(",")])
        if kind == "mul":
            n, m = (int(x) for x in arg.lower().split("x"))
            return shape_multiplier(n, m)
        if kind == "file":
            return read_shape_file(arg)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad shape {text!r}: {exc}") from exc
    raise ValueError(f"unknown shape kind {kind!r}")


def read_shape_file(path) -> BitMatrix:
    """One line of comma-separated column heights, LSB first."""
    with open(path) as f:
        line = f.readline().strip()
    return shape_columns([int(h) for h in line.split(",")])


def assignment_from_int(matrix: BitMatrix, vector: int) -> dict[SignalRef, int]:
    """Bit ``i`` of ``vector`` drives the ``i``-th primary input (column-major)."""
    return {ref: (vector >> i) & 1 for i, ref in enumerate(matrix.inputs)}


def check_assignment(matrix: BitMatrix, assignment: Mapping[SignalRef, int]):
    missing = [ref for ref in matrix.inputs if ref not in assignment]
    if missing:
        raise KeyError(f"assignment misses {len(missing)} inputs, e.g. {missing[0]!r}")
