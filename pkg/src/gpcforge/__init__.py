"""Compressor trees from generalized parallel counters with a flexible carry-propagate goal."""

from .bitheap import (BitMatrix, SignalRef, mul_partial_products, parse_shape, render_dots,
                      result_width, shape_columns, shape_multiplier)
from .gpc_core import (CounterSpec, GpcSignature, Ordering, SliceAtom, compose_slice,
                       default_catalog, evaluate, metrics, validate)
from .netgraph import EXHAUSTIVE, RandomVectors, elaborate, emit_hdl, emit_json, oracle_sum, simulate, verify
from .scheduler import build_schedule, cp_select, schedule_stats

__version__ = "0.1.0"
