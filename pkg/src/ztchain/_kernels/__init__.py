"""Kernel backend selection: compiled extension if available, else pure.

Set ``ZTCHAIN_PURE=1`` to force the pure-Python backend (benchmarks and
parity tests use this).
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("ZTCHAIN_PURE"):
    _impl = pure
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

BACKEND: str = _impl.BACKEND
MAX_STAKE_TOTAL: int = _impl.MAX_STAKE_TOTAL

mix64 = _impl.mix64
derive_state = _impl.derive_state
next_u64 = _impl.next_u64
uniform_fill = _impl.uniform_fill
uniform_range_fill = _impl.uniform_range_fill
cumulative_probabilities = _impl.cumulative_probabilities
select_index = _impl.select_index
select_many = _impl.select_many
selection_counts = _impl.selection_counts

__all__ = [
    "BACKEND",
    "MAX_STAKE_TOTAL",
    "mix64",
    "derive_state",
    "next_u64",
    "uniform_fill",
    "uniform_range_fill",
    "cumulative_probabilities",
    "select_index",
    "select_many",
    "selection_counts",
    "pure",
]
