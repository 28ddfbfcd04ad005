"""Stake-weighted validator selection and the per-tick sealer pick.

Selection follows the cumulative-probability scheme: probabilities are
stake shares, the cumulative array ends at exactly 1.0, and a draw r picks
the smallest index with r <= C[i] (boundary inclusive). Zero-stake
validators keep their index but are never selected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import _kernels
from .errors import ErrorCode, ZtError

#: stream id used to derive per-tick sealer randomness from the run seed
SEALER_STREAM_SALT = 0x5EA1


@dataclass(frozen=True)
class StakeTable:
    """Ordered stakes S[1..N], one non-negative integer per validator."""

    stakes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "stakes", tuple(int(s) for s in self.stakes))
        _validate(self.stakes)

    @property
    def total(self) -> int:
        return sum(self.stakes)

    def __len__(self) -> int:
        return len(self.stakes)


def _validate(stakes: Sequence[int]) -> None:
    if len(stakes) == 0:
        raise ZtError(ErrorCode.EMPTY_TABLE, "stake table has no validators")
    total = 0
    for s in stakes:
        if s < 0:
            raise ZtError(ErrorCode.INVALID_FIELD, f"negative stake: {s}")
        total += s
    if total == 0:
        raise ZtError(ErrorCode.ZERO_TOTAL_STAKE, "total stake is zero")
    if total >= _kernels.MAX_STAKE_TOTAL:
        raise ZtError(ErrorCode.INVALID_FIELD, "total stake too large for exact arithmetic")


def _as_stakes(table: StakeTable | Sequence[int]) -> tuple[int, ...]:
    if isinstance(table, StakeTable):
        return table.stakes
    stakes = tuple(int(s) for s in table)
    _validate(stakes)
    return stakes


def cumulative_probabilities(table: StakeTable | Sequence[int]) -> list[float]:
    return _kernels.cumulative_probabilities(_as_stakes(table))


def selection_probability(table: StakeTable | Sequence[int], index: int) -> float:
    """Analytic selection probability of 1-based validator ``index``."""
    cum = cumulative_probabilities(table)
    prev = cum[index - 2] if index >= 2 else 0.0
    return cum[index - 1] - prev


def select_validator(table: StakeTable | Sequence[int], r: float) -> int:
    """1-based validator index for draw r in [0, 1]."""
    stakes = _as_stakes(table)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"draw must lie in [0, 1], got {r}")
    cum = _kernels.cumulative_probabilities(stakes)
    return _kernels.select_index(cum, stakes, r)


def selection_frequencies(
    table: StakeTable | Sequence[int], draws: int, seed: int, stream: int = 0
) -> list[float]:
    """Empirical selection frequencies over ``draws`` seeded draws."""
    stakes = _as_stakes(table)
    if draws < 1:
        raise ValueError("draws must be >= 1")
    counts = _kernels.selection_counts(stakes, draws, seed, stream)
    return [c / draws for c in counts]


def pick_sealer(table: StakeTable | Sequence[int], tick: int, seed: int) -> int:
    """Deterministic sealer for a sealing tick: one draw from the
    (seed, tick) stream fed to the selection rule."""
    stakes = _as_stakes(table)
    r = _kernels.uniform_fill(seed, SEALER_STREAM_SALT + tick, 1)[0]
    cum = _kernels.cumulative_probabilities(stakes)
    return _kernels.select_index(cum, stakes, r)


def load_stakes(path: str | Path) -> StakeTable:
    """Load a stake table from a JSON file of shape {"stakes": [ints]}."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ZtError(ErrorCode.IO_ERROR, f"cannot read stake table: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed stake table file: {exc}") from exc
    if not isinstance(data, dict) or "stakes" not in data or not isinstance(data["stakes"], list):
        raise ZtError(ErrorCode.FORMAT_ERROR, 'stake table file must contain {"stakes": [...]}')
    return StakeTable(tuple(data["stakes"]))
