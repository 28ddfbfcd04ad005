"""Just-in-time access: temporal execution windows for target contracts.

A window opens when execution starts (deadline = start + threshold) and
enforcement is strict-after: the boundary instant itself is still inside
the window. Unknown targets are treated as not-overtime, so opening a
window is a precondition for enforcement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .addresses import AccountAddress
from .errors import ErrorCode, ZtError

CONTRACT_NAME = "JustInTimeAccess"

#: fallback execution window; never quantified upstream, tune per scenario
DEFAULT_THRESHOLD_MS = 300_000


@dataclass
class JitState:
    execution_deadline: dict[AccountAddress, int] = field(default_factory=dict)
    threshold_ms: int = DEFAULT_THRESHOLD_MS


class TerminationOutcome(Enum):
    NOT_OVERTIME = "NOT_OVERTIME"
    TERMINATED = "TERMINATED"


@dataclass
class SimulatedTarget:
    """A running target contract with a halt hook for tests and scenarios."""

    address: AccountAddress
    running: bool = True
    fail_termination: bool = False

    def halt(self) -> bool:
        if self.fail_termination:
            return False
        self.running = False
        return True


class JitContract:
    """State machine over :class:`JitState` plus a target-hook registry.

    ``window_enabled`` is the fault-injection toggle: disabling it makes
    every target look in-window, which the threat harness uses to prove
    the JIT window is load-bearing.
    """

    def __init__(self, threshold_ms: int = DEFAULT_THRESHOLD_MS, window_enabled: bool = True):
        if threshold_ms <= 0:
            raise ZtError(ErrorCode.CONFIG_ERROR, "threshold_ms must be positive")
        self.state = JitState(threshold_ms=threshold_ms)
        self.window_enabled = window_enabled
        self._hooks: dict[AccountAddress, Callable[[], bool]] = {}

    def register_target(self, target: SimulatedTarget) -> None:
        self._hooks[target.address] = target.halt

    def register_hook(self, address: AccountAddress, hook: Callable[[], bool]) -> None:
        self._hooks[address] = hook

    def start_execution(self, target: AccountAddress, now: int) -> int:
        """Open (or restart) the window; returns the deadline.

        Restarting an already-open window replaces it (last write wins).
        """
        if target.is_null:
            raise ZtError(ErrorCode.INVALID_CONTRACT_ADDRESS)
        deadline = now + self.state.threshold_ms
        self.state.execution_deadline[target] = deadline
        return deadline

    def set_deadline(self, target: AccountAddress, deadline: int) -> None:
        """Replay path: restore a recorded deadline verbatim."""
        if target.is_null:
            raise ZtError(ErrorCode.INVALID_CONTRACT_ADDRESS)
        self.state.execution_deadline[target] = deadline

    def is_overtime(self, target: AccountAddress, now: int) -> bool:
        if target.is_null:
            return False
        deadline = self.state.execution_deadline.get(target)
        if deadline is None:
            return False
        if not self.window_enabled:
            return False
        return now > deadline

    def terminate_execution(self, target: AccountAddress, now: int) -> TerminationOutcome:
        """Halt the target iff it is overtime; in-window calls do nothing."""
        if target.is_null:
            raise ZtError(ErrorCode.INVALID_CONTRACT_ADDRESS)
        if not self.is_overtime(target, now):
            return TerminationOutcome.NOT_OVERTIME
        hook = self._hooks.get(target)
        if hook is not None and not hook():
            raise ZtError(ErrorCode.TERMINATE_FAILED)
        return TerminationOutcome.TERMINATED
