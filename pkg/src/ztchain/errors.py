"""Error codes and the domain exception type.

Contract-level codes carry fixed, externally visible messages loaded from
``resources/error_codes.json`` (the CLI and tests assert those exact
strings). Infrastructure codes (IO, config, ...) carry a contextual
message supplied at raise time.
"""

from __future__ import annotations

import json
from enum import Enum
from importlib import resources


def _load_contract_messages() -> dict[str, str]:
    path = resources.files("ztchain.resources").joinpath("error_codes.json")
    return json.loads(path.read_text(encoding="utf-8"))


#: code name -> fixed message, for the contract-level error surface.
CONTRACT_ERROR_MESSAGES: dict[str, str] = _load_contract_messages()


class ErrorCode(Enum):
    # Contract codes (fixed messages, one-to-one with CONTRACT_ERROR_MESSAGES).
    EMPTY_EMAIL = "EMPTY_EMAIL"
    EMPTY_PASSWORD = "EMPTY_PASSWORD"
    EMPTY_DEVICE_INFO = "EMPTY_DEVICE_INFO"
    EMPTY_MAC = "EMPTY_MAC"
    DUPLICATE_USER = "DUPLICATE_USER"
    NOT_OWNER = "NOT_OWNER"
    EMPTY_ROLE = "EMPTY_ROLE"
    EMPTY_ROLE_DESCRIPTION = "EMPTY_ROLE_DESCRIPTION"
    NO_SUCH_USER = "NO_SUCH_USER"
    NO_ROLE_ASSIGNED = "NO_ROLE_ASSIGNED"
    INVALID_PASSWORD = "INVALID_PASSWORD"
    INVALID_DEVICE = "INVALID_DEVICE"
    INVALID_MAC = "INVALID_MAC"
    WRONG_ACCOUNT = "WRONG_ACCOUNT"
    INVALID_CONTRACT_ADDRESS = "INVALID_CONTRACT_ADDRESS"
    TERMINATE_FAILED = "TERMINATE_FAILED"

    # Infrastructure codes (contextual messages).
    EMPTY_PENDING = "EMPTY_PENDING"
    IO_ERROR = "IO_ERROR"
    FORMAT_ERROR = "FORMAT_ERROR"
    ZERO_TOTAL_STAKE = "ZERO_TOTAL_STAKE"
    EMPTY_TABLE = "EMPTY_TABLE"
    UNKNOWN_OPERATION = "UNKNOWN_OPERATION"
    CONFIG_ERROR = "CONFIG_ERROR"
    EMPTY_INPUT = "EMPTY_INPUT"
    UNKNOWN_SCENARIO = "UNKNOWN_SCENARIO"
    INVALID_FIELD = "INVALID_FIELD"

    @property
    def fixed_message(self) -> str | None:
        """The published message for contract codes, None otherwise."""
        return CONTRACT_ERROR_MESSAGES.get(self.name)


class ZtError(Exception):
    """Domain error carrying an :class:`ErrorCode`.

    For contract codes the message defaults to the published string and
    must not be overridden (tests pin the exact text).
    """

    def __init__(self, code: ErrorCode, message: str | None = None):
        fixed = code.fixed_message
        if fixed is not None:
            message = fixed
        elif message is None:
            message = code.name
        super().__init__(message)
        self.code = code
        self.message = message
