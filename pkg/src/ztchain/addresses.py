"""20-byte account addresses, rendered as 0x-prefixed lowercase hex."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

ADDRESS_LEN = 20
_NULL = bytes(ADDRESS_LEN)


@dataclass(frozen=True, order=True)
class AccountAddress:
    """Identity of a caller or a target contract.

    The all-zero address is the reserved null sentinel: it is never a valid
    account and existence checks compare against it.
    """

    value: bytes

    def __post_init__(self):
        if not isinstance(self.value, bytes) or len(self.value) != ADDRESS_LEN:
            raise ValueError(f"address must be {ADDRESS_LEN} bytes")

    @classmethod
    def null(cls) -> "AccountAddress":
        return cls(_NULL)

    @classmethod
    def from_hex(cls, text: str) -> "AccountAddress":
        h = text.lower().removeprefix("0x")
        if len(h) != 2 * ADDRESS_LEN:
            raise ValueError(f"address hex must be {2 * ADDRESS_LEN} chars")
        return cls(bytes.fromhex(h))

    @classmethod
    def from_label(cls, label: str) -> "AccountAddress":
        """Deterministic address for a human-readable label (CLI, fixtures)."""
        digest = hashlib.sha256(b"ztchain-address:" + label.encode("utf-8")).digest()
        return cls(digest[:ADDRESS_LEN])

    @classmethod
    def parse(cls, text: str) -> "AccountAddress":
        """Accept either 0x-hex or a label."""
        stripped = text.strip()
        candidate = stripped.lower()
        if candidate.startswith("0x") and len(candidate) == 2 + 2 * ADDRESS_LEN:
            try:
                return cls.from_hex(candidate)
            except ValueError:
                pass
        return cls.from_label(stripped)

    @property
    def is_null(self) -> bool:
        return self.value == _NULL

    def hex(self) -> str:
        return "0x" + self.value.hex()

    def __str__(self) -> str:
        return self.hex()
