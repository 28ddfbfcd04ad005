"""Multi-factor authentication and role assignment state machine.

Mirrors an access-control smart contract: users are keyed by email and
bound to the enrolling account address, a device checksum, and a MAC
address. Login succeeds only when every factor matches the stored record
and a role has been assigned; guards are evaluated in a fixed order so the
first failing factor determines the error code deterministically.

Passwords are stored and compared as SHA-256 digests; plaintext never
enters the state or the ledger.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .addresses import AccountAddress
from .errors import ErrorCode, ZtError
from .fingerprint import normalize_mac

CONTRACT_NAME = "MultifactorAuthentication"

NO_ROLE = "NO_ROLE"
NO_DESCRIPTION = "NO_DESCRIPTION"

REDACTED = "«redacted»"

_HEX64_RE = re.compile(r"^[0-9a-f]{64}$")


def hash_password(password: str) -> str:
    return hashlib.sha256(password.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class UserRecord:
    user_address: AccountAddress
    email: str
    password_hash: str
    device_checksum: str
    mac_address: str
    role: str = NO_ROLE
    role_description: str = NO_DESCRIPTION


@dataclass
class MfaContractState:
    contract_owner: AccountAddress
    user_count: int = 0
    users: dict[str, UserRecord] = field(default_factory=dict)
    users_list: list[str] = field(default_factory=list)


class MfaContract:
    """Deterministic state machine over :class:`MfaContractState`.

    ``device_check`` and ``owner_guard`` are fault-injection toggles used
    by the threat harness to prove each mitigation is load-bearing; they
    are on in any real configuration.
    """

    def __init__(
        self,
        owner: AccountAddress,
        device_check: bool = True,
        owner_guard: bool = True,
    ):
        if owner.is_null:
            raise ZtError(ErrorCode.INVALID_FIELD, "contract owner must not be the null address")
        self.state = MfaContractState(contract_owner=owner)
        self.device_check = device_check
        self.owner_guard = owner_guard

    @property
    def owner(self) -> AccountAddress:
        return self.state.contract_owner

    def _require_owner(self, caller: AccountAddress) -> None:
        if self.owner_guard and caller != self.state.contract_owner:
            raise ZtError(ErrorCode.NOT_OWNER)

    # -- registration ------------------------------------------------

    def register(
        self,
        caller: AccountAddress,
        email: str,
        password: str,
        device_checksum: str,
        mac_address: str,
    ) -> bool:
        """Enroll a user; the record is bound to the caller's address."""
        if len(email) == 0:
            raise ZtError(ErrorCode.EMPTY_EMAIL)
        if len(password) == 0:
            raise ZtError(ErrorCode.EMPTY_PASSWORD)
        return self.register_hashed(
            caller, email, hash_password(password), device_checksum, mac_address
        )

    def register_hashed(
        self,
        caller: AccountAddress,
        email: str,
        password_hash: str,
        device_checksum: str,
        mac_address: str,
    ) -> bool:
        """Registration entry point taking the password digest (replay path)."""
        if len(email) == 0:
            raise ZtError(ErrorCode.EMPTY_EMAIL)
        if len(password_hash) == 0:
            raise ZtError(ErrorCode.EMPTY_PASSWORD)
        if len(device_checksum) == 0:
            raise ZtError(ErrorCode.EMPTY_DEVICE_INFO)
        if len(mac_address) == 0:
            raise ZtError(ErrorCode.EMPTY_MAC)
        if email in self.state.users:
            raise ZtError(ErrorCode.DUPLICATE_USER)
        if caller.is_null:
            raise ZtError(ErrorCode.INVALID_FIELD, "caller must not be the null address")
        checksum = device_checksum.lower()
        if not _HEX64_RE.match(checksum):
            raise ZtError(
                ErrorCode.INVALID_FIELD, "device checksum must be 64 lowercase hex chars"
            )
        record = UserRecord(
            user_address=caller,
            email=email,
            password_hash=password_hash,
            device_checksum=checksum,
            mac_address=normalize_mac(mac_address),
        )
        self.state.user_count += 1
        self.state.users[email] = record
        self.state.users_list.append(email)
        return True

    # -- role assignment ----------------------------------------------

    def assign_role(
        self, caller: AccountAddress, email: str, role: str, role_description: str
    ) -> bool:
        self._require_owner(caller)
        if len(role) == 0:
            raise ZtError(ErrorCode.EMPTY_ROLE)
        if len(role_description) == 0:
            raise ZtError(ErrorCode.EMPTY_ROLE_DESCRIPTION)
        record = self.state.users.get(email)
        if record is None:
            raise ZtError(ErrorCode.NO_SUCH_USER)
        self.state.users[email] = UserRecord(
            user_address=record.user_address,
            email=record.email,
            password_hash=record.password_hash,
            device_checksum=record.device_checksum,
            mac_address=record.mac_address,
            role=role,
            role_description=role_description,
        )
        return True

    # -- login ---------------------------------------------------------

    def login(
        self,
        caller: AccountAddress,
        email: str,
        password: str,
        device_checksum: str,
        mac_address: str,
    ) -> bool:
        if len(email) == 0:
            raise ZtError(ErrorCode.EMPTY_EMAIL)
        if len(password) == 0:
            raise ZtError(ErrorCode.EMPTY_PASSWORD)
        return self.login_hashed(
            caller, email, hash_password(password), device_checksum, mac_address
        )

    def login_hashed(
        self,
        caller: AccountAddress,
        email: str,
        password_hash: str,
        device_checksum: str,
        mac_address: str,
    ) -> bool:
        """Factor checks in fixed guard order; stops at the first failure."""
        if len(email) == 0:
            raise ZtError(ErrorCode.EMPTY_EMAIL)
        if len(password_hash) == 0:
            raise ZtError(ErrorCode.EMPTY_PASSWORD)
        if len(device_checksum) == 0:
            raise ZtError(ErrorCode.EMPTY_DEVICE_INFO)
        if len(mac_address) == 0:
            raise ZtError(ErrorCode.EMPTY_MAC)
        record = self.state.users.get(email)
        if record is None:
            raise ZtError(ErrorCode.NO_SUCH_USER)
        if record.role == NO_ROLE:
            raise ZtError(ErrorCode.NO_ROLE_ASSIGNED)
        if record.password_hash != password_hash:
            raise ZtError(ErrorCode.INVALID_PASSWORD)
        if self.device_check and record.device_checksum != device_checksum.lower():
            raise ZtError(ErrorCode.INVALID_DEVICE)
        if record.mac_address != _lenient_mac(mac_address):
            raise ZtError(ErrorCode.INVALID_MAC)
        if record.user_address != caller:
            raise ZtError(ErrorCode.WRONG_ACCOUNT)
        return True

    # -- listing ---------------------------------------------------------

    def get_all_users(self, caller: AccountAddress) -> list[UserRecord]:
        """All records in registration order (owner only)."""
        self._require_owner(caller)
        return [self.state.users[email] for email in self.state.users_list]


def _lenient_mac(mac: str) -> str:
    """Normalize if possible; otherwise return lowercased input so the
    comparison fails as a MAC mismatch rather than a validation error."""
    try:
        return normalize_mac(mac)
    except ZtError:
        return mac.lower()


def render_users(records: list[UserRecord]) -> list[dict[str, str]]:
    """Listing rows for display/export, with the password digest masked."""
    return [
        {
            "user_address": r.user_address.hex(),
            "email": r.email,
            "password_hash": REDACTED,
            "device_checksum": r.device_checksum,
            "mac_address": r.mac_address,
            "role": r.role,
            "role_description": r.role_description,
        }
        for r in records
    ]
