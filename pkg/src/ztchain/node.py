"""A policy node: contracts bound to a ledger with gas metering.

This is the enforcement pipeline in one place: every contract call is
executed against the state machines, charged gas, and recorded on the
chain (rejections included, carrying their error code). The committed
ledger is the source of truth: replaying its ACCEPTED transactions against
fresh contract state reproduces the live state exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import consensus
from .addresses import AccountAddress
from .contracts_jit import DEFAULT_THRESHOLD_MS, JitContract, TerminationOutcome
from .contracts_mfa import MfaContract, UserRecord, hash_password
from .errors import ErrorCode, ZtError
from .gasmeter import GasSchedule, charge, default_schedule, deployment_charge
from .ledger import (
    Block,
    Chain,
    Transaction,
    TxStatus,
    VerificationReport,
    canonical_json,
    load_chain,
    save_chain,
)

MFA = "MultifactorAuthentication"
JIT = "JustInTimeAccess"

DEFAULT_OWNER = AccountAddress.from_label("admin")


@dataclass(frozen=True)
class MitigationFlags:
    """Fault-injection switches for the threat harness.

    Each flag disables exactly one mitigation so its paired threat
    scenario can be shown to fail without it.
    """

    device_check: bool = True
    owner_guard: bool = True
    jit_window: bool = True
    chain_verification: bool = True

    @classmethod
    def without(cls, *names: str) -> "MitigationFlags":
        values = {f: True for f in ("device_check", "owner_guard", "jit_window", "chain_verification")}
        for name in names:
            key = name.replace("-", "_")
            if key not in values:
                raise ZtError(ErrorCode.CONFIG_ERROR, f"unknown mitigation: {name}")
            values[key] = False
        return cls(**values)


@dataclass
class CallResult:
    seq: int
    result: object


class PolicyNode:
    """Single-writer node hosting the access-control contracts."""

    def __init__(
        self,
        owner: AccountAddress = DEFAULT_OWNER,
        jit_threshold_ms: int = DEFAULT_THRESHOLD_MS,
        schedule: GasSchedule | None = None,
        digest: str = "sha256",
        flags: MitigationFlags = MitigationFlags(),
        stakes: consensus.StakeTable | None = None,
        seed: int = 0,
        chain: Chain | None = None,
        deploy: bool = True,
    ):
        self.flags = flags
        self.schedule = schedule or default_schedule()
        self.stakes = stakes or consensus.StakeTable((1,))
        self.seed = seed
        self.chain = chain if chain is not None else Chain(digest=digest)
        self.time_ms = self.chain.last_block.timestamp
        self.mfa = MfaContract(
            owner, device_check=flags.device_check, owner_guard=flags.owner_guard
        )
        self.jit = JitContract(jit_threshold_ms, window_enabled=flags.jit_window)
        if deploy:
            self._record_deployments(owner)

    def _record_deployments(self, owner: AccountAddress) -> None:
        self.chain.record_call(
            caller=owner,
            contract=MFA,
            operation="deploy",
            payload={},
            logical_time=self.time_ms,
            status=TxStatus.ACCEPTED,
            gas_used=deployment_charge(self.schedule, MFA),
        )
        self.chain.record_call(
            caller=owner,
            contract=JIT,
            operation="deploy",
            payload={"threshold_ms": str(self.jit.state.threshold_ms)},
            logical_time=self.time_ms,
            status=TxStatus.ACCEPTED,
            gas_used=deployment_charge(self.schedule, JIT),
        )
        self.seal_pending()

    # -- clock ----------------------------------------------------------

    def advance(self, delta_ms: int) -> int:
        self.time_ms += delta_ms
        return self.time_ms

    def set_time(self, time_ms: int) -> int:
        if time_ms < self.time_ms:
            raise ZtError(ErrorCode.CONFIG_ERROR, "logical clock cannot move backwards")
        self.time_ms = time_ms
        return self.time_ms

    # -- recorded contract calls -----------------------------------------

    def _invoke(self, contract: str, operation: str, caller, payload: dict[str, str], fn):
        """Run fn, charge gas, and record the call; re-raise domain errors."""
        gas = charge(self.schedule, contract, operation, len(canonical_json(payload)))
        try:
            result = fn()
        except ZtError as exc:
            self.chain.record_call(
                caller=caller,
                contract=contract,
                operation=operation,
                payload=payload,
                logical_time=self.time_ms,
                status=TxStatus.REJECTED,
                error_code=exc.code,
                gas_used=gas,
            )
            raise
        seq = self.chain.record_call(
            caller=caller,
            contract=contract,
            operation=operation,
            payload=payload,
            logical_time=self.time_ms,
            status=TxStatus.ACCEPTED,
            gas_used=gas,
        )
        return CallResult(seq=seq, result=result)

    def register(
        self,
        caller: AccountAddress,
        email: str,
        password: str,
        device_checksum: str,
        mac_address: str,
    ) -> CallResult:
        password_hash = hash_password(password) if password else ""
        payload = {
            "email": email,
            "password_hash": password_hash,
            "device_checksum": device_checksum,
            "mac_address": mac_address,
        }
        return self._invoke(
            MFA,
            "register",
            caller,
            payload,
            lambda: self.mfa.register(caller, email, password, device_checksum, mac_address),
        )

    def assign_role(
        self, caller: AccountAddress, email: str, role: str, role_description: str
    ) -> CallResult:
        payload = {"email": email, "role": role, "role_description": role_description}
        return self._invoke(
            MFA,
            "assignRole",
            caller,
            payload,
            lambda: self.mfa.assign_role(caller, email, role, role_description),
        )

    def login(
        self,
        caller: AccountAddress,
        email: str,
        password: str,
        device_checksum: str,
        mac_address: str,
    ) -> CallResult:
        password_hash = hash_password(password) if password else ""
        payload = {
            "email": email,
            "password_hash": password_hash,
            "device_checksum": device_checksum,
            "mac_address": mac_address,
        }
        return self._invoke(
            MFA,
            "login",
            caller,
            payload,
            lambda: self.mfa.login(caller, email, password, device_checksum, mac_address),
        )

    def get_all_users(self, caller: AccountAddress) -> CallResult:
        return self._invoke(
            MFA, "getAllUsers", caller, {}, lambda: self.mfa.get_all_users(caller)
        )

    def jit_start(self, caller: AccountAddress, target: AccountAddress) -> CallResult:
        payload = {"target": target.hex()}
        if not target.is_null:
            payload["deadline"] = str(self.time_ms + self.jit.state.threshold_ms)
        return self._invoke(
            JIT,
            "startExecution",
            caller,
            payload,
            lambda: self.jit.start_execution(target, self.time_ms),
        )

    def jit_check(self, caller: AccountAddress, target: AccountAddress) -> CallResult:
        overtime = self.jit.is_overtime(target, self.time_ms)
        payload = {
            "target": target.hex(),
            "at": str(self.time_ms),
            "overtime": "true" if overtime else "false",
        }
        return self._invoke(JIT, "isOvertime", caller, payload, lambda: overtime)

    def jit_terminate(self, caller: AccountAddress, target: AccountAddress) -> CallResult:
        def run() -> TerminationOutcome:
            return self.jit.terminate_execution(target, self.time_ms)

        # outcome goes into the payload as denial evidence, so run first
        payload = {"target": target.hex(), "at": str(self.time_ms)}
        gas = charge(self.schedule, JIT, "terminateExecution", len(canonical_json(payload)))
        try:
            outcome = run()
        except ZtError as exc:
            self.chain.record_call(
                caller=caller,
                contract=JIT,
                operation="terminateExecution",
                payload=payload,
                logical_time=self.time_ms,
                status=TxStatus.REJECTED,
                error_code=exc.code,
                gas_used=gas,
            )
            raise
        payload["outcome"] = outcome.value
        seq = self.chain.record_call(
            caller=caller,
            contract=JIT,
            operation="terminateExecution",
            payload=payload,
            logical_time=self.time_ms,
            status=TxStatus.ACCEPTED,
            gas_used=gas,
        )
        return CallResult(seq=seq, result=outcome)

    # -- sealing and verification ------------------------------------------

    def seal(self, timestamp: int | None = None) -> Block:
        """Seal one block; the sealer comes from the stake-weighted pick
        for this tick (tick = new block height)."""
        ts = self.time_ms if timestamp is None else timestamp
        validator = consensus.pick_sealer(self.stakes, tick=self.chain.height, seed=self.seed)
        return self.chain.seal_block(validator, ts, gas_limit=self.schedule.block_gas_limit)

    def seal_pending(self) -> list[Block]:
        """Seal until pending is empty (gas-limit overflow defers txs)."""
        blocks = []
        while self.chain.pending:
            blocks.append(self.seal())
        return blocks

    def verify(self) -> VerificationReport:
        if not self.flags.chain_verification:
            return VerificationReport(True)
        return self.chain.verify()

    # -- persistence and replay ---------------------------------------------

    def save(self, path: str | Path) -> None:
        save_chain(self.chain, path)

    @classmethod
    def load(
        cls,
        path: str | Path,
        digest: str = "sha256",
        flags: MitigationFlags = MitigationFlags(),
        stakes: consensus.StakeTable | None = None,
        seed: int = 0,
    ) -> "PolicyNode":
        chain = load_chain(path, digest=digest)
        return replay_chain(chain, flags=flags, stakes=stakes, seed=seed)

    def user_records(self) -> list[UserRecord]:
        """Unrecorded read of the user table (internal/reporting use)."""
        return [self.mfa.state.users[email] for email in self.mfa.state.users_list]


def replay_chain(
    chain: Chain,
    flags: MitigationFlags = MitigationFlags(),
    stakes: consensus.StakeTable | None = None,
    seed: int = 0,
) -> PolicyNode:
    """Reconstruct contract state from a chain's ACCEPTED transactions.

    REJECTED transactions are audit records only and do not touch state.
    View calls (login, getAllUsers, isOvertime) change nothing and are
    skipped. Deployment transactions carry the constructor inputs (owner
    address, JIT threshold).
    """
    owner: AccountAddress | None = None
    threshold_ms = DEFAULT_THRESHOLD_MS
    for tx in chain.transactions():
        if tx.status is not TxStatus.ACCEPTED or tx.operation != "deploy":
            continue
        if tx.contract == MFA:
            owner = tx.caller
        elif tx.contract == JIT:
            threshold_ms = int(tx.payload["threshold_ms"])
    if owner is None:
        raise ZtError(ErrorCode.FORMAT_ERROR, "chain has no contract deployment record")

    node = PolicyNode(
        owner=owner,
        jit_threshold_ms=threshold_ms,
        digest=chain.digest,
        flags=flags,
        stakes=stakes,
        seed=seed,
        chain=chain,
        deploy=False,
    )
    for tx in chain.transactions():
        if tx.status is not TxStatus.ACCEPTED:
            continue
        op = tx.operation
        p = tx.payload
        if op == "register":
            node.mfa.register_hashed(
                tx.caller,
                p["email"],
                p["password_hash"],
                p["device_checksum"],
                p["mac_address"],
            )
        elif op == "assignRole":
            node.mfa.assign_role(tx.caller, p["email"], p["role"], p["role_description"])
        elif op == "startExecution":
            node.jit.set_deadline(AccountAddress.from_hex(p["target"]), int(p["deadline"]))
        # login / getAllUsers / isOvertime / terminateExecution / deploy:
        # no contract-state effect to reapply
    node.time_ms = chain.last_block.timestamp
    return node


def states_equal(a: PolicyNode, b: PolicyNode) -> bool:
    """Contract-state equality (the replay-determinism check)."""
    return (
        a.mfa.state == b.mfa.state
        and a.jit.state.execution_deadline == b.jit.state.execution_deadline
        and a.jit.state.threshold_ms == b.jit.state.threshold_ms
    )
