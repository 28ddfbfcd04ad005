"""Append-only hash-chained block store: the policy audit trail.

Every contract call, accepted or rejected, is recorded as a transaction;
pending transactions are sealed into blocks whose hashes chain back to
genesis. Canonical serialization (JSON, lexicographically sorted keys, no
insignificant whitespace, UTF-8, integers decimal, byte strings as
lowercase 0x-hex) makes hashes reproducible across platforms, which is
what gives the chain its tamper evidence.

Rejected calls are recorded with status REJECTED so denials are auditable;
state replay skips them (acceptance semantics are unchanged).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterator

from .addresses import AccountAddress
from .errors import ErrorCode, ZtError

HASH_LEN = 32
GENESIS_PREV_HASH = bytes(HASH_LEN)
GENESIS_VALIDATOR = 0

#: chain files are JSON-lines, one block per line
CHAIN_FILE_SUFFIX = ".chain.jsonl"

DEFAULT_DIGEST = "sha256"


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _digest_factory(name: str):
    h = hashlib.new(name)
    if h.digest_size != HASH_LEN:
        raise ZtError(ErrorCode.CONFIG_ERROR, f"digest {name!r} must produce {HASH_LEN} bytes")
    return lambda data: hashlib.new(name, data).digest()


class TxStatus(Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class Transaction:
    """One recorded contract call."""

    caller: AccountAddress
    contract: str
    operation: str
    payload: dict[str, str]
    logical_time: int
    status: TxStatus
    error_code: ErrorCode | None = None
    gas_used: int = 0
    seq: int | None = None

    def __post_init__(self):
        if (self.status is TxStatus.REJECTED) != (self.error_code is not None):
            raise ValueError("error_code must be present iff status is REJECTED")
        if self.gas_used < 0:
            raise ValueError("gas_used must be non-negative")
        if self.logical_time < 0:
            raise ValueError("logical_time must be non-negative")
        for k, v in self.payload.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ValueError("payload must map str -> str")

    def to_dict(self) -> dict:
        d = {
            "caller": self.caller.hex(),
            "contract": self.contract,
            "gas_used": self.gas_used,
            "logical_time": self.logical_time,
            "operation": self.operation,
            "payload": dict(sorted(self.payload.items())),
            "seq": self.seq,
            "status": self.status.value,
        }
        if self.error_code is not None:
            d["error_code"] = self.error_code.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Transaction":
        try:
            error_code = ErrorCode[d["error_code"]] if "error_code" in d else None
            return cls(
                caller=AccountAddress.from_hex(d["caller"]),
                contract=d["contract"],
                operation=d["operation"],
                payload={str(k): str(v) for k, v in d["payload"].items()},
                logical_time=int(d["logical_time"]),
                status=TxStatus(d["status"]),
                error_code=error_code,
                gas_used=int(d["gas_used"]),
                seq=int(d["seq"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed transaction record: {exc}") from exc


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    timestamp: int
    transactions: tuple[Transaction, ...]
    validator: int
    block_hash: bytes

    def header_dict(self) -> dict:
        """All hashed fields, i.e. everything except block_hash."""
        return {
            "index": self.index,
            "prev_hash": "0x" + self.prev_hash.hex(),
            "timestamp": self.timestamp,
            "transactions": [tx.to_dict() for tx in self.transactions],
            "validator": self.validator,
        }

    def to_dict(self) -> dict:
        d = self.header_dict()
        d["block_hash"] = "0x" + self.block_hash.hex()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        try:
            prev_hash = _parse_hash(d["prev_hash"])
            block_hash = _parse_hash(d["block_hash"])
            txs = tuple(Transaction.from_dict(t) for t in d["transactions"])
            return cls(
                index=int(d["index"]),
                prev_hash=prev_hash,
                timestamp=int(d["timestamp"]),
                transactions=txs,
                validator=int(d["validator"]),
                block_hash=block_hash,
            )
        except ZtError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed block record: {exc}") from exc


def _parse_hash(text) -> bytes:
    if not isinstance(text, str) or not text.startswith("0x"):
        raise ZtError(ErrorCode.FORMAT_ERROR, f"hash field must be 0x-hex, got {text!r}")
    try:
        raw = bytes.fromhex(text[2:])
    except ValueError as exc:
        raise ZtError(ErrorCode.FORMAT_ERROR, f"hash field not hex: {text!r}") from exc
    if len(raw) != HASH_LEN:
        raise ZtError(ErrorCode.FORMAT_ERROR, f"hash field must be {HASH_LEN} bytes")
    return raw


def block_hash(block: Block, digest: str = DEFAULT_DIGEST) -> bytes:
    """Digest of the block's canonical serialization (block_hash excluded)."""
    return _digest_factory(digest)(canonical_json(block.header_dict()))


@dataclass
class VerificationReport:
    ok: bool
    first_bad_index: int | None = None
    reason: str | None = None

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return f"FAILED at block {self.first_bad_index}: {self.reason}"


@dataclass
class Chain:
    """Committed blocks plus not-yet-sealed pending transactions.

    Single-writer: the simulation event loop is the only mutator. The
    committed prefix is immutable and safe to inspect concurrently.
    """

    digest: str = DEFAULT_DIGEST
    genesis_timestamp: int = 0
    blocks: list[Block] = field(default_factory=list)
    pending: list[Transaction] = field(default_factory=list)

    def __post_init__(self):
        self._hash = _digest_factory(self.digest)
        if not self.blocks:
            self.blocks.append(self._make_genesis())
        self._next_seq = 1 + sum(len(b.transactions) for b in self.blocks) + len(self.pending)

    def _make_genesis(self) -> Block:
        header = Block(
            index=0,
            prev_hash=GENESIS_PREV_HASH,
            timestamp=self.genesis_timestamp,
            transactions=(),
            validator=GENESIS_VALIDATOR,
            block_hash=b"",
        )
        return replace(header, block_hash=self._hash(canonical_json(header.header_dict())))

    @property
    def height(self) -> int:
        return len(self.blocks)

    @property
    def last_block(self) -> Block:
        return self.blocks[-1]

    def record(self, tx: Transaction) -> int:
        """Append a transaction to pending; returns its assigned seq."""
        if tx.seq is not None:
            raise ValueError("transaction seq must be unassigned")
        seq = self._next_seq
        self.pending.append(replace(tx, seq=seq))
        self._next_seq += 1
        return seq

    def record_call(
        self,
        caller: AccountAddress,
        contract: str,
        operation: str,
        payload: dict[str, str],
        logical_time: int,
        status: TxStatus,
        error_code: ErrorCode | None = None,
        gas_used: int = 0,
    ) -> int:
        return self.record(
            Transaction(
                caller=caller,
                contract=contract,
                operation=operation,
                payload=payload,
                logical_time=logical_time,
                status=status,
                error_code=error_code,
                gas_used=gas_used,
            )
        )

    def seal_block(self, validator: int, timestamp: int, gas_limit: int | None = None) -> Block:
        """Seal pending transactions into the next block.

        With a gas_limit, seals the longest prefix of pending whose summed
        gas fits; the remainder stays pending for the next tick.
        """
        if validator < 1:
            raise ValueError("validator index must be >= 1 (0 is reserved for genesis)")
        if timestamp < self.last_block.timestamp:
            raise ValueError("block timestamp must not precede the previous block")
        if not self.pending:
            raise ZtError(ErrorCode.EMPTY_PENDING, "no pending transactions to seal")

        if gas_limit is None:
            take = len(self.pending)
        else:
            take, used = 0, 0
            for tx in self.pending:
                if take > 0 and used + tx.gas_used > gas_limit:
                    break
                used += tx.gas_used
                take += 1
        sealed, self.pending = self.pending[:take], self.pending[take:]

        header = Block(
            index=self.height,
            prev_hash=self.last_block.block_hash,
            timestamp=timestamp,
            transactions=tuple(sealed),
            validator=validator,
            block_hash=b"",
        )
        block = replace(header, block_hash=self._hash(canonical_json(header.header_dict())))
        self.blocks.append(block)
        return block

    def transactions(self, include_pending: bool = False) -> Iterator[Transaction]:
        """Committed transactions in seq order (optionally pending too)."""
        for b in self.blocks:
            yield from b.transactions
        if include_pending:
            yield from self.pending

    def verify(self) -> VerificationReport:
        return verify_chain(self)


def verify_chain(chain: Chain) -> VerificationReport:
    """Recompute every block hash and check all linkage invariants."""
    expected_seq = 1
    hash_fn = _digest_factory(chain.digest)
    for i, block in enumerate(chain.blocks):
        if block.index != i:
            return VerificationReport(False, i, f"index {block.index} != position {i}")
        if i == 0:
            if block.prev_hash != GENESIS_PREV_HASH:
                return VerificationReport(False, 0, "genesis prev_hash not all-zero")
            if block.validator != GENESIS_VALIDATOR:
                return VerificationReport(False, 0, "genesis validator must be 0")
        else:
            if block.prev_hash != chain.blocks[i - 1].block_hash:
                return VerificationReport(False, i, "prev_hash link broken")
            if block.validator < 1:
                return VerificationReport(False, i, "non-genesis validator must be >= 1")
            if not block.transactions:
                return VerificationReport(False, i, "non-genesis block has no transactions")
            if block.timestamp < chain.blocks[i - 1].timestamp:
                return VerificationReport(False, i, "timestamp precedes previous block")
        recomputed = hash_fn(canonical_json(block.header_dict()))
        if recomputed != block.block_hash:
            return VerificationReport(False, i, "block hash mismatch")
        for tx in block.transactions:
            if tx.seq != expected_seq:
                return VerificationReport(False, i, f"seq {tx.seq} != expected {expected_seq}")
            expected_seq += 1
    return VerificationReport(True)


def save_chain(chain: Chain, path: str | Path) -> None:
    """Write committed blocks as JSON-lines (pending is not persisted)."""
    lines = [canonical_json(b.to_dict()) for b in chain.blocks]
    try:
        with open(path, "wb") as f:
            for line in lines:
                f.write(line)
                f.write(b"\n")
    except OSError as exc:
        raise ZtError(ErrorCode.IO_ERROR, f"cannot write chain file: {exc}") from exc


def load_chain(path: str | Path, digest: str = DEFAULT_DIGEST) -> Chain:
    """Parse a chain file. Structural validation only: stored hashes are
    taken as-is so tampering is surfaced by verify_chain, not load."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ZtError(ErrorCode.IO_ERROR, f"cannot read chain file: {exc}") from exc
    blocks: list[Block] = []
    for lineno, line in enumerate(raw.split(b"\n"), start=1):
        if not line:
            continue
        try:
            d = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ZtError(
                ErrorCode.FORMAT_ERROR, f"chain file line {lineno} is not valid JSON: {exc}"
            ) from exc
        if not isinstance(d, dict):
            raise ZtError(ErrorCode.FORMAT_ERROR, f"chain file line {lineno} is not an object")
        blocks.append(Block.from_dict(d))
    if not blocks:
        raise ZtError(ErrorCode.FORMAT_ERROR, "chain file contains no blocks")
    return Chain(digest=digest, genesis_timestamp=blocks[0].timestamp, blocks=blocks)
