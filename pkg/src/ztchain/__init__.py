"""ztchain: blockchain-backed zero-trust access control, simulated.

A hash-chained ledger acts as the policy engine, enforcement point, and
policy store; deterministic contract state machines provide multi-factor
authentication, role assignment, and just-in-time execution windows; a
stake-weighted pick chooses the sealer per block; and a seeded network
simulation plus a scripted threat harness benchmark the whole stack
against a centralized perimeter baseline.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .addresses import AccountAddress
from .consensus import StakeTable, pick_sealer, select_validator, selection_frequencies
from .contracts_jit import JitContract, SimulatedTarget, TerminationOutcome
from .contracts_mfa import MfaContract, UserRecord
from .errors import ErrorCode, ZtError
from .fingerprint import DeviceInfo, canonicalize, checksum
from .gasmeter import GasSchedule, charge, default_schedule, gas_report
from .ledger import Block, Chain, Transaction, TxStatus, load_chain, save_chain, verify_chain
from .node import MitigationFlags, PolicyNode, replay_chain, states_equal
from .simnet import MetricsReport, SimConfig, SimMode, compute_metrics, dos_flood, replay_table4, run_simulation
from .threatsuite import run_all, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AccountAddress",
    "Block",
    "Chain",
    "DeviceInfo",
    "ErrorCode",
    "GasSchedule",
    "JitContract",
    "KERNEL_BACKEND",
    "MetricsReport",
    "MfaContract",
    "MitigationFlags",
    "PolicyNode",
    "SimConfig",
    "SimMode",
    "SimulatedTarget",
    "StakeTable",
    "TerminationOutcome",
    "Transaction",
    "TxStatus",
    "UserRecord",
    "ZtError",
    "canonicalize",
    "charge",
    "checksum",
    "compute_metrics",
    "default_schedule",
    "dos_flood",
    "gas_report",
    "load_chain",
    "pick_sealer",
    "replay_chain",
    "replay_table4",
    "run_all",
    "run_scenario",
    "run_simulation",
    "save_chain",
    "select_validator",
    "selection_frequencies",
    "states_equal",
    "verify_chain",
]
