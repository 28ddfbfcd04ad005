"""Gas accounting: a configurable cost model and ledger-backed reports.

Costs cannot be re-derived off-EVM, so the default schedule pins the
measured per-method and deployment costs as model constants. Method
charges default to the schedule average; an optional size-dependent mode
interpolates register's min-max band by payload size. View calls (login,
getAllUsers, isOvertime) carry no cost row upstream and default to 0.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ErrorCode, ZtError
from .ledger import Chain

DEPLOY_OPERATION = "deploy"


@dataclass(frozen=True)
class GasCost:
    min: int
    max: int
    avg: int

    def __post_init__(self):
        if not 0 <= self.min <= self.avg <= self.max:
            raise ZtError(
                ErrorCode.CONFIG_ERROR, f"gas cost must satisfy 0 <= min <= avg <= max: {self}"
            )


@dataclass(frozen=True)
class GasSchedule:
    op_costs: dict[tuple[str, str], GasCost]
    deployment_costs: dict[str, int]
    block_gas_limit: int = 30_000_000
    per_byte_surcharge: int = 0
    size_dependent_register: bool = False
    size_ref_bytes: int = 512

    @classmethod
    def from_dict(cls, data: dict) -> "GasSchedule":
        try:
            op_costs = {
                (contract, method): GasCost(**cost)
                for contract, methods in data["methods"].items()
                for method, cost in methods.items()
            }
            return cls(
                op_costs=op_costs,
                deployment_costs={k: int(v) for k, v in data["deployments"].items()},
                block_gas_limit=int(data["block_gas_limit"]),
                per_byte_surcharge=int(data.get("per_byte_surcharge", 0)),
                size_dependent_register=bool(data.get("size_dependent_register", False)),
                size_ref_bytes=int(data.get("size_ref_bytes", 512)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed gas schedule: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "GasSchedule":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ZtError(ErrorCode.IO_ERROR, f"cannot read gas schedule: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed gas schedule file: {exc}") from exc
        return cls.from_dict(data)


def default_schedule() -> GasSchedule:
    text = resources.files("ztchain.resources").joinpath("gas_schedule.json").read_text("utf-8")
    return GasSchedule.from_dict(json.loads(text))


def charge(schedule: GasSchedule, contract: str, operation: str, payload_bytes: int = 0) -> int:
    """Gas for one call: schedule average plus any per-byte surcharge."""
    cost = schedule.op_costs.get((contract, operation))
    if cost is None:
        raise ZtError(ErrorCode.UNKNOWN_OPERATION, f"no gas cost for {contract}.{operation}")
    base = cost.avg
    if (
        schedule.size_dependent_register
        and operation == "register"
        and cost.max > cost.min
        and schedule.size_ref_bytes > 0
    ):
        frac = min(max(payload_bytes / schedule.size_ref_bytes, 0.0), 1.0)
        base = cost.min + round((cost.max - cost.min) * frac)
    return base + schedule.per_byte_surcharge * payload_bytes


def deployment_charge(schedule: GasSchedule, contract: str) -> int:
    cost = schedule.deployment_costs.get(contract)
    if cost is None:
        raise ZtError(ErrorCode.UNKNOWN_OPERATION, f"no deployment cost for {contract}")
    return cost


@dataclass(frozen=True)
class GasReportRow:
    contract: str
    method: str | None  # None for deployment rows
    min: int
    max: int
    avg: int
    call_count: int
    percent_of_block_limit: str | None = None  # deployments only, e.g. "7.6 %"

    @property
    def is_deployment(self) -> bool:
        return self.method is None


def gas_report(chain: Chain, schedule: GasSchedule | None = None) -> list[GasReportRow]:
    """Aggregate committed charges into a cost table.

    Method rows carry the schedule's min/max/avg band and the observed
    call count; deployment rows carry the deployment cost and its share
    of the block gas limit, rendered to one decimal.
    """
    schedule = schedule or default_schedule()
    method_calls: dict[tuple[str, str], int] = {}
    deploy_calls: dict[str, int] = {}
    observed: dict[tuple[str, str], list[int]] = {}
    for tx in chain.transactions():
        if tx.operation == DEPLOY_OPERATION:
            deploy_calls[tx.contract] = deploy_calls.get(tx.contract, 0) + 1
        else:
            key = (tx.contract, tx.operation)
            method_calls[key] = method_calls.get(key, 0) + 1
            observed.setdefault(key, []).append(tx.gas_used)

    rows: list[GasReportRow] = []
    for (contract, method), count in sorted(method_calls.items()):
        cost = schedule.op_costs.get((contract, method))
        if cost is None:
            gas = observed[(contract, method)]
            cost = GasCost(min(gas), max(gas), round(sum(gas) / len(gas)))
        rows.append(GasReportRow(contract, method, cost.min, cost.max, cost.avg, count))
    for contract in sorted(deploy_calls):
        gas = deployment_charge(schedule, contract)
        pct = f"{100.0 * gas / schedule.block_gas_limit:.1f} %"
        rows.append(
            GasReportRow(
                contract,
                None,
                gas,
                gas,
                gas,
                deploy_calls[contract],
                percent_of_block_limit=pct,
            )
        )
    return rows


def render_text(rows: list[GasReportRow], block_gas_limit: int = 30_000_000) -> str:
    """Aligned table: method rows, then deployment rows with % of limit."""
    out = io.StringIO()
    out.write(f"Block limit: {block_gas_limit} gas\n")
    out.write("Methods\n")
    header = f"{'Contract':28} {'Method':20} {'Min':>9} {'Max':>9} {'Avg':>9} {'# calls':>8}\n"
    out.write(header)
    for r in rows:
        if r.is_deployment:
            continue
        out.write(f"{r.contract:28} {r.method:20} {r.min:>9} {r.max:>9} {r.avg:>9} {r.call_count:>8}\n")
    out.write("Deployments\n")
    out.write(f"{'Contract':28} {'':20} {'Gas':>9} {'% of limit':>12}\n")
    for r in rows:
        if not r.is_deployment:
            continue
        out.write(f"{r.contract:28} {'':20} {r.avg:>9} {r.percent_of_block_limit:>12}\n")
    return out.getvalue()


def render_csv(rows: list[GasReportRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        ["contract", "method", "min", "max", "avg", "call_count", "percent_of_block_limit"]
    )
    for r in rows:
        writer.writerow(
            [
                r.contract,
                r.method or "(deployment)",
                r.min,
                r.max,
                r.avg,
                r.call_count,
                r.percent_of_block_limit or "",
            ]
        )
    return out.getvalue()
