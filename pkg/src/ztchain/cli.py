"""Command-line interface: enrollment/login demos, simulations, threat
runs, gas reports, and chain verification.

Exit codes: 0 success, 1 domain error (the contract's error message goes
to stderr), 2 usage error. State-mutating verbs append to the chain file
given by --chain and seal one block per invocation.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .addresses import AccountAddress
from .config import AppConfig
from .consensus import StakeTable
from .errors import ErrorCode, ZtError
from .fingerprint import DeviceInfo, checksum
from .gasmeter import GasSchedule, default_schedule, gas_report, render_csv, render_text
from .ledger import load_chain, verify_chain
from .node import MitigationFlags, PolicyNode, replay_chain
from .simnet import (
    SimConfig,
    SimMode,
    dos_flood,
    replay_table4,
    run_simulation,
    write_latency_series_csv,
    write_per_request_csv,
    write_summary_json,
    write_throughput_series_csv,
)
from .threatsuite import run_all, run_scenario


@click.group()
@click.option(
    "--config",
    "config_path",
    envvar="ZTCHAIN_CONFIG",
    type=click.Path(dir_okay=False),
    default=None,
    help="JSON config file (env fallback: ZTCHAIN_CONFIG).",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None):
    """Blockchain-backed zero-trust access control toolkit."""
    try:
        ctx.obj = AppConfig.load(config_path)
    except ZtError as exc:
        raise SystemExit(_domain_error(exc))


def _domain_error(exc: ZtError) -> int:
    click.echo(exc.message, err=True)
    return 1


def _open_node(cfg: AppConfig, chain_path: str, owner: str, jit_threshold_ms: int | None) -> PolicyNode:
    digest = cfg.pick(None, "digest", "sha256")
    seed = cfg.pick(None, "seed", 0)
    stakes = StakeTable(tuple(cfg.stakes)) if cfg.stakes else None
    threshold = cfg.pick(jit_threshold_ms, "jit_threshold_ms", 300_000)
    schedule = GasSchedule.from_file(cfg.gas_schedule) if cfg.gas_schedule else default_schedule()
    if Path(chain_path).exists():
        chain = load_chain(chain_path, digest=digest)
        report = verify_chain(chain)
        if not report.ok:
            raise ZtError(
                ErrorCode.FORMAT_ERROR, f"refusing to append to a tampered chain: {report}"
            )
        node = replay_chain(chain, stakes=stakes, seed=seed)
        node.schedule = schedule
        if jit_threshold_ms is not None:
            node.jit.state.threshold_ms = jit_threshold_ms
        return node
    return PolicyNode(
        owner=AccountAddress.parse(owner),
        jit_threshold_ms=threshold,
        schedule=schedule,
        digest=digest,
        stakes=stakes,
        seed=seed,
    )


def _emit(as_json: bool, data: dict, text: str) -> None:
    click.echo(json.dumps(data, sort_keys=True) if as_json else text)


_device_options = [
    click.option("--latitude", type=float, required=True, help="Device latitude."),
    click.option("--longitude", type=float, required=True, help="Device longitude."),
    click.option("--browser", required=True, help="Browser details."),
    click.option("--ip", required=True, help="Device IP address."),
    click.option("--os-name", required=True, help="Operating system name."),
    click.option("--os-version", required=True, help="Operating system version."),
    click.option("--mac", required=True, help="Device MAC address."),
]


def device_options(fn):
    for opt in reversed(_device_options):
        fn = opt(fn)
    return fn


def _build_device(latitude, longitude, browser, ip, os_name, os_version, mac) -> DeviceInfo:
    return DeviceInfo(
        latitude=latitude,
        longitude=longitude,
        browser=browser,
        ip=ip,
        os_name=os_name,
        os_version=os_version,
        mac=mac,
    )


@main.command()
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False))
@click.option("--email", required=True)
@click.option("--password", required=True)
@click.option("--caller", default=None, help="Binding account address or label (default: email).")
@click.option("--owner", default="admin", help="Contract owner for a freshly created chain.")
@click.option("--jit-threshold-ms", type=int, default=None)
@click.option("--now", "now_ms", type=int, default=None, help="Logical time in ms.")
@click.option("--json", "as_json", is_flag=True)
@device_options
@click.pass_obj
def register(cfg, chain_path, email, password, caller, owner, jit_threshold_ms, now_ms, as_json, **device):
    """Enroll a user; the record binds to the caller address."""
    node = None
    try:
        node = _open_node(cfg, chain_path, owner, jit_threshold_ms)
        if now_ms is not None:
            node.set_time(now_ms)
        info = _build_device(**device)
        address = AccountAddress.parse(caller if caller is not None else email)
        result = node.register(address, email, password, checksum(info), info.mac)
        node.seal_pending()
        node.save(chain_path)
        _emit(
            as_json,
            {"ok": True, "seq": result.seq, "email": email, "address": address.hex()},
            f"registered {email} (seq {result.seq}, address {address.hex()})",
        )
    except ZtError as exc:
        _save_on_rejection(node, chain_path)
        raise SystemExit(_domain_error(exc))


def _save_on_rejection(node: PolicyNode | None, chain_path: str) -> None:
    """Rejected calls are audit events too; persist them when possible."""
    if node is None:
        return
    try:
        node.seal_pending()
        node.save(chain_path)
    except ZtError:
        pass


@main.command("assign-role")
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False))
@click.option("--email", required=True)
@click.option("--role", required=True)
@click.option("--description", required=True)
@click.option("--caller", default="admin")
@click.option("--owner", default="admin")
@click.option("--jit-threshold-ms", type=int, default=None)
@click.option("--now", "now_ms", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def assign_role(cfg, chain_path, email, role, description, caller, owner, jit_threshold_ms, now_ms, as_json):
    """Assign a role and description to a registered user (owner only)."""
    node = None
    try:
        node = _open_node(cfg, chain_path, owner, jit_threshold_ms)
        if now_ms is not None:
            node.set_time(now_ms)
        result = node.assign_role(AccountAddress.parse(caller), email, role, description)
        node.seal_pending()
        node.save(chain_path)
        _emit(
            as_json,
            {"ok": True, "seq": result.seq, "email": email, "role": role},
            f"assigned role {role!r} to {email} (seq {result.seq})",
        )
    except ZtError as exc:
        _save_on_rejection(node, chain_path)
        raise SystemExit(_domain_error(exc))


@main.command()
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False))
@click.option("--email", required=True)
@click.option("--password", required=True)
@click.option("--caller", default=None)
@click.option("--owner", default="admin")
@click.option("--jit-threshold-ms", type=int, default=None)
@click.option("--now", "now_ms", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
@device_options
@click.pass_obj
def login(cfg, chain_path, email, password, caller, owner, jit_threshold_ms, now_ms, as_json, **device):
    """Multi-factor login against the stored record."""
    node = None
    try:
        node = _open_node(cfg, chain_path, owner, jit_threshold_ms)
        if now_ms is not None:
            node.set_time(now_ms)
        info = _build_device(**device)
        address = AccountAddress.parse(caller if caller is not None else email)
        result = node.login(address, email, password, checksum(info), info.mac)
        node.seal_pending()
        node.save(chain_path)
        _emit(
            as_json,
            {"ok": True, "seq": result.seq, "email": email},
            f"login ok for {email} (seq {result.seq})",
        )
    except ZtError as exc:
        _save_on_rejection(node, chain_path)
        raise SystemExit(_domain_error(exc))


@main.command("jit-start")
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False))
@click.option("--target", required=True, help="Target contract address or label.")
@click.option("--caller", default="admin")
@click.option("--owner", default="admin")
@click.option("--jit-threshold-ms", type=int, default=None)
@click.option("--now", "now_ms", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def jit_start(cfg, chain_path, target, caller, owner, jit_threshold_ms, now_ms, as_json):
    """Open a just-in-time execution window for a target contract."""
    node = None
    try:
        node = _open_node(cfg, chain_path, owner, jit_threshold_ms)
        if now_ms is not None:
            node.set_time(now_ms)
        result = node.jit_start(AccountAddress.parse(caller), AccountAddress.parse(target))
        node.seal_pending()
        node.save(chain_path)
        _emit(
            as_json,
            {"ok": True, "seq": result.seq, "deadline_ms": result.result},
            f"execution window open until {result.result} ms (seq {result.seq})",
        )
    except ZtError as exc:
        _save_on_rejection(node, chain_path)
        raise SystemExit(_domain_error(exc))


@main.command("jit-check")
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False))
@click.option("--target", required=True)
@click.option("--caller", default="admin")
@click.option("--owner", default="admin")
@click.option("--jit-threshold-ms", type=int, default=None)
@click.option("--now", "now_ms", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def jit_check(cfg, chain_path, target, caller, owner, jit_threshold_ms, now_ms, as_json):
    """Check whether a target contract has exceeded its execution window."""
    node = None
    try:
        node = _open_node(cfg, chain_path, owner, jit_threshold_ms)
        if now_ms is not None:
            node.set_time(now_ms)
        result = node.jit_check(AccountAddress.parse(caller), AccountAddress.parse(target))
        node.seal_pending()
        node.save(chain_path)
        _emit(
            as_json,
            {"ok": True, "seq": result.seq, "overtime": result.result},
            f"overtime={result.result} (seq {result.seq})",
        )
    except ZtError as exc:
        _save_on_rejection(node, chain_path)
        raise SystemExit(_domain_error(exc))


@main.command()
@click.option("--nodes", type=int, default=None, help="Network size (default 200).")
@click.option("--requests", type=int, default=None, help="Requests per pass (default 1000).")
@click.option("--seed", type=int, default=None)
@click.option(
    "--mode",
    type=click.Choice([m.value for m in SimMode]),
    default=None,
)
@click.option("--flood-multiplier", type=float, default=None, help="Run the flood experiment instead.")
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None)
@click.option("--out-json", type=click.Path(dir_okay=False), default=None)
@click.option("--latency-series", type=click.Path(dir_okay=False), default=None)
@click.option("--throughput-series", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def simulate(cfg, nodes, requests, seed, mode, flood_multiplier, out_csv, out_json, latency_series, throughput_series, as_json):
    """Run the network simulation and report latency and throughput."""
    try:
        sim_cfg = SimConfig(
            node_count=cfg.pick(nodes, "nodes", 200),
            request_count=cfg.pick(requests, "requests", 1000),
            seed=cfg.pick(seed, "seed", 0),
            mode=SimMode(cfg.pick(mode, "mode", SimMode.ZERO_TRUST.value)),
            latency_model=cfg.latency_model,
            stakes=StakeTable(tuple(cfg.stakes)) if cfg.stakes else None,
        )
        if flood_multiplier is not None:
            report = dos_flood(sim_cfg, flood_multiplier)
            d = report.to_dict()
            _emit(
                as_json,
                d,
                (
                    f"flood x{report.multiplier} over {report.node_count} nodes: "
                    f"perimeter success {report.perimeter.success_rate:.3f}, "
                    f"zero-trust success {report.zero_trust.success_rate:.3f}"
                ),
            )
            return
        metrics = run_simulation(sim_cfg)
        if out_csv:
            write_per_request_csv(metrics, out_csv)
        if out_json:
            write_summary_json(metrics, out_json)
        if latency_series:
            write_latency_series_csv(metrics, latency_series)
        if throughput_series:
            write_throughput_series_csv(metrics, throughput_series)
        _emit(
            as_json,
            metrics.summary_dict(),
            (
                f"{metrics.mode.value}: {metrics.request_count} requests over "
                f"{metrics.node_count} nodes, avg latency {metrics.average_latency_ms:.2f} ms, "
                f"avg time/request {metrics.avg_time_per_request_ms:.2f} ms, "
                f"throughput {metrics.throughput_rps:.2f} rps"
            ),
        )
    except ZtError as exc:
        raise SystemExit(_domain_error(exc))


@main.command()
@click.option("--all", "run_everything", is_flag=True, help="Run all scenarios.")
@click.option("--scenario", "scenario_id", default=None, help="Run one scenario (e.g. T-3).")
@click.option(
    "--disable",
    "disabled",
    multiple=True,
    type=click.Choice(["device-check", "owner-guard", "jit-window", "chain-verification"]),
    help="Fault injection: run with a mitigation disabled.",
)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def threats(cfg, run_everything, scenario_id, disabled, as_json):
    """Replay the threat scenarios and report each mitigation verdict."""
    try:
        flags = MitigationFlags.without(*disabled) if disabled else MitigationFlags()
        if scenario_id and not run_everything:
            result = run_scenario(scenario_id, flags)
            _emit(
                as_json,
                {
                    "id": result.id,
                    "passed": result.passed,
                    "verdict": result.verdict,
                    "evidence": result.evidence,
                    "details": result.details,
                },
                f"{result.id}: {'PASS' if result.passed else 'FAIL'} ({result.verdict})\n"
                + "\n".join(f"  {e}" for e in result.evidence + result.details),
            )
            raise SystemExit(0 if result.passed else 1)
        report = run_all(flags)
        if as_json:
            click.echo(json.dumps(report.to_dict(), sort_keys=True))
        else:
            click.echo(report.render_markdown())
            for r in report.results:
                click.echo(f"{r.id}: {'PASS' if r.passed else 'FAIL'}")
        raise SystemExit(0 if report.all_passed else 1)
    except ZtError as exc:
        raise SystemExit(_domain_error(exc))


@main.command("gas-report")
@click.option("--chain", "chain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--schedule", "schedule_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--csv", "as_csv", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def gas_report_cmd(cfg, chain_path, schedule_path, as_csv, as_json):
    """Aggregate gas charges from a chain file into a cost table."""
    try:
        digest = cfg.pick(None, "digest", "sha256")
        schedule_file = schedule_path or cfg.gas_schedule
        schedule = GasSchedule.from_file(schedule_file) if schedule_file else default_schedule()
        chain = load_chain(chain_path, digest=digest)
        rows = gas_report(chain, schedule)
        if as_json:
            click.echo(
                json.dumps(
                    [
                        {
                            "contract": r.contract,
                            "method": r.method,
                            "min": r.min,
                            "max": r.max,
                            "avg": r.avg,
                            "call_count": r.call_count,
                            "percent_of_block_limit": r.percent_of_block_limit,
                        }
                        for r in rows
                    ],
                    sort_keys=True,
                )
            )
        elif as_csv:
            click.echo(render_csv(rows), nl=False)
        else:
            click.echo(render_text(rows, schedule.block_gas_limit), nl=False)
    except ZtError as exc:
        raise SystemExit(_domain_error(exc))


@main.command("verify-chain")
@click.option("--chain", "chain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def verify_chain_cmd(cfg, chain_path, as_json):
    """Recompute all block hashes and check chain linkage."""
    try:
        digest = cfg.pick(None, "digest", "sha256")
        report = verify_chain(load_chain(chain_path, digest=digest))
        _emit(
            as_json,
            {"ok": report.ok, "first_bad_index": report.first_bad_index, "reason": report.reason},
            str(report),
        )
        raise SystemExit(0 if report.ok else 1)
    except ZtError as exc:
        raise SystemExit(_domain_error(exc))


@main.command("replay-table4")
@click.option("--json", "as_json", is_flag=True)
@click.pass_obj
def replay_table4_cmd(cfg, as_json):
    """Recompute metrics from the bundled reference benchmark table."""
    report = replay_table4()
    if as_json:
        click.echo(json.dumps(report.to_dict(), sort_keys=True))
    else:
        click.echo(report.render_text())


if __name__ == "__main__":
    sys.exit(main())
