"""Scripted threat-scenario harness (STRIDE categories T-1 to T-7).

Scenario scripts are data (``resources/scenarios.json``), interpreted
against a fresh policy node per scenario, so scenarios are isolated and
order-independent and new threats can be added without code changes. A
scenario passes iff every scripted expectation is met, and its evidence is
ledger-backed: transaction seq numbers and observed error codes.

The same harness doubles as a mutation check: running with a mitigation
disabled (see :class:`~ztchain.node.MitigationFlags`) must flip the paired
scenario to failing, proving each mitigation is actually load-bearing.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .addresses import AccountAddress
from .contracts_jit import SimulatedTarget, TerminationOutcome
from .contracts_mfa import render_users
from .errors import ErrorCode, ZtError
from .fingerprint import DeviceInfo, checksum
from .gasmeter import gas_report, render_csv, render_text
from .ledger import VerificationReport, load_chain, save_chain, verify_chain
from .node import MitigationFlags, PolicyNode
from .simnet import SimConfig, dos_flood

#: mitigation flag -> the scenario its removal must break
MITIGATION_SCENARIO_PAIRS = {
    "device_check": "T-1",
    "owner_guard": "T-2",
    "jit_window": "T-6",
    "chain_verification": "T-7",
}


@dataclass(frozen=True)
class ThreatScenario:
    id: str
    description: str
    mitigation: str
    expected_verdict: str
    steps: tuple[dict, ...]


@dataclass
class ScenarioResult:
    id: str
    passed: bool
    verdict: str
    expected_verdict: str
    evidence: list[str] = field(default_factory=list)
    details: list[str] = field(default_factory=list)


@dataclass
class ThreatReport:
    results: list[ScenarioResult]
    scenarios: dict[str, ThreatScenario]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "results": [
                {
                    "id": r.id,
                    "passed": r.passed,
                    "verdict": r.verdict,
                    "expected_verdict": r.expected_verdict,
                    "evidence": r.evidence,
                    "details": r.details,
                }
                for r in self.results
            ],
        }

    def render_markdown(self) -> str:
        lines = [
            "| Threat ID | Description | Mitigation strategy | Observed verdict |",
            "|-----------|-------------|---------------------|------------------|",
        ]
        for r in self.results:
            s = self.scenarios[r.id]
            lines.append(
                f"| {r.id} | {s.description} | {s.mitigation} | "
                f"{r.verdict}{'' if r.passed else ' (FAILED)'} |"
            )
        return "\n".join(lines)


def _load_fixture() -> tuple[dict, list[ThreatScenario]]:
    text = resources.files("ztchain.resources").joinpath("scenarios.json").read_text("utf-8")
    data = json.loads(text)
    scenarios = [
        ThreatScenario(
            id=s["id"],
            description=s["description"],
            mitigation=s["mitigation"],
            expected_verdict=s["expected_verdict"],
            steps=tuple(s["steps"]),
        )
        for s in data["scenarios"]
    ]
    return data["actors"], scenarios


def scenario_ids() -> list[str]:
    _, scenarios = _load_fixture()
    return [s.id for s in scenarios]


class _Runner:
    """Interprets one scenario's steps against a fresh node."""

    def __init__(self, actors: dict, scenario: ThreatScenario, flags: MitigationFlags):
        self.scenario = scenario
        self.flags = flags
        self.node = PolicyNode(owner=AccountAddress.from_label("admin"), flags=flags)
        self.actors = actors
        self.targets: dict[str, SimulatedTarget] = {}
        self.evidence: list[str] = []
        self.details: list[str] = []
        self.failed = False
        self.action_count = 0

    # -- helpers ---------------------------------------------------------

    def _addr(self, label: str) -> AccountAddress:
        return AccountAddress.from_label(label)

    def _device(self, label: str) -> DeviceInfo:
        return DeviceInfo(**self.actors[label]["device"])

    def _fail(self, message: str) -> None:
        self.failed = True
        self.details.append(message)

    def _last_seq(self) -> int:
        txs = list(self.node.chain.transactions(include_pending=True))
        return txs[-1].seq if txs else 0

    def _expect_outcome(self, step: dict, call) -> None:
        """Run a recorded contract call and match OK/error expectations."""
        expected = step.get("expect", "OK")
        try:
            call()
            observed = "OK"
        except ZtError as exc:
            observed = exc.code.name
            self.evidence.append(f"seq={self._last_seq()} error={observed}")
        else:
            self.evidence.append(f"seq={self._last_seq()} ok")
        if observed != expected:
            self._fail(f"{step['action']}: expected {expected}, observed {observed}")

    # -- step handlers ------------------------------------------------------

    def run(self) -> ScenarioResult:
        for step in self.scenario.steps:
            handler = getattr(self, "_step_" + step["action"], None)
            if handler is None:
                raise ZtError(ErrorCode.CONFIG_ERROR, f"unknown step action {step['action']!r}")
            handler(step)
        self.node.seal_pending()
        passed = not self.failed and bool(self.evidence)
        return ScenarioResult(
            id=self.scenario.id,
            passed=passed,
            verdict=self.scenario.expected_verdict if passed else "UNMITIGATED",
            expected_verdict=self.scenario.expected_verdict,
            evidence=self.evidence,
            details=self.details,
        )

    def _step_register(self, step: dict) -> None:
        self.action_count += 1
        user = step["user"]
        actor = self.actors[user]
        device = self._device(user)
        self._expect_outcome(
            step,
            lambda: self.node.register(
                self._addr(user),
                actor["email"],
                actor["password"],
                checksum(device),
                device.mac,
            ),
        )

    def _step_assign_role(self, step: dict) -> None:
        self.action_count += 1
        self._expect_outcome(
            step,
            lambda: self.node.assign_role(
                self._addr(step["caller"]),
                self.actors[step["user"]]["email"],
                step["role"],
                step["description"],
            ),
        )

    def _step_login(self, step: dict) -> None:
        self.action_count += 1
        email = self.actors[step["email_of"]]["email"]
        password = step.get("password") or self.actors[step["password_of"]]["password"]
        device = self._device(step["device_of"])
        self._expect_outcome(
            step,
            lambda: self.node.login(
                self._addr(step["caller"]), email, password, checksum(device), device.mac
            ),
        )

    def _step_get_all_users(self, step: dict) -> None:
        self.action_count += 1
        self._expect_outcome(
            step, lambda: self.node.get_all_users(self._addr(step["caller"]))
        )

    def _step_scan_sensitive(self, step: dict) -> None:
        """No stored password digest may appear in listings or reports."""
        digests = {r.password_hash for r in self.node.user_records()}
        rendered = json.dumps(render_users(self.node.user_records()))
        report_rows = gas_report(self.node.chain, self.node.schedule)
        exports = rendered + render_text(report_rows) + render_csv(report_rows)
        leaked = [d for d in digests if d in exports]
        if leaked:
            self._fail(f"scan_sensitive: {len(leaked)} password digest(s) leaked into outputs")
        else:
            self.evidence.append(f"scan_sensitive: {len(digests)} digests masked in all outputs")

    def _step_jit_target(self, step: dict) -> None:
        target = SimulatedTarget(address=AccountAddress.from_label(step["name"]))
        self.targets[step["name"]] = target
        self.node.jit.register_target(target)

    def _step_jit_start(self, step: dict) -> None:
        self.action_count += 1
        target = self.targets[step["target"]]
        self._expect_outcome(
            step, lambda: self.node.jit_start(self._addr(step["caller"]), target.address)
        )

    def _step_jit_check(self, step: dict) -> None:
        self.action_count += 1
        target = self.targets[step["target"]]
        result = self.node.jit_check(self._addr(step["caller"]), target.address)
        self.evidence.append(f"seq={result.seq} overtime={result.result}")
        if result.result != step["expect_overtime"]:
            self._fail(
                f"jit_check: expected overtime={step['expect_overtime']}, observed {result.result}"
            )

    def _step_jit_terminate(self, step: dict) -> None:
        self.action_count += 1
        target = self.targets[step["target"]]
        try:
            result = self.node.jit_terminate(self._addr(step["caller"]), target.address)
            outcome = result.result.value
            self.evidence.append(f"seq={result.seq} outcome={outcome}")
        except ZtError as exc:
            outcome = exc.code.name
            self.evidence.append(f"seq={self._last_seq()} error={outcome}")
        if outcome != step["expect_outcome"]:
            self._fail(f"jit_terminate: expected {step['expect_outcome']}, observed {outcome}")
        halted = not target.running
        if halted != step["expect_halted"]:
            self._fail(f"jit_terminate: expected halted={step['expect_halted']}, got {halted}")

    def _step_advance(self, step: dict) -> None:
        self.node.advance(step["by_ms"])

    def _step_audit_trail(self, step: dict) -> None:
        txs = list(self.node.chain.transactions(include_pending=True))
        staff_txs = [t for t in txs if t.operation != "deploy"]
        if len(staff_txs) != self.action_count:
            self._fail(
                f"audit_trail: {self.action_count} actions but {len(staff_txs)} recorded calls"
            )
        if any(t.logical_time < 0 for t in txs):
            self._fail("audit_trail: transaction without logical timestamp")
        self.node.seal_pending()
        report = self.node.verify()
        if not report.ok:
            self._fail(f"audit_trail: chain verification failed: {report}")
        self.evidence.extend(f"seq={t.seq} t={t.logical_time}ms" for t in staff_txs)

    def _step_flood_compare(self, step: dict) -> None:
        cfg = SimConfig(
            node_count=step.get("nodes", 100),
            request_count=step.get("requests", 150),
            seed=self.node.seed,
        )
        report = dos_flood(cfg, step["multiplier"])
        per, zt = report.perimeter.success_rate, report.zero_trust.success_rate
        self.evidence.append(
            f"flood x{step['multiplier']}: perimeter_success={per:.3f} zero_trust_success={zt:.3f}"
        )
        if step["expect"] == "both_high":
            floor = step.get("min_success", 0.99)
            if per < floor or zt < floor:
                self._fail(f"flood_compare: expected both >= {floor}, got {per:.3f}/{zt:.3f}")
        elif step["expect"] == "perimeter_lt_zero_trust":
            if not per < zt:
                self._fail(f"flood_compare: expected perimeter < zero-trust, got {per:.3f}/{zt:.3f}")
            floor = step.get("min_zero_trust_success", 0.0)
            if zt < floor:
                self._fail(f"flood_compare: zero-trust success {zt:.3f} below {floor}")
        else:
            raise ZtError(ErrorCode.CONFIG_ERROR, f"unknown flood expectation {step['expect']!r}")

    def _step_tamper_and_verify(self, step: dict) -> None:
        """File-level tamper of a committed record, then reload and verify."""
        self.node.seal_pending()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "scenario.chain.jsonl"
            save_chain(self.node.chain, path)
            raw = path.read_bytes()
            marker = b'"operation":"register"'
            at = raw.find(marker)
            if at < 0:
                self._fail("tamper_and_verify: no register record to tamper with")
                return
            # flip one byte inside the committed payload region
            mutated = raw[:at] + b'"operation":"rEgister"' + raw[at + len(marker):]
            path.write_bytes(mutated)
            chain = load_chain(path)
            if self.flags.chain_verification:
                report = verify_chain(chain)
            else:
                report = VerificationReport(True)
        ok_expected = step["expect_ok"]
        self.evidence.append(
            f"tamper: verify ok={report.ok}"
            + (f" first_bad_index={report.first_bad_index}" if not report.ok else "")
        )
        if report.ok != ok_expected:
            self._fail(f"tamper_and_verify: expected ok={ok_expected}, got ok={report.ok}")


def run_scenario(scenario_id: str, flags: MitigationFlags = MitigationFlags()) -> ScenarioResult:
    actors, scenarios = _load_fixture()
    for scenario in scenarios:
        if scenario.id == scenario_id:
            return _Runner(actors, scenario, flags).run()
    raise ZtError(ErrorCode.UNKNOWN_SCENARIO, f"no scenario with id {scenario_id!r}")


def run_all(flags: MitigationFlags = MitigationFlags()) -> ThreatReport:
    actors, scenarios = _load_fixture()
    results = [_Runner(actors, s, flags).run() for s in scenarios]
    return ThreatReport(results=results, scenarios={s.id: s for s in scenarios})
