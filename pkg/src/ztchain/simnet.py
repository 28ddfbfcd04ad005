"""Seeded discrete-event simulation of an N-node authentication network.

Two routing modes are compared: ZERO_TRUST sends every request through the
full enforcement pipeline (node intake, contract execution, validator
selection, block seal) on a real policy node; PERIMETER sends it to a
single central credential store. Each run makes two measurement passes,
matching how the reference benchmark was taken:

* a latency pass: sequential round-trip probes, one in flight at a time,
  whose end-to-end times form the per-request latency column, and
* a throughput pass: saturated back-to-back processing at the service
  bottleneck, whose cumulative completion times define the average time
  per request (and so throughput = 1000 / avg time per request).

The two passes are genuinely different experiments: round-trip probes
include network hops that overlap other work in a saturated run, which is
why the latency mean exceeds the per-request processing time.

All randomness flows from (seed, stream) pairs; stage delays are pre-drawn
per request index, so results are independent of event interleaving.
"""

from __future__ import annotations

import csv
import heapq
import json
import statistics
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable

from . import _kernels
from .addresses import AccountAddress
from .consensus import StakeTable
from .contracts_mfa import hash_password
from .errors import ErrorCode, ZtError
from .fingerprint import DeviceInfo, checksum
from .node import MitigationFlags, PolicyNode

# stream ids (per purpose; probe and throughput passes never share one)
_STREAM_NODE_ASSIGN = 11
_STREAM_PROBE_BASE = 20
_STREAM_SERVICE_BASE = 40
_STREAM_FLOOD_ARRIVAL = 60
_STREAM_FLOOD_ASSIGN = 61
_STREAM_FLOOD_SERVICE = 62
_STREAM_FLOOD_ATTACK_ASSIGN = 63
_STREAM_FLOOD_ATTACK_SERVICE = 64


class SimMode(Enum):
    ZERO_TRUST = "zero-trust"
    PERIMETER = "perimeter"


@dataclass(frozen=True)
class StageDist:
    """Per-stage delay distribution (milliseconds)."""

    dist: str
    low: float
    high: float

    def validate(self, name: str) -> None:
        if self.dist != "uniform":
            raise ZtError(ErrorCode.CONFIG_ERROR, f"stage {name}: unsupported dist {self.dist!r}")
        if not (0.0 < self.low <= self.high):
            raise ZtError(
                ErrorCode.CONFIG_ERROR,
                f"stage {name}: need 0 < low <= high, got [{self.low}, {self.high}]",
            )

    @property
    def mean(self) -> float:
        return (self.low + self.high) / 2.0


def _load_calibration() -> dict:
    text = resources.files("ztchain.resources").joinpath("calibration.json").read_text("utf-8")
    return json.loads(text)


def default_latency_model(mode: SimMode) -> dict[str, StageDist]:
    data = _load_calibration()
    key = "zero_trust" if mode is SimMode.ZERO_TRUST else "perimeter"
    return {name: StageDist(**spec) for name, spec in data[key].items()}


def flood_defaults() -> dict:
    return _load_calibration()["flood"]


#: service (bottleneck) stages per mode; hops are round-trip-only
SERVICE_STAGES = {
    SimMode.ZERO_TRUST: ("contract", "consensus", "seal"),
    SimMode.PERIMETER: ("db",),
}


@dataclass
class SimConfig:
    node_count: int = 200
    request_count: int = 1000
    seed: int = 0
    mode: SimMode = SimMode.ZERO_TRUST
    latency_model: dict[str, StageDist] | None = None
    stakes: StakeTable | None = None
    jit_threshold_ms: int = 300_000
    flags: MitigationFlags = field(default_factory=MitigationFlags)

    def validate(self) -> None:
        if self.node_count < 1:
            raise ZtError(ErrorCode.CONFIG_ERROR, "node_count must be >= 1")
        if self.request_count < 1:
            raise ZtError(ErrorCode.CONFIG_ERROR, "request_count must be >= 1")
        model = self.stage_model()
        for name in ("hop", *SERVICE_STAGES[self.mode]):
            if name not in model:
                raise ZtError(ErrorCode.CONFIG_ERROR, f"latency model missing stage {name!r}")
            model[name].validate(name)

    def stage_model(self) -> dict[str, StageDist]:
        return self.latency_model or default_latency_model(self.mode)

    def stake_table(self) -> StakeTable:
        return self.stakes or StakeTable((1,) * self.node_count)


@dataclass
class MetricsReport:
    mode: SimMode
    seed: int
    node_count: int
    request_count: int
    per_request_latency_ms: list[float]
    completion_times_ms: list[float]
    average_latency_ms: float
    avg_time_per_request_ms: float
    throughput_rps: float
    event_count: int = 0
    intake_nodes: list[int] = field(default_factory=list)

    def summary_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "seed": self.seed,
            "node_count": self.node_count,
            "request_count": self.request_count,
            "average_latency_ms": self.average_latency_ms,
            "avg_time_per_request_ms": self.avg_time_per_request_ms,
            "throughput_rps": self.throughput_rps,
            "event_count": self.event_count,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary_dict(), sort_keys=True, separators=(",", ":"))


def compute_metrics(
    latencies: list[float],
    completion_times: list[float],
    mode: SimMode = SimMode.ZERO_TRUST,
    seed: int = 0,
    node_count: int = 0,
    event_count: int = 0,
    intake_nodes: list[int] | None = None,
) -> MetricsReport:
    """Pure metric computation: mean latency, cumulative completion time
    per request, and throughput = 1000 / avg time per request."""
    if not latencies or not completion_times:
        raise ZtError(ErrorCode.EMPTY_INPUT, "metric inputs must be non-empty")
    avg_time = max(completion_times) / len(completion_times)
    return MetricsReport(
        mode=mode,
        seed=seed,
        node_count=node_count,
        request_count=len(latencies),
        per_request_latency_ms=list(latencies),
        completion_times_ms=list(completion_times),
        average_latency_ms=statistics.fmean(latencies),
        avg_time_per_request_ms=avg_time,
        throughput_rps=1000.0 / avg_time,
        event_count=event_count,
        intake_nodes=list(intake_nodes or []),
    )


# ---------------------------------------------------------------------------
# event loop
# ---------------------------------------------------------------------------


class EventLoop:
    """Minimal deterministic event queue: (time_us, insertion seq) order."""

    def __init__(self):
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._seq = 0
        self.now_us = 0
        self.event_count = 0

    def schedule(self, at_us: int, fn: Callable[[], None]) -> None:
        heapq.heappush(self._heap, (at_us, self._seq, fn))
        self._seq += 1

    def run(self) -> None:
        while self._heap:
            at_us, _, fn = heapq.heappop(self._heap)
            self.now_us = at_us
            self.event_count += 1
            fn()


def _ms_to_us(ms: float) -> int:
    return round(ms * 1000.0)


# ---------------------------------------------------------------------------
# authentication worlds
# ---------------------------------------------------------------------------


def synth_device(i: int) -> DeviceInfo:
    """Deterministic device profile for simulated employee i."""
    return DeviceInfo(
        latitude=(i * 7 % 160) - 80 + 0.25,
        longitude=(i * 13 % 340) - 170 + 0.5,
        browser=f"SimBrowser/{100 + i % 20}",
        ip=f"10.{(i >> 8) % 256}.{i % 256}.{i * 7 % 250 + 1}",
        os_name="SimOS",
        os_version=f"{1 + i % 5}.{i % 10}",
        mac=":".join(f"{b:02x}" for b in (0x02, 0x5A, (i >> 24) & 255, (i >> 16) & 255, (i >> 8) & 255, i & 255)),
    )


class ZeroTrustWorld:
    """Request handler backed by a real policy node."""

    def __init__(self, cfg: SimConfig):
        self.node = PolicyNode(
            jit_threshold_ms=cfg.jit_threshold_ms,
            flags=cfg.flags,
            stakes=cfg.stake_table(),
            seed=cfg.seed,
        )
        self.credentials: list[tuple[AccountAddress, str, str, str, str]] = []
        for i in range(cfg.node_count):
            device = synth_device(i)
            addr = AccountAddress.from_label(f"node-{i}")
            email = f"user{i:05d}@sim.local"
            password = f"pw-{i:05d}"
            chk = checksum(device)
            self.node.register(addr, email, password, chk, device.mac)
            self.node.assign_role(self.node.mfa.owner, email, "Employee", f"Workstation {i}")
            self.credentials.append((addr, email, password, chk, device.mac))
        self.node.seal_pending()

    def authenticate(self, user_index: int, at_ms: int) -> None:
        addr, email, password, chk, mac = self.credentials[user_index]
        self.node.set_time(max(at_ms, self.node.time_ms))
        self.node.login(addr, email, password, chk, mac)
        self.node.seal_pending()


class PerimeterWorld:
    """Central credential table: the perimeter baseline authenticates by
    email and password only (no device binding, no ledger)."""

    def __init__(self, cfg: SimConfig):
        self.table: dict[str, str] = {}
        for i in range(cfg.node_count):
            self.table[f"user{i:05d}@sim.local"] = hash_password(f"pw-{i:05d}")

    def authenticate(self, user_index: int, at_ms: int) -> None:
        email = f"user{user_index:05d}@sim.local"
        if self.table.get(email) != hash_password(f"pw-{user_index:05d}"):
            raise ZtError(ErrorCode.INVALID_PASSWORD)


# ---------------------------------------------------------------------------
# measurement passes
# ---------------------------------------------------------------------------


def _stage_draws(cfg: SimConfig, base_stream: int, stages: tuple[str, ...]) -> list[list[float]]:
    model = cfg.stage_model()
    out = []
    for offset, name in enumerate(stages):
        d = model[name]
        out.append(
            _kernels.uniform_range_fill(cfg.seed, base_stream + offset, cfg.request_count, d.low, d.high)
        )
    return out


def run_simulation(config: SimConfig) -> MetricsReport:
    config.validate()
    world = ZeroTrustWorld(config) if config.mode is SimMode.ZERO_TRUST else PerimeterWorld(config)

    service_stages = SERVICE_STAGES[config.mode]
    # probe pass draws: hop out, hop back, plus every service stage
    probe = _stage_draws(config, _STREAM_PROBE_BASE, ("hop", "hop", *service_stages))
    service = _stage_draws(config, _STREAM_SERVICE_BASE, service_stages)
    node_u = _kernels.uniform_fill(config.seed, _STREAM_NODE_ASSIGN, config.request_count)
    nodes = [int(u * config.node_count) for u in node_u]

    loop = EventLoop()
    n = config.request_count

    # latency pass: sequential round-trip probes
    latencies: list[float] = []

    def launch_probe(k: int, start_us: int) -> None:
        total_ms = sum(col[k] for col in probe)
        done_us = start_us + _ms_to_us(total_ms)

        def complete() -> None:
            world.authenticate(nodes[k], done_us // 1000)
            latencies.append(total_ms)
            if k + 1 < n:
                launch_probe(k + 1, done_us)

        loop.schedule(done_us, complete)

    launch_probe(0, 0)
    loop.run()

    # throughput pass: saturated back-to-back service at the bottleneck
    completions: list[float] = []
    phase_start_us = loop.now_us

    def launch_service(k: int, free_us: int) -> None:
        svc_ms = sum(col[k] for col in service)
        done_us = free_us + _ms_to_us(svc_ms)

        def complete() -> None:
            world.authenticate(nodes[k], done_us // 1000)
            completions.append((done_us - phase_start_us) / 1000.0)
            if k + 1 < n:
                launch_service(k + 1, done_us)

        loop.schedule(done_us, complete)

    launch_service(0, phase_start_us)
    loop.run()

    return compute_metrics(
        latencies,
        completions,
        mode=config.mode,
        seed=config.seed,
        node_count=config.node_count,
        event_count=loop.event_count,
        intake_nodes=nodes,
    )


# ---------------------------------------------------------------------------
# flood experiment
# ---------------------------------------------------------------------------


@dataclass
class FloodModeResult:
    generated_legit: int
    served_legit: int
    dropped_legit: int
    generated_attack: int
    served_attack: int
    dropped_attack: int

    @property
    def success_rate(self) -> float:
        return self.served_legit / self.generated_legit if self.generated_legit else 0.0


@dataclass
class FloodReport:
    multiplier: float
    node_count: int
    perimeter: FloodModeResult
    zero_trust: FloodModeResult

    def to_dict(self) -> dict:
        return {
            "multiplier": self.multiplier,
            "node_count": self.node_count,
            "perimeter_success_rate": self.perimeter.success_rate,
            "zero_trust_success_rate": self.zero_trust.success_rate,
        }


def _flood_one_mode(cfg: SimConfig, mode: SimMode, multiplier: float) -> FloodModeResult:
    """FIFO queueing at intake servers under flood load.

    PERIMETER has a single server; ZERO_TRUST has node_count full-capacity
    intake replicas, so an attacker's budget spreads thin while a central
    endpoint saturates. Every generated request terminates exactly once:
    served if its queueing delay fits the timeout, dropped otherwise.
    """
    defaults = flood_defaults()
    legit_rate = defaults["legit_rate_rps"]
    timeout_ms = defaults["queue_timeout_ms"]
    n_legit = cfg.request_count
    n_attack = round(n_legit * (multiplier - 1.0))
    window_ms = n_legit * 1000.0 / legit_rate
    server_count = cfg.node_count if mode is SimMode.ZERO_TRUST else 1

    model = default_latency_model(mode)
    if cfg.latency_model:
        model.update(cfg.latency_model)
    stages = SERVICE_STAGES[mode]

    def service_samples(stream: int, count: int) -> list[float]:
        if count == 0:
            return []
        total = [0.0] * count
        for offset, name in enumerate(stages):
            d = model[name]
            draws = _kernels.uniform_range_fill(cfg.seed, stream + 10 * offset, count, d.low, d.high)
            total = [t + x for t, x in zip(total, draws)]
        return total

    legit_arrivals = [window_ms * i / n_legit for i in range(n_legit)]
    attack_u = _kernels.uniform_fill(cfg.seed, _STREAM_FLOOD_ARRIVAL, n_attack)
    attack_arrivals = [window_ms * u for u in attack_u]

    def assign(stream: int, count: int) -> list[int]:
        if server_count == 1:
            return [0] * count
        us = _kernels.uniform_fill(cfg.seed, stream, count)
        return [int(u * server_count) for u in us]

    legit_nodes = assign(_STREAM_FLOOD_ASSIGN, n_legit)
    attack_nodes = assign(_STREAM_FLOOD_ATTACK_ASSIGN, n_attack)
    legit_service = service_samples(_STREAM_FLOOD_SERVICE, n_legit)
    attack_service = service_samples(_STREAM_FLOOD_ATTACK_SERVICE, n_attack)

    loop = EventLoop()
    server_free_us = [0] * server_count
    counts = {"legit": [0, 0], "attack": [0, 0]}  # [served, dropped]

    def arrival(kind: str, node: int, svc_ms: float) -> None:
        now = loop.now_us
        start = max(now, server_free_us[node])
        if start - now > _ms_to_us(timeout_ms):
            counts[kind][1] += 1
            return
        server_free_us[node] = start + _ms_to_us(svc_ms)
        counts[kind][0] += 1

    for t, node, svc in zip(legit_arrivals, legit_nodes, legit_service):
        loop.schedule(_ms_to_us(t), (lambda nd=node, s=svc: arrival("legit", nd, s)))
    for t, node, svc in zip(attack_arrivals, attack_nodes, attack_service):
        loop.schedule(_ms_to_us(t), (lambda nd=node, s=svc: arrival("attack", nd, s)))
    loop.run()

    return FloodModeResult(
        generated_legit=n_legit,
        served_legit=counts["legit"][0],
        dropped_legit=counts["legit"][1],
        generated_attack=n_attack,
        served_attack=counts["attack"][0],
        dropped_attack=counts["attack"][1],
    )


def dos_flood(config: SimConfig, flood_multiplier: float) -> FloodReport:
    """Availability under login flooding, both modes side by side."""
    config.validate()
    if flood_multiplier < 1:
        raise ZtError(ErrorCode.CONFIG_ERROR, "flood_multiplier must be >= 1")
    return FloodReport(
        multiplier=flood_multiplier,
        node_count=config.node_count,
        perimeter=_flood_one_mode(config, SimMode.PERIMETER, flood_multiplier),
        zero_trust=_flood_one_mode(config, SimMode.ZERO_TRUST, flood_multiplier),
    )


# ---------------------------------------------------------------------------
# reference benchmark replay
# ---------------------------------------------------------------------------

#: computed means may legitimately differ from the source's stated
#: averages; anything beyond this is flagged in the replay report
_LATENCY_FLAG_TOLERANCE_MS = 0.005


@dataclass
class Table4ModeResult:
    mode: SimMode
    label: str
    latency_ms: list[float]
    cumulative_time_ms: list[float]
    computed_average_latency_ms: float
    computed_avg_time_per_request_ms: float
    computed_throughput_rps: float
    stated_average_latency_ms: float
    stated_throughput_rps: float
    latency_mean_flagged: bool
    latency_mean_delta: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "label": self.label,
            "rows": len(self.latency_ms),
            "computed_average_latency_ms": self.computed_average_latency_ms,
            "computed_avg_time_per_request_ms": self.computed_avg_time_per_request_ms,
            "computed_throughput_rps": self.computed_throughput_rps,
            "stated_average_latency_ms": self.stated_average_latency_ms,
            "stated_throughput_rps": self.stated_throughput_rps,
            "latency_mean_flagged": self.latency_mean_flagged,
            "latency_mean_delta": self.latency_mean_delta,
        }


@dataclass
class Table4Report:
    results: dict[str, Table4ModeResult]

    def to_dict(self) -> dict:
        return {name: r.to_dict() for name, r in self.results.items()}

    def render_text(self) -> str:
        lines = []
        for r in self.results.values():
            lines.append(f"{r.label} ({r.mode.value}), {len(r.latency_ms)} requests:")
            lines.append(
                f"  computed: avg latency {r.computed_average_latency_ms:.2f} ms, "
                f"avg time/request {r.computed_avg_time_per_request_ms:.2f} ms, "
                f"throughput {r.computed_throughput_rps:.2f} rps"
            )
            lines.append(
                f"  stated:   avg latency {r.stated_average_latency_ms:.2f} ms, "
                f"throughput {r.stated_throughput_rps:.2f} rps"
            )
            if r.latency_mean_flagged:
                lines.append(
                    f"  DISCREPANCY: stated average latency differs from the "
                    f"column mean by {r.latency_mean_delta:+.2f} ms"
                )
        return "\n".join(lines)


def replay_table4() -> Table4Report:
    """Recompute metrics from the bundled reference measurement table and
    flag stated averages that its own raw columns do not reproduce."""
    text = resources.files("ztchain.resources").joinpath("table4.json").read_text("utf-8")
    data = json.loads(text)
    results: dict[str, Table4ModeResult] = {}
    for name, mode in (("zero_trust", SimMode.ZERO_TRUST), ("perimeter", SimMode.PERIMETER)):
        row = data["modes"][name]
        metrics = compute_metrics(row["latency_ms"], row["cumulative_time_ms"], mode=mode)
        delta = row["stated_average_latency_ms"] - metrics.average_latency_ms
        results[name] = Table4ModeResult(
            mode=mode,
            label=row["label"],
            latency_ms=list(map(float, row["latency_ms"])),
            cumulative_time_ms=list(map(float, row["cumulative_time_ms"])),
            computed_average_latency_ms=metrics.average_latency_ms,
            computed_avg_time_per_request_ms=metrics.avg_time_per_request_ms,
            computed_throughput_rps=metrics.throughput_rps,
            stated_average_latency_ms=row["stated_average_latency_ms"],
            stated_throughput_rps=row["stated_throughput_rps"],
            latency_mean_flagged=abs(delta) > _LATENCY_FLAG_TOLERANCE_MS,
            latency_mean_delta=delta,
        )
    return Table4Report(results=results)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def write_per_request_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["request_number", "intake_node", "latency_ms", "cumulative_time_ms"])
        for i, (lat, cum) in enumerate(
            zip(report.per_request_latency_ms, report.completion_times_ms), start=1
        ):
            node = report.intake_nodes[i - 1] if report.intake_nodes else ""
            w.writerow([i, node, f"{lat:.6f}", f"{cum:.6f}"])


def write_summary_json(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(report.summary_json() + "\n", encoding="utf-8")


def write_latency_series_csv(report: MetricsReport, path: str | Path) -> None:
    """Plot-friendly series: request number vs round-trip latency."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["request_number", "latency_ms"])
        for i, lat in enumerate(report.per_request_latency_ms, start=1):
            w.writerow([i, f"{lat:.6f}"])


def write_throughput_series_csv(report: MetricsReport, path: str | Path) -> None:
    """Plot-friendly series: request number vs running throughput."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["request_number", "running_throughput_rps"])
        for i, cum in enumerate(report.completion_times_ms, start=1):
            w.writerow([i, f"{1000.0 * i / cum:.6f}"])
