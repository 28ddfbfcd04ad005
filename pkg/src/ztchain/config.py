"""Optional JSON config file; CLI flags take precedence over its values."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ErrorCode, ZtError
from .simnet import StageDist


@dataclass
class AppConfig:
    jit_threshold_ms: int | None = None
    digest: str | None = None
    seed: int | None = None
    nodes: int | None = None
    requests: int | None = None
    mode: str | None = None
    stakes: list[int] | None = None
    gas_schedule: str | None = None
    latency_model: dict[str, StageDist] | None = None

    @classmethod
    def load(cls, path: str | Path | None) -> "AppConfig":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ZtError(ErrorCode.IO_ERROR, f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ZtError(ErrorCode.FORMAT_ERROR, f"malformed config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ZtError(ErrorCode.FORMAT_ERROR, "config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ZtError(ErrorCode.CONFIG_ERROR, f"unknown config keys: {sorted(unknown)}")
        if "latency_model" in data and data["latency_model"] is not None:
            data["latency_model"] = {
                name: StageDist(**{"dist": "uniform", **spec})
                for name, spec in data["latency_model"].items()
            }
        return cls(**data)

    def pick(self, flag_value, key: str, default):
        """Precedence: CLI flag, then config value, then built-in default."""
        if flag_value is not None:
            return flag_value
        value = getattr(self, key)
        return default if value is None else value
