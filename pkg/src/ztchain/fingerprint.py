"""Device fingerprinting: canonical serialization and SHA-256 checksum.

The checksum is the device-binding factor of multi-factor login: the value
computed at enrollment must be reproduced bit-for-bit at login, so the
canonical layout is a versioned, normative format (``fingerprint-v1``):

    seven ``key=value`` lines in fixed order
    (lat, lon, browser, ip, os_name, os_version, mac),
    coordinates fixed-point with exactly 6 decimal places,
    MAC lowercased and colon-separated,
    UTF-8, lines joined by a single LF, no trailing LF.

Any change to a normalized field value changes the checksum; equal
normalized fields always produce equal checksums.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

from .errors import ErrorCode, ZtError

FORMAT_VERSION = "fingerprint-v1"

#: decimal places kept for coordinates (~0.11 m); overridable per call for
#: experiments, but v1 interop requires the default.
COORD_PRECISION = 6

_MAC_SEP_RE = re.compile(r"[:\-.]")
_HEX12_RE = re.compile(r"^[0-9a-f]{12}$")


@dataclass(frozen=True)
class DeviceInfo:
    latitude: float
    longitude: float
    browser: str
    ip: str
    os_name: str
    os_version: str
    mac: str


def normalize_mac(mac: str) -> str:
    """Normalize a MAC to 6 lowercase colon-separated hex byte pairs.

    Accepts colon/dash/dot separated or bare 12-hex-digit forms.
    """
    raw = _MAC_SEP_RE.sub("", mac.strip().lower())
    if not _HEX12_RE.match(raw):
        raise ZtError(ErrorCode.INVALID_FIELD, f"unnormalizable MAC address: {mac!r}")
    return ":".join(raw[i : i + 2] for i in range(0, 12, 2))


def _format_coord(value: float, precision: int) -> str:
    text = f"{value:.{precision}f}"
    # -0.000000 and 0.000000 are equal after rounding; keep one spelling.
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def canonicalize(info: DeviceInfo, precision: int = COORD_PRECISION) -> str:
    """Render the canonical v1 string for a device."""
    if not isinstance(info.latitude, (int, float)) or not math.isfinite(info.latitude):
        raise ZtError(ErrorCode.INVALID_FIELD, "latitude must be a finite number")
    if not isinstance(info.longitude, (int, float)) or not math.isfinite(info.longitude):
        raise ZtError(ErrorCode.INVALID_FIELD, "longitude must be a finite number")
    if not -90.0 <= info.latitude <= 90.0:
        raise ZtError(ErrorCode.INVALID_FIELD, f"latitude out of range: {info.latitude}")
    if not -180.0 <= info.longitude <= 180.0:
        raise ZtError(ErrorCode.INVALID_FIELD, f"longitude out of range: {info.longitude}")
    for name in ("browser", "ip", "os_name", "os_version"):
        if "\n" in getattr(info, name):
            # an embedded LF would forge extra lines and break injectivity
            raise ZtError(ErrorCode.INVALID_FIELD, f"{name} must not contain newlines")
    mac = normalize_mac(info.mac)
    lines = (
        f"lat={_format_coord(info.latitude, precision)}",
        f"lon={_format_coord(info.longitude, precision)}",
        f"browser={info.browser}",
        f"ip={info.ip}",
        f"os_name={info.os_name}",
        f"os_version={info.os_version}",
        f"mac={mac}",
    )
    return "\n".join(lines)


def checksum(info: DeviceInfo, precision: int = COORD_PRECISION) -> str:
    """SHA-256 of the canonical string, as 64 lowercase hex chars."""
    canonical = canonicalize(info, precision)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
