"""Canonical structured encoding shared by wire formats, packages, and reports.

Binary fields are base64-encoded; objects are serialized as JSON with sorted
keys and compact separators so identical structures always produce identical
bytes (golden files and deterministic digests depend on this).
"""

from __future__ import annotations

import base64
import hashlib
import json
from decimal import Decimal
from typing import Any


def b64encode(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def b64decode(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)


def _default(obj: Any) -> Any:
    if isinstance(obj, Decimal):
        return str(obj)
    raise TypeError(f"not canonically serializable: {type(obj).__name__}")


def canonical_bytes(obj: Any) -> bytes:
    """Serialize to deterministic JSON bytes (sorted keys, no whitespace)."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, default=_default
    ).encode("ascii")


def canonical_pretty(obj: Any) -> bytes:
    """Deterministic but human-readable JSON bytes (reports, receipts)."""
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True, default=_default)
    return (text + "\n").encode("ascii")


def digest(data: bytes) -> str:
    """Hex SHA-256 content hash."""
    return hashlib.sha256(data).hexdigest()
