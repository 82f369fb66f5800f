"""Wire encoding of envelope structures.

Canonical JSON with fixed field names; binary fields are base64. The byte
encoding is stable across runs and platforms (golden files pin it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..canonical import b64decode, b64encode, canonical_bytes
from .sealing import SealedData, WrappedKey


@dataclass(frozen=True)
class WrappedPayload:
    """One invocation's worth of ciphertext plus routing metadata: the sealed
    payload, the wrapped data key, and identifiers for routing/audit."""

    app_id: str
    request_id: str
    encrypted_data: SealedData
    encrypted_key: WrappedKey


def sealed_to_dict(sealed: SealedData) -> dict[str, str]:
    return {
        "ciphertext": b64encode(sealed.ciphertext),
        "nonce": b64encode(sealed.nonce),
        "auth_tag": b64encode(sealed.auth_tag),
    }


def sealed_from_dict(obj: Mapping[str, Any]) -> SealedData:
    return SealedData(
        ciphertext=b64decode(obj["ciphertext"]),
        nonce=b64decode(obj["nonce"]),
        auth_tag=b64decode(obj["auth_tag"]),
    )


def wrapped_key_to_dict(wrapped: WrappedKey) -> dict[str, str]:
    return {
        "ciphertext": b64encode(wrapped.ciphertext),
        "signature": b64encode(wrapped.signature),
        "signer_app_id": wrapped.signer_app_id,
        "kms_id": wrapped.kms_id,
    }


def wrapped_key_from_dict(obj: Mapping[str, Any]) -> WrappedKey:
    return WrappedKey(
        ciphertext=b64decode(obj["ciphertext"]),
        signature=b64decode(obj["signature"]),
        signer_app_id=obj["signer_app_id"],
        kms_id=obj["kms_id"],
    )


def payload_to_dict(payload: WrappedPayload) -> dict[str, Any]:
    return {
        "app_id": payload.app_id,
        "request_id": payload.request_id,
        "encrypted_data": sealed_to_dict(payload.encrypted_data),
        "encrypted_key": wrapped_key_to_dict(payload.encrypted_key),
    }


def payload_from_dict(obj: Mapping[str, Any]) -> WrappedPayload:
    return WrappedPayload(
        app_id=obj["app_id"],
        request_id=obj["request_id"],
        encrypted_data=sealed_from_dict(obj["encrypted_data"]),
        encrypted_key=wrapped_key_from_dict(obj["encrypted_key"]),
    )


def sealed_to_wire(sealed: SealedData) -> bytes:
    return canonical_bytes(sealed_to_dict(sealed))


def wrapped_key_to_wire(wrapped: WrappedKey) -> bytes:
    return canonical_bytes(wrapped_key_to_dict(wrapped))


def payload_to_wire(payload: WrappedPayload) -> bytes:
    return canonical_bytes(payload_to_dict(payload))
