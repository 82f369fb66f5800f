"""KMS domain records: registrations, access decisions, audit entries."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping, Optional


class Decision(enum.Enum):
    """Outcome of one data-key decrypt request."""

    GRANTED = "Granted"
    DENIED_REVOKED = "DeniedRevoked"
    DENIED_UNREGISTERED = "DeniedUnregistered"
    DENIED_BAD_SIGNATURE = "DeniedBadSignature"
    DENIED_CRYPTO_ERROR = "DeniedCryptoError"

    @property
    def granted(self) -> bool:
        return self is Decision.GRANTED


class RegistrationStatus(enum.Enum):
    ACTIVE = "Active"
    REVOKED = "Revoked"


@dataclass
class AppRegistration:
    """One app's registered key material.

    Stores BOTH halves of the app pair: the public half verifies the hub's
    origin signature, and the private half lets the service fully unwrap and
    return the data key in plaintext. The registration API keeps a
    public-key-shaped name for compatibility, but its payload carries the
    full pair; see the kms module docs.
    """

    app_id: str
    public_key_pem: str
    private_key_pem: str
    registered_at: float
    status: RegistrationStatus = RegistrationStatus.ACTIVE

    def to_dict(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "public_key_pem": self.public_key_pem,
            "private_key_pem": self.private_key_pem,
            "registered_at": self.registered_at,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "AppRegistration":
        return cls(
            app_id=obj["app_id"],
            public_key_pem=obj["public_key_pem"],
            private_key_pem=obj["private_key_pem"],
            registered_at=obj["registered_at"],
            status=RegistrationStatus(obj["status"]),
        )


@dataclass(frozen=True)
class AccessRecord:
    """Append-only audit entry; exactly one per decrypt call. Carries a hash
    of the wrapped blob, never the blob or any key material."""

    seq: int
    timestamp: float
    app_id: str
    request_id: str
    decision: Decision
    wrapped_key_digest: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "app_id": self.app_id,
            "request_id": self.request_id,
            "decision": self.decision.value,
            "wrapped_key_digest": self.wrapped_key_digest,
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "AccessRecord":
        return cls(
            seq=obj["seq"],
            timestamp=obj["timestamp"],
            app_id=obj["app_id"],
            request_id=obj["request_id"],
            decision=Decision(obj["decision"]),
            wrapped_key_digest=obj["wrapped_key_digest"],
        )


# Measured one-way response latencies for the two supported deployment
# locations of the key service, in milliseconds.
KMS_LATENCY_CLOUD_MS = 206.0
KMS_LATENCY_HUB_LOCAL_MS = 976.0

KMS_LATENCY_PRESETS = {
    "cloud": KMS_LATENCY_CLOUD_MS,
    "hub-local": KMS_LATENCY_HUB_LOCAL_MS,
}


@dataclass
class KmsConfig:
    """Service configuration. ``simulated_response_latency_ms`` models the
    deployment location (cloud-adjacent vs hub-local)."""

    kms_id: str = "kms-default"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8443
    tls_cert_file: Optional[str] = None
    tls_key_file: Optional[str] = None
    store_path: Optional[str] = None
    simulated_response_latency_ms: float = KMS_LATENCY_CLOUD_MS

    def __post_init__(self) -> None:
        if self.simulated_response_latency_ms < 0:
            raise ValueError("latency must be nonnegative")

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "KmsConfig":
        kwargs = dict(obj)
        location = kwargs.pop("location", None)
        config = cls(**kwargs)
        if location is not None:
            config.simulated_response_latency_ms = KMS_LATENCY_PRESETS[location]
        return config
