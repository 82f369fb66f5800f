"""Key material: per-app asymmetric pairs, the key-service pair, and
per-request symmetric data keys.

Concrete suite: RSA-2048 pairs used for both encryption (OAEP-SHA256) and
signing (PSS-SHA256), and 256-bit data keys for AES-GCM. Only the properties
matter to callers; the suite is an implementation choice.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from secrets import token_bytes

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import rsa
from cryptography.hazmat.primitives.asymmetric.rsa import RSAPrivateKey, RSAPublicKey

RSA_KEY_BITS = 2048
DATA_KEY_BYTES = 32


@dataclass(frozen=True)
class AppKeyPair:
    """Per-application pair. The hub holds both halves and signs with the
    private half; the deployed package and the key service each receive a
    copy of the private half so they can open the app layer."""

    app_id: str
    public_key: RSAPublicKey
    private_key: RSAPrivateKey


@dataclass(frozen=True)
class KmsKeyPair:
    """The key service's own pair; ``kms_id`` is stable for one service
    instance and names the outer wrapping layer."""

    kms_id: str
    public_key: RSAPublicKey
    private_key: RSAPrivateKey


@dataclass(frozen=True)
class DataKey:
    """Fresh 256-bit symmetric key generated per request, never reused."""

    key_bytes: bytes
    created_at: float = field(default_factory=time.time)

    def __post_init__(self) -> None:
        if len(self.key_bytes) != DATA_KEY_BYTES:
            raise ValueError(f"data key must be {DATA_KEY_BYTES} bytes")

    def __repr__(self) -> str:  # keep key material out of logs
        return f"DataKey(created_at={self.created_at!r})"


def _generate_rsa() -> RSAPrivateKey:
    return rsa.generate_private_key(public_exponent=65537, key_size=RSA_KEY_BITS)


def generate_app_keypair(app_id: str) -> AppKeyPair:
    """Generate a fresh per-application keypair."""
    if not app_id:
        raise ValueError("app_id must be nonempty")
    private = _generate_rsa()
    return AppKeyPair(app_id=app_id, public_key=private.public_key(), private_key=private)


def generate_kms_keypair(kms_id: str) -> KmsKeyPair:
    if not kms_id:
        raise ValueError("kms_id must be nonempty")
    private = _generate_rsa()
    return KmsKeyPair(kms_id=kms_id, public_key=private.public_key(), private_key=private)


def generate_data_key() -> DataKey:
    """Fresh 256-bit key from the OS CSPRNG."""
    return DataKey(key_bytes=token_bytes(DATA_KEY_BYTES))


def public_key_pem(key: RSAPublicKey) -> str:
    return key.public_bytes(
        serialization.Encoding.PEM, serialization.PublicFormat.SubjectPublicKeyInfo
    ).decode("ascii")


def private_key_pem(key: RSAPrivateKey) -> str:
    return key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    ).decode("ascii")


def load_public_key(pem: str) -> RSAPublicKey:
    key = serialization.load_pem_public_key(pem.encode("ascii"))
    if not isinstance(key, RSAPublicKey):
        raise ValueError("expected an RSA public key")
    return key


def load_private_key(pem: str) -> RSAPrivateKey:
    key = serialization.load_pem_private_key(pem.encode("ascii"), password=None)
    if not isinstance(key, RSAPrivateKey):
        raise ValueError("expected an RSA private key")
    return key
