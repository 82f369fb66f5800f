"""Hybrid envelope encryption for offloaded invocations.

Every request gets a fresh symmetric data key K. Payload data is first
encrypted to the app (so only the holder of the app private key can read it)
and that blob is then encrypted under K. K itself travels double-wrapped:
encrypted to the app, signed by the hub, and encrypted to the key service,
which alone decides whether to release it. Results travel back sealed under
the same K.

The app layer uses hybrid encryption internally (an RSA-wrapped session key
plus AES-GCM) so multi-megabyte payloads stay cheap; externally it behaves as
plain public-key encryption to the app.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from secrets import token_bytes

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import padding
from cryptography.hazmat.primitives.asymmetric.rsa import RSAPrivateKey, RSAPublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import (
    AuthenticationError,
    InnerDecryptError,
    OuterDecryptError,
    PayloadTooLarge,
    SignatureError,
)
from .keys import AppKeyPair, DataKey

MAX_PAYLOAD_BYTES = 5 * 1024 * 1024  # FaaS request bodies are size-limited
GCM_NONCE_BYTES = 12
GCM_TAG_BYTES = 16

_OAEP = padding.OAEP(
    mgf=padding.MGF1(algorithm=hashes.SHA256()), algorithm=hashes.SHA256(), label=None
)
_PSS = padding.PSS(mgf=padding.MGF1(hashes.SHA256()), salt_length=hashes.SHA256.digest_size)


@dataclass(frozen=True)
class SealedData:
    """An authenticated ciphertext. Opening with any wrong key, or after any
    bit flip, fails outright; corrupted plaintext is never returned."""

    ciphertext: bytes
    nonce: bytes
    auth_tag: bytes


@dataclass(frozen=True)
class WrappedKey:
    """The double-wrapped data key plus the hub's origin signature over the
    inner (app-layer) blob."""

    ciphertext: bytes
    signature: bytes
    signer_app_id: str
    kms_id: str


def _gcm_seal(key: bytes, plaintext: bytes) -> SealedData:
    nonce = token_bytes(GCM_NONCE_BYTES)
    sealed = AESGCM(key).encrypt(nonce, plaintext, None)
    return SealedData(ciphertext=sealed[:-GCM_TAG_BYTES], nonce=nonce, auth_tag=sealed[-GCM_TAG_BYTES:])


def _gcm_open(key: bytes, sealed: SealedData) -> bytes:
    try:
        return AESGCM(key).decrypt(sealed.nonce, sealed.ciphertext + sealed.auth_tag, None)
    except InvalidTag as exc:
        raise AuthenticationError("authenticated decryption failed") from exc


def _asym_encrypt(plaintext: bytes, public: RSAPublicKey) -> bytes:
    """Hybrid public-key encryption: RSA-OAEP-wrapped session key + AES-GCM."""
    session = token_bytes(32)
    wrapped = public.encrypt(session, _OAEP)
    nonce = token_bytes(GCM_NONCE_BYTES)
    body = AESGCM(session).encrypt(nonce, plaintext, None)
    return struct.pack(">H", len(wrapped)) + wrapped + nonce + body


def _asym_decrypt(blob: bytes, private: RSAPrivateKey) -> bytes:
    if len(blob) < 2:
        raise ValueError("truncated blob")
    (wrapped_len,) = struct.unpack(">H", blob[:2])
    wrapped = blob[2 : 2 + wrapped_len]
    nonce = blob[2 + wrapped_len : 2 + wrapped_len + GCM_NONCE_BYTES]
    body = blob[2 + wrapped_len + GCM_NONCE_BYTES :]
    if len(wrapped) != wrapped_len or len(nonce) != GCM_NONCE_BYTES or not body:
        raise ValueError("truncated blob")
    session = private.decrypt(wrapped, _OAEP)  # raises ValueError on wrong key
    return AESGCM(session).decrypt(nonce, body, None)


def _sign(data: bytes, private: RSAPrivateKey) -> bytes:
    return private.sign(data, _PSS, hashes.SHA256())


def _verify(signature: bytes, data: bytes, public: RSAPublicKey) -> None:
    try:
        public.verify(signature, data, _PSS, hashes.SHA256())
    except InvalidSignature as exc:
        raise SignatureError("origin signature did not verify") from exc


def seal_data(
    plaintext: bytes,
    app_public: RSAPublicKey,
    data_key: DataKey,
    *,
    max_payload: int = MAX_PAYLOAD_BYTES,
) -> SealedData:
    """Encrypt payload data to the app, then under the request data key.

    The result opens back to ``plaintext`` only for a holder of both the data
    key and the app private key.
    """
    if len(plaintext) > max_payload:
        raise PayloadTooLarge(f"payload of {len(plaintext)} bytes exceeds {max_payload}")
    inner = _asym_encrypt(plaintext, app_public)
    return _gcm_seal(data_key.key_bytes, inner)


def open_data(sealed: SealedData, data_key: DataKey, app_private: RSAPrivateKey) -> bytes:
    """Invert :func:`seal_data`. Raises :class:`AuthenticationError` if the
    data-key layer fails and :class:`InnerDecryptError` if the app layer does.
    """
    inner = _gcm_open(data_key.key_bytes, sealed)
    try:
        return _asym_decrypt(inner, app_private)
    except (ValueError, InvalidTag) as exc:
        raise InnerDecryptError("app layer did not open") from exc


def wrap_data_key(
    data_key: DataKey,
    app_keypair: AppKeyPair,
    kms_public: RSAPublicKey,
    kms_id: str = "",
) -> WrappedKey:
    """Wrap K for transit: encrypt to the app, sign the inner blob with the
    hub-held app private key, then encrypt the whole thing to the key service.
    """
    inner = _asym_encrypt(data_key.key_bytes, app_keypair.public_key)
    signature = _sign(inner, app_keypair.private_key)
    outer = _asym_encrypt(inner, kms_public)
    return WrappedKey(
        ciphertext=outer,
        signature=signature,
        signer_app_id=app_keypair.app_id,
        kms_id=kms_id,
    )


def kms_unwrap(
    wrapped: WrappedKey,
    kms_private: RSAPrivateKey,
    app_public: RSAPublicKey,
    app_private: RSAPrivateKey,
) -> DataKey:
    """Fully unwrap a data key at the key service.

    Succeeds iff the outer layer opens with the service private key, the hub
    signature verifies under the registered app public key, and the inner
    layer opens with the registered app private key. Each failure mode raises
    its own error type so access decisions can be audited precisely.
    """
    try:
        inner = _asym_decrypt(wrapped.ciphertext, kms_private)
    except (ValueError, InvalidTag, struct.error) as exc:
        raise OuterDecryptError("service layer did not open") from exc
    if not wrapped.signature:
        raise SignatureError("origin signature missing")
    _verify(wrapped.signature, inner, app_public)
    try:
        key_bytes = _asym_decrypt(inner, app_private)
    except (ValueError, InvalidTag, struct.error) as exc:
        raise InnerDecryptError("app layer did not open") from exc
    return DataKey(key_bytes=key_bytes)


def seal_result(result: bytes, data_key: DataKey, *, max_payload: int = MAX_PAYLOAD_BYTES) -> SealedData:
    """Seal a computed result under the request's own data key for the trip
    back to the hub. Symmetric-only; tamper-evident."""
    if len(result) > max_payload:
        raise PayloadTooLarge(f"result of {len(result)} bytes exceeds {max_payload}")
    return _gcm_seal(data_key.key_bytes, result)


def open_result(sealed: SealedData, data_key: DataKey) -> bytes:
    return _gcm_open(data_key.key_bytes, sealed)
