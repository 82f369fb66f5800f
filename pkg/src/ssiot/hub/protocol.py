"""Client side of the invocation protocol.

For each request the hub generates a fresh data key, seals the payload to
the app under that key, and double-wraps the key for the key service. The
data key is retained locally to open the sealed result when it returns. The
same preparation runs whether the request is served remotely or locally:
key-service-mediated access control applies either way.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.hazmat.primitives.asymmetric.rsa import RSAPublicKey

from ..envelope import (
    AppKeyPair,
    DataKey,
    SealedData,
    WrappedPayload,
    generate_data_key,
    open_result,
    seal_data,
    wrap_data_key,
)


@dataclass(frozen=True)
class PreparedInvocation:
    payload: WrappedPayload
    data_key: DataKey


def prepare_invocation(
    request_id: str,
    plaintext: bytes,
    app_keys: AppKeyPair,
    kms_public: RSAPublicKey,
    kms_id: str,
    *,
    max_payload: int | None = None,
) -> PreparedInvocation:
    """Fresh data key, sealed payload, wrapped key: everything that leaves
    the hub for one invocation."""
    data_key = generate_data_key()
    kwargs = {} if max_payload is None else {"max_payload": max_payload}
    sealed = seal_data(plaintext, app_keys.public_key, data_key, **kwargs)
    wrapped = wrap_data_key(data_key, app_keys, kms_public, kms_id)
    payload = WrappedPayload(
        app_id=app_keys.app_id,
        request_id=request_id,
        encrypted_data=sealed,
        encrypted_key=wrapped,
    )
    return PreparedInvocation(payload=payload, data_key=data_key)


def open_invocation_result(sealed: SealedData, prepared: PreparedInvocation) -> bytes:
    """Open a sealed result with the request's own data key."""
    return open_result(sealed, prepared.data_key)
