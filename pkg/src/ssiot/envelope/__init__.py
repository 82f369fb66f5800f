"""Pure cryptographic core: key generation, envelope sealing, key wrapping."""

from .errors import (
    AuthenticationError,
    EnvelopeError,
    InnerDecryptError,
    OuterDecryptError,
    PayloadTooLarge,
    SignatureError,
)
from .keys import (
    DATA_KEY_BYTES,
    AppKeyPair,
    DataKey,
    KmsKeyPair,
    generate_app_keypair,
    generate_data_key,
    generate_kms_keypair,
    load_private_key,
    load_public_key,
    private_key_pem,
    public_key_pem,
)
from .sealing import (
    MAX_PAYLOAD_BYTES,
    SealedData,
    WrappedKey,
    kms_unwrap,
    open_data,
    open_result,
    seal_data,
    seal_result,
    wrap_data_key,
)
from .wire import (
    WrappedPayload,
    payload_from_dict,
    payload_to_dict,
    payload_to_wire,
    sealed_from_dict,
    sealed_to_dict,
    sealed_to_wire,
    wrapped_key_from_dict,
    wrapped_key_to_dict,
    wrapped_key_to_wire,
)

__all__ = [
    "AppKeyPair",
    "AuthenticationError",
    "DATA_KEY_BYTES",
    "DataKey",
    "EnvelopeError",
    "InnerDecryptError",
    "KmsKeyPair",
    "MAX_PAYLOAD_BYTES",
    "OuterDecryptError",
    "PayloadTooLarge",
    "SealedData",
    "SignatureError",
    "WrappedKey",
    "WrappedPayload",
    "generate_app_keypair",
    "generate_data_key",
    "generate_kms_keypair",
    "kms_unwrap",
    "load_private_key",
    "load_public_key",
    "open_data",
    "open_result",
    "payload_from_dict",
    "payload_to_dict",
    "payload_to_wire",
    "private_key_pem",
    "public_key_pem",
    "seal_data",
    "seal_result",
    "sealed_from_dict",
    "sealed_to_dict",
    "sealed_to_wire",
    "wrap_data_key",
    "wrapped_key_from_dict",
    "wrapped_key_to_dict",
    "wrapped_key_to_wire",
]
