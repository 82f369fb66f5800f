"""Envelope error taxonomy.

Decryption failures are three-valued (outer layer, inner layer, signature)
so the key service can audit the precise cause of every denial.
"""

from __future__ import annotations


class EnvelopeError(Exception):
    """Base class for all envelope failures."""


class PayloadTooLarge(EnvelopeError):
    """Plaintext exceeds the configured maximum payload size."""


class AuthenticationError(EnvelopeError):
    """Symmetric authenticated decryption failed (wrong key or tampering)."""


class OuterDecryptError(EnvelopeError):
    """The key-service layer of a wrapped blob would not open."""


class InnerDecryptError(EnvelopeError):
    """The app layer of a blob would not open (wrong app private key)."""


class SignatureError(EnvelopeError):
    """Origin signature missing or failed verification."""
