"""The trusted key management service.

Holds the service keypair, stores app registrations, decrypts per-request
data keys under access control, appends one audit record per decrypt call,
and honors revocation. Registration stores the full app key material: the
public half for origin-signature verification and the private half so the
service can fully unwrap and return the data key in plaintext over the
caller's secure channel.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Callable, Optional

from .. import envelope
from ..canonical import digest
from ..envelope import DataKey, KmsKeyPair, WrappedKey
from ..envelope.wire import wrapped_key_to_wire
from .records import AccessRecord, AppRegistration, Decision, KmsConfig, RegistrationStatus
from .store import KmsStore

logger = logging.getLogger(__name__)


class KmsError(Exception):
    """Base class for service-level errors."""


class DuplicateRegistration(KmsError):
    """An Active registration already exists for this app id."""


class UnknownApp(KmsError):
    """No registration exists for this app id."""


class KmsDenied(KmsError):
    """A decrypt request was denied; carries the audited decision."""

    def __init__(self, decision: Decision, request_id: str) -> None:
        super().__init__(f"{decision.value} (request {request_id})")
        self.decision = decision
        self.request_id = request_id


class KeyManagementService:
    def __init__(
        self,
        config: Optional[KmsConfig] = None,
        *,
        store: Optional[KmsStore] = None,
        clock: Optional[Callable[[], float]] = None,
    ) -> None:
        self.config = config or KmsConfig()
        self._store = store if store is not None else KmsStore(self.config.store_path)
        self._clock = clock or time.time
        self._lock = threading.Lock()
        self._registrations: dict[str, AppRegistration] = {}
        self._audit: list[AccessRecord] = []
        self._keypair: Optional[KmsKeyPair] = None
        self._replay()
        if self._keypair is None:
            self._keypair = envelope.generate_kms_keypair(self.config.kms_id)
            self._store.append(
                {
                    "type": "identity",
                    "kms_id": self._keypair.kms_id,
                    "public_key_pem": envelope.public_key_pem(self._keypair.public_key),
                    "private_key_pem": envelope.private_key_pem(self._keypair.private_key),
                }
            )

    def _replay(self) -> None:
        for event in self._store.events():
            kind = event["type"]
            if kind == "identity":
                self._keypair = KmsKeyPair(
                    kms_id=event["kms_id"],
                    public_key=envelope.load_public_key(event["public_key_pem"]),
                    private_key=envelope.load_private_key(event["private_key_pem"]),
                )
            elif kind == "register":
                self._registrations[event["app_id"]] = AppRegistration.from_dict(event["registration"])
            elif kind == "revoke":
                self._registrations[event["app_id"]].status = RegistrationStatus.REVOKED
            elif kind == "access":
                self._audit.append(AccessRecord.from_dict(event["record"]))

    # -- identity ------------------------------------------------------

    @property
    def kms_id(self) -> str:
        assert self._keypair is not None
        return self._keypair.kms_id

    @property
    def keypair(self) -> KmsKeyPair:
        assert self._keypair is not None
        return self._keypair

    def get_public_key(self) -> tuple[str, str]:
        """Return (kms_id, public key PEM); stable for the service lifetime."""
        return self.kms_id, envelope.public_key_pem(self.keypair.public_key)

    # -- registration --------------------------------------------------

    def register_app(self, app_id: str, public_key_pem: str, private_key_pem: str) -> AppRegistration:
        if not app_id:
            raise KmsError("app_id must be nonempty")
        envelope.load_public_key(public_key_pem)
        envelope.load_private_key(private_key_pem)
        with self._lock:
            existing = self._registrations.get(app_id)
            if existing is not None and existing.status is RegistrationStatus.ACTIVE:
                raise DuplicateRegistration(app_id)
            registration = AppRegistration(
                app_id=app_id,
                public_key_pem=public_key_pem,
                private_key_pem=private_key_pem,
                registered_at=self._clock(),
            )
            self._registrations[app_id] = registration
            self._store.append({"type": "register", "app_id": app_id, "registration": registration.to_dict()})
        logger.info("registered app %s", app_id)
        return registration

    def revoke_app(self, app_id: str) -> None:
        with self._lock:
            registration = self._registrations.get(app_id)
            if registration is None or registration.status is not RegistrationStatus.ACTIVE:
                raise UnknownApp(app_id)
            registration.status = RegistrationStatus.REVOKED
            self._store.append({"type": "revoke", "app_id": app_id})
        logger.info("revoked app %s", app_id)

    def registration_status(self, app_id: str) -> Optional[RegistrationStatus]:
        with self._lock:
            registration = self._registrations.get(app_id)
            return registration.status if registration else None

    # -- decryption ----------------------------------------------------

    def decrypt_data_key(self, app_id: str, request_id: str, wrapped: WrappedKey) -> DataKey:
        """Unwrap a data key under access control.

        Every call appends exactly one audit record. Denials raise
        :class:`KmsDenied` with the recorded decision. The plaintext key
        appears only in the return value, never in the store.
        """
        with self._lock:
            decision, key = self._decide(app_id, wrapped)
            record = AccessRecord(
                seq=len(self._audit) + 1,
                timestamp=self._clock(),
                app_id=app_id,
                request_id=request_id,
                decision=decision,
                wrapped_key_digest=digest(wrapped_key_to_wire(wrapped)),
            )
            self._audit.append(record)
            self._store.append({"type": "access", "record": record.to_dict()})
        if key is None:
            raise KmsDenied(decision, request_id)
        return key

    def _decide(self, app_id: str, wrapped: WrappedKey) -> tuple[Decision, Optional[DataKey]]:
        registration = self._registrations.get(app_id)
        if registration is None:
            return Decision.DENIED_UNREGISTERED, None
        if registration.status is RegistrationStatus.REVOKED:
            return Decision.DENIED_REVOKED, None
        if wrapped.signer_app_id != app_id:
            return Decision.DENIED_BAD_SIGNATURE, None
        try:
            key = envelope.kms_unwrap(
                wrapped,
                self.keypair.private_key,
                envelope.load_public_key(registration.public_key_pem),
                envelope.load_private_key(registration.private_key_pem),
            )
        except envelope.SignatureError:
            return Decision.DENIED_BAD_SIGNATURE, None
        except envelope.EnvelopeError:
            return Decision.DENIED_CRYPTO_ERROR, None
        return Decision.GRANTED, key

    # -- audit ---------------------------------------------------------

    def query_audit(
        self,
        app_id: Optional[str] = None,
        decision: Optional[Decision] = None,
        from_ts: Optional[float] = None,
        to_ts: Optional[float] = None,
    ) -> list[AccessRecord]:
        """Audit records in sequence order, filters applied conjunctively."""
        if from_ts is not None and to_ts is not None and from_ts > to_ts:
            raise ValueError("malformed time range: from > to")
        with self._lock:
            records = list(self._audit)
        if app_id is not None:
            records = [r for r in records if r.app_id == app_id]
        if decision is not None:
            records = [r for r in records if r.decision is decision]
        if from_ts is not None:
            records = [r for r in records if r.timestamp >= from_ts]
        if to_ts is not None:
            records = [r for r in records if r.timestamp <= to_ts]
        return records

    @property
    def audit_length(self) -> int:
        with self._lock:
            return len(self._audit)
