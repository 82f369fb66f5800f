"""Client-side access to a key service.

Two interchangeable channels: an in-process one (virtual-time benchmarks,
unit tests) and an HTTPS one (real deployments, self-signed cert pinned via
``verify``). Both raise :class:`KmsDenied` on denials so callers never
special-case the transport.
"""

from __future__ import annotations

from typing import Any, Optional, Protocol

import httpx

from ..canonical import b64decode
from ..envelope import DataKey, WrappedKey
from ..envelope.wire import wrapped_key_to_dict
from .records import Decision
from .service import KeyManagementService, KmsDenied, KmsError


class KmsChannel(Protocol):
    """What a runtime needs from the key service."""

    latency_ms: float

    def fetch_public_key(self) -> tuple[str, str]: ...

    def decrypt_data_key(self, app_id: str, request_id: str, wrapped: WrappedKey) -> DataKey: ...


class InProcessKmsChannel:
    """Direct calls against a service object. The configured response latency
    is exposed for the virtual clock instead of being slept."""

    def __init__(self, service: KeyManagementService) -> None:
        self._service = service
        self.latency_ms = service.config.simulated_response_latency_ms

    @property
    def service(self) -> KeyManagementService:
        return self._service

    def fetch_public_key(self) -> tuple[str, str]:
        return self._service.get_public_key()

    def decrypt_data_key(self, app_id: str, request_id: str, wrapped: WrappedKey) -> DataKey:
        return self._service.decrypt_data_key(app_id, request_id, wrapped)


class KmsClient:
    """HTTP(S) channel speaking the /v1 REST surface."""

    def __init__(
        self,
        base_url: str,
        *,
        verify: Any = True,
        timeout: float = 10.0,
        http_client: Optional[httpx.Client] = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.latency_ms = 0.0  # real channel: latency is actual, not modeled
        self._http = http_client if http_client is not None else httpx.Client(
            base_url=self.base_url, timeout=timeout, verify=verify
        )

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "KmsClient":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    def fetch_public_key(self) -> tuple[str, str]:
        resp = self._http.get("/v1/public-key")
        resp.raise_for_status()
        body = resp.json()
        return body["kms_id"], body["public_key_pem"]

    def register_app(self, app_id: str, public_key_pem: str, private_key_pem: str) -> dict[str, Any]:
        resp = self._http.post(
            "/v1/apps",
            json={"app_id": app_id, "public_key_pem": public_key_pem, "private_key_pem": private_key_pem},
        )
        if resp.status_code == 409:
            raise KmsError(f"active registration exists for {app_id}")
        resp.raise_for_status()
        return resp.json()

    def decrypt_data_key(self, app_id: str, request_id: str, wrapped: WrappedKey) -> DataKey:
        resp = self._http.post(
            "/v1/decrypt",
            json={"app_id": app_id, "request_id": request_id, "wrapped_key": wrapped_key_to_dict(wrapped)},
        )
        if resp.status_code == 403:
            detail = resp.json().get("detail", {})
            raise KmsDenied(Decision(detail.get("decision", "DeniedCryptoError")), request_id)
        resp.raise_for_status()
        return DataKey(key_bytes=b64decode(resp.json()["data_key"]))

    def revoke_app(self, app_id: str) -> None:
        resp = self._http.post(f"/v1/apps/{app_id}/revoke")
        resp.raise_for_status()

    def query_audit(self, **filters: Any) -> list[dict[str, Any]]:
        params = {k: v for k, v in filters.items() if v is not None}
        resp = self._http.get("/v1/audit", params=params)
        resp.raise_for_status()
        return resp.json()["records"]
