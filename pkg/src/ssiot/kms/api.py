"""REST surface of the key service.

    GET  /v1/public-key
    POST /v1/apps                    (register; payload carries the full pair)
    POST /v1/decrypt                 {app_id, request_id, wrapped_key}
    POST /v1/apps/{app_id}/revoke
    GET  /v1/audit?app_id=&decision=&from=&to=

Bodies use the canonical wire encoding. Denials map to 403 with the decision
name; the simulated response latency becomes a real wait here.
"""

from __future__ import annotations

import time
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from ..envelope import wrapped_key_from_dict
from .records import Decision
from .service import DuplicateRegistration, KeyManagementService, KmsDenied, UnknownApp


class RegisterRequest(BaseModel):
    app_id: str
    public_key_pem: str
    private_key_pem: str


class DecryptRequest(BaseModel):
    app_id: str
    request_id: str
    wrapped_key: dict[str, Any]


def create_app(service: KeyManagementService, *, real_latency: bool = True) -> FastAPI:
    app = FastAPI(title="ssiot-kms", version="1")

    def simulate_latency() -> None:
        if real_latency and service.config.simulated_response_latency_ms > 0:
            time.sleep(service.config.simulated_response_latency_ms / 1000.0)

    @app.get("/v1/public-key")
    def public_key() -> dict[str, str]:
        kms_id, pem = service.get_public_key()
        return {"kms_id": kms_id, "public_key_pem": pem}

    @app.post("/v1/apps", status_code=201)
    def register(req: RegisterRequest) -> dict[str, Any]:
        try:
            registration = service.register_app(req.app_id, req.public_key_pem, req.private_key_pem)
        except DuplicateRegistration:
            raise HTTPException(409, detail=f"active registration exists for {req.app_id}")
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc))
        return {
            "app_id": registration.app_id,
            "registered_at": registration.registered_at,
            "status": registration.status.value,
        }

    @app.post("/v1/decrypt")
    def decrypt(req: DecryptRequest) -> dict[str, str]:
        try:
            wrapped = wrapped_key_from_dict(req.wrapped_key)
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, detail=f"malformed wrapped key: {exc}")
        simulate_latency()
        try:
            key = service.decrypt_data_key(req.app_id, req.request_id, wrapped)
        except KmsDenied as denial:
            raise HTTPException(403, detail={"decision": denial.decision.value, "request_id": req.request_id})
        from ..canonical import b64encode

        return {"request_id": req.request_id, "data_key": b64encode(key.key_bytes)}

    @app.post("/v1/apps/{app_id}/revoke")
    def revoke(app_id: str) -> dict[str, str]:
        try:
            service.revoke_app(app_id)
        except UnknownApp:
            raise HTTPException(404, detail=f"no active registration for {app_id}")
        return {"app_id": app_id, "status": "Revoked"}

    @app.get("/v1/audit")
    def audit(
        app_id: Optional[str] = None,
        decision: Optional[str] = None,
        from_ts: Optional[float] = Query(default=None, alias="from"),
        to_ts: Optional[float] = Query(default=None, alias="to"),
    ) -> dict[str, Any]:
        try:
            parsed = Decision(decision) if decision else None
        except ValueError:
            raise HTTPException(422, detail=f"unknown decision {decision!r}")
        try:
            records = service.query_audit(app_id=app_id, decision=parsed, from_ts=from_ts, to_ts=to_ts)
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc))
        return {"records": [r.to_dict() for r in records]}

    return app
