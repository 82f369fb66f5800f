"""End-to-end TLS test: a real uvicorn server with a self-signed certificate,
a client pinning that certificate, and a full decrypt roundtrip over HTTPS."""

from __future__ import annotations

import socket
import ssl
import threading
import time

import pytest
import uvicorn

from ssiot import envelope
from ssiot.envelope import generate_data_key, wrap_data_key
from ssiot.kms import KeyManagementService, KmsClient, KmsConfig
from ssiot.kms.api import create_app
from ssiot.kms.tls import generate_self_signed


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def tls_server(tmp_path_factory):
    service = KeyManagementService(KmsConfig(kms_id="kms-tls", simulated_response_latency_ms=0))
    cert, key = generate_self_signed("127.0.0.1", tmp_path_factory.mktemp("tls"))
    port = _free_port()
    config = uvicorn.Config(
        create_app(service, real_latency=False),
        host="127.0.0.1",
        port=port,
        ssl_certfile=str(cert),
        ssl_keyfile=str(key),
        log_level="error",
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.05)
    yield service, f"https://127.0.0.1:{port}", str(cert)
    server.should_exit = True
    thread.join(timeout=5)


def test_tls_decrypt_roundtrip(tls_server, app_keys):
    service, url, cert = tls_server
    with KmsClient(url, verify=cert) as client:
        kms_id, pem = client.fetch_public_key()
        assert kms_id == "kms-tls"
        client.register_app(
            app_keys.app_id,
            envelope.public_key_pem(app_keys.public_key),
            envelope.private_key_pem(app_keys.private_key),
        )
        key = generate_data_key()
        wrapped = wrap_data_key(key, app_keys, envelope.load_public_key(pem), kms_id)
        out = client.decrypt_data_key(app_keys.app_id, "req-tls", wrapped)
        assert out.key_bytes == key.key_bytes


def test_server_requires_modern_tls(tls_server):
    _, url, cert = tls_server
    host, port = url.removeprefix("https://").split(":")
    context = ssl.create_default_context(cafile=cert)
    with socket.create_connection((host, int(port)), timeout=5) as raw:
        with context.wrap_socket(raw, server_hostname=host) as tls_sock:
            assert tls_sock.version() in {"TLSv1.2", "TLSv1.3"}
