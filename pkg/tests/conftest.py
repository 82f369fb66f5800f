"""Shared fixtures. RSA generation is the slow part of the suite, so a small
pool of keypairs is generated once per session and reused everywhere fresh
key *material* is not the property under test."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from ssiot import envelope
from ssiot.envelope import (
    AppKeyPair,
    KmsKeyPair,
    generate_app_keypair,
    generate_kms_keypair,
)
from ssiot.faas import DEFAULT_PROFILES, FaasEmulator, FunctionPackage
from ssiot.hub import DeployedApp
from ssiot.kms import InProcessKmsChannel, KeyManagementService, KmsConfig


@pytest.fixture(scope="session")
def app_keys() -> AppKeyPair:
    return generate_app_keypair("app-alpha")


@pytest.fixture(scope="session")
def other_app_keys() -> AppKeyPair:
    return generate_app_keypair("app-beta")


@pytest.fixture(scope="session")
def kms_keys() -> KmsKeyPair:
    return generate_kms_keypair("kms-main")


@pytest.fixture(scope="session")
def other_kms_keys() -> KmsKeyPair:
    return generate_kms_keypair("kms-other")


@dataclass
class World:
    """A provisioned desk-scale deployment: key service, emulator, apps."""

    kms: KeyManagementService
    emulator: FaasEmulator
    apps: dict[str, DeployedApp]


@pytest.fixture()
def make_world(app_keys, other_app_keys):
    """Build a registered-and-deployed world from (app_id, profile) pairs.

    App ids must come from the session key pool to avoid fresh RSA keygen.
    """
    pool = {app_keys.app_id: app_keys, other_app_keys.app_id: other_app_keys}

    def build(
        app_profiles: list[tuple[str, str]],
        *,
        kms_latency_ms: float = 206.0,
        jitter_pct: float = 0.0,
        seed: int = 0,
        stub_result: bytes | None = None,
        native_behavior: str | None = None,
        natives: dict | None = None,
    ) -> World:
        service = KeyManagementService(
            KmsConfig(kms_id="kms-world", simulated_response_latency_ms=kms_latency_ms)
        )
        emulator = FaasEmulator(InProcessKmsChannel(service), jitter_pct=jitter_pct, seed=seed)
        for name, behavior in (natives or {}).items():
            emulator.register_native_function(name, behavior)
        apps: dict[str, DeployedApp] = {}
        for app_id, profile_name in app_profiles:
            keys = pool[app_id]
            service.register_app(
                app_id,
                envelope.public_key_pem(keys.public_key),
                envelope.private_key_pem(keys.private_key),
            )
            profile = DEFAULT_PROFILES[profile_name]
            function_id = f"fn-{app_id}"
            package_kwargs = {}
            if stub_result is not None:
                package_kwargs["stub_result"] = stub_result
            emulator.deploy(
                FunctionPackage(
                    function_id=function_id,
                    app_id=app_id,
                    profile=profile,
                    kms_id=service.kms_id,
                    app_private_key_pem=envelope.private_key_pem(keys.private_key),
                    native_behavior=native_behavior,
                    **package_kwargs,
                )
            )
            apps[app_id] = DeployedApp(
                app_id=app_id,
                function_id=function_id,
                keypair=keys,
                profile=profile,
                native_behavior=native_behavior,
                stub_result=stub_result if stub_result is not None else b'{"label":"person","score":0.9}',
            )
        return World(kms=service, emulator=emulator, apps=apps)

    return build
