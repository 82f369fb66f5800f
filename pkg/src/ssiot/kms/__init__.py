"""Key management service: registrations, per-request key release, audit."""

from .client import InProcessKmsChannel, KmsChannel, KmsClient
from .records import (
    KMS_LATENCY_CLOUD_MS,
    KMS_LATENCY_HUB_LOCAL_MS,
    KMS_LATENCY_PRESETS,
    AccessRecord,
    AppRegistration,
    Decision,
    KmsConfig,
    RegistrationStatus,
)
from .service import (
    DuplicateRegistration,
    KeyManagementService,
    KmsDenied,
    KmsError,
    UnknownApp,
)
from .store import KmsStore

__all__ = [
    "AccessRecord",
    "AppRegistration",
    "Decision",
    "DuplicateRegistration",
    "InProcessKmsChannel",
    "KMS_LATENCY_CLOUD_MS",
    "KMS_LATENCY_HUB_LOCAL_MS",
    "KMS_LATENCY_PRESETS",
    "KeyManagementService",
    "KmsChannel",
    "KmsClient",
    "KmsConfig",
    "KmsDenied",
    "KmsError",
    "KmsStore",
    "RegistrationStatus",
    "UnknownApp",
]
