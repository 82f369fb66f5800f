"""Serverless platform emulator: lifecycle, sandboxing, cost metering."""

from .costs import (
    GBS_RATE_USD,
    NOOP_BILLED_SECONDS,
    REQUEST_RATE_USD,
    CostMeter,
    LedgerEntry,
    invocation_cost,
    noop_billed_gbs,
    recompute_total,
    requests_per_dollar,
)
from .emulator import (
    IDLE_THRESHOLD_MS,
    CapacityExceeded,
    DuplicateFunction,
    FaasEmulator,
    FaasError,
    FunctionInstance,
    FunctionPackage,
    InstanceState,
    InvocationRecord,
    UnknownFunction,
)
from .profiles import (
    CALIBRATION_NOTE,
    DEFAULT_PROFILES,
    MAX_MEMORY_GB,
    NETWORK_OVERHEAD_MS,
    WorkloadProfile,
    get_profile,
)
from .sandbox import NativeFunctionRegistry, Sandbox, SandboxViolation, Scratch

__all__ = [
    "CALIBRATION_NOTE",
    "CapacityExceeded",
    "CostMeter",
    "DEFAULT_PROFILES",
    "DuplicateFunction",
    "FaasEmulator",
    "FaasError",
    "FunctionInstance",
    "FunctionPackage",
    "GBS_RATE_USD",
    "IDLE_THRESHOLD_MS",
    "InstanceState",
    "InvocationRecord",
    "LedgerEntry",
    "MAX_MEMORY_GB",
    "NETWORK_OVERHEAD_MS",
    "NOOP_BILLED_SECONDS",
    "NativeFunctionRegistry",
    "REQUEST_RATE_USD",
    "Sandbox",
    "SandboxViolation",
    "Scratch",
    "UnknownFunction",
    "WorkloadProfile",
    "get_profile",
    "invocation_cost",
    "noop_billed_gbs",
    "recompute_total",
    "requests_per_dollar",
]
