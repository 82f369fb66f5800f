"""Local emulator of a pay-per-invocation serverless platform.

Deployment creates functions with zero live instances; the first invocation
(and any invocation finding no idle warm instance) spawns a cold instance and
pays its initialization latency. Warm instances serve one request at a time
and expire after the idle threshold. Every invocation runs the remote
runtime: fetch the data key from the key service, open the payload, execute
the app behavior inside a capability sandbox, seal the result, and meter the
billed GB-seconds.

Time is virtual: callers pass ``now`` and get completion times back, so
benchmarks are deterministic. Everything the platform itself would see
(payloads in, results out) is appended to ``platform_trace`` as raw bytes;
tests assert no plaintext ever appears there.
"""

from __future__ import annotations

import enum
import json
import logging
import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Optional

from ..envelope import open_data, seal_result
from ..envelope.keys import load_private_key
from ..envelope.sealing import SealedData
from ..envelope.wire import WrappedPayload, payload_to_wire, sealed_to_wire
from ..kms.client import KmsChannel
from ..kms.service import KmsDenied
from .costs import CostMeter, noop_billed_gbs
from .profiles import DEFAULT_PROFILES, MAX_MEMORY_GB, WorkloadProfile
from .sandbox import NativeFunctionRegistry, Sandbox, SandboxViolation

logger = logging.getLogger(__name__)

IDLE_THRESHOLD_MS = 26 * 60_000.0  # observed platform idle expiry
NOOP_EXEC_MS = 10.0

DEFAULT_STUB_RESULT = json.dumps({"label": "person", "score": 0.9}).encode()


class FaasError(Exception):
    """Base emulator error."""


class UnknownFunction(FaasError):
    pass


class DuplicateFunction(FaasError):
    pass


class CapacityExceeded(FaasError):
    pass


class InstanceState(enum.Enum):
    COLD = "Cold"
    INITIALIZING = "Initializing"
    WARM = "Warm"
    EXPIRED = "Expired"


_VALID_TRANSITIONS = {
    InstanceState.COLD: {InstanceState.INITIALIZING},
    InstanceState.INITIALIZING: {InstanceState.WARM},
    InstanceState.WARM: {InstanceState.EXPIRED},
    InstanceState.EXPIRED: set(),
}


@dataclass
class FunctionInstance:
    instance_id: str
    function_id: str
    state: InstanceState = InstanceState.COLD
    last_invoked_at: float = 0.0
    busy_until: float = 0.0
    history: list[InstanceState] = field(default_factory=lambda: [InstanceState.COLD])

    def transition(self, new_state: InstanceState) -> None:
        if new_state not in _VALID_TRANSITIONS[self.state]:
            raise FaasError(f"illegal transition {self.state.value} -> {new_state.value}")
        self.state = new_state
        self.history.append(new_state)

    def busy(self, now: float) -> bool:
        return self.busy_until > now

    def idle_warm(self, now: float) -> bool:
        return self.state is InstanceState.WARM and not self.busy(now)


@dataclass(frozen=True)
class FunctionPackage:
    """Deployable unit: behavior reference, the key-service identity, and the
    app private key. Never any other key material."""

    function_id: str
    app_id: str
    profile: WorkloadProfile
    kms_id: str
    app_private_key_pem: str
    memory_gb: float = MAX_MEMORY_GB
    native_behavior: Optional[str] = None  # name in the native registry
    stub_result: bytes = DEFAULT_STUB_RESULT

    def __post_init__(self) -> None:
        if self.memory_gb > MAX_MEMORY_GB:
            raise ValueError(f"memory_gb {self.memory_gb} exceeds platform ceiling {MAX_MEMORY_GB}")
        if self.memory_gb <= 0:
            raise ValueError("memory_gb must be positive")


@dataclass(frozen=True)
class InvocationRecord:
    invocation_id: str
    function_id: str
    request_id: str
    served_state: str  # "Cold" | "Warm"
    instance_id: str
    started_at: float
    completed_at: float
    e2e_ms: float
    billed_gbs: Decimal
    cost_usd: Decimal
    ok: bool
    response: Optional[SealedData] = None
    error: Optional[str] = None
    noop: bool = False


class _Function:
    def __init__(self, package: FunctionPackage) -> None:
        self.package = package
        self.instances: list[FunctionInstance] = []
        self.instance_counter = 0

    def new_instance(self) -> FunctionInstance:
        self.instance_counter += 1
        instance = FunctionInstance(
            instance_id=f"{self.package.function_id}-i{self.instance_counter:04d}",
            function_id=self.package.function_id,
        )
        self.instances.append(instance)
        return instance

    def live_count(self) -> int:
        return sum(1 for i in self.instances if i.state is not InstanceState.EXPIRED)


class FaasEmulator:
    def __init__(
        self,
        kms_channel: KmsChannel,
        *,
        idle_threshold_ms: float = IDLE_THRESHOLD_MS,
        jitter_pct: float = 0.02,
        seed: int = 0,
        max_instances: Optional[int] = None,
        kms_endpoint: str = "kms",
    ) -> None:
        self.kms = kms_channel
        self.idle_threshold_ms = idle_threshold_ms
        self.jitter_pct = jitter_pct
        self.max_instances = max_instances
        self.kms_endpoint = kms_endpoint
        self.cost_meter = CostMeter()
        self.natives = NativeFunctionRegistry()
        self.platform_trace: list[dict[str, Any]] = []
        self._functions: dict[str, _Function] = {}
        self._rng = random.Random(seed)
        self._invocation_counter = 0

    # -- deployment ----------------------------------------------------

    def deploy(self, package: FunctionPackage) -> str:
        if package.function_id in self._functions:
            raise DuplicateFunction(package.function_id)
        if package.native_behavior is not None and package.native_behavior not in self.natives:
            raise FaasError(f"native behavior {package.native_behavior!r} is not registered")
        self._functions[package.function_id] = _Function(package)
        logger.info("deployed %s (app %s)", package.function_id, package.app_id)
        return package.function_id

    def register_native_function(self, name: str, behavior) -> None:
        self.natives.register(name, behavior)

    def function_ids(self) -> list[str]:
        return list(self._functions)

    def instances_of(self, function_id: str) -> list[FunctionInstance]:
        return list(self._fn(function_id).instances)

    def _fn(self, function_id: str) -> _Function:
        try:
            return self._functions[function_id]
        except KeyError:
            raise UnknownFunction(function_id)

    # -- lifecycle -----------------------------------------------------

    def expire_idle(self, now: float) -> int:
        """Expire every idle warm instance past the idle threshold."""
        expired = 0
        for fn in self._functions.values():
            expired += self._expire_fn(fn, now)
        return expired

    def _expire_fn(self, fn: _Function, now: float) -> int:
        expired = 0
        for instance in fn.instances:
            if instance.idle_warm(now) and now - instance.last_invoked_at > self.idle_threshold_ms:
                instance.transition(InstanceState.EXPIRED)
                expired += 1
        return expired

    def warm_count(self, function_id: str, now: float) -> int:
        fn = self._fn(function_id)
        self._expire_fn(fn, now)
        return sum(1 for i in fn.instances if i.state is InstanceState.WARM)

    def _acquire_instance(self, fn: _Function, now: float) -> tuple[FunctionInstance, bool]:
        """Pick an idle warm instance, else spawn a cold one. Returns
        (instance, is_cold)."""
        self._expire_fn(fn, now)
        idle = [i for i in fn.instances if i.idle_warm(now)]
        if idle:
            # most-recently-used first: keeps the pool small under load
            idle.sort(key=lambda i: (-i.last_invoked_at, i.instance_id))
            return idle[0], False
        if self.max_instances is not None and fn.live_count() >= self.max_instances:
            raise CapacityExceeded(fn.package.function_id)
        return fn.new_instance(), True

    def _jitter(self, value_ms: float) -> float:
        if self.jitter_pct <= 0:
            return value_ms
        return value_ms * (1.0 + self._rng.uniform(-self.jitter_pct, self.jitter_pct))

    def _next_invocation_id(self, function_id: str) -> str:
        self._invocation_counter += 1
        return f"inv-{self._invocation_counter:06d}-{function_id}"

    # -- invocation ----------------------------------------------------

    def invoke(self, function_id: str, payload: WrappedPayload, now: float) -> InvocationRecord:
        """Run the remote runtime for one request at virtual time ``now``."""
        fn = self._fn(function_id)
        package = fn.package
        profile = package.profile
        self.platform_trace.append(
            {
                "kind": "request",
                "function_id": function_id,
                "request_id": payload.request_id,
                "bytes": payload_to_wire(payload),
            }
        )

        instance, is_cold = self._acquire_instance(fn, now)
        t = now
        if is_cold:
            instance.transition(InstanceState.INITIALIZING)
            t += self._jitter(profile.cold_init_ms)

        billed = Decimal(str(profile.billed_cold_gbs if is_cold else profile.billed_warm_gbs))
        invocation_id = self._next_invocation_id(function_id)

        response: Optional[SealedData] = None
        error: Optional[str] = None
        violation = False
        # the instance must reach the key service before it can read anything
        t += self.kms.latency_ms
        try:
            data_key = self.kms.decrypt_data_key(payload.app_id, payload.request_id, payload.encrypted_key)
        except KmsDenied as denial:
            error = f"kms-denied:{denial.decision.value}"
            data_key = None

        if data_key is not None:
            try:
                plaintext = open_data(
                    payload.encrypted_data, data_key, load_private_key(package.app_private_key_pem)
                )
            except Exception as exc:
                error = f"open-failed:{type(exc).__name__}"
                plaintext = None
            if plaintext is not None:
                try:
                    result = self._execute(package, plaintext)
                except SandboxViolation as exc:
                    error = f"sandbox-violation:{exc}"
                    violation = True
                    result = None
                if result is not None:
                    response = seal_result(result, data_key)

        t += self._jitter(profile.warm_exec_ms)
        entry = self.cost_meter.charge(invocation_id, billed)

        if violation:
            # terminated: the platform reclaims the instance
            if instance.state is InstanceState.INITIALIZING:
                instance.transition(InstanceState.WARM)
            instance.transition(InstanceState.EXPIRED)
        else:
            if instance.state is InstanceState.INITIALIZING:
                instance.transition(InstanceState.WARM)
            instance.last_invoked_at = t
            instance.busy_until = t

        if response is not None:
            self.platform_trace.append(
                {
                    "kind": "response",
                    "function_id": function_id,
                    "request_id": payload.request_id,
                    "bytes": sealed_to_wire(response),
                }
            )

        return InvocationRecord(
            invocation_id=invocation_id,
            function_id=function_id,
            request_id=payload.request_id,
            served_state="Cold" if is_cold else "Warm",
            instance_id=instance.instance_id,
            started_at=now,
            completed_at=t,
            e2e_ms=t - now,
            billed_gbs=entry.billed_gbs,
            cost_usd=entry.cost_usd,
            ok=error is None,
            response=response,
            error=error,
        )

    def invoke_noop(self, function_id: str, now: float) -> InvocationRecord:
        """Keep-alive ping: no payload, no key fetch, smallest billable unit."""
        fn = self._fn(function_id)
        package = fn.package
        instance, is_cold = self._acquire_instance(fn, now)
        t = now
        if is_cold:
            instance.transition(InstanceState.INITIALIZING)
            t += self._jitter(package.profile.cold_init_ms)
        t += NOOP_EXEC_MS
        invocation_id = self._next_invocation_id(function_id)
        entry = self.cost_meter.charge(invocation_id, noop_billed_gbs(package.memory_gb))
        if instance.state is InstanceState.INITIALIZING:
            instance.transition(InstanceState.WARM)
        instance.last_invoked_at = t
        instance.busy_until = t
        return InvocationRecord(
            invocation_id=invocation_id,
            function_id=function_id,
            request_id=f"keepalive-{invocation_id}",
            served_state="Cold" if is_cold else "Warm",
            instance_id=instance.instance_id,
            started_at=now,
            completed_at=t,
            e2e_ms=t - now,
            billed_gbs=entry.billed_gbs,
            cost_usd=entry.cost_usd,
            ok=True,
            noop=True,
        )

    def _execute(self, package: FunctionPackage, plaintext: bytes) -> bytes:
        if package.native_behavior is not None:
            behavior = self.natives.get(package.native_behavior)
            assert behavior is not None  # checked at deploy
            sandbox = Sandbox(input_bytes=plaintext, kms_endpoint=self.kms_endpoint)
            return behavior(sandbox)
        return package.stub_result

    # -- inspection ------------------------------------------------------

    def trace_blobs(self) -> list[bytes]:
        return [entry["bytes"] for entry in self.platform_trace]
