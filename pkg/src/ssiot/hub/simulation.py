"""Virtual-time hub runtime.

Device events are ingested into a bounded FIFO data queue; the allocator
drains it into local slots or remote invocations per policy; completions feed
the results path exactly once each. The loop is event-driven over a heap of
(time, seq) entries, so identical inputs replay to identical timelines.

All cryptography is real even though time is virtual: payloads are sealed,
keys wrapped and released by the key service, results opened. The virtual
clock only models *how long* those steps take on hub hardware.

Contention model (documented, not measured): all local admissions that happen
at one instant share the concurrency factor of the resulting occupancy, which
approximates a cohort running together on shared silicon.
"""

from __future__ import annotations

import heapq
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Callable, Optional

from ..clock import MS_PER_HOUR
from ..envelope import MAX_PAYLOAD_BYTES, AppKeyPair, open_data, open_result
from ..faas.costs import invocation_cost
from ..faas.emulator import FaasEmulator, FaasError, InvocationRecord
from ..faas.profiles import NETWORK_OVERHEAD_MS, WorkloadProfile
from ..faas.sandbox import Sandbox, SandboxViolation
from ..kms.client import InProcessKmsChannel
from ..kms.service import KeyManagementService, KmsDenied
from ..envelope.wire import payload_to_wire, wrapped_key_to_wire
from .devices import DeviceClass, ResourceMonitor, get_device_class
from .policies import Allocator, OffloadDecision, OffloadPolicy, PolicyKind, Target
from .protocol import PreparedInvocation, prepare_invocation

logger = logging.getLogger(__name__)

MONTH_MS = 720 * MS_PER_HOUR  # 720-hour billing month

ARRIVAL, LOCAL_DONE, REMOTE_DONE, KEEPALIVE, TIMEOUT = range(5)


@dataclass(frozen=True)
class DeviceEvent:
    device_id: str
    kind: str
    payload: bytes
    arrived_at: float
    app_id: str


@dataclass(frozen=True)
class Request:
    request_id: str
    app_id: str
    payload: bytes
    enqueued_at: float
    deadline_hint: Optional[float] = None


@dataclass
class DeployedApp:
    """Hub-side view of one provisioned app: keys, profile, platform handle,
    and the optional behavior used when the app is served locally."""

    app_id: str
    function_id: str
    keypair: AppKeyPair
    profile: WorkloadProfile
    item_id: Optional[str] = None
    native_behavior: Optional[str] = None
    stub_result: bytes = b"{}"


@dataclass
class RequestOutcome:
    request_id: str
    app_id: str
    enqueued_at: float
    state: str = "pending"  # local-done | remote-done | errored
    target: Optional[str] = None
    started_at: Optional[float] = None
    completed_at: Optional[float] = None
    e2e_ms: Optional[float] = None
    service_ms: Optional[float] = None
    encryption_ms: Optional[float] = None
    transport_ms: Optional[float] = None
    remote_platform_ms: Optional[float] = None
    local_exec_ms: Optional[float] = None
    contention_factor: Optional[float] = None
    served_state: Optional[str] = None
    cost_usd: Decimal = Decimal(0)
    error: Optional[str] = None
    dropped_result: bool = False

    @property
    def terminal(self) -> bool:
        return self.state in ("local-done", "remote-done", "errored")


@dataclass
class HubConfig:
    device_class: str = "jetson"
    queue_capacity: int = 1024
    transport_ms: float = NETWORK_OVERHEAD_MS
    keep_alive_period_min: float = 15.0
    timeout_factor: float = 5.0
    max_local_slots: Optional[int] = None

    def device(self) -> DeviceClass:
        return get_device_class(self.device_class)


class QueueFull(Exception):
    pass


ResultSink = Callable[[DeployedApp, Request, bytes, float], None]


class HubSimulation:
    def __init__(
        self,
        config: HubConfig,
        policy: OffloadPolicy,
        apps: dict[str, DeployedApp],
        emulator: FaasEmulator,
        kms_service: KeyManagementService,
        *,
        result_sink: Optional[ResultSink] = None,
    ) -> None:
        self.config = config
        self.apps = apps
        self.emulator = emulator
        self.kms_channel = InProcessKmsChannel(kms_service)
        self.device = config.device()
        self.monitor = ResourceMonitor(self.device, total_slots=config.max_local_slots)
        self.allocator = Allocator(
            policy,
            self.device,
            kms_latency_ms=self.kms_channel.latency_ms,
            transport_ms=config.transport_ms,
        )
        self.result_sink = result_sink
        self.now = 0.0
        self.outcomes: dict[str, RequestOutcome] = {}
        self.ingest_order: list[str] = []
        self.keepalive_records: list[InvocationRecord] = []
        self.egress_trace: list[bytes] = []
        self.event_log: list[dict[str, Any]] = []
        self.dispatched_results = 0
        self.dropped_results = 0
        self._heap: list[tuple[float, int, int, Any]] = []
        self._seq = 0
        self._queue: list[Request] = []
        self._inflight = 0
        self._timed_out: set[str] = set()
        self._month_spend: dict[int, Decimal] = {}
        self._last_platform_activity: dict[str, float] = {}
        self._keepalive_until: Optional[float] = None

    # -- scheduling ------------------------------------------------------

    def _push(self, at: float, kind: int, payload: Any) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, kind, payload))

    def submit_event(self, event: DeviceEvent) -> None:
        if event.app_id not in self.apps:
            raise KeyError(f"no deployed app {event.app_id!r}")
        self._push(event.arrived_at, ARRIVAL, event)

    def submit_events(self, events: list[DeviceEvent]) -> None:
        for event in events:
            self.submit_event(event)

    def start_keep_alive(self, until_ms: float, *, start_ms: float = 0.0) -> None:
        """Schedule the periodic warmer.

        The first tick fires at ``start_ms`` (a never-invoked function has
        unbounded projected idle, so it gets warmed before any traffic);
        ticks then repeat each period strictly before the horizon, i.e. one
        tick per period."""
        self._keepalive_until = until_ms
        self._push(start_ms, KEEPALIVE, None)

    def pre_warm(self, concurrency: int, at_ms: float = 0.0) -> None:
        """Bring ``concurrency`` warm instances up per function before a run."""
        for app in self.apps.values():
            for _ in range(concurrency):
                record = self.emulator.invoke_noop(app.function_id, at_ms)
                self.keepalive_records.append(record)
                self._account_cost(at_ms, record.cost_usd)
                self._last_platform_activity[app.function_id] = record.completed_at

    # -- main loop ---------------------------------------------------------

    def run(self, until_ms: Optional[float] = None) -> list[RequestOutcome]:
        while self._heap:
            at, _, kind, payload = self._heap[0]
            if until_ms is not None and at > until_ms:
                break
            heapq.heappop(self._heap)
            self.now = max(self.now, at)
            if kind == ARRIVAL:
                self._on_arrival(payload, at)
            elif kind == LOCAL_DONE:
                self._on_local_done(payload, at)
            elif kind == REMOTE_DONE:
                self._on_remote_done(payload, at)
            elif kind == KEEPALIVE:
                self._on_keepalive(at)
            elif kind == TIMEOUT:
                self._on_timeout(payload, at)
        return [self.outcomes[rid] for rid in self.ingest_order]

    # -- ingestion ---------------------------------------------------------

    def _on_arrival(self, event: DeviceEvent, now: float) -> None:
        self._seq += 1
        request = Request(
            request_id=f"req-{self._seq:06d}",
            app_id=event.app_id,
            payload=event.payload,
            enqueued_at=now,
        )
        outcome = RequestOutcome(request_id=request.request_id, app_id=request.app_id, enqueued_at=now)
        self.outcomes[request.request_id] = outcome
        self.ingest_order.append(request.request_id)
        if len(event.payload) > MAX_PAYLOAD_BYTES:
            outcome.state = "errored"
            outcome.error = "payload-too-large"
            outcome.completed_at = now
            self._log(now, "reject", request_id=request.request_id, reason="payload-too-large")
            return
        if len(self._queue) >= self.config.queue_capacity:
            outcome.state = "errored"
            outcome.error = "queue-full"
            outcome.completed_at = now
            self._log(now, "backpressure", request_id=request.request_id)
            return
        self._queue.append(request)
        profile = self.apps[request.app_id].profile
        timeout_ms = self.config.timeout_factor * (
            profile.cold_init_ms
            + self.kms_channel.latency_ms
            + profile.warm_exec_ms
            + self.config.transport_ms
        )
        self._push(now + timeout_ms, TIMEOUT, request.request_id)
        self._drain(now)

    # -- allocation ----------------------------------------------------------

    def _drain(self, now: float) -> None:
        admitted: list[tuple[Request, OffloadDecision, float]] = []
        while self._queue:
            request = self._queue[0]
            app = self.apps[request.app_id]
            enc_ms = self.device.encryption_ms(len(request.payload), self._inflight + 1)
            decision = self.allocator.decide(
                request.app_id,
                app.profile,
                self.monitor,
                now,
                enc_ms=enc_ms,
                month_spend_usd=self._month_spend.get(self._month(now), Decimal(0)),
                expected_invocation_cost_usd=invocation_cost(app.profile.billed_warm_gbs),
            )
            if decision.target is Target.LOCAL:
                if not self.monitor.try_reserve(app.profile.local_mem_gb):
                    break  # lost the capacity since the estimate; stay queued
                self._queue.pop(0)
                self._inflight += 1
                admitted.append((request, decision, enc_ms))
            elif decision.target is Target.REMOTE:
                self._queue.pop(0)
                self._inflight += 1
                self._start_remote(request, decision, enc_ms, now)
            elif decision.target is Target.UNSUPPORTED:
                self._queue.pop(0)
                outcome = self.outcomes[request.request_id]
                outcome.state = "errored"
                outcome.error = "local-unsupported"
                outcome.target = decision.target.value
                outcome.completed_at = now
            else:  # QUEUED: head of the FIFO waits
                break
        if admitted:
            factor = self.device.contention_factor(self.monitor.in_use_slots)
            for request, decision, enc_ms in admitted:
                self._start_local(request, decision, enc_ms, factor, now)

    # -- local path ---------------------------------------------------------

    def _start_local(
        self, request: Request, decision: OffloadDecision, enc_ms: float, factor: float, now: float
    ) -> None:
        app = self.apps[request.app_id]
        outcome = self.outcomes[request.request_id]
        outcome.target = decision.target.value
        outcome.started_at = now
        outcome.encryption_ms = enc_ms
        outcome.contention_factor = factor

        kms_id, kms_public = self._kms_identity()
        prepared = prepare_invocation(
            request.request_id, request.payload, app.keypair, kms_public, kms_id
        )
        # the key-service request is the only egress on the local path
        self.egress_trace.append(wrapped_key_to_wire(prepared.payload.encrypted_key))
        error: Optional[str] = None
        result: Optional[bytes] = None
        exec_ms = 0.0
        try:
            data_key = self.kms_channel.decrypt_data_key(
                request.app_id, request.request_id, prepared.payload.encrypted_key
            )
        except KmsDenied as denial:
            error = f"kms-denied:{denial.decision.value}"
            data_key = None
        if data_key is not None:
            plaintext = open_data(prepared.payload.encrypted_data, data_key, app.keypair.private_key)
            try:
                result = self._execute_local(app, plaintext)
            except SandboxViolation as exc:
                error = f"sandbox-violation:{exc}"
            exec_ms = app.profile.local_ms(self.device.name) * factor
            self.allocator.observe_local(request.app_id, app.profile, exec_ms, factor)
        service_ms = enc_ms + self.kms_channel.latency_ms + exec_ms
        outcome.local_exec_ms = exec_ms
        outcome.service_ms = service_ms
        self._log(
            now,
            "allocate",
            request_id=request.request_id,
            target="local",
            factor=factor,
            expected_local_ms=decision.expected_local_ms,
            expected_remote_ms=decision.expected_remote_ms,
        )
        self._push(now + service_ms, LOCAL_DONE, (request, result, error))

    def _execute_local(self, app: DeployedApp, plaintext: bytes) -> bytes:
        if app.native_behavior is not None:
            behavior = self.emulator.natives.get(app.native_behavior)
            if behavior is None:
                raise SandboxViolation(f"behavior {app.native_behavior!r} not registered")
            sandbox = Sandbox(input_bytes=plaintext, kms_endpoint=self.emulator.kms_endpoint)
            return behavior(sandbox)
        return app.stub_result

    def _on_local_done(self, payload: tuple[Request, Optional[bytes], Optional[str]], now: float) -> None:
        request, result, error = payload
        app = self.apps[request.app_id]
        self.monitor.release(app.profile.local_mem_gb)
        self._inflight -= 1
        outcome = self.outcomes[request.request_id]
        if outcome.terminal:  # timed out while running
            self.dropped_results += 1
            outcome.dropped_result = True
            self._drain(now)
            return
        outcome.completed_at = now
        outcome.e2e_ms = now - outcome.enqueued_at
        if error is not None:
            outcome.state = "errored"
            outcome.error = error
        else:
            outcome.state = "local-done"
            self._deliver(app, request, result if result is not None else b"", now)
        self._log(now, "complete", request_id=request.request_id, state=outcome.state, e2e_ms=outcome.e2e_ms)
        self._drain(now)

    # -- remote path ----------------------------------------------------------

    def _start_remote(self, request: Request, decision: OffloadDecision, enc_ms: float, now: float) -> None:
        app = self.apps[request.app_id]
        outcome = self.outcomes[request.request_id]
        outcome.target = decision.target.value
        outcome.started_at = now
        outcome.encryption_ms = enc_ms
        outcome.transport_ms = self.config.transport_ms

        kms_id, kms_public = self._kms_identity()
        prepared = prepare_invocation(
            request.request_id, request.payload, app.keypair, kms_public, kms_id
        )
        self.egress_trace.append(payload_to_wire(prepared.payload))
        platform_now = now + enc_ms + self.config.transport_ms
        try:
            record = self.emulator.invoke(app.function_id, prepared.payload, platform_now)
        except FaasError as exc:
            outcome.state = "errored"
            outcome.error = f"faas:{exc}"
            outcome.completed_at = platform_now
            outcome.e2e_ms = platform_now - outcome.enqueued_at
            self._inflight -= 1
            return
        self._account_cost(platform_now, record.cost_usd)
        self._last_platform_activity[app.function_id] = record.completed_at
        self.allocator.observe_remote(request.app_id, app.profile, record.e2e_ms)
        self._log(
            now,
            "allocate",
            request_id=request.request_id,
            target="remote",
            served_state=record.served_state,
            expected_local_ms=decision.expected_local_ms,
            expected_remote_ms=decision.expected_remote_ms,
        )
        self._push(record.completed_at, REMOTE_DONE, (request, record, prepared))

    def _on_remote_done(
        self, payload: tuple[Request, InvocationRecord, PreparedInvocation], now: float
    ) -> None:
        request, record, prepared = payload
        app = self.apps[request.app_id]
        self._inflight -= 1
        outcome = self.outcomes[request.request_id]
        if outcome.terminal:
            self.dropped_results += 1
            outcome.dropped_result = True
            self._drain(now)
            return
        outcome.completed_at = now
        outcome.e2e_ms = now - outcome.enqueued_at
        outcome.remote_platform_ms = record.e2e_ms
        outcome.served_state = record.served_state
        outcome.cost_usd = record.cost_usd
        outcome.service_ms = (outcome.encryption_ms or 0.0) + (outcome.transport_ms or 0.0) + record.e2e_ms
        if record.ok and record.response is not None:
            outcome.state = "remote-done"
            result = open_result(record.response, prepared.data_key)
            self._deliver(app, request, result, now)
        else:
            outcome.state = "errored"
            outcome.error = record.error or "remote-failed"
        self._log(now, "complete", request_id=request.request_id, state=outcome.state, e2e_ms=outcome.e2e_ms)
        self._drain(now)

    # -- keep-alive -------------------------------------------------------------

    def _on_keepalive(self, now: float) -> None:
        period = self.config.keep_alive_period_min * 60_000.0
        for app in self.apps.values():
            last = self._last_platform_activity.get(app.function_id)
            projected_idle = (now + period) - last if last is not None else float("inf")
            if projected_idle > self.emulator.idle_threshold_ms:
                record = self.emulator.invoke_noop(app.function_id, now)
                self.keepalive_records.append(record)
                self._account_cost(now, record.cost_usd)
                self._last_platform_activity[app.function_id] = record.completed_at
        next_tick = now + period
        if self._keepalive_until is not None and next_tick < self._keepalive_until:
            self._push(next_tick, KEEPALIVE, None)

    # -- timeouts -----------------------------------------------------------------

    def _on_timeout(self, request_id: str, now: float) -> None:
        outcome = self.outcomes[request_id]
        if outcome.terminal:
            return
        for i, queued in enumerate(self._queue):
            if queued.request_id == request_id:
                self._queue.pop(i)
                break
        outcome.state = "errored"
        outcome.error = "timeout"
        outcome.completed_at = now
        outcome.e2e_ms = now - outcome.enqueued_at
        self._timed_out.add(request_id)
        self._log(now, "timeout", request_id=request_id)
        self._drain(now)

    # -- results ------------------------------------------------------------------

    def _deliver(self, app: DeployedApp, request: Request, result: bytes, now: float) -> None:
        self.dispatched_results += 1
        if self.result_sink is not None:
            self.result_sink(app, request, result, now)

    # -- accounting ------------------------------------------------------------------

    def _month(self, now: float) -> int:
        return int(now // MONTH_MS)

    def _account_cost(self, now: float, cost: Decimal) -> None:
        bucket = self._month(now)
        self._month_spend[bucket] = self._month_spend.get(bucket, Decimal(0)) + cost

    def cloud_spend_usd(self) -> Decimal:
        return sum(self._month_spend.values(), Decimal(0))

    def _kms_identity(self) -> tuple[str, Any]:
        service = self.kms_channel.service
        return service.kms_id, service.keypair.public_key

    def _log(self, now: float, event: str, **fields: Any) -> None:
        entry = {"t_ms": now, "event": event, **fields}
        self.event_log.append(entry)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("%s", json.dumps(entry, default=str))

    # -- invariants -------------------------------------------------------------------

    def assert_conservation(self) -> None:
        """Every ingested request reached exactly one terminal state."""
        non_terminal = [rid for rid in self.ingest_order if not self.outcomes[rid].terminal]
        if non_terminal:
            raise AssertionError(f"requests not terminal: {non_terminal}")
