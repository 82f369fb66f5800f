"""Offload policies and the resource allocator.

The allocator turns each queued request into a decision: serve it on a local
slot, offload it to the platform, or keep it queued (never drop). Latency
expectations blend profile-seeded estimates with exponentially-weighted
moving averages of observed latencies; ties prefer local (it is free).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from ..faas.profiles import WorkloadProfile
from .devices import DeviceClass, ResourceMonitor

EWMA_ALPHA = 0.3


class PolicyKind(enum.Enum):
    LATENCY_MIN = "latency-min"
    BUDGET_CAP = "budget-cap"
    BALANCED = "balanced"
    STATIC_LOCAL = "static-local"  # benchmark baseline: never offload
    STATIC_REMOTE = "static-remote"  # benchmark baseline: always offload


@dataclass(frozen=True)
class OffloadPolicy:
    kind: PolicyKind
    monthly_budget_usd: Optional[Decimal] = None
    balance_weight: float = 0.5  # 1.0 = all latency, 0.0 = all cost

    def __post_init__(self) -> None:
        if self.kind is PolicyKind.BUDGET_CAP:
            if self.monthly_budget_usd is None or self.monthly_budget_usd <= 0:
                raise ValueError("budget-cap policy requires a positive monthly budget")
        if not 0.0 <= self.balance_weight <= 1.0:
            raise ValueError("balance_weight must be in [0, 1]")


class Target(enum.Enum):
    LOCAL = "local"
    REMOTE = "remote"
    QUEUED = "queued"
    UNSUPPORTED = "unsupported"  # static-local on a device that cannot run it


@dataclass(frozen=True)
class OffloadDecision:
    target: Target
    policy_kind: PolicyKind
    decided_at: float
    expected_local_ms: Optional[float] = None
    expected_remote_ms: Optional[float] = None


class _Ewma:
    def __init__(self, seed: float, alpha: float = EWMA_ALPHA) -> None:
        self.value = seed
        self.alpha = alpha

    def observe(self, sample: float) -> None:
        self.value = self.alpha * sample + (1 - self.alpha) * self.value


class Allocator:
    def __init__(
        self,
        policy: OffloadPolicy,
        device: DeviceClass,
        *,
        kms_latency_ms: float,
        transport_ms: float,
    ) -> None:
        self.policy = policy
        self.device = device
        self.kms_latency_ms = kms_latency_ms
        self.transport_ms = transport_ms
        self._local_exec: dict[str, _Ewma] = {}  # factor-normalized exec time
        self._remote_e2e: dict[str, _Ewma] = {}  # platform-side e2e

    # -- latency estimation ---------------------------------------------

    def _local_ewma(self, app_id: str, profile: WorkloadProfile) -> Optional[_Ewma]:
        if not profile.supports_device(self.device.name):
            return None
        if app_id not in self._local_exec:
            self._local_exec[app_id] = _Ewma(profile.local_ms(self.device.name))
        return self._local_exec[app_id]

    def _remote_ewma(self, app_id: str, profile: WorkloadProfile) -> _Ewma:
        if app_id not in self._remote_e2e:
            self._remote_e2e[app_id] = _Ewma(self.kms_latency_ms + profile.warm_exec_ms)
        return self._remote_e2e[app_id]

    def expected_local_ms(
        self, app_id: str, profile: WorkloadProfile, enc_ms: float, concurrency_if_admitted: int
    ) -> Optional[float]:
        ewma = self._local_ewma(app_id, profile)
        if ewma is None:
            return None
        factor = self.device.contention_factor(concurrency_if_admitted)
        return enc_ms + self.kms_latency_ms + ewma.value * factor

    def expected_remote_ms(self, app_id: str, profile: WorkloadProfile, enc_ms: float) -> float:
        return enc_ms + self.transport_ms + self._remote_ewma(app_id, profile).value

    def observe_local(self, app_id: str, profile: WorkloadProfile, exec_ms: float, factor: float) -> None:
        ewma = self._local_ewma(app_id, profile)
        if ewma is not None and factor > 0:
            ewma.observe(exec_ms / factor)

    def observe_remote(self, app_id: str, profile: WorkloadProfile, platform_e2e_ms: float) -> None:
        self._remote_ewma(app_id, profile).observe(platform_e2e_ms)

    # -- decisions --------------------------------------------------------

    def decide(
        self,
        app_id: str,
        profile: WorkloadProfile,
        monitor: ResourceMonitor,
        now: float,
        *,
        enc_ms: float,
        month_spend_usd: Decimal = Decimal(0),
        expected_invocation_cost_usd: Decimal = Decimal(0),
    ) -> OffloadDecision:
        """Pick a target; the caller reserves the slot on a LOCAL decision."""
        supported = profile.supports_device(self.device.name)
        fits = supported and monitor.can_reserve(profile.local_mem_gb)
        local_est = self.expected_local_ms(app_id, profile, enc_ms, monitor.in_use_slots + 1)
        remote_est = self.expected_remote_ms(app_id, profile, enc_ms)

        def decision(target: Target) -> OffloadDecision:
            return OffloadDecision(
                target=target,
                policy_kind=self.policy.kind,
                decided_at=now,
                expected_local_ms=local_est,
                expected_remote_ms=remote_est,
            )

        kind = self.policy.kind
        if kind is PolicyKind.STATIC_REMOTE:
            return decision(Target.REMOTE)
        if kind is PolicyKind.STATIC_LOCAL:
            if not supported:
                return decision(Target.UNSUPPORTED)
            return decision(Target.LOCAL if fits else Target.QUEUED)
        if kind is PolicyKind.LATENCY_MIN:
            if fits and local_est is not None and local_est <= remote_est:
                return decision(Target.LOCAL)
            return decision(Target.REMOTE)
        if kind is PolicyKind.BUDGET_CAP:
            assert self.policy.monthly_budget_usd is not None
            within = month_spend_usd + expected_invocation_cost_usd <= self.policy.monthly_budget_usd
            if within:
                return decision(Target.REMOTE)
            return decision(Target.LOCAL if fits else Target.QUEUED)
        if kind is PolicyKind.BALANCED:
            if not fits or local_est is None:
                return decision(Target.REMOTE)
            w = self.policy.balance_weight
            worst_latency = max(local_est, remote_est)
            worst_cost = max(expected_invocation_cost_usd, Decimal("1E-12"))
            local_score = w * (local_est / worst_latency)  # local cloud cost is zero
            remote_score = w * (remote_est / worst_latency) + (1 - w) * float(
                expected_invocation_cost_usd / worst_cost
            )
            return decision(Target.LOCAL if local_score <= remote_score else Target.REMOTE)
        raise AssertionError(f"unhandled policy {kind}")
