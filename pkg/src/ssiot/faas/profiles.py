"""Synthetic workload profiles.

Real model inference is out of scope at desk scale; each app's timing and
billing behavior is a calibrated profile instead. Calibration provenance,
echoed into every benchmark report:

- densenet / darknet platform latencies are the published cold/warm
  end-to-end measurements for those models.
- mobilenet / ssdmobilenet platform latencies are derived: billed duration
  plus the 190 ms default network overhead (the residual between darknet's
  warm end-to-end time and its billed duration).
- billed GB-seconds are inverted from the published requests-per-dollar
  figures through the pricing formula.
- local execution times and memory footprints are calibrated so device
  concurrency ceilings (4 medium classification / 2 heavy detection on the
  accelerator class) and the 31%-81% accelerator advantage hold.

``warm_exec_ms`` excludes the key-service fetch; with the default
cloud-adjacent key service (206 ms) the warm service time reproduces the
published totals (e.g. 206 + 645 = 851 for densenet).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

MAX_MEMORY_GB = 3.0  # platform ceiling
# Residual hub<->platform network overhead (round trip), milliseconds.
NETWORK_OVERHEAD_MS = 190.0

CALIBRATION_NOTE = (
    "latencies and billing are emulated from calibrated workload profiles, "
    "not measured on physical hardware"
)


@dataclass(frozen=True)
class WorkloadProfile:
    """Per-app timing and billing model."""

    name: str
    warm_exec_ms: float
    cold_init_ms: float
    billed_warm_gbs: float
    billed_cold_gbs: float
    memory_gb: float = MAX_MEMORY_GB
    local_exec_ms: Mapping[str, float] = field(default_factory=dict)
    local_mem_gb: float = 0.0
    provenance: str = "calibrated-default"

    def __post_init__(self) -> None:
        if self.cold_init_ms < 0:
            raise ValueError("cold_init_ms must be >= 0")
        if self.billed_cold_gbs < self.billed_warm_gbs:
            raise ValueError("cold billing below warm billing")
        if self.warm_exec_ms <= 0 or self.billed_warm_gbs <= 0:
            raise ValueError("times must be positive")
        if not 0 < self.memory_gb <= MAX_MEMORY_GB:
            raise ValueError(f"memory_gb must be in (0, {MAX_MEMORY_GB}]")

    def supports_device(self, device_class: str) -> bool:
        return device_class in self.local_exec_ms

    def local_ms(self, device_class: str) -> float:
        try:
            return self.local_exec_ms[device_class]
        except KeyError:
            raise KeyError(f"profile {self.name} cannot run on device class {device_class!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "warm_exec_ms": self.warm_exec_ms,
            "cold_init_ms": self.cold_init_ms,
            "billed_warm_gbs": self.billed_warm_gbs,
            "billed_cold_gbs": self.billed_cold_gbs,
            "memory_gb": self.memory_gb,
            "local_exec_ms": dict(self.local_exec_ms),
            "local_mem_gb": self.local_mem_gb,
            "provenance": self.provenance,
        }


DEFAULT_PROFILES: dict[str, WorkloadProfile] = {
    profile.name: profile
    for profile in (
        WorkloadProfile(
            name="mobilenet",
            warm_exec_ms=284.0,
            cold_init_ms=1100.0,
            billed_warm_gbs=0.9,
            billed_cold_gbs=4.2,
            local_exec_ms={"rpi": 400.0, "jetson": 99.0},
            local_mem_gb=0.25,
            provenance="billing inverted from requests/$; latency = billed + network overhead",
        ),
        WorkloadProfile(
            name="densenet",
            warm_exec_ms=645.0,
            cold_init_ms=8302.0,
            billed_warm_gbs=2.7,
            billed_cold_gbs=8.4,
            local_exec_ms={"rpi": 4300.0, "jetson": 587.0},
            local_mem_gb=1.0,
            provenance="published cold/warm platform latencies; billing inverted from requests/$",
        ),
        WorkloadProfile(
            name="darknet",
            warm_exec_ms=6886.0,
            cold_init_ms=28867.0,
            billed_warm_gbs=20.7,
            billed_cold_gbs=32.4,
            local_exec_ms={"jetson": 1347.0},  # single-board devices cannot run detection
            local_mem_gb=2.0,
            provenance="published cold/warm platform latencies; billing inverted from requests/$",
        ),
        WorkloadProfile(
            name="ssdmobilenet",
            warm_exec_ms=2784.0,
            cold_init_ms=2000.0,
            billed_warm_gbs=8.4,
            billed_cold_gbs=14.4,
            local_exec_ms={"jetson": 1046.0},
            local_mem_gb=1.5,
            provenance="billing inverted from requests/$; latency = billed + network overhead",
        ),
    )
}


def get_profile(name: str, overrides: Optional[Mapping[str, WorkloadProfile]] = None) -> WorkloadProfile:
    catalog = overrides or DEFAULT_PROFILES
    try:
        return catalog[name]
    except KeyError:
        raise KeyError(f"unknown workload profile {name!r}; known: {sorted(catalog)}")
