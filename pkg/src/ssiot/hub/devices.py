"""Hub device classes and local resource accounting.

Calibrated model, not measurement: local execution under concurrency k runs
at ``local_exec_ms * (1 + c*(k-1))`` with c chosen so the accelerator class
at k=4 lands at ~4.7x its k=1 latency. Hub-side encryption cost scales with
payload size and, mildly, with concurrent in-flight requests; the low-cost
board pays more per megabyte (no AES hardware).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

CONTENTION_COEFF = 1.2333  # 1 + 3c = 4.7 at k=4


@dataclass(frozen=True)
class DeviceClass:
    name: str
    total_slots: int
    total_mem_gb: float
    contention_coeff: float = CONTENTION_COEFF
    enc_base_ms: float = 10.0
    enc_ms_per_mb: float = 50.0
    enc_contention_coeff: float = 0.08

    def contention_factor(self, concurrency: int) -> float:
        k = max(1, concurrency)
        return 1.0 + self.contention_coeff * (k - 1)

    def encryption_ms(self, payload_bytes: int, in_flight: int = 1) -> float:
        base = self.enc_base_ms + self.enc_ms_per_mb * (payload_bytes / (1024.0 * 1024.0))
        return base * (1.0 + self.enc_contention_coeff * (max(1, in_flight) - 1))


RPI = DeviceClass(name="rpi", total_slots=4, total_mem_gb=1.0, enc_base_ms=30.0, enc_ms_per_mb=170.0)
JETSON = DeviceClass(name="jetson", total_slots=4, total_mem_gb=4.0, enc_base_ms=8.0, enc_ms_per_mb=45.0)

DEVICE_CLASSES = {"rpi": RPI, "jetson": JETSON}


def get_device_class(name: str) -> DeviceClass:
    try:
        return DEVICE_CLASSES[name]
    except KeyError:
        raise KeyError(f"unknown device class {name!r}; known: {sorted(DEVICE_CLASSES)}")


class ResourceMonitor:
    """Tracks local serving slots and memory; reserve/release are atomic so
    concurrent allocators can never oversubscribe."""

    def __init__(self, device: DeviceClass, *, total_slots: Optional[int] = None) -> None:
        self.device = device
        self.total_slots = total_slots if total_slots is not None else device.total_slots
        self.total_mem_gb = device.total_mem_gb
        self._in_use_slots = 0
        self._in_use_mem_gb = 0.0
        self._lock = threading.Lock()

    @property
    def in_use_slots(self) -> int:
        with self._lock:
            return self._in_use_slots

    @property
    def in_use_mem_gb(self) -> float:
        with self._lock:
            return self._in_use_mem_gb

    def can_reserve(self, mem_gb: float) -> bool:
        with self._lock:
            return self._fits(mem_gb)

    def _fits(self, mem_gb: float) -> bool:
        return (
            self._in_use_slots + 1 <= self.total_slots
            and self._in_use_mem_gb + mem_gb <= self.total_mem_gb + 1e-9
        )

    def try_reserve(self, mem_gb: float) -> bool:
        """Atomically take one slot plus memory; False if it does not fit."""
        with self._lock:
            if not self._fits(mem_gb):
                return False
            self._in_use_slots += 1
            self._in_use_mem_gb += mem_gb
            return True

    def release(self, mem_gb: float) -> None:
        with self._lock:
            if self._in_use_slots <= 0:
                raise RuntimeError("release without reserve")
            self._in_use_slots -= 1
            self._in_use_mem_gb = max(0.0, self._in_use_mem_gb - mem_gb)
