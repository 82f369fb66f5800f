"""Clocks. Virtual time is the primary mode: benchmarks advance it explicitly
so identical seeds and traces replay to identical timelines. All times are
milliseconds as floats.
"""

from __future__ import annotations

import time


MS_PER_SECOND = 1000.0
MS_PER_MINUTE = 60_000.0
MS_PER_HOUR = 3_600_000.0
MS_PER_DAY = 86_400_000.0


class VirtualClock:
    """Deterministic manually-advanced clock."""

    def __init__(self, start_ms: float = 0.0) -> None:
        self._now = float(start_ms)

    def now(self) -> float:
        return self._now

    def advance(self, delta_ms: float) -> float:
        if delta_ms < 0:
            raise ValueError("clock cannot move backwards")
        self._now += delta_ms
        return self._now

    def advance_to(self, t_ms: float) -> float:
        if t_ms < self._now:
            raise ValueError("clock cannot move backwards")
        self._now = t_ms
        return self._now


class SystemClock:
    """Wall clock for real-time demo runs; latencies become actual waits."""

    def now(self) -> float:
        return time.monotonic() * MS_PER_SECOND

    def sleep(self, delta_ms: float) -> None:
        if delta_ms > 0:
            time.sleep(delta_ms / MS_PER_SECOND)
