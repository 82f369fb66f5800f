"""Single append-friendly store for registrations and the audit log.

Events (register / revoke / access) are appended as JSON lines; state is
rebuilt by replay on open. An in-memory mode backs tests and virtual-time
benchmarks.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Iterator, Optional


class KmsStore:
    def __init__(self, path: Optional[str | Path] = None) -> None:
        self._path = Path(path) if path is not None else None
        self._events: list[dict[str, Any]] = []
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            with self._path.open("r", encoding="utf-8") as fh:
                self._events = [json.loads(line) for line in fh if line.strip()]

    @property
    def in_memory(self) -> bool:
        return self._path is None

    def append(self, event: dict[str, Any]) -> None:
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        with self._lock:
            self._events.append(event)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())

    def events(self) -> Iterator[dict[str, Any]]:
        with self._lock:
            return iter(list(self._events))

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)
