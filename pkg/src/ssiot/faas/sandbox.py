"""Capability sandbox for app code running inside an emulated instance.

App behaviors receive exactly one object: the sandbox. It offers the
plaintext input feed, a bounded scratch space, and a connect capability that
only reaches the key service. There is no ambient filesystem or network
authority; any attempt outside these capabilities raises and terminates the
instance. (Real kernel/container isolation is a non-goal of the emulator;
the capability interface is the enforced boundary.)
"""

from __future__ import annotations

from typing import Callable, Optional

SCRATCH_LIMIT_BYTES = 64 * 1024 * 1024


class SandboxViolation(Exception):
    """App code stepped outside its capabilities."""


class Scratch:
    """Bounded in-memory key/value scratch space."""

    def __init__(self, limit_bytes: int = SCRATCH_LIMIT_BYTES) -> None:
        self._limit = limit_bytes
        self._data: dict[str, bytes] = {}

    def write(self, name: str, data: bytes) -> None:
        if name.startswith("/") or ".." in name:
            raise SandboxViolation(f"scratch names are flat, got {name!r}")
        projected = sum(len(v) for k, v in self._data.items() if k != name) + len(data)
        if projected > self._limit:
            raise SandboxViolation(f"scratch limit {self._limit} bytes exceeded")
        self._data[name] = data

    def read(self, name: str) -> bytes:
        try:
            return self._data[name]
        except KeyError:
            raise SandboxViolation(f"no scratch entry {name!r}")

    def used_bytes(self) -> int:
        return sum(len(v) for v in self._data.values())


class Sandbox:
    def __init__(self, *, input_bytes: bytes, kms_endpoint: str, scratch_limit: int = SCRATCH_LIMIT_BYTES) -> None:
        self._input = input_bytes
        self._kms_endpoint = kms_endpoint
        self.scratch = Scratch(scratch_limit)

    def input(self) -> bytes:
        """The request's plaintext payload, fed on the stdin channel."""
        return self._input

    def connect(self, endpoint: str) -> str:
        """Request a network channel. Only the key service is reachable."""
        if endpoint != self._kms_endpoint:
            raise SandboxViolation(f"network egress to {endpoint!r} is not permitted")
        return self._kms_endpoint

    def open_path(self, path: str) -> None:
        """Filesystem access is never a capability of app code."""
        raise SandboxViolation(f"filesystem access to {path!r} is not permitted")


# A native behavior is real code run for end-to-end correctness tests:
# bytes in (via the sandbox), bytes out.
NativeBehavior = Callable[[Sandbox], bytes]


class NativeFunctionRegistry:
    def __init__(self) -> None:
        self._functions: dict[str, NativeBehavior] = {}

    def register(self, name: str, behavior: NativeBehavior) -> None:
        if name in self._functions:
            raise ValueError(f"native function {name!r} already registered")
        self._functions[name] = behavior

    def get(self, name: str) -> Optional[NativeBehavior]:
        return self._functions.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._functions
