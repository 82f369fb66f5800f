"""The local hub: queues, allocator, invocation protocol, keep-alive."""

from .devices import DEVICE_CLASSES, JETSON, RPI, DeviceClass, ResourceMonitor, get_device_class
from .policies import Allocator, OffloadDecision, OffloadPolicy, PolicyKind, Target
from .protocol import PreparedInvocation, open_invocation_result, prepare_invocation
from .simulation import (
    MONTH_MS,
    DeployedApp,
    DeviceEvent,
    HubConfig,
    HubSimulation,
    QueueFull,
    Request,
    RequestOutcome,
)

__all__ = [
    "Allocator",
    "DEVICE_CLASSES",
    "DeployedApp",
    "DeviceClass",
    "DeviceEvent",
    "HubConfig",
    "HubSimulation",
    "JETSON",
    "MONTH_MS",
    "OffloadDecision",
    "OffloadPolicy",
    "PolicyKind",
    "PreparedInvocation",
    "QueueFull",
    "RPI",
    "Request",
    "RequestOutcome",
    "ResourceMonitor",
    "Target",
    "open_invocation_result",
    "prepare_invocation",
]
