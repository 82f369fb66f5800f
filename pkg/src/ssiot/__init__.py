"""SSIoT: self-serviced IoT computation offloading at desk scale.

A local hub encrypts device data and opportunistically offloads work to an
emulated function-as-a-service platform; a trusted key management service
enforces per-request access control; a benchmark harness reproduces the
latency, scalability, and cost behavior of the system on a virtual clock.
"""

__version__ = "0.1.0"
