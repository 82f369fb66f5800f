"""Hub simulation tests: ingestion, allocation policies, keep-alive,
timeouts, conservation, and encryption-before-egress."""

from __future__ import annotations

import hashlib
import random
from decimal import Decimal

import pytest

from ssiot.faas import DEFAULT_PROFILES
from ssiot.hub import (
    DeviceEvent,
    HubConfig,
    HubSimulation,
    OffloadPolicy,
    PolicyKind,
    ResourceMonitor,
    get_device_class,
)

MIN = 60_000.0
HOUR = 3_600_000.0


def make_hub(world, policy_kind=PolicyKind.LATENCY_MIN, sink=None, **config_kwargs):
    policy_args = {}
    if policy_kind is PolicyKind.BUDGET_CAP:
        policy_args["monthly_budget_usd"] = config_kwargs.pop("budget", Decimal("1"))
    config = HubConfig(**config_kwargs)
    return HubSimulation(
        config,
        OffloadPolicy(policy_kind, **policy_args),
        world.apps,
        world.emulator,
        world.kms,
        result_sink=sink,
    )


def events(app_id, times, payload=b"x" * 1024, kind="image"):
    return [
        DeviceEvent(device_id="cam-1", kind=kind, payload=payload, arrived_at=t, app_id=app_id)
        for t in times
    ]


class TestIngestion:
    def test_fifo_order_and_conservation(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        hub.submit_events(events("app-alpha", [0.0, 1.0, 2.0]))
        outcomes = hub.run()
        assert [o.request_id for o in outcomes] == sorted(o.request_id for o in outcomes)
        hub.assert_conservation()

    def test_oversize_payload_rejected(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        hub.submit_events(events("app-alpha", [0.0], payload=b"x" * (5 * 1024 * 1024 + 1)))
        (outcome,) = hub.run()
        assert outcome.state == "errored" and outcome.error == "payload-too-large"

    def test_queue_full_backpressure(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        # zero budget forces local-only; 4 slots busy; queue capacity 2
        hub = make_hub(
            world,
            PolicyKind.BUDGET_CAP,
            budget=Decimal("1E-9"),
            queue_capacity=2,
        )
        hub.submit_events(events("app-alpha", [0.0] * 7))
        outcomes = hub.run()
        full = [o for o in outcomes if o.error == "queue-full"]
        assert len(full) == 1
        hub.assert_conservation()

    def test_unknown_app_rejected_at_submit(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        with pytest.raises(KeyError):
            hub.submit_event(
                DeviceEvent(device_id="d", kind="image", payload=b"", arrived_at=0.0, app_id="ghost")
            )


class TestAllocation:
    def test_free_slot_prefers_local(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        (outcome,) = hub.run() if not hub.submit_events(events("app-alpha", [0.0])) else hub.run()
        assert outcome.target == "local"
        assert outcome.state == "local-done"

    def test_contended_slots_go_remote(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        hub.pre_warm(8, at_ms=0.0)
        hub.submit_events(events("app-alpha", [MIN] * 8))
        outcomes = hub.run()
        targets = [o.target for o in outcomes]
        # contention makes k>=2 local slower than the platform; exactly one local
        assert targets.count("local") == 1
        assert targets.count("remote") == 7
        hub.assert_conservation()

    def test_small_model_always_local(self, make_world):
        world = make_world([("app-alpha", "mobilenet")])
        hub = make_hub(world)
        hub.submit_events(events("app-alpha", [0.0] * 4))
        outcomes = hub.run()
        assert all(o.target == "local" for o in outcomes)

    def test_detection_forced_remote_on_rpi(self, make_world):
        world = make_world([("app-alpha", "darknet")])
        hub = make_hub(world, device_class="rpi")
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.target == "remote"

    def test_static_local_unsupported_errors(self, make_world):
        world = make_world([("app-alpha", "darknet")])
        hub = make_hub(world, PolicyKind.STATIC_LOCAL, device_class="rpi")
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.state == "errored" and outcome.error == "local-unsupported"

    def test_budget_cap_exhaustion_goes_local_then_queued(self, make_world):
        world = make_world([("app-alpha", "darknet")])
        # darknet on jetson: 2 concurrent max by memory; tiny budget blocks remote
        hub = make_hub(world, PolicyKind.BUDGET_CAP, budget=Decimal("1E-9"))
        hub.submit_events(events("app-alpha", [0.0] * 3))
        outcomes = hub.run()
        assert [o.target for o in outcomes[:2]] == ["local", "local"]
        # third had to wait for a slot; it still completes locally
        assert outcomes[2].target == "local"
        assert outcomes[2].started_at > 0.0
        hub.assert_conservation()

    def test_budget_cap_spends_remote_within_budget(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.BUDGET_CAP, budget=Decimal("1"))
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.target == "remote"
        assert hub.cloud_spend_usd() == outcome.cost_usd

    def test_balanced_weight_extremes(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        # weight 0: all cost -> local whenever feasible
        hub = make_hub(world, PolicyKind.BALANCED)
        hub.allocator.policy = OffloadPolicy(PolicyKind.BALANCED, balance_weight=0.0)
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.target == "local"


class TestRemotePath:
    def test_e2e_decomposition_exact(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.STATIC_REMOTE)
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.e2e_ms == pytest.approx(
            outcome.encryption_ms + outcome.transport_ms + outcome.remote_platform_ms
        )

    def test_checksum_native_end_to_end(self, make_world):
        def checksum(sandbox):
            return hashlib.sha256(sandbox.input()).hexdigest().encode()

        world = make_world(
            [("app-alpha", "densenet")], natives={"checksum": checksum}, native_behavior="checksum"
        )
        payload = b"frame-bytes-0042"
        received = []
        hub = make_hub(
            world, PolicyKind.STATIC_REMOTE, sink=lambda app, req, result, now: received.append(result)
        )
        hub.submit_events(events("app-alpha", [0.0], payload=payload))
        (outcome,) = hub.run()
        assert outcome.state == "remote-done"
        assert received == [hashlib.sha256(payload).hexdigest().encode()]

    def test_revocation_blocks_and_no_result_delivered(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        received = []
        hub = make_hub(
            world, PolicyKind.STATIC_REMOTE, sink=lambda app, req, result, now: received.append(result)
        )
        world.kms.revoke_app("app-alpha")
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.state == "errored"
        assert "DeniedRevoked" in outcome.error
        assert received == []

    def test_local_path_also_goes_through_kms(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        assert outcome.target == "local"
        # the decrypt was audited: access control applies locally too
        assert world.kms.audit_length == 1
        # and the modeled latency includes the key-service round trip
        assert outcome.service_ms == pytest.approx(
            outcome.encryption_ms + 206.0 + outcome.local_exec_ms
        )


class TestKeepAlive:
    def test_2880_keepalives_in_30_days(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        horizon = 30 * 24 * HOUR
        hub.start_keep_alive(horizon)
        hub.run()
        assert len(hub.keepalive_records) == 2880

    def test_gappy_trace_stays_warm(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.STATIC_REMOTE)
        times = [i * 3 * HOUR + MIN for i in range(8)]  # 3 h gaps over 24 h
        hub.submit_events(events("app-alpha", times))
        hub.start_keep_alive(24 * HOUR)
        outcomes = hub.run()
        assert all(o.served_state == "Warm" for o in outcomes)

    def test_without_keepalive_gap_goes_cold(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.STATIC_REMOTE)
        hub.submit_events(events("app-alpha", [0.0, 40 * MIN]))
        outcomes = hub.run()
        assert [o.served_state for o in outcomes] == ["Cold", "Cold"]

    def test_keepalive_skipped_when_traffic_keeps_warm(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.STATIC_REMOTE)
        # steady traffic every 10 minutes: projected idle never crosses threshold
        hub.submit_events(events("app-alpha", [i * 10 * MIN for i in range(13)]))
        hub.start_keep_alive(2 * HOUR)
        hub.run()
        # only the very first tick fires (nothing was warm yet at t=15min... traffic
        # started at t=0, so even that is skipped)
        assert len(hub.keepalive_records) == 0


class TestTimeouts:
    def test_queued_too_long_times_out(self, make_world):
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world, PolicyKind.BUDGET_CAP, budget=Decimal("1E-9"), max_local_slots=1)
        hub.submit_events(events("app-alpha", [0.0] * 70))
        outcomes = hub.run()
        timed_out = [o for o in outcomes if o.error == "timeout"]
        assert timed_out, "expected at least one queued timeout"
        hub.assert_conservation()

    def test_dropped_result_counted(self, make_world):
        from ssiot.faas import WorkloadProfile
        from ssiot.hub import DeployedApp

        world = make_world([("app-alpha", "densenet")])
        slow_local = WorkloadProfile(
            name="slowlocal",
            warm_exec_ms=100.0,
            cold_init_ms=100.0,
            billed_warm_gbs=0.1,
            billed_cold_gbs=0.2,
            local_exec_ms={"jetson": 5000.0},
            local_mem_gb=0.5,
        )
        app = world.apps["app-alpha"]
        world.apps["app-alpha"] = DeployedApp(
            app_id=app.app_id,
            function_id=app.function_id,
            keypair=app.keypair,
            profile=slow_local,
            stub_result=app.stub_result,
        )
        hub = make_hub(world, PolicyKind.STATIC_LOCAL)
        hub.submit_events(events("app-alpha", [0.0]))
        (outcome,) = hub.run()
        # timeout 5*(100+206+100+190) = 2980ms < 5000ms local run
        assert outcome.error == "timeout"
        assert outcome.dropped_result
        assert hub.dropped_results == 1


class TestEgress:
    def test_no_plaintext_leaves_hub(self, make_world):
        secret = b"SECRET-FRAME-CANARY-31337"
        world = make_world([("app-alpha", "densenet")])
        hub = make_hub(world)
        hub.pre_warm(4, at_ms=0.0)
        hub.submit_events(events("app-alpha", [MIN] * 6, payload=secret))
        hub.run()
        assert hub.egress_trace, "expected egress traffic"
        for blob in hub.egress_trace:
            assert secret not in blob
        for blob in world.emulator.trace_blobs():
            assert secret not in blob


class TestMonitorStress:
    def test_concurrent_reserve_release_never_oversubscribes(self):
        import threading

        monitor = ResourceMonitor(get_device_class("jetson"))
        violations = []
        rng = random.Random(7)
        barrier = threading.Barrier(8)

        def worker(seed):
            local_rng = random.Random(seed)
            barrier.wait()
            for _ in range(300):
                if monitor.try_reserve(1.0):
                    if monitor.in_use_slots > monitor.total_slots:
                        violations.append(monitor.in_use_slots)
                    if local_rng.random() < 0.9:
                        monitor.release(1.0)
                    else:
                        monitor.release(1.0)

        threads = [threading.Thread(target=worker, args=(rng.random(),)) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not violations
        assert monitor.in_use_slots == 0
