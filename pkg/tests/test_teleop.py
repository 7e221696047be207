"""Teleop service: protocol, driver token, clamping, replay equivalence."""

import asyncio
import json
import time
from importlib.resources import files

import pytest
import websockets

from microforge.scenario import ScenarioRunner
from microforge.teleop import PROTOCOL_SCHEMA_VERSION, TeleopServer

SCENARIO = json.loads(
    files("microforge").joinpath("scenarios").joinpath("teleop_default.scn").read_text()
)


def run(coro):
    return asyncio.run(coro)


async def start_server(**kwargs):
    server = TeleopServer(SCENARIO, port=0, **kwargs)
    await server.start()
    return server


async def connect(server, role="viewer", version=PROTOCOL_SCHEMA_VERSION):
    ws = await websockets.connect(f"ws://127.0.0.1:{server.port}")
    await ws.send(json.dumps({"type": "hello", "schema_version": version, "role": role}))
    ack = json.loads(await ws.recv())
    return ws, ack


async def next_frame(ws, type_="telemetry"):
    while True:
        msg = json.loads(await ws.recv())
        if msg["type"] == type_:
            return msg


def test_static_world_streams_30hz():
    async def main():
        server = await start_server(speed=1.0)
        ws, ack = await connect(server)
        assert ack["type"] == "hello_ack"
        stamps = []
        for _ in range(16):
            await next_frame(ws)
            stamps.append(time.monotonic())
        await ws.close()
        await server.stop()
        spans = [b - a for a, b in zip(stamps, stamps[1:])]
        rate = 1.0 / (sum(spans) / len(spans))
        assert 28.0 <= rate <= 32.0

    run(main())


def test_version_mismatch_refused():
    async def main():
        server = await start_server()
        ws = await websockets.connect(f"ws://127.0.0.1:{server.port}")
        await ws.send(json.dumps({"type": "hello", "schema_version": 99, "role": "driver"}))
        msg = json.loads(await ws.recv())
        assert msg["type"] == "error" and msg["code"] == "VersionMismatch"
        await ws.wait_closed()
        await server.stop()

    run(main())


def test_malformed_message_preserves_session():
    async def main():
        server = await start_server()
        ws, _ = await connect(server, role="driver")
        await ws.send("this is not json{")
        err = await next_frame(ws, "error")
        assert err["code"] == "MalformedMessage"
        # session still works: a valid command is accepted
        await ws.send(json.dumps({"type": "command", "client_seq": 1, "kind": "solvent_target", "phi": 1.0}))
        frame = await next_frame(ws)
        for _ in range(10):
            if frame["water_fraction_target"] == 1.0:
                break
            frame = await next_frame(ws)
        assert frame["water_fraction_target"] == 1.0
        await ws.close()
        await server.stop()

    run(main())


def test_driver_token_exclusive_three_clients():
    async def main():
        server = await start_server()
        clients = []
        roles = []
        for _ in range(3):
            ws, ack = await connect(server, role="driver")
            clients.append(ws)
            roles.append(ack["role_granted"])
        assert roles.count("driver") == 1
        assert roles.count("viewer") == 2
        # viewers cannot command
        viewer = clients[roles.index("viewer")]
        await viewer.send(json.dumps({"type": "command", "client_seq": 1, "kind": "pause"}))
        err = await next_frame(viewer, "error")
        assert err["code"] == "NotDriver"
        # release frees the token for the next requester
        driver = clients[roles.index("driver")]
        await driver.send(json.dumps({"type": "command", "client_seq": 1, "kind": "release_driver"}))
        await asyncio.sleep(0.1)
        await viewer.send(json.dumps({"type": "command", "client_seq": 2, "kind": "request_driver"}))
        await asyncio.sleep(0.1)
        await viewer.send(json.dumps({"type": "command", "client_seq": 3, "kind": "pause"}))
        frame = await next_frame(viewer)
        for _ in range(10):
            if frame["paused"]:
                break
            frame = await next_frame(viewer)
        assert frame["paused"]
        for ws in clients:
            await ws.close()
        await server.stop()

    run(main())


def test_client_seq_must_increase():
    async def main():
        server = await start_server()
        ws, _ = await connect(server, role="driver")
        await ws.send(json.dumps({"type": "command", "client_seq": 5, "kind": "pause"}))
        await ws.send(json.dumps({"type": "command", "client_seq": 5, "kind": "resume"}))
        err = await next_frame(ws, "error")
        assert err["code"] == "MalformedMessage"
        await ws.close()
        await server.stop()

    run(main())


def test_joystick_clamped_to_coil_limit():
    async def main():
        server = await start_server(speed=40.0)
        ws, _ = await connect(server, role="driver")
        # steer into free space (-x) so nothing is pushed along the way
        await ws.send(
            json.dumps({"type": "command", "client_seq": 1, "kind": "joystick", "grad_x": -99.0})
        )
        t0 = x0 = None
        while True:
            frame = await next_frame(ws)
            base = next(b for b in frame["bodies"] if b["id"] == "base2")
            if t0 is None:
                if base["x"] < 400.0:  # motion observed: command is live
                    t0, x0 = frame["time_s"], base["x"]
                continue
            if frame["time_s"] >= t0 + 1.0:
                t1, x1 = frame["time_s"], base["x"]
                break
        await ws.close()
        await server.stop()
        v = (x0 - x1) / (t1 - t0)
        assert v == pytest.approx(100.0, rel=0.02)  # 2 T/m cap, not 99

    run(main())


def test_viewer_churn_does_not_perturb_world():
    async def main():
        server = await start_server(speed=20.0)
        ws, _ = await connect(server, role="driver")
        await ws.send(json.dumps({"type": "command", "client_seq": 1, "kind": "joystick", "grad_x": 1.0}))
        for _ in range(3):
            v, _ = await connect(server, role="viewer")
            await next_frame(v)
            await v.close()
        frame = await next_frame(ws)
        last_t = frame["time_s"]
        frame = await next_frame(ws)
        assert frame["time_s"] >= last_t
        await ws.close()
        replay = list(server.recorded)
        await server.stop()
        assert len(replay) == 1  # only the driver's command was recorded

    run(main())


def test_port_in_use():
    async def main():
        server = await start_server()
        with pytest.raises(OSError):
            other = TeleopServer(SCENARIO, port=server.port)
            await other.start()
        await server.stop()

    run(main())


def test_replay_log_reproduces_served_run_bit_identical(tmp_path):
    replay_path = tmp_path / "session.scn"

    async def main():
        server = await start_server(speed=50.0, replay_out=replay_path)
        ws, _ = await connect(server, role="driver")
        seq = 0

        async def cmd(**kw):
            nonlocal seq
            seq += 1
            await ws.send(json.dumps({"type": "command", "client_seq": seq, **kw}))

        await cmd(kind="joystick", grad_x=1.0)
        while (await next_frame(ws))["time_s"] < 2.0:
            pass
        await cmd(kind="joystick", grad_x=0.0, grad_y=0.5, rotate_rate=0.3)
        await cmd(kind="solvent_target", phi=1.0)
        while (await next_frame(ws))["time_s"] < 4.0:
            pass
        await cmd(kind="joystick", grad_x=0.0, grad_y=0.0, rotate_rate=0.0)
        frame = await next_frame(ws)
        await ws.close()
        await server.stop()
        final = {b["id"]: (b["x"], b["y"], b["theta"], b["lam"]) for b in
                 server._telemetry_frame()["bodies"]}
        return server.world.time_s, final, server.world.water_fraction

    served_time, served_bodies, served_phi = run(main())

    doc = json.loads(replay_path.read_text())
    assert doc["script"], "replay log recorded no commands"
    result = ScenarioRunner(doc, out_dir=None).run()
    assert result.exit_code == 0
    assert result.world.time_s == served_time
    assert result.world.water_fraction == served_phi  # bit-identical float
    for body in result.world.bodies.values():
        sx, sy, st, sl = served_bodies[body.id]
        assert (body.x, body.y, body.theta, body.lam) == (sx, sy, st, sl)


def test_load_scenario_reset_and_frame_budget():
    async def main():
        server = await start_server()
        ws, _ = await connect(server, role="driver")
        frame = await next_frame(ws)
        assert len(json.dumps(frame).encode()) < 64 * 1024  # frame size bound
        ids = {b["id"] for b in frame["bodies"]}
        assert "base2" in ids
        await ws.send(json.dumps({"type": "command", "client_seq": 1, "kind": "load_scenario", "name": "mate_type1"}))
        for _ in range(20):
            frame = await next_frame(ws)
            if any(b["id"] == "base1" for b in frame["bodies"]):
                break
        assert any(b["id"] == "base1" for b in frame["bodies"])
        # reset rewinds the clock and re-seeds
        await ws.send(json.dumps({"type": "command", "client_seq": 2, "kind": "reset", "seed": 42}))
        for _ in range(20):
            frame = await next_frame(ws)
            if frame["time_s"] < 0.5:
                break
        assert frame["time_s"] < 0.5
        assert server.seed == 42
        await ws.close()
        await server.stop()

    run(main())


def test_solvent_target_dynamics_over_telemetry():
    import math

    async def main():
        server = await start_server(speed=30.0)
        ws, _ = await connect(server, role="driver")
        await ws.send(json.dumps({"type": "command", "client_seq": 1, "kind": "solvent_target", "phi": 1.0}))
        # first frame where the target is live anchors the exponential
        t0 = None
        samples = []
        while True:
            frame = await next_frame(ws)
            if t0 is None:
                if frame["water_fraction_target"] == 1.0:
                    t0, phi0 = frame["time_s"], frame["water_fraction"]
                continue
            samples.append((frame["time_s"], frame["water_fraction"]))
            if frame["time_s"] >= t0 + 4.0:
                break
        await ws.close()
        await server.stop()
        # monotone first-order approach with tau = 2 s from the anchor frame
        phis = [p for _, p in samples]
        assert all(b >= a for a, b in zip(phis, phis[1:]))
        t1, p1 = samples[-1]
        expected = 1.0 - (1.0 - phi0) * math.exp(-(t1 - t0) / 2.0)
        assert p1 == pytest.approx(expected, abs=0.03)

    run(main())
