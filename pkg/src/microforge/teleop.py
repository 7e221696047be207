"""Live teleoperation service: fixed-tick simulation, telemetry fan-out, and
operator commands over WebSocket.

The protocol carries JSON text frames (one message per frame) and is
documented bit-exactly in docs/protocol.md.  Clients handshake with a hello
carrying the protocol schema version; the first client asking for the driver
role holds the single driver token (releasable; viewers are unlimited).  The
simulation loop owns the world; sessions only enqueue commands, which are
applied at tick boundaries (last writer wins within a tick) and recorded with
their simulation timestamps into a replay log that uses the scenario script
schema, so any session can be re-run headlessly and bit-identically.
"""

from __future__ import annotations

import asyncio
import errno
import json
import time
from pathlib import Path

import websockets

from .config import config_from_dict, default_config
from .errors import SchemaError
from .magnetics import FieldCommand
from .mating import pair_guards
from .scenario import build_world, validate_scenario

PROTOCOL_SCHEMA_VERSION = 1
DEFAULT_TELEMETRY_HZ = 30.0
DT_S = 1e-3  # 1 kHz simulation
_MAX_TICKS_PER_FRAME = 200000

COMMAND_KINDS = ("joystick", "solvent_target", "load_scenario", "pause", "resume", "reset", "release_driver", "request_driver")


def bundled_scenario_path(name):
    from importlib.resources import files

    path = files("microforge").joinpath("scenarios").joinpath(f"{name}.scn")
    if not path.is_file():
        raise SchemaError(f"no bundled scenario named {name!r}")
    return path


class TeleopServer:
    def __init__(
        self,
        scenario_doc,
        config_doc=None,
        host="127.0.0.1",
        port=0,
        speed=1.0,
        telemetry_hz=DEFAULT_TELEMETRY_HZ,
        replay_out=None,
    ):
        self.doc = validate_scenario(scenario_doc)
        self.config_doc = dict(config_doc or {})
        merged = dict(self.config_doc)
        for key, value in self.doc.get("config", {}).items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        self.config = config_from_dict(merged) if merged else default_config()
        self.host = host
        self.port = port
        self.speed = float(speed)
        self.frame_s = 1.0 / float(telemetry_hz)
        self.replay_out = Path(replay_out) if replay_out else None

        self.seed = self.doc.get("seed", 0)
        self._reset_world(self.seed)
        self._sessions = {}
        self._driver = None
        self._inbox = asyncio.Queue()
        self._server = None
        self._sim_task = None
        self._stop = asyncio.Event()
        self.paused = False
        self._ticks_window = []

    # ------------------------------------------------------------- lifecycle

    def _reset_world(self, seed):
        self.world, self.managers = build_world(self.doc, self.config, seed=seed)
        self.seed = seed
        self.recorded = []
        self._default_base = next(
            (b.id for b in self.world.bodies.values() if b.magnetic is not None), None
        )

    async def start(self):
        try:
            self._server = await websockets.serve(self._handler, self.host, self.port)
        except OSError as exc:
            if exc.errno == errno.EADDRINUSE:
                raise OSError(f"port {self.port} already in use") from exc
            raise
        self.port = self._server.sockets[0].getsockname()[1]
        self._sim_task = asyncio.create_task(self._sim_loop())
        return self.port

    async def stop(self):
        self._stop.set()
        if self._sim_task is not None:
            await self._sim_task
        self._server.close()
        await self._server.wait_closed()
        self._write_replay()

    async def serve_forever(self):
        await self._stop.wait()

    # ------------------------------------------------------------- sim loop

    async def _sim_loop(self):
        deadline = time.monotonic()
        while not self._stop.is_set():
            deadline += self.frame_s
            self._drain_inbox()
            if not self.paused:
                budget = min(
                    int(round(self.frame_s * self.speed / DT_S)), _MAX_TICKS_PER_FRAME
                )
                for _ in range(budget):
                    self.world.tick(None, DT_S)
                    for mgr in self.managers.values():
                        mgr.step()
                self._ticks_window.append((time.monotonic(), budget))
            await self._broadcast(self._telemetry_frame())
            delay = deadline - time.monotonic()
            if delay > 0:
                try:
                    await asyncio.wait_for(self._stop.wait(), timeout=delay)
                except asyncio.TimeoutError:
                    pass
            else:
                deadline = time.monotonic()
                await asyncio.sleep(0)

    def _drain_inbox(self):
        while True:
            try:
                msg, session = self._inbox.get_nowait()
            except asyncio.QueueEmpty:
                return
            self._apply_command(msg, session)

    # ------------------------------------------------------------- commands

    def _apply_command(self, msg, session):
        kind = msg.get("kind")
        t = self.world.time_s
        if kind == "joystick":
            base = msg.get("base", self._default_base)
            if base is None:
                return
            cmd = FieldCommand(
                grad_x_t_per_m=float(msg.get("grad_x", 0.0)),
                grad_y_t_per_m=float(msg.get("grad_y", 0.0)),
                heading_rad=msg.get("heading"),
                rotate_rate_rad_s=float(msg.get("rotate_rate", 0.0)),
            )
            self.world.apply_command(base, cmd)
            action = {
                "kind": "field_command",
                "body": base,
                "grad_x": cmd.grad_x_t_per_m,
                "grad_y": cmd.grad_y_t_per_m,
                "rotate_rate": cmd.rotate_rate_rad_s,
            }
            if msg.get("heading") is not None:
                action["heading"] = float(msg["heading"])
            self.recorded.append({"t": t, "action": action})
        elif kind == "solvent_target":
            phi = float(msg["phi"])
            self.world.set_solvent_target(phi)
            self.recorded.append(
                {"t": t, "action": {"kind": "set_solvent_target", "phi": phi}}
            )
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            self._reset_world(int(msg.get("seed", self.seed)))
        elif kind == "load_scenario":
            path = bundled_scenario_path(str(msg["name"]))
            self.doc = validate_scenario(json.loads(path.read_text(encoding="utf-8")))
            self._reset_world(self.doc.get("seed", 0))
        elif kind == "release_driver":
            if self._driver is session:
                self._driver = None
        elif kind == "request_driver":
            if self._driver is None:
                self._driver = session
                session["role"] = "driver"
        self._write_replay()

    # ------------------------------------------------------------- telemetry

    def _telemetry_frame(self):
        now = time.monotonic()
        self._ticks_window = [(t, n) for t, n in self._ticks_window if now - t <= 1.0]
        tick_rate = sum(n for _, n in self._ticks_window)
        bodies = []
        for b in self.world.bodies.values():
            entry = {
                "id": b.id,
                "kind": b.kind.value,
                "x": b.x,
                "y": b.y,
                "theta": b.theta,
                "lam": b.lam,
                "outline": [
                    {"poly": [[px, py] for px, py in data]}
                    if kind == "poly"
                    else {"circle": list(data)}
                    for kind, data in b.outline()
                ],
            }
            if b.aperture is not None:
                entry["aperture_um"] = b.aperture.aperture_um
                entry["gripper_state"] = b.aperture.state.value
            bodies.append(entry)
        mating = []
        for (base_id, eff_id), mgr in self.managers.items():
            mating.append(
                {
                    "base": base_id,
                    "effector": eff_id,
                    "state": mgr.state.value,
                    "guards": pair_guards(self.world, base_id, eff_id),
                }
            )
        return {
            "type": "telemetry",
            "schema_version": PROTOCOL_SCHEMA_VERSION,
            "time_s": self.world.time_s,
            "tick_rate_actual_hz": tick_rate,
            "paused": self.paused,
            "water_fraction": self.world.water_fraction,
            "water_fraction_target": self.world.water_fraction_target,
            "driver_held": self._driver is not None,
            "bodies": bodies,
            "mating": mating,
        }

    async def _broadcast(self, frame):
        blob = json.dumps(frame)
        dead = []
        for ws in list(self._sessions):
            try:
                await ws.send(blob)
            except websockets.ConnectionClosed:
                dead.append(ws)
        for ws in dead:
            self._forget(ws)

    # ------------------------------------------------------------- sessions

    def _forget(self, ws):
        session = self._sessions.pop(ws, None)
        if session is not None and self._driver is session:
            self._driver = None

    async def _handler(self, ws):
        session = None
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("missing type")
                except (json.JSONDecodeError, ValueError) as exc:
                    await ws.send(_error("MalformedMessage", str(exc)))
                    continue
                if session is None:
                    if msg["type"] != "hello":
                        await ws.send(_error("MalformedMessage", "hello required first"))
                        continue
                    if msg.get("schema_version") != PROTOCOL_SCHEMA_VERSION:
                        await ws.send(
                            _error(
                                "VersionMismatch",
                                f"server speaks schema_version {PROTOCOL_SCHEMA_VERSION}",
                            )
                        )
                        await ws.close()
                        return
                    session = {"role": "viewer", "last_seq": None}
                    self._sessions[ws] = session
                    if msg.get("role") == "driver" and self._driver is None:
                        self._driver = session
                        session["role"] = "driver"
                    await ws.send(
                        json.dumps(
                            {
                                "type": "hello_ack",
                                "schema_version": PROTOCOL_SCHEMA_VERSION,
                                "role_granted": session["role"],
                                "seed": self.seed,
                                "scenario": self.doc["name"],
                            }
                        )
                    )
                    continue
                if msg["type"] == "command":
                    seq = msg.get("client_seq")
                    if not isinstance(seq, int) or (
                        session["last_seq"] is not None and seq <= session["last_seq"]
                    ):
                        await ws.send(_error("MalformedMessage", "client_seq must increase"))
                        continue
                    session["last_seq"] = seq
                    if msg.get("kind") not in COMMAND_KINDS:
                        await ws.send(_error("MalformedMessage", f"unknown kind {msg.get('kind')!r}"))
                        continue
                    if session["role"] != "driver" and msg.get("kind") not in (
                        "request_driver",
                    ):
                        await ws.send(_error("NotDriver", "driver token required"))
                        continue
                    await self._inbox.put((msg, session))
                else:
                    await ws.send(_error("MalformedMessage", f"unknown type {msg['type']!r}"))
        except websockets.ConnectionClosed:
            pass
        finally:
            self._forget(ws)

    # ------------------------------------------------------------- replay log

    def _write_replay(self):
        if self.replay_out is None:
            return
        doc = dict(self.doc)
        doc["seed"] = self.seed
        doc["script"] = list(self.recorded)
        doc["duration_s"] = self.world.time_s
        doc["description"] = "replay log recorded by the teleop service"
        self.replay_out.parent.mkdir(parents=True, exist_ok=True)
        self.replay_out.write_text(json.dumps(doc, indent=1), encoding="utf-8")


def _error(code, detail):
    return json.dumps(
        {
            "type": "error",
            "schema_version": PROTOCOL_SCHEMA_VERSION,
            "code": code,
            "detail": detail,
        }
    )


async def serve_async(scenario_doc, **kwargs):
    server = TeleopServer(scenario_doc, **kwargs)
    await server.start()
    return server


def serve(scenario_doc, **kwargs):
    """Blocking entry point used by the CLI; prints the bound port."""

    async def _main():
        server = await serve_async(scenario_doc, **kwargs)
        print(f"teleop service listening on ws://{server.host}:{server.port}", flush=True)
        try:
            await server.serve_forever()
        finally:
            await server.stop()

    asyncio.run(_main())
