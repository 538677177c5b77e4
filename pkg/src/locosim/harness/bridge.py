"""WebSocket telemetry/command bridge and log replay.

One operator connection at a time; outbound state frames at the log
cadence with bounded, drop-oldest backpressure (the cumulative drop count
rides on each state frame), menu frames on change. Inbound messages are
validated against the bridge schema, acked, and queued for the simulation
loop to drain once per tick; malformed traffic gets an error frame and the
session stays open.

The server owns a background thread with its own asyncio loop; the only
shared structures are the two bounded thread-safe queues.
"""

from __future__ import annotations

import asyncio
import json
import logging
import queue
import threading
import time
from collections import deque
from pathlib import Path

import websockets
import websockets.asyncio.server

from .logs import canonical_json, read_log
from .schema import SCHEMA_VERSION, ValidationError, validate_inbound

logger = logging.getLogger(__name__)

OUTBOUND_QUEUE_LIMIT = 256
INBOUND_QUEUE_LIMIT = 256


class BridgeServer:
    """Runs beside the sim loop; start() binds the port, stop() tears down."""

    def __init__(self, port: int, scenario_name: str = "", seed: int = 0, host: str = "127.0.0.1"):
        self.port = port
        self.host = host
        self.scenario_name = scenario_name
        self.seed = seed
        self._out: deque = deque()
        self._out_lock = threading.Lock()
        self._dropped = 0
        self._inbound: queue.Queue = queue.Queue(maxsize=INBOUND_QUEUE_LIMIT)
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._ready = threading.Event()
        self._stopping = threading.Event()
        self._client = None
        self._server = None

    # ------------------------------------------------------------ sim side

    def push_state(self, record: dict):
        self._push(("state", record))

    def push_menu_frame(self, lines: list[str], t: float):
        self._push(("menu_frame", {"lines": list(lines), "t": round(t, 6)}))

    def _push(self, frame):
        with self._out_lock:
            if len(self._out) >= OUTBOUND_QUEUE_LIMIT:
                # drop oldest state frames first; count every drop
                self._out.popleft()
                self._dropped += 1
            self._out.append(frame)

    def drain_inbound(self) -> list[tuple[str, dict]]:
        out = []
        while True:
            try:
                out.append(self._inbound.get_nowait())
            except queue.Empty:
                return out

    # --------------------------------------------------------- server side

    def start(self):
        self._thread = threading.Thread(target=self._run_loop, name="bridge", daemon=True)
        self._thread.start()
        if not self._ready.wait(timeout=5.0):
            raise RuntimeError("bridge failed to start")
        return self

    def stop(self):
        self._stopping.set()
        if self._loop is not None:
            self._loop.call_soon_threadsafe(lambda: None)
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def _run_loop(self):
        asyncio.run(self._main())

    async def _main(self):
        self._loop = asyncio.get_running_loop()
        async with websockets.asyncio.server.serve(self._handler, self.host, self.port) as server:
            self._server = server
            self._ready.set()
            while not self._stopping.is_set():
                await asyncio.sleep(0.02)

    async def _handler(self, ws):
        if self._client is not None:
            await ws.send(
                canonical_json({"type": "error", "seq": 0, "payload": {"reason": "another operator is connected"}})
            )
            await ws.close()
            return
        self._client = ws
        out_seq = 0
        last_in_seq = None
        logger.info("bridge: operator connected")

        async def send(frame_type: str, payload: dict, extra: dict | None = None):
            nonlocal out_seq
            out_seq += 1
            msg = {"type": frame_type, "seq": out_seq, "payload": payload}
            if extra:
                msg.update(extra)
            await ws.send(canonical_json(msg))

        sender_done = asyncio.Event()

        async def sender():
            try:
                await send(
                    "hello",
                    {"schema_version": SCHEMA_VERSION, "scenario": self.scenario_name, "seed": self.seed},
                )
                while not sender_done.is_set() and not self._stopping.is_set():
                    batch = []
                    with self._out_lock:
                        while self._out:
                            batch.append(self._out.popleft())
                        dropped = self._dropped
                    for kind, payload in batch:
                        extra = {"drops": dropped} if kind == "state" else None
                        await send(kind, payload, extra)
                    await asyncio.sleep(0.005)
            except websockets.ConnectionClosed:
                pass

        sender_task = asyncio.create_task(sender())
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                except (json.JSONDecodeError, UnicodeDecodeError):
                    await send("error", {"reason": "malformed JSON"})
                    continue
                try:
                    kind, payload = validate_inbound(msg)
                except ValidationError as e:
                    await send("error", {"reason": str(e), "ack_seq": msg.get("seq") if isinstance(msg, dict) else None})
                    continue
                seq = msg["seq"]
                if last_in_seq is not None and seq <= last_in_seq:
                    await send("error", {"reason": f"seq {seq} not increasing", "ack_seq": seq})
                    continue
                last_in_seq = seq
                try:
                    self._inbound.put_nowait((kind, payload))
                except queue.Full:
                    await send("error", {"reason": "input queue full", "ack_seq": seq})
                    continue
                await send("event_ack", {"ack_seq": seq, "status": "accepted"})
        except websockets.ConnectionClosed:
            pass
        finally:
            sender_done.set()
            await sender_task
            self._client = None
            logger.info("bridge: operator disconnected")


# ------------------------------------------------------------------- replay


def replay_frames(log_path: str | Path):
    """Yield (type, payload, t) frames a live run would have emitted.

    State frames come straight from the records; menu frames from the
    menu_frame events embedded in them. No simulation is executed.
    """
    _, records = read_log(log_path)
    for rec in records:
        if rec.get("type") != "record":
            continue
        for e in rec.get("events", []):
            if e.get("type") == "menu_frame":
                yield "menu_frame", {"lines": e["lines"], "t": rec["t"]}, rec["t"]
        yield "state", rec, rec["t"]


def replay(log_path: str | Path, speed: float = 1.0, bridge: BridgeServer | None = None) -> dict:
    """Re-emit a log over the bridge (or just count frames when headless).

    speed is a multiplier on sim pacing; 0 means as fast as possible.
    """
    count = 0
    start_wall = time.perf_counter()
    first_t = None
    for kind, payload, t in replay_frames(log_path):
        if speed > 0:
            if first_t is None:
                first_t = t
            target = start_wall + (t - first_t) / speed
            delay = target - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
        if bridge is not None:
            if kind == "state":
                bridge.push_state(payload)
            else:
                bridge.push_menu_frame(payload["lines"], payload["t"])
        count += 1
    return {"frames": count, "wall_time": time.perf_counter() - start_wall}
