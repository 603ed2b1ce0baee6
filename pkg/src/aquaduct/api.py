"""Live session and the HTTP/WS control surface.

`LiveSession` runs the simulation loop in a worker thread, paced to
wall time so the console is watchable, and communicates with the API
exclusively through queues: operator commands and attack launches in,
state ticks, flow closures, and IDS alerts out.  The FastAPI app is a
thin adapter over one session; the browser HMI consumes exactly these
endpoints.
"""

from __future__ import annotations

import asyncio
import itertools
import queue
import threading
import time
from dataclasses import replace

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .attacks import Attack, AttackKind, planned_duration
from .flows import FlowTable, label
from .ids import OnlineDetector, TrainedModel
from .scenario import ScenarioConfig, attack_spec_from_dict, build_session

TAP_DRAIN_GUARD = 0.05  # virtual seconds events may trail their task's start


class ConflictingCommandError(RuntimeError):
    pass


class LiveSession:
    """Single simulation loop; one thread owns all mutable state."""

    def __init__(
        self,
        config: ScenarioConfig,
        model: TrainedModel | None = None,
        time_scale: float = 1.0,
        step: float = 0.1,
    ):
        self.config = replace(config)
        self.config.attacks = []  # live attacks come in through the API
        self.time_scale = time_scale  # wall seconds per virtual second
        self.step = step
        self.network, self.plant, self.registry, _ = build_session(self.config, "live")
        self.detector = OnlineDetector(model) if model is not None else None
        self.flow_table = FlowTable(
            config.flow.status_interval,
            config.flow.idle_timeout,
            on_record=self._on_record,
        )
        self._commands: queue.Queue = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._alert_ids = itertools.count(1)
        self._lock = threading.Lock()
        self._running = False
        self._thread: threading.Thread | None = None
        self.alerts: list[dict] = []
        self.markers: list[dict] = []
        self.live_attacks: list[Attack] = []
        self._launched_specs: list = []

    # ---------------------------------------------------------- pub/sub

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=4096)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _broadcast(self, message: dict):
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            try:
                q.put_nowait(message)
            except queue.Full:
                pass  # slow consumer loses ticks, never blocks the loop

    # ------------------------------------------------------- loop inputs

    def command(self, name: str):
        if name not in ("on", "off"):
            raise ValueError(f"unknown command {name!r}")
        self._commands.put(("command", name))

    def launch_attack(self, data: dict) -> dict:
        kind = AttackKind(data["kind"])
        now = self.network.clock.now
        # check submitted specs, not materialized attacks: the worker
        # thread may not have drained the command queue yet
        with self._lock:
            for spec in self._launched_specs:
                if spec.kind is kind and now <= spec.start_time + planned_duration(spec):
                    raise ConflictingCommandError(f"a {kind.value} attack is already running")
        data = dict(data)
        data.setdefault("start_time", now)
        spec = attack_spec_from_dict(data, self.config.master_seed, len(self.markers))
        spec.start_time = max(float(data["start_time"]), now)
        with self._lock:
            self._launched_specs.append(spec)
        self._commands.put(("attack", spec))
        marker = {"type": "ground_truth", "kind": kind.value, "start": spec.start_time}
        self.markers.append(marker)
        self._broadcast(marker)
        return marker

    # -------------------------------------------------------- loop body

    def _on_record(self, record):
        labeled = label(record, self.registry)
        self._broadcast(
            {
                "type": "flow",
                "src": str(record.src),
                "dst": str(record.dst),
                "state": record.state.value,
                "label": labeled.label,
                "features": labeled.features.as_tuple(),
            }
        )
        if self.detector is not None:
            alert = self.detector.observe(labeled)
            if alert is not None:
                payload = {
                    "type": "alert",
                    "id": next(self._alert_ids),
                    "ts": alert.ts,
                    "model": alert.model,
                    "src": alert.src,
                    "dst": alert.dst,
                    "sport": alert.sport,
                    "tot_pkts": alert.tot_pkts,
                    "attack_kind": labeled.attack_kind.value if labeled.attack_kind else None,
                }
                self.alerts.append(payload)
                self._broadcast(payload)

    def state_snapshot(self) -> dict:
        s = self.plant.state
        return {
            "type": "state",
            "ts": self.network.clock.now,
            "level": s.level,
            "level_pct": 100.0 * s.level / self.plant.config.capacity,
            "running": s.running,
            "light": s.light,
            "ls1": s.ls1,
            "ls2": s.ls2,
            "pump1": s.pump1,
            "pump2": s.pump2,
            "valve": s.valve,
            "phase": s.phase.value,
            "tick": s.tick,
            "alert_count": len(self.alerts),
        }

    def metrics_snapshot(self) -> dict:
        if self.detector is None:
            return {"model": None}
        cm = self.detector.confusion
        out = {
            "model": self.detector.model.algorithm,
            "confusion": {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn},
        }
        if cm.total:
            m = self.detector.metrics()
            out.update({"accuracy": m.accuracy, "far": m.far, "und": m.und})
        return out

    def _loop(self):
        clock = self.network.clock
        wall_start = time.monotonic()
        virtual_start = clock.now
        while self._running:
            while True:
                try:
                    kind, payload = self._commands.get_nowait()
                except queue.Empty:
                    break
                if kind == "command":
                    self.plant.command(payload)
                else:
                    attack = Attack(self.network, payload, self.registry)
                    clock.spawn(payload.start_time, attack.task())
                    self.live_attacks.append(attack)
            clock.run(clock.now + self.step)
            for event in self.network.tap.drain_until(clock.now - TAP_DRAIN_GUARD):
                self.flow_table.ingest(event)
            self.flow_table.close_flows(clock.now)
            self._broadcast(self.state_snapshot())
            target_wall = wall_start + (clock.now - virtual_start) * self.time_scale
            delay = target_wall - time.monotonic()
            if delay > 0:
                time.sleep(delay)

    def start(self):
        if self._thread is not None:
            return
        self._running = True
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stop(self):
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    @property
    def live(self) -> bool:
        return self._running


def create_app(session: LiveSession, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="aquaduct testbed")

    def require_live():
        if not session.live:
            raise HTTPException(status_code=503, detail="session not live")

    @app.get("/api/state")
    def get_state():
        require_live()
        return session.state_snapshot()

    @app.get("/api/metrics")
    def get_metrics():
        require_live()
        return session.metrics_snapshot()

    @app.get("/api/alerts")
    def get_alerts():
        require_live()
        return {"alerts": session.alerts, "markers": session.markers}

    @app.post("/api/commands/{name}")
    def post_command(name: str):
        require_live()
        try:
            session.command(name)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"accepted": name}

    @app.post("/api/attacks")
    def post_attack(body: dict):
        require_live()
        try:
            return session.launch_attack(body)
        except ConflictingCommandError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.websocket("/ws")
    async def ws_stream(websocket: WebSocket):
        await websocket.accept()
        q = session.subscribe()
        try:
            while True:
                try:
                    message = q.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.02)
                    continue
                await websocket.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            session.unsubscribe(q)

    if frontend_dir is not None:
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="hmi")
    return app
