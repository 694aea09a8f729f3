"""Realtime session bridge: browsers play a handle against the simulation.

One asyncio task per session owns the trial state and advances it wall-clock
paced at the simulation rate, catching up in batches after scheduler jitter.
Network ingress and egress talk to the loop through queues only; frame
broadcasts are snapshots pushed at the frame rate and may be dropped, ticks
may not. Pointer positions are converted to handle force through a virtual
grab spring, so browser clients supply positions, not forces.

Transport errors are answered with a plain ``{"type": "error", ...}`` JSON
object before the connection closes.
"""
from __future__ import annotations

import asyncio
import json
import os
import time
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import __version__
from .errors import ConfigError, ProtocolError
from .harness import (ALONE, HRP, ExperimentConfig, TrialRunner, config_hash,
                      derive_seed, make_agents, save_log, COLOR_NAMES, PHASE_NAMES)
from .metrics import performance
from .pathgen import Color, Phase, generate_script, script_to_dict, side_name
from .protocol import (ChoiceResult, End, FrameMsg, Hello, Input, Welcome,
                       decode_message, encode_message)

GRAB_KP_N_PER_M = 300.0
GRAB_KD_N_S_PER_M = 5.0
GRAB_FORCE_LIMIT_N = 10.0
STALE_INPUT_TICKS = 250          # hold the last pointer, flag degraded beyond this
FRAME_QUEUE_SIZE = 4
MALFORMED_LIMIT = 5
SESSION_SALT = 7001
PATH_WINDOW_STEP_S = 0.02
PATH_WINDOW_SPAN_S = 1.5


class ExternalInputAgent:
    """Force source driven by a remote pointer through the grab model."""

    def __init__(self, dt_s: float = 0.001):
        self.dt_s = dt_s
        self.pointer_mm: float | None = None
        self.last_seq = -1
        self.last_update_k = -1
        self.degraded = False
        self.inputs: list[tuple[int, float]] = []  # (tick applied, pointer mm)

    def set_pointer(self, k: int, x_mm: float, seq: int | None = None):
        if seq is not None:
            if seq <= self.last_seq:
                return  # stale or duplicate input
            self.last_seq = seq
        self.pointer_mm = float(x_mm)
        self.last_update_k = k
        self.inputs.append((k, float(x_mm)))

    def begin_trial(self, n_ticks: int):
        pass

    def step(self, obs) -> float:
        p = self.pointer_mm
        if p is None:
            return 0.0
        if obs.k - self.last_update_k > STALE_INPUT_TICKS:
            self.degraded = True
        f = (GRAB_KP_N_PER_M * (p - obs.own_x)
             - GRAB_KD_N_S_PER_M * obs.own_v) / 1000.0
        if f > GRAB_FORCE_LIMIT_N:
            f = GRAB_FORCE_LIMIT_N
        elif f < -GRAB_FORCE_LIMIT_N:
            f = -GRAB_FORCE_LIMIT_N
        return f

    def finish(self) -> list[dict]:
        return []


@dataclass
class SessionConfig:
    condition: str = HRP
    human_lanes: tuple[int, ...] = (1,)
    session_index: int = 0
    frame_hz: float = 60.0
    rms_max_mm: float = 25.0
    paced: bool = True
    out_dir: str | None = None
    decimate: int = 1


def build_runner(exp: ExperimentConfig, scfg: SessionConfig):
    """Same construction path as the headless harness, with human lanes
    replaced by grab-model inputs."""
    base = (SESSION_SALT, scfg.session_index)
    script = generate_script(derive_seed(exp.seed, *base, 0), exp.trial)
    seed = derive_seed(exp.seed, *base, 1)
    a1, a2, mirror = make_agents(scfg.condition, exp.sim, exp.partner,
                                 exp.surrogate, seed)
    inputs: dict[int, ExternalInputAgent] = {}
    if 1 in scfg.human_lanes:
        a1 = inputs[1] = ExternalInputAgent(exp.sim.dt_s)
    if 2 in scfg.human_lanes:
        if mirror:
            raise ConfigError("lane 2 does not exist in a mirrored condition")
        a2 = inputs[2] = ExternalInputAgent(exp.sim.dt_s)
    runner = TrialRunner(scfg.condition, script, exp.sim, a1, a2, mirror,
                         seed=seed,
                         cfg_hash=config_hash(exp.trial, exp.sim, exp.partner,
                                              exp.surrogate))
    return runner, inputs


class SessionLoop:
    """Owns one trial; the only writer of its simulation state."""

    def __init__(self, exp: ExperimentConfig, scfg: SessionConfig, session_id: str):
        self.exp = exp
        self.scfg = scfg
        self.session_id = session_id
        self.runner, self.inputs = build_runner(exp, scfg)
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.clients: dict[int, asyncio.Queue] = {}
        self.max_drift_s = 0.0
        self.results: list[ChoiceResult] = []
        self.log = None
        self.done = asyncio.Event()
        self._frame_ticks = max(1, int(round(1.0 / (scfg.frame_hz * exp.sim.dt_s))))
        self._choice_ends = [
            (int(round(c.t_merge_s / exp.sim.dt_s)), c) for c in self.runner.script.choices]
        self._next_choice = 0

    def claim_lane(self, role: str) -> int:
        lane = {"p1": 1, "p2": 2}.get(role)
        if lane is None or lane not in self.inputs:
            raise ProtocolError(f"role {role!r} not playable in this session")
        return lane

    def script_preview(self) -> dict:
        preview = script_to_dict(self.runner.script)
        for seg in preview["segments"]:
            seg.pop("highlight_1", None)
            seg.pop("highlight_2", None)
        return preview

    def attach(self, lane: int) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=FRAME_QUEUE_SIZE)
        self.clients[lane] = q
        return q

    def detach(self, lane: int):
        self.clients.pop(lane, None)

    def _push(self, lane: int, text: str):
        q = self.clients.get(lane)
        if q is None:
            return
        while True:
            try:
                q.put_nowait(text)
                return
            except asyncio.QueueFull:
                try:
                    q.get_nowait()  # drop the oldest frame, never block the tick
                except asyncio.QueueEmpty:
                    return

    def _broadcast_frame(self):
        r = self.runner
        k = r.k
        dt = r.dt
        ci = r._CI[k]
        phase = Phase(r._PH[k])
        window = []
        span = int(PATH_WINDOW_SPAN_S / dt)
        step = int(PATH_WINDOW_STEP_S / dt)
        for i in range(0, span + 1, step):
            j = min(k + i, r.n_ticks)
            window.append((i * dt * 1000.0, r._L[j], r._R[j]))
        cursor = (r._x1 + r._x2) * 0.5
        dist = min(abs(cursor - r._L[k]), abs(cursor - r._R[k]))
        if dist < 5.0:
            color = "green"
        elif dist < 15.0:
            color = "orange"
        else:
            color = "red"
        for lane in list(self.clients):
            own = r._x1 if lane == 1 else r._x2
            highlight = None
            if ci >= 0 and phase in (Phase.CHOICE_PRE, Phase.CHOICE_POST):
                h = r._hl1[ci] if lane == 1 else r._hl2[ci]
                highlight = side_name(h)
            msg = FrameMsg(
                t_ms=k * dt * 1000.0, cursor_x_mm=cursor, own_x_mm=own,
                color=color, phase=PHASE_NAMES[phase], highlight=highlight,
                path_window=tuple(window))
            self._push(lane, encode_message(msg))

    def _emit_choice_results(self):
        r = self.runner
        while (self._next_choice < len(self._choice_ends)
               and r.k >= self._choice_ends[self._next_choice][0]):
            k_end, c = self._choice_ends[self._next_choice]
            self._next_choice += 1
            dt = r.dt
            k0 = int(round(c.t0_s / dt))
            k_lo = int(round((c.t_merge_s - 0.5) / dt))
            x1 = np.array(r._aX1[k_lo:k_end + 1])
            x2 = np.array(r._aX2[k_lo:k_end + 1])
            m = float(np.mean((x1 + x2) * 0.5))
            direction = 1 if m > 0 else (-1 if m < 0 else 0)
            k_zone = min(int(round((c.t0_s + 2.0) / dt)), r.k)
            cur = (np.array(r._aX1[k0:k_zone + 1]) + np.array(r._aX2[k0:k_zone + 1])) * 0.5
            branch = np.array((r._L if direction == -1 else r._R)[k0:k_zone + 1])
            err = branch - cur
            rms_mm = float(np.sqrt(np.mean(err * err)))
            perf = performance(min(rms_mm, self.scfg.rms_max_mm), self.scfg.rms_max_mm)
            result = ChoiceResult(index=c.index, direction=side_name(direction),
                                  performance=perf)
            self.results.append(result)
            text = encode_message(result)
            for lane in list(self.clients):
                self._push(lane, text)

    def _drain_inbox(self):
        k = self.runner.k
        while True:
            try:
                lane, msg = self.inbox.get_nowait()
            except asyncio.QueueEmpty:
                return
            agent = self.inputs.get(lane)
            if agent is not None and isinstance(msg, Input):
                agent.set_pointer(k, msg.handle_x_mm, msg.seq)

    async def run(self):
        r = self.runner
        r.begin()
        dt = r.dt
        t0 = time.perf_counter()
        paced = self.scfg.paced
        frame_ticks = self._frame_ticks
        try:
            while not r.done:
                self._drain_inbox()
                if paced:
                    elapsed = time.perf_counter() - t0
                    target = min(r.n_ticks, int(elapsed / dt))
                else:
                    target = min(r.n_ticks, r.k + 4000)
                while r.k < target:
                    r.step_tick()
                    if r.k % frame_ticks == 0:
                        self._broadcast_frame()
                        self._emit_choice_results()
                if paced:
                    # after catching up: how far the simulation still trails
                    # the wall clock (positive lag means we cannot keep pace)
                    lag = (time.perf_counter() - t0) - r.k * dt
                    if lag > self.max_drift_s and not r.done:
                        self.max_drift_s = lag
                    await asyncio.sleep(dt)
                else:
                    await asyncio.sleep(0)
            self._emit_choice_results()
            degraded = any(a.degraded for a in self.inputs.values())
            self.log = r.finalize(degraded=degraded)
            summary = {
                "n_choices": len(self.results),
                "mean_rms_mm": float(np.mean([c.rms_mm for c in self.log.choices]))
                if self.log.choices else None,
                "degraded": degraded,
                "max_drift_ms": self.max_drift_s * 1000.0,
            }
            text = encode_message(End(report_summary=summary))
            for lane in list(self.clients):
                self._push(lane, text)
            if self.scfg.out_dir:
                os.makedirs(self.scfg.out_dir, exist_ok=True)
                base = os.path.join(self.scfg.out_dir, f"session_{self.session_id}")
                save_log(self.log, base + ".jsonl", decimate=self.scfg.decimate)
                with open(base + ".inputs.json", "w") as fh:
                    json.dump({"inputs": {str(lane): agent.inputs
                                          for lane, agent in self.inputs.items()}},
                              fh, sort_keys=True)
        finally:
            self.done.set()


def replay_trial(exp: ExperimentConfig, scfg: SessionConfig,
                 inputs: dict[int, list[tuple[int, float]]]):
    """Headless re-run of a session from its recorded input stream."""
    runner, agents = build_runner(exp, scfg)
    streams = {lane: list(vals) for lane, vals in inputs.items()}
    cursors = {lane: 0 for lane in streams}
    runner.begin()
    while not runner.done:
        k = runner.k
        for lane, stream in streams.items():
            i = cursors[lane]
            while i < len(stream) and stream[i][0] <= k:
                agents[lane].set_pointer(stream[i][0], stream[i][1])
                i += 1
            cursors[lane] = i
        runner.step_tick()
    return runner.finalize(degraded=any(a.degraded for a in agents.values()))


def create_app(exp: ExperimentConfig, scfg: SessionConfig | None = None):
    """FastAPI app exposing /healthz and the /session/{id} WebSocket."""
    scfg = scfg or SessionConfig()
    app = FastAPI(title="dyadsim session server")
    sessions: dict[str, SessionLoop] = {}
    app.state.sessions = sessions

    @app.get("/healthz")
    def healthz():
        active = sum(1 for s in sessions.values() if not s.done.is_set())
        return {"version": __version__, "proto_version": 1,
                "active_sessions": active}

    async def _error_close(sock, message: str):
        try:
            await sock.send_text(json.dumps({"type": "error", "message": message}))
            await sock.close()
        except Exception:
            pass

    @app.websocket("/session/{sid}")
    async def session_ws(sock: WebSocket, sid: str):
        await sock.accept()
        try:
            hello = decode_message(await sock.receive_text())
        except ProtocolError as exc:
            await _error_close(sock, str(exc))
            return
        if not isinstance(hello, Hello):
            await _error_close(sock, "expected a hello message")
            return
        loop = sessions.get(sid)
        if loop is None or loop.done.is_set():
            idx = len(sessions)
            loop = SessionLoop(exp, SessionConfig(**{**scfg.__dict__,
                                                     "session_index": idx}), sid)
            sessions[sid] = loop
            asyncio.get_running_loop().create_task(loop.run())
        try:
            lane = loop.claim_lane(hello.role)
        except ProtocolError as exc:
            await _error_close(sock, str(exc))
            return
        queue = loop.attach(lane)
        await sock.send_text(encode_message(
            Welcome(session=sid, script_preview=loop.script_preview())))

        async def reader():
            malformed = 0
            while True:
                text = await sock.receive_text()
                try:
                    msg = decode_message(text)
                except ProtocolError as exc:
                    malformed += 1
                    if malformed >= MALFORMED_LIMIT:
                        await _error_close(sock, f"too many malformed messages: {exc}")
                        return
                    continue
                if isinstance(msg, Input):
                    loop.inbox.put_nowait((lane, msg))

        async def writer():
            while True:
                text = await queue.get()
                await sock.send_text(text)

        tasks = [asyncio.create_task(reader()), asyncio.create_task(writer())]
        try:
            await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
        except WebSocketDisconnect:
            pass
        finally:
            for t in tasks:
                t.cancel()
            loop.detach(lane)

    return app


def serve(exp: ExperimentConfig, port: int = 8700,
          scfg: SessionConfig | None = None):  # pragma: no cover - manual entry
    """Run the session server until interrupted."""
    import uvicorn
    uvicorn.run(create_app(exp, scfg), host="127.0.0.1", port=port)
