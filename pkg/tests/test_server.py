import asyncio
import json

import numpy as np
import pytest
from starlette.testclient import TestClient

from conftest import short_trial
from dyadsim.harness import ALONE, HFOP, HRP, ExperimentConfig
from dyadsim.protocol import FrameMsg, Hello, Input, decode_message, encode_message
from dyadsim.server import (STALE_INPUT_TICKS, SessionConfig, SessionLoop,
                            build_runner, create_app, replay_trial)


def exp_cfg(seed=5, n_choices=2) -> ExperimentConfig:
    return ExperimentConfig(seed=seed, trial=short_trial(n_choices))


def test_no_client_session_matches_headless_run():
    exp = exp_cfg()
    scfg = SessionConfig(condition=ALONE, human_lanes=(), paced=False)

    async def go():
        loop = SessionLoop(exp, scfg, "t")
        await loop.run()
        return loop.log

    live = asyncio.run(go())
    headless = build_runner(exp, scfg)[0].run()
    assert np.array_equal(live.cursor, headless.cursor)
    assert live.choices == headless.choices


def test_scripted_client_replay_reproduces_trajectory():
    exp = exp_cfg()
    scfg = SessionConfig(condition=HRP, human_lanes=(1,), paced=False)

    async def go():
        loop = SessionLoop(exp, scfg, "t2")

        async def feeder():
            seq = 0
            while not loop.done.is_set():
                x = 22.0 * np.sin(seq * 0.21)
                loop.inbox.put_nowait((1, Input(seq=seq, t_client_ms=seq * 16.7,
                                                handle_x_mm=float(x))))
                seq += 1
                await asyncio.sleep(0)

        task = asyncio.get_event_loop().create_task(feeder())
        await loop.run()
        task.cancel()
        return loop

    loop = asyncio.run(go())
    assert loop.inputs[1].inputs, "client inputs were recorded"
    replayed = replay_trial(exp, scfg, {1: loop.inputs[1].inputs})
    assert np.max(np.abs(replayed.cursor - loop.log.cursor)) <= 0.1


def test_two_clients_receive_identical_cursor():
    exp = exp_cfg()
    scfg = SessionConfig(condition=HFOP, human_lanes=(1, 2), paced=False)

    async def go():
        loop = SessionLoop(exp, scfg, "t3")
        q1 = loop.attach(1)
        q2 = loop.attach(2)
        frames1, frames2 = {}, {}

        async def drain(q, store):
            while True:
                msg = decode_message(await q.get())
                if isinstance(msg, FrameMsg):
                    store[msg.t_ms] = msg

        d1 = asyncio.get_event_loop().create_task(drain(q1, frames1))
        d2 = asyncio.get_event_loop().create_task(drain(q2, frames2))
        await loop.run()
        await asyncio.sleep(0.01)
        d1.cancel()
        d2.cancel()
        return frames1, frames2

    frames1, frames2 = asyncio.run(go())
    shared = set(frames1) & set(frames2)
    assert len(shared) > 5
    for t in shared:
        assert frames1[t].cursor_x_mm == frames2[t].cursor_x_mm
        assert frames1[t].phase == frames2[t].phase


def test_stale_input_flags_degraded():
    exp = exp_cfg()
    scfg = SessionConfig(condition=ALONE, human_lanes=(1,), paced=False)

    async def go():
        loop = SessionLoop(exp, scfg, "t4")
        loop.inbox.put_nowait((1, Input(seq=0, t_client_ms=0.0, handle_x_mm=5.0)))
        await loop.run()
        return loop

    loop = asyncio.run(go())
    assert loop.log.degraded  # one input, then silence beyond the stale window
    assert STALE_INPUT_TICKS == 250


def test_session_log_and_inputs_written(tmp_path):
    exp = exp_cfg()
    scfg = SessionConfig(condition=ALONE, human_lanes=(), paced=False,
                         out_dir=str(tmp_path))

    async def go():
        loop = SessionLoop(exp, scfg, "t5")
        await loop.run()

    asyncio.run(go())
    assert (tmp_path / "session_t5.jsonl").exists()
    assert (tmp_path / "session_t5.inputs.json").exists()


def test_healthz_and_websocket_handshake():
    exp = exp_cfg()
    scfg = SessionConfig(condition=HRP, human_lanes=(1,), paced=False)
    app = create_app(exp, scfg)
    with TestClient(app) as client:
        health = client.get("/healthz").json()
        assert health["proto_version"] == 1
        assert health["active_sessions"] == 0
        with client.websocket_connect("/session/s1") as ws:
            ws.send_text(encode_message(Hello(role="p1", session="s1")))
            welcome = decode_message(ws.receive_text())
            assert welcome.session == "s1"
            # highlights are stripped from the preview
            for seg in welcome.script_preview["segments"]:
                assert "highlight_1" not in seg
            ws.send_text(encode_message(Input(seq=0, t_client_ms=0.0,
                                              handle_x_mm=3.0)))
            # the free-running session finishes quickly; read until the end
            saw_frame = saw_end = False
            for _ in range(2000):
                msg = decode_message(ws.receive_text())
                name = type(msg).__name__
                if name == "FrameMsg":
                    saw_frame = True
                if name == "End":
                    saw_end = True
                    break
            assert saw_frame and saw_end


def test_websocket_rejects_malformed_hello():
    exp = exp_cfg()
    app = create_app(exp, SessionConfig(condition=HRP, paced=False))
    with TestClient(app) as client:
        with client.websocket_connect("/session/sx") as ws:
            ws.send_text("{not json")
            reply = json.loads(ws.receive_text())
            assert reply["type"] == "error"


def test_websocket_rejects_unplayable_role():
    exp = exp_cfg()
    app = create_app(exp, SessionConfig(condition=HRP, human_lanes=(1,),
                                        paced=False))
    with TestClient(app) as client:
        with client.websocket_connect("/session/sy") as ws:
            ws.send_text(encode_message(Hello(role="p2", session="sy")))
            reply = json.loads(ws.receive_text())
            assert reply["type"] == "error"


def test_paced_loop_tracks_wall_clock():
    exp = ExperimentConfig(
        seed=5, trial=short_trial(2).__class__(trial_duration_s=7.5, n_choices=1))
    scfg = SessionConfig(condition=ALONE, human_lanes=(), paced=True)

    async def go():
        loop = SessionLoop(exp, scfg, "t6")
        import time
        t0 = time.perf_counter()
        await loop.run()
        return time.perf_counter() - t0, loop.max_drift_s

    elapsed, drift = asyncio.run(go())
    assert 7.0 < elapsed < 9.5  # wall-clock paced at 1 kHz
    assert drift < 0.05
