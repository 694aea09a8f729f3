"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Criteria 1-10 cover the
headless simulator; criterion 11 exercises the session protocol and the
input-replay path without a browser.
"""
import time

import numpy as np
import pytest

import dyadsim as ds
from conftest import short_trial
from dyadsim.harness import (ALONE, HFOP, HRP, ROBOT_ALONE, ExperimentConfig,
                             PassiveAgent, TrialRunner, _run_job, _schedule,
                             run_batch, run_experiment, run_trial)
from dyadsim.metrics import dominance, records_from_logs, t_test
from dyadsim.minjerk import min_jerk
from dyadsim.partner import (MODE_FOLLOWER, MODE_LEADER, PartnerConfig,
                             PartnerState, partner_step)
from dyadsim.pathgen import LEFT, NO_SIDE, RIGHT, Phase, generate_script
from dyadsim.predictors import (PredictorKind, WINDOWED_KINDS, estimate_velocity,
                                evaluate, first_crossing, predict,
                                windows_from_log)
from dyadsim.simcore import DyadState, SimParams, cursor_position, step_dyad

SEED = 11
X_MAX = 25.0


def _report(num, text):
    print(f"\nPASS criterion {num}: {text}")


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig(seed=SEED)


@pytest.fixture(scope="module")
def corpus_logs(cfg):
    # ~200 decided fork choices from synthetic-human dyads
    return run_batch(HFOP, 13, cfg)


@pytest.fixture(scope="module")
def corpus_windows(corpus_logs):
    windows = []
    for log in corpus_logs:
        windows.extend(windows_from_log(log))
    return windows


def test_criterion_1_minimum_jerk():
    t0 = time.perf_counter()
    cases = [(-3.0, 25.0, 0.7), (0.0, 25.0, 0.6), (10.0, -25.0, 1.0)]
    for x0, xf, T in cases:
        xs, vs = min_jerk(x0, xf, T, 0.0)
        xe, ve = min_jerk(x0, xf, T, T)
        assert abs(xs - x0) < 1e-9 and abs(vs) < 1e-9
        assert abs(xe - xf) < 1e-9 and abs(ve) < 1e-9
        xm, _ = min_jerk(x0, xf, T, T / 2.0)
        assert xm == (x0 + xf) / 2.0  # s(0.5) = 0.5 exactly
        h = 1e-6
        for tau in np.linspace(0.05, 0.95, 19):
            t = tau * T
            _, v = min_jerk(x0, xf, T, t)
            xa, _ = min_jerk(x0, xf, T, t - h)
            xb, _ = min_jerk(x0, xf, T, t + h)
            fd = (xb - xa) / (2 * h)
            assert v == pytest.approx(fd, rel=1e-6, abs=1e-6)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report(1, f"minimum-jerk endpoints/midpoint/velocity ({elapsed:.2f}s)")


def test_criterion_2_dynamics():
    t0 = time.perf_counter()
    # mean-cursor identity, exact, on 1e6 random states
    rng = np.random.default_rng(SEED)
    xs = rng.uniform(-40.0, 40.0, size=(1_000_000, 2))
    mism = 0
    for x1, x2 in xs:
        if cursor_position(DyadState(x1=x1, x2=x2)) != (x1 + x2) / 2.0:
            mism += 1
    assert mism == 0
    # rigid coupling under opposing 5 N steps
    p = SimParams()
    s = DyadState()
    for _ in range(3000):
        s = step_dyad(s, 5.0, -5.0, p)
    stretch = abs(s.x1 - s.x2)
    assert stretch < 0.5
    # deterministic replay, bit-identical full trial
    script = generate_script(7)
    a = run_trial(HFOP, script, p, PartnerConfig(), ds.SurrogateConfig(), seed=SEED)
    b = run_trial(HFOP, script, p, PartnerConfig(), ds.SurrogateConfig(), seed=SEED)
    for name in ("x1", "x2", "v1", "v2", "f1", "f2", "f_couple", "cursor"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(2, f"mean-cursor exact on 1e6 states, stretch {stretch:.3f} mm < 0.5, "
               f"replay bit-identical ({elapsed:.1f}s)")


def test_criterion_3_predictor_oracles():
    t0 = time.perf_counter()
    import math
    from dyadsim.predictors import ChoiceWindow
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        cursor = np.cumsum(rng.normal(0, 0.4, 901)) + rng.normal(0, 4)
        forces = rng.normal(0, 1, 901)
        x1 = cursor + rng.normal(0, 1, 901)
        x2 = cursor - rng.normal(0, 1, 901)
        ext1 = x1[-1] + np.cumsum(rng.normal(0, 0.5, 300))
        ext2 = x2[-1] + np.cumsum(rng.normal(0, 0.5, 300))
        w = ChoiceWindow(
            t_start_s=0.0, t_stop_s=0.9, dt_s=0.001, cursor=cursor,
            x1=x1, x2=x2, velocity=estimate_velocity(cursor, 0.001),
            force_sum=forces, truth=RIGHT, x1_ext=ext1, x2_ext=ext2)
        n = w.n
        # exactly rounded sums over the reversed series
        mean_c = math.fsum(cursor[::-1]) / n
        oracle = {
            PredictorKind.XT: cursor[-1],
            PredictorKind.XM: mean_c,
            PredictorKind.VT: w.velocity[-1],
            PredictorKind.VM: math.fsum(w.velocity[::-1]) / n,
            PredictorKind.FM: math.fsum(forces[::-1]) / n,
            PredictorKind.SRMS: math.fsum(
                (v - mean_c) * abs(v - mean_c) for v in cursor[::-1]) / n,
        }
        # 1e-12 relative at the statistic's own scale: exact cancellations
        # near zero are compared against the window magnitude instead
        scale = float(np.max(np.abs(cursor)))
        for kind in WINDOWED_KINDS:
            got = predict(kind, w).statistic
            want = oracle[kind]
            worst = max(worst, abs(got - want) / max(abs(want), scale))
        # exhaustive first-crossing scan
        got = first_crossing(w)
        want_dir, want_t = NO_SIDE, None
        ax1 = np.concatenate([x1, ext1])
        ax2 = np.concatenate([x2, ext2])
        for k in range(len(ax1)):
            va, vb = ax1[k], ax2[k]
            if abs(va) > 7.5 or abs(vb) > 7.5:
                pick = va if abs(va) >= abs(vb) else vb
                want_dir, want_t = (RIGHT if pick > 0 else LEFT), k * 0.001
                break
        assert got.direction == want_dir
        if want_t is not None:
            assert got.decision_time_s == want_t
    assert worst < 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(3, f"six statistics vs brute force (worst rel err {worst:.1e}), "
               f"first crossing exact on 1000 windows ({elapsed:.1f}s)")


def _scripted_partner(cursor_fn, force_fn, cfg_p, n=1000):
    from dyadsim.harness import Obs
    state = PartnerState(0.001)
    rng = np.random.default_rng(0)
    modes = []
    for k in range(n):
        t = k * 0.001
        obs = Obs()
        obs.k = k
        obs.t = t
        obs.phase = int(Phase.CHOICE_PRE)
        obs.choice_idx = 0
        obs.choice_t0 = 0.0
        obs.target_l = obs.target_r = 0.0
        obs.tvel_l = obs.tvel_r = 0.0
        obs.cursor = cursor_fn(t)
        obs.cursor_v = 0.0
        obs.own_x = 0.0
        obs.own_v = 0.0
        obs.f_int = force_fn(t, state)
        obs.highlight = RIGHT
        partner_step(state, obs, cfg_p, rng)
        modes.append(state.mode)
    return state, modes


def test_criterion_4_state_machine_scenarios():
    t0 = time.perf_counter()
    cfg_p = PartnerConfig()
    # (a) human initiative at 0.4 s, drawn start later: follower from 0.401 s
    state, modes = _scripted_partner(lambda t: 8.0 if t >= 0.4 else 0.0,
                                     lambda t, s: 0.0, cfg_p)
    assert all(m == MODE_FOLLOWER for m in modes[401:])
    assert MODE_LEADER not in modes
    # (b) no human motion: leader at the drawn time, within one tick
    state, modes = _scripted_partner(lambda t: 0.0, lambda t, s: 0.0, cfg_p)
    k_lead = modes.index(MODE_LEADER)
    assert abs(k_lead * 0.001 - state.start_time_s) <= 0.001 + 1e-9
    # (c) 0.7 N / 0.2 s yield, with the 0.15 s non-yield control
    def f_sustained(t, s):
        return -0.8 if s.mode == MODE_LEADER and t < 0.99 else 0.0

    state, modes = _scripted_partner(lambda t: 0.0, f_sustained, cfg_p)
    k_lead = modes.index(MODE_LEADER)
    k_follow = modes.index(MODE_FOLLOWER)
    assert k_follow - k_lead == 200  # exactly yield_duration at 1 kHz

    def f_brief(t, s):
        if s.mode == MODE_LEADER and s.leader_entry_s is not None:
            if t - s.leader_entry_s < 0.15:
                return -0.8
        return 0.0

    state, modes = _scripted_partner(lambda t: 0.0, f_brief, cfg_p)
    assert MODE_FOLLOWER not in modes
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(4, f"initiative->follower, leader at drawn time, 0.7N/0.2s yield "
               f"with 0.15s control ({elapsed:.1f}s)")


def test_criterion_5_dominance(cfg):
    t0 = time.perf_counter()
    logs = run_batch(HRP, 25, cfg)  # 400 simulated fork decisions
    records = records_from_logs(logs)
    assert len(records) == 400
    frac = dominance(records)
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    assert 0.51 <= frac <= 0.81
    _report(5, f"human-lead fraction {frac:.3f} in 0.66 +/- 0.15 over 400 "
               f"choices ({elapsed:.0f}s)")


def _completion_time(log, choice):
    k0 = int(round(choice.t0_s / log.dt_s))
    k1 = int(round(choice.t_merge_s / log.dt_s))
    hit = np.nonzero(np.abs(log.cursor[k0:k1 + 1]) >= 0.9 * X_MAX)[0]
    return hit[0] * log.dt_s if len(hit) else None


def test_criterion_6_first_crossing_lead_time(corpus_logs):
    from dyadsim.pathgen import actual_direction
    from dyadsim.predictors import extract_window
    n_called = 0
    n_ok = 0
    leads = []
    for log in corpus_logs:
        for choice in log.script.choices:
            if actual_direction(log, choice) == NO_SIDE:
                continue
            p = first_crossing(extract_window(log, choice))
            if not p.called:
                continue
            n_called += 1
            done = _completion_time(log, choice)
            if done is None:
                continue
            lead = done - p.decision_time_s
            leads.append(lead)
            if lead >= 0.1:
                n_ok += 1
    assert n_called >= 180
    frac = n_ok / n_called
    mean_lead = float(np.mean(leads))
    assert frac >= 0.90
    assert mean_lead >= 0.15
    _report(6, f"crossing precedes completion by >=0.1s in {frac:.1%} of "
               f"{n_called} called choices, mean lead {mean_lead:.2f}s")


def test_criterion_7_predictor_ordering(corpus_windows):
    truths = [w.truth for w in corpus_windows]
    acc = {}
    for kind in (PredictorKind.XT, PredictorKind.SRMS):
        preds = [predict(kind, w) for w in corpus_windows]
        acc[kind.value] = evaluate(preds, truths).accuracy
    crossings = [first_crossing(w) for w in corpus_windows]
    acc["1C"] = evaluate(crossings, truths).accuracy
    assert acc["1C"] > acc["XT"] > acc["SRMS"]
    assert acc["SRMS"] < 0.65
    _report(7, f"1C {acc['1C']:.3f} > XT {acc['XT']:.3f} > SRMS "
               f"{acc['SRMS']:.3f} (< 0.65) on {len(corpus_windows)} choices")


def test_criterion_8_metrics(corpus_logs):
    from dyadsim.metrics import apply_performance
    records = records_from_logs(corpus_logs)
    apply_performance(records)
    assert all(0.0 <= r.performance <= 1.0 for r in records)
    t, p = t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert t == pytest.approx(-1.0, abs=1e-12)
    assert p == pytest.approx(0.3466, abs=5e-4)
    rng = np.random.default_rng(SEED)
    rejections = 0
    for _ in range(1000):
        a = rng.normal(0, 1, 20)
        b = rng.normal(0, 1, 20)
        if t_test(a, b)[1] < 0.05:
            rejections += 1
    rate = rejections / 1000
    assert 0.03 <= rate <= 0.07
    _report(8, f"performance in [0,1] on {len(records)} records, fixture "
               f"t={t:.3f} p={p:.4f}, calibration {rate:.1%} rejections")


def test_criterion_9_robot_alone_between_conditions(cfg):
    t0 = time.perf_counter()
    batch_cfg = ExperimentConfig(**{**cfg.__dict__, "n_jobs": 2})
    means = {}
    all_records = []
    per_cond = {}
    for cond in (ALONE, ROBOT_ALONE, HFOP):
        logs = run_batch(cond, 50, batch_cfg, salt=900)
        recs = records_from_logs(logs)
        per_cond[cond] = recs
        all_records.extend(recs)
    from dyadsim.metrics import apply_performance
    apply_performance(all_records)
    for cond, recs in per_cond.items():
        means[cond] = float(np.mean([r.performance for r in recs]))
    elapsed = time.perf_counter() - t0
    assert means[HFOP] < means[ROBOT_ALONE] < means[ALONE]
    _report(9, f"mean performance HFOP {means[HFOP]:.3f} < ROBOT_ALONE "
               f"{means[ROBOT_ALONE]:.3f} < ALONE {means[ALONE]:.3f} "
               f"over 50 trials each ({elapsed:.0f}s)")


def test_criterion_10_harness_bookkeeping(tmp_path):
    cfg1 = ExperimentConfig(seed=3, out_dir=str(tmp_path / "one"))
    jobs = _schedule(cfg1)
    assert len(jobs) == 10  # 6 slots; HRP and ALONE carry two subject lanes
    logs = [_run_job(cfg1, j) for j in jobs]
    for log in logs:
        assert log.n_frames == 120_001
        assert len(log.choices) == 16
    analysed = [log for log, job in zip(logs, jobs) if not job[4]]
    assert len(analysed) == 5  # training trials excluded from analysis
    report1 = run_experiment(cfg1)
    assert report1["choice_counts"] == {ALONE: 32, HFOP: 16, HRP: 32}
    cfg2 = ExperimentConfig(seed=3, out_dir=str(tmp_path / "two"))
    run_experiment(cfg2)
    a = (tmp_path / "one" / "report.json").read_bytes()
    b = (tmp_path / "two" / "report.json").read_bytes()
    assert a == b
    _report(10, "6-trial schedule: 16 choices and 120001 frames per trial, "
                "training excluded, reports bit-identical under replay")


def test_criterion_11_protocol_and_replay():
    # [SECONDARY]: wire-format round-trip and headless input replay
    from test_protocol import VARIANTS, _random_message
    from dyadsim.protocol import decode_message, encode_message
    for msg in VARIANTS:
        assert decode_message(encode_message(msg)) == msg
    rng = np.random.default_rng(SEED)
    for _ in range(1000):
        msg = _random_message(rng)
        assert decode_message(encode_message(msg)) == msg

    import asyncio
    from dyadsim.protocol import Input
    from dyadsim.server import SessionConfig, SessionLoop, replay_trial
    exp = ExperimentConfig(seed=5, trial=short_trial(2))
    scfg = SessionConfig(condition=HRP, human_lanes=(1,), paced=False)

    async def go():
        loop = SessionLoop(exp, scfg, "acc")

        async def feeder():
            seq = 0
            while not loop.done.is_set():
                x = 20.0 * np.sin(seq * 0.18)
                loop.inbox.put_nowait((1, Input(seq=seq, t_client_ms=seq * 16.7,
                                                handle_x_mm=float(x))))
                seq += 1
                await asyncio.sleep(0)

        task = asyncio.get_event_loop().create_task(feeder())
        await loop.run()
        task.cancel()
        return loop

    loop = asyncio.run(go())
    replayed = replay_trial(exp, scfg, {1: loop.inputs[1].inputs})
    diff = float(np.max(np.abs(replayed.cursor - loop.log.cursor)))
    assert diff <= 0.1
    _report(11, f"all message variants + 1000 fuzzed round-trip, replay "
                f"max deviation {diff:.2e} mm <= 0.1")
