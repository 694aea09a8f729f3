"""Statistical leader/follower partner for the fork-decision tracking task.

The partner defaults to letting its human side lead. At each fork it draws a
start time from (fitted) human timing statistics, waits for human initiative,
and otherwise leads along its own minimum-jerk reach. A sustained interaction
force above threshold makes a Leader yield; a Follower re-plans toward the
side the force points to. Outside forks it tracks the path at reduced
stiffness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .minjerk import min_jerk
from .pathgen import LEFT, NO_SIDE, RIGHT, Phase

MODE_IDLE = 0
MODE_WAITING = 1
MODE_LEADER = 2
MODE_FOLLOWER = 3

MODE_NAMES = {MODE_IDLE: "idle", MODE_WAITING: "waiting",
              MODE_LEADER: "leader", MODE_FOLLOWER: "follower"}

MM_PER_M = 1000.0

YIELD_PROGRESS_V_MM_S = 5.0  # cursor speed toward own side that counts as progress
YIELD_AHEAD_MARGIN_MM = 1.0  # cursor this far onto own side = currently winning
EMA_TAU_S = 0.15             # smoothing of the cursor cues feeding the yield gate


def losing_ground(side: int, cursor_rel_mm: float, cursor_v_mm_s: float) -> bool:
    """True when the cursor is neither moving toward side nor sitting on that
    side of center: the precondition for letting a sustained interaction force
    actually trigger a yield, as opposed to transient drag from a lagging
    partner or a stalled negotiation the agent is currently winning."""
    return (side * cursor_v_mm_s < YIELD_PROGRESS_V_MM_S
            and side * cursor_rel_mm < YIELD_AHEAD_MARGIN_MM)


@dataclass(frozen=True)
class PartnerConfig:
    """Timing, yielding and tracking parameters of the robotic partner."""

    start_time_mean_s: float = 0.55
    start_time_std_s: float = 0.12
    start_time_mean_uninformed_s: float = 0.90
    start_time_std_uninformed_s: float = 0.15
    start_time_min_s: float = 0.15
    start_time_max_s: float = 0.95
    force_threshold_n: float = 0.7
    yield_duration_s: float = 0.2
    initiative_fraction: float = 0.3
    body_stiffness_scale: float = 0.4
    waiting_stiffness_scale: float = 0.08
    kp_n_per_m: float = 400.0
    kd_n_s_per_m: float = 10.0
    plan_duration_s: float = 0.7
    plan_target_mm: float = 25.0
    force_limit_n: float = 5.0

    def __post_init__(self):
        if self.force_threshold_n <= 0.0:
            raise ValueError("force_threshold_n must be > 0")
        if self.yield_duration_s <= 0.0:
            raise ValueError("yield_duration_s must be > 0")
        if not 0.0 < self.initiative_fraction < 1.0:
            raise ValueError("initiative_fraction must be in (0, 1)")
        if not 0.0 < self.body_stiffness_scale < 1.0:
            raise ValueError("body_stiffness_scale must be in (0, 1)")
        if self.start_time_mean_uninformed_s <= self.start_time_mean_s:
            raise ValueError("uninformed start time mean must exceed informed mean")
        if self.plan_duration_s <= 0.0:
            raise ValueError("plan_duration_s must be > 0")


@dataclass(frozen=True)
class PlannedTrajectory:
    """One minimum-jerk reach; evaluation clamps to the endpoints."""

    x0_mm: float
    xf_mm: float
    t0_s: float
    duration_s: float
    side: int

    def eval(self, t_s: float) -> tuple[float, float]:
        return min_jerk(self.x0_mm, self.xf_mm, self.duration_s, t_s - self.t0_s)


class PartnerState:
    """Mutable per-trial state; single-owner, advanced one tick at a time."""

    __slots__ = (
        "mode", "dt_s", "choice_idx", "choice_t0_s", "side", "informed",
        "start_time_s", "start_cursor_mm", "plan", "exceed_ticks",
        "yield_ticks", "leader_entry_s", "follow_entry_s", "ema_rel",
        "ema_v", "ema_alpha", "events",
    )

    def __init__(self, dt_s: float = 0.001):
        self.mode = MODE_IDLE
        self.dt_s = dt_s
        self.choice_idx = -1
        self.choice_t0_s = 0.0
        self.side = NO_SIDE
        self.informed = False
        self.start_time_s = 0.0
        self.start_cursor_mm = 0.0
        self.plan: PlannedTrajectory | None = None
        self.exceed_ticks = 0
        self.yield_ticks = 1
        self.leader_entry_s: float | None = None
        self.follow_entry_s: float | None = None
        self.ema_rel = 0.0
        self.ema_v = 0.0
        self.ema_alpha = math.exp(-dt_s / EMA_TAU_S)
        self.events: list[dict] = []

    @property
    def accumulator_s(self) -> float:
        return self.exceed_ticks * self.dt_s


def draw_start_time(rng, cfg: PartnerConfig, informed: bool) -> float:
    """Normal start-time draw, truncated into the configured bracket."""
    if informed:
        t = rng.normal(cfg.start_time_mean_s, cfg.start_time_std_s)
    else:
        t = rng.normal(cfg.start_time_mean_uninformed_s, cfg.start_time_std_uninformed_s)
    return float(min(max(t, cfg.start_time_min_s), cfg.start_time_max_s))


def detect_initiative(cursor, start_x_mm: float, target_x_mm: float, cfg: PartnerConfig,
                      dt_s: float = 0.001, t0_s: float = 0.0):
    """Earliest cursor displacement beyond the initiative fraction of the
    start-to-target distance. Returns (direction, t_s) or None."""
    dist = abs(target_x_mm - start_x_mm)
    if dist <= 0.0:
        raise ValueError("start and target coincide")
    th = cfg.initiative_fraction * dist
    for k, c in enumerate(cursor):
        disp = c - start_x_mm
        if abs(disp) > th:
            return (RIGHT if disp > 0 else LEFT, t0_s + k * dt_s)
    return None


def _close_choice(state: PartnerState):
    if state.choice_idx >= 0:
        state.events.append({
            "choice": state.choice_idx,
            "informed": state.informed,
            "side": state.side,
            "drawn_start_s": state.start_time_s,
            "initiative_s": state.leader_entry_s,
            "onset_s": _first_time(state.leader_entry_s, state.follow_entry_s),
            "mode_final": MODE_NAMES[state.mode],
        })
    state.choice_idx = -1
    state.mode = MODE_IDLE
    state.plan = None


def _first_time(a: float | None, b: float | None) -> float | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _open_choice(state: PartnerState, obs, cfg: PartnerConfig, rng):
    state.choice_idx = obs.choice_idx
    state.choice_t0_s = obs.choice_t0
    state.informed = obs.highlight != NO_SIDE
    if state.informed:
        state.side = obs.highlight
    else:
        state.side = RIGHT if rng.random() < 0.5 else LEFT
    state.start_time_s = draw_start_time(rng, cfg, state.informed)
    state.start_cursor_mm = obs.cursor
    state.mode = MODE_WAITING
    state.plan = None
    state.exceed_ticks = 0
    state.yield_ticks = max(1, int(round(cfg.yield_duration_s / state.dt_s)))
    state.leader_entry_s = None
    state.follow_entry_s = None
    state.ema_rel = 0.0
    state.ema_v = 0.0


def _enter_follower(state: PartnerState, obs, cfg: PartnerConfig, side: int, tc: float):
    state.mode = MODE_FOLLOWER
    state.side = side
    state.plan = PlannedTrajectory(obs.own_x, side * cfg.plan_target_mm,
                                   obs.t, cfg.plan_duration_s, side)
    if state.follow_entry_s is None:
        state.follow_entry_s = tc
    state.exceed_ticks = 0


def partner_step(state: PartnerState, obs, cfg: PartnerConfig, rng) -> tuple[float, PartnerState]:
    """Advance the partner one tick; returns (force command N, state).

    Must be called once per simulation tick. The state is mutated in place
    and returned for convenience.
    """
    phase = obs.phase
    active = obs.choice_idx if (phase == Phase.CHOICE_PRE or phase == Phase.CHOICE_POST) else -1
    if active != state.choice_idx:
        _close_choice(state)
        if active >= 0:
            _open_choice(state, obs, cfg, rng)

    mode = state.mode
    if mode == MODE_WAITING:
        tc = obs.t - state.choice_t0_s
        disp = obs.cursor - state.start_cursor_mm
        if abs(disp) > cfg.initiative_fraction * cfg.plan_target_mm:
            _enter_follower(state, obs, cfg, RIGHT if disp > 0 else LEFT, tc)
        elif tc >= state.start_time_s:
            state.mode = MODE_LEADER
            state.leader_entry_s = tc
            state.plan = PlannedTrajectory(obs.own_x, state.side * cfg.plan_target_mm,
                                           obs.t, cfg.plan_duration_s, state.side)
    elif mode == MODE_LEADER or mode == MODE_FOLLOWER:
        a = state.ema_alpha
        state.ema_rel = a * state.ema_rel + (1.0 - a) * (obs.cursor - state.start_cursor_mm)
        state.ema_v = a * state.ema_v + (1.0 - a) * obs.cursor_v
        f = obs.f_int
        if f >= cfg.force_threshold_n or -f >= cfg.force_threshold_n:
            state.exceed_ticks += 1
        else:
            state.exceed_ticks = 0
        if mode == MODE_LEADER:
            fire = (state.exceed_ticks >= state.yield_ticks
                    and losing_ground(state.side, state.ema_rel, state.ema_v))
        else:
            # a follower defers to any sustained demand unless the cursor is
            # still actively progressing (drag from a lagging partner)
            fire = (state.exceed_ticks >= state.yield_ticks
                    and state.side * state.ema_v < YIELD_PROGRESS_V_MM_S)
        if fire:
            side = RIGHT if f > 0 else LEFT
            tc = obs.t - state.choice_t0_s
            if mode == MODE_LEADER:
                _enter_follower(state, obs, cfg, side, tc)
            elif side != state.side:
                # follower re-plans from its current position toward the
                # side the sustained force points to
                state.side = side
                state.plan = PlannedTrajectory(obs.own_x, side * cfg.plan_target_mm,
                                               obs.t, cfg.plan_duration_s, side)
                state.exceed_ticks = 0
            else:
                state.exceed_ticks = 0

    # force command
    kp = cfg.kp_n_per_m
    kd = cfg.kd_n_s_per_m
    mode = state.mode
    if mode == MODE_LEADER:
        xd, vd = state.plan.eval(obs.t)
    elif mode == MODE_FOLLOWER:
        xd, vd = state.plan.eval(obs.t)
        kp *= cfg.body_stiffness_scale
        kd *= cfg.body_stiffness_scale
    elif mode == MODE_WAITING:
        # hold the lead-in line relaxed so a deciding human can pull freely
        xd, vd = obs.target_l, obs.tvel_l
        kp *= cfg.waiting_stiffness_scale
        kd *= cfg.waiting_stiffness_scale
    else:
        # path tracking at reduced stiffness: nearest branch, or the single path
        tl = obs.target_l
        tr = obs.target_r
        if tl == tr or abs(obs.own_x - tl) <= abs(obs.own_x - tr):
            xd, vd = tl, obs.tvel_l
        else:
            xd, vd = tr, obs.tvel_r
        kp *= cfg.body_stiffness_scale
        kd *= cfg.body_stiffness_scale
    f = (kp * (xd - obs.own_x) + kd * (vd - obs.own_v)) / MM_PER_M
    lim = cfg.force_limit_n
    if f > lim:
        f = lim
    elif f < -lim:
        f = -lim
    return f, state


def finish_trial(state: PartnerState):
    """Close any open choice at trial end so its event is recorded."""
    _close_choice(state)
