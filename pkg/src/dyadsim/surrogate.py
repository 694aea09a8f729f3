"""Synthetic human agent for desk-scale closed-loop runs.

A PD tracker with human-like timing: it follows the path between forks,
relaxes to a loose hover during the fork lead-in, then reaches for its
highlighted (or guessed) side with a minimum-jerk profile after a drawn start
time. Postural sway, motor noise and occasional brief wrong-way hesitations
give the cursor the low-amplitude wander real subjects produce.

Negotiation: an uninformed agent joins an already-moving cursor instead of
guessing; a sustained opposing interaction force, felt while the cursor is
not progressing toward the agent's own side, makes it yield after a
stubbornness interval plus a reaction delay. An agent that finds itself
fighting an established flow persists for only a fraction of its normal
stubbornness, so initiative tends to win negotiations. All parameters are
invented, config-exposed defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.signal import lfilter

from .minjerk import min_jerk
from .pathgen import LEFT, NO_SIDE, RIGHT, Phase
from .partner import EMA_TAU_S, PlannedTrajectory, losing_ground

MM_PER_M = 1000.0
CHALLENGE_MARGIN_MM = 0.5    # cursor this far beyond center on the far side = established flow
CONCEDE_AFTER_FACTOR = 2.0   # pressed this many stubbornness spans, an agent gives in anyway


@dataclass(frozen=True)
class SurrogateConfig:
    """Tracking, timing and compliance parameters of the synthetic human."""

    kp_n_per_m: float = 400.0
    kd_n_s_per_m: float = 12.0
    motor_noise_std_n: float = 0.1
    sway_std_mm: float = 4.0
    sway_tau_s: float = 0.4
    start_time_mean_s: float = 0.45
    start_time_std_s: float = 0.15
    start_time_mean_uninformed_s: float = 0.85
    start_time_std_uninformed_s: float = 0.15
    start_time_min_s: float = 0.10
    start_time_max_s: float = 1.20
    reaction_delay_mean_s: float = 0.10
    reaction_delay_std_s: float = 0.03
    compliance_threshold_n: float = 0.6
    stubbornness_s: float = 1.1
    stubbornness_std_s: float = 0.25
    plan_duration_s: float = 1.0
    plan_target_mm: float = 25.0
    hesitation_prob: float = 0.45
    hesitation_amp_mm: float = 6.0
    hesitation_dur_s: float = 0.55
    hover_stiffness_scale: float = 0.05
    adopt_fraction: float = 0.3
    challenge_stubbornness_scale: float = 1.0
    pace_threshold_n: float = 0.3
    force_limit_n: float = 5.0

    def __post_init__(self):
        for name in ("motor_noise_std_n", "sway_std_mm", "start_time_std_s",
                     "start_time_std_uninformed_s", "reaction_delay_std_s",
                     "stubbornness_std_s"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.kp_n_per_m <= 0.0 or self.kd_n_s_per_m <= 0.0:
            raise ValueError("tracking gains must be > 0")
        if self.compliance_threshold_n <= 0.0:
            raise ValueError("compliance_threshold_n must be > 0")
        if not 0.0 <= self.hesitation_prob <= 1.0:
            raise ValueError("hesitation_prob must be in [0, 1]")
        if self.start_time_mean_uninformed_s <= self.start_time_mean_s:
            raise ValueError("uninformed start time mean must exceed informed mean")
        if not 0.0 < self.challenge_stubbornness_scale <= 1.0:
            raise ValueError("challenge_stubbornness_scale must be in (0, 1]")


class SurrogateState:
    """Mutable per-trial state; single-owner, advanced one tick at a time."""

    __slots__ = (
        "dt_s", "choice_idx", "choice_t0_s", "side", "informed", "start_time_s",
        "start_cursor_mm", "plan", "yielded", "exceed_ticks", "stubborn_base_ticks",
        "stubborn_limit_ticks", "reaction_ticks", "pending_side", "pending_ticks",
        "hesitating", "committed", "adopted", "challenging", "onset_s",
        "initiative_s", "plan_elapsed_s", "ema_rel", "ema_v", "ema_f",
        "ema_alpha", "sway", "noise", "events",
    )

    def __init__(self, dt_s: float = 0.001):
        self.dt_s = dt_s
        self.choice_idx = -1
        self.choice_t0_s = 0.0
        self.side = NO_SIDE
        self.informed = False
        self.start_time_s = 0.0
        self.start_cursor_mm = 0.0
        self.plan: PlannedTrajectory | None = None
        self.yielded = False
        self.exceed_ticks = 0
        self.stubborn_base_ticks = 1
        self.stubborn_limit_ticks = 1
        self.reaction_ticks = 0
        self.pending_side = NO_SIDE
        self.pending_ticks = 0
        self.hesitating = False
        self.committed = False
        self.adopted = False
        self.challenging = False
        self.onset_s: float | None = None
        self.initiative_s: float | None = None
        self.plan_elapsed_s = 0.0
        self.ema_rel = 0.0
        self.ema_v = 0.0
        self.ema_f = 0.0
        self.ema_alpha = math.exp(-dt_s / EMA_TAU_S)
        self.sway = [0.0]
        self.noise = [0.0]
        self.events: list[dict] = []


def begin_trial(state: SurrogateState, n_ticks: int, cfg: SurrogateConfig, rng):
    """Pre-draw the per-tick noise series for one trial (deterministic under rng)."""
    n = n_ticks + 1
    if cfg.sway_std_mm > 0.0:
        a = math.exp(-state.dt_s / cfg.sway_tau_s)
        sigma = cfg.sway_std_mm * math.sqrt(1.0 - a * a)
        white = rng.standard_normal(n)
        state.sway = lfilter([sigma], [1.0, -a], white).tolist()
    else:
        rng.standard_normal(n)  # keep the stream layout fixed
        state.sway = [0.0] * n
    if cfg.motor_noise_std_n > 0.0:
        state.noise = (rng.standard_normal(n) * cfg.motor_noise_std_n).tolist()
    else:
        rng.standard_normal(n)
        state.noise = [0.0] * n


def _draw_start(rng, cfg: SurrogateConfig, informed: bool) -> float:
    if informed:
        t = rng.normal(cfg.start_time_mean_s, cfg.start_time_std_s)
    else:
        t = rng.normal(cfg.start_time_mean_uninformed_s, cfg.start_time_std_uninformed_s)
    return float(min(max(t, cfg.start_time_min_s), cfg.start_time_max_s))


def _close_choice(state: SurrogateState):
    if state.choice_idx >= 0:
        state.events.append({
            "choice": state.choice_idx,
            "informed": state.informed,
            "side": state.side,
            "drawn_start_s": state.start_time_s,
            "initiative_s": state.initiative_s,
            "onset_s": state.onset_s,
            "yielded": state.yielded,
            "adopted": state.adopted,
            "challenging": state.challenging,
        })
    state.choice_idx = -1
    state.plan = None


def _open_choice(state: SurrogateState, obs, cfg: SurrogateConfig, rng):
    state.choice_idx = obs.choice_idx
    state.choice_t0_s = obs.choice_t0
    state.informed = obs.highlight != NO_SIDE
    state.side = obs.highlight if state.informed else (RIGHT if rng.random() < 0.5 else LEFT)
    state.start_time_s = _draw_start(rng, cfg, state.informed)
    state.start_cursor_mm = obs.cursor
    state.plan = None
    state.yielded = False
    state.exceed_ticks = 0
    state.stubborn_base_ticks = max(1, int(round(
        max(0.0, rng.normal(cfg.stubbornness_s, cfg.stubbornness_std_s)) / state.dt_s)))
    state.stubborn_limit_ticks = state.stubborn_base_ticks
    state.reaction_ticks = max(0, int(round(
        max(0.0, rng.normal(cfg.reaction_delay_mean_s, cfg.reaction_delay_std_s)) / state.dt_s)))
    state.pending_side = NO_SIDE
    state.pending_ticks = 0
    state.hesitating = rng.random() < cfg.hesitation_prob
    state.committed = False
    state.adopted = False
    state.challenging = False
    state.onset_s = None
    state.initiative_s = None
    state.plan_elapsed_s = 0.0
    state.ema_rel = 0.0
    state.ema_v = 0.0
    state.ema_f = 0.0


def _commit(state: SurrogateState, obs, cfg: SurrogateConfig):
    """Lock in a side at the drawn start time.

    An uninformed agent whose cursor has already moved beyond the adoption
    threshold joins that side (a visual follow, not its own initiative)."""
    state.committed = True
    tc = obs.t - state.choice_t0_s
    adopt_th = cfg.adopt_fraction * cfg.plan_target_mm
    rel = obs.cursor - state.start_cursor_mm
    moving = RIGHT if rel > adopt_th else (LEFT if rel < -adopt_th else NO_SIDE)
    if not state.informed and moving != NO_SIDE:
        state.side = moving
        state.adopted = True
        state.hesitating = False
        state.onset_s = tc
        return
    state.onset_s = tc
    state.initiative_s = tc


def _yield_now(state: SurrogateState, obs, cfg: SurrogateConfig, tc: float):
    side = state.pending_side
    state.side = side
    state.plan = PlannedTrajectory(obs.own_x, side * cfg.plan_target_mm,
                                   obs.t, cfg.plan_duration_s, side)
    state.plan_elapsed_s = 0.0
    state.yielded = True
    state.pending_side = NO_SIDE
    state.exceed_ticks = 0
    if state.onset_s is None:
        state.onset_s = tc


def surrogate_step(state: SurrogateState, obs, cfg: SurrogateConfig, rng) -> float:
    """Advance the surrogate one tick and return its handle force, N."""
    phase = obs.phase
    active = obs.choice_idx if (phase == Phase.CHOICE_PRE or phase == Phase.CHOICE_POST) else -1
    if active != state.choice_idx:
        _close_choice(state)
        if active >= 0:
            _open_choice(state, obs, cfg, rng)

    k = obs.k
    xd = 0.0
    vd = 0.0
    gain = 1.0
    paced = False
    reaching = False
    losing = False
    if state.choice_idx >= 0:
        tc = obs.t - state.choice_t0_s
        a = state.ema_alpha
        state.ema_rel = a * state.ema_rel + (1.0 - a) * (obs.cursor - state.start_cursor_mm)
        state.ema_v = a * state.ema_v + (1.0 - a) * obs.cursor_v
        state.ema_f = a * state.ema_f + (1.0 - a) * obs.f_int
        if not state.yielded:
            f = state.ema_f
            opposing = (f > 0 and state.side != RIGHT) or (f < 0 and state.side != LEFT)
            if state.plan is None and state.onset_s is None:
                opposing = True  # not yet moving: any sustained partner pull counts
            forced = opposing and (f >= cfg.compliance_threshold_n
                                   or -f >= cfg.compliance_threshold_n)
            rel = obs.cursor - state.start_cursor_mm
            losing = losing_ground(state.side, state.ema_rel, state.ema_v)
            # opposing drag slows the agent down: it waits the partner out
            # rather than dragging them through the fork
            paced = opposing and (f >= cfg.pace_threshold_n
                                  or -f >= cfg.pace_threshold_n)
            if state.pending_side != NO_SIDE:
                if not forced:
                    # the conflict resolved itself during the reaction delay
                    state.pending_side = NO_SIDE
                    state.exceed_ticks = 0
                else:
                    state.pending_ticks -= 1
                    if state.pending_ticks <= 0:
                        _yield_now(state, obs, cfg, tc)
            elif forced:
                if state.exceed_ticks == 0:
                    # fighting an established flow? persist only briefly
                    state.challenging = state.side * rel < -CHALLENGE_MARGIN_MM
                    if state.challenging:
                        state.stubborn_limit_ticks = max(1, int(round(
                            state.stubborn_base_ticks * cfg.challenge_stubbornness_scale)))
                    else:
                        state.stubborn_limit_ticks = state.stubborn_base_ticks
                state.exceed_ticks += 1
                worn_out = state.exceed_ticks >= int(
                    CONCEDE_AFTER_FACTOR * state.stubborn_limit_ticks)
                if state.exceed_ticks >= state.stubborn_limit_ticks and (losing or worn_out):
                    state.pending_side = RIGHT if f > 0 else LEFT
                    state.pending_ticks = max(1, state.reaction_ticks)
            else:
                state.exceed_ticks = 0

        if not state.committed and state.plan is None and tc >= state.start_time_s:
            _commit(state, obs, cfg)
        if state.plan is not None:
            # the plan runs on its own clock, which pauses while the agent
            # waits out opposing drag from its partner
            if not paced and state.plan_elapsed_s < state.plan.duration_s:
                state.plan_elapsed_s += state.dt_s
            xd, vd = min_jerk(state.plan.x0_mm, state.plan.xf_mm,
                              state.plan.duration_s, state.plan_elapsed_s)
            reaching = True
        elif not state.committed:
            # hover relaxed on the center line until commitment
            gain = cfg.hover_stiffness_scale
        elif state.hesitating and tc < state.start_time_s + cfg.hesitation_dur_s:
            u = (tc - state.start_time_s) / cfg.hesitation_dur_s
            s = math.sin(math.pi * u)
            xd = -state.side * cfg.hesitation_amp_mm * s * s
            vd = (-state.side * cfg.hesitation_amp_mm * math.pi / cfg.hesitation_dur_s
                  * math.sin(2.0 * math.pi * u))
            reaching = True
        else:
            state.plan = PlannedTrajectory(obs.own_x, state.side * cfg.plan_target_mm,
                                           obs.t, cfg.plan_duration_s, state.side)
            state.plan_elapsed_s = state.dt_s
            xd, vd = min_jerk(state.plan.x0_mm, state.plan.xf_mm,
                              state.plan.duration_s, state.plan_elapsed_s)
            reaching = True
    else:
        # path tracking: nearest branch, or the single path
        tl = obs.target_l
        tr = obs.target_r
        if tl == tr or abs(obs.own_x - tl) <= abs(obs.own_x - tr):
            xd, vd = tl, obs.tvel_l
        else:
            xd, vd = tr, obs.tvel_r

    if not reaching:
        # postural sway wanders the intent while hovering or tracking, not
        # while pushing through a committed reach
        xd += state.sway[k]
    f = gain * (cfg.kp_n_per_m * (xd - obs.own_x)
                + cfg.kd_n_s_per_m * (vd - obs.own_v)) / MM_PER_M
    f += state.noise[k]
    lim = cfg.force_limit_n
    if f > lim:
        f = lim
    elif f < -lim:
        f = -lim
    return f


def finish_trial(state: SurrogateState):
    """Close any open choice at trial end so its event is recorded."""
    _close_choice(state)
