"""Scripted tracking path: sinusoidal filler segments plus timed fork decisions.

A trial path tiles [0, duration] with alternating BODY and CHOICE segments.
Every choice opens with a straight lead-in, splits into mirrored left/right
branches, holds them, then merges back to center. Decision types control
which of the two subjects sees a highlighted branch:

  SAME  both subjects are shown the same side
  OPPO  the subjects are shown opposite sides
  ONE   only one subject is shown a side

All lateral geometry is in mm; time in seconds.
"""
from __future__ import annotations

import bisect
import enum
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .minjerk import shape, shape_rate

LEFT = -1
RIGHT = 1
NO_SIDE = 0

GREEN_MAX_MM = 5.0
ORANGE_MAX_MM = 15.0

SCRIPT_VERSION = 1


class Phase(enum.IntEnum):
    BODY = 0
    CHOICE_PRE = 1
    CHOICE_POST = 2
    MERGE = 3


class Color(enum.IntEnum):
    GREEN = 0
    ORANGE = 1
    RED = 2


class DecisionType(str, enum.Enum):
    SAME = "SAME"
    ONE = "ONE"
    OPPO = "OPPO"


def side_name(side: int) -> str | None:
    return {LEFT: "left", RIGHT: "right", NO_SIDE: None}[side]


def parse_side(name) -> int:
    if name is None:
        return NO_SIDE
    return {"left": LEFT, "right": RIGHT}[name]


@dataclass(frozen=True)
class TrialConfig:
    """Generation parameters for one scripted trial."""

    trial_duration_s: float = 120.0
    n_choices: int = 16
    body_duration_s: float = 2.5
    pre_fork_s: float = 1.0
    branch_s: float = 3.0
    fork_ramp_s: float = 0.6
    merge_ramp_s: float = 0.6
    x_max_mm: float = 25.0
    scroll_speed_mm_s: float = 35.0
    body_amp_min_mm: float = 10.0
    body_amp_max_mm: float = 25.0
    decision_mix: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)  # SAME, ONE, OPPO

    def __post_init__(self):
        if self.n_choices < 1:
            raise ConfigError("n_choices must be >= 1")
        if self.fork_ramp_s > self.branch_s:
            raise ConfigError("fork_ramp_s cannot exceed branch_s")
        if not (0 < self.body_amp_min_mm <= self.body_amp_max_mm <= self.x_max_mm):
            raise ConfigError("body amplitudes must satisfy 0 < min <= max <= x_max_mm")
        if abs(sum(self.decision_mix) - 1.0) > 1e-9 or min(self.decision_mix) < 0:
            raise ConfigError("decision_mix must be non-negative and sum to 1")
        if self.pad_s < -1e-12:
            raise ConfigError(
                "infeasible schedule: n_choices * (body + choice footprint) "
                f"= {self.n_choices * (self.block_s - self.pad_s):.3f} s exceeds "
                f"trial_duration_s = {self.trial_duration_s:.3f} s"
            )

    @property
    def block_s(self) -> float:
        return self.trial_duration_s / self.n_choices

    @property
    def pad_s(self) -> float:
        """Straight slack after the merge ramp so blocks tile the trial exactly."""
        used = self.body_duration_s + self.pre_fork_s + self.branch_s + self.merge_ramp_s
        return self.block_s - used


@dataclass(frozen=True)
class BodySegment:
    """One smooth lateral bump: x(u) = A sin^2(pi u / T), zero slope at both ends."""

    t0_s: float
    duration_s: float
    amplitude_mm: float


@dataclass(frozen=True)
class ChoiceSpec:
    """One fork decision: lead-in straight, mirrored branches, merge back."""

    index: int
    t0_s: float
    pre_s: float
    branch_s: float
    fork_ramp_s: float
    merge_ramp_s: float
    pad_s: float
    decision_type: DecisionType
    highlight_1: int  # LEFT / RIGHT / NO_SIDE
    highlight_2: int

    @property
    def t_fork_s(self) -> float:
        return self.t0_s + self.pre_s

    @property
    def t_merge_s(self) -> float:
        """End of the branch hold; the merge ramp starts here."""
        return self.t_fork_s + self.branch_s

    @property
    def end_s(self) -> float:
        return self.t0_s + self.pre_s + self.branch_s + self.merge_ramp_s + self.pad_s

    def highlight_for(self, lane: int) -> int:
        return self.highlight_1 if lane == 1 else self.highlight_2


@dataclass(frozen=True)
class PathScript:
    """Immutable scripted path for one trial."""

    seed: int
    trial_duration_s: float
    scroll_speed_mm_s: float
    x_max_mm: float
    segments: tuple = field(default_factory=tuple)

    @property
    def choices(self) -> list[ChoiceSpec]:
        return [s for s in self.segments if isinstance(s, ChoiceSpec)]


def generate_script(seed: int, cfg: TrialConfig = TrialConfig()) -> PathScript:
    """Build the scripted path for one trial, deterministic under seed.

    Decision types are drawn from cfg.decision_mix, sides 50/50; BODY bump
    amplitudes are uniform in [body_amp_min, body_amp_max] with random sign.
    """
    rng = np.random.default_rng(seed)
    segments = []
    block = cfg.block_s
    for i in range(cfg.n_choices):
        t0 = i * block
        amp = float(rng.uniform(cfg.body_amp_min_mm, cfg.body_amp_max_mm))
        if rng.integers(0, 2) == 0:
            amp = -amp
        segments.append(BodySegment(t0_s=t0, duration_s=cfg.body_duration_s, amplitude_mm=amp))
        dt_idx = int(rng.choice(3, p=cfg.decision_mix))
        dtype = (DecisionType.SAME, DecisionType.ONE, DecisionType.OPPO)[dt_idx]
        side = RIGHT if rng.integers(0, 2) == 1 else LEFT
        if dtype is DecisionType.SAME:
            h1, h2 = side, side
        elif dtype is DecisionType.OPPO:
            h1, h2 = side, -side
        else:
            informed_first = rng.integers(0, 2) == 0
            h1, h2 = (side, NO_SIDE) if informed_first else (NO_SIDE, side)
        segments.append(ChoiceSpec(
            index=i,
            t0_s=t0 + cfg.body_duration_s,
            pre_s=cfg.pre_fork_s,
            branch_s=cfg.branch_s,
            fork_ramp_s=cfg.fork_ramp_s,
            merge_ramp_s=cfg.merge_ramp_s,
            pad_s=cfg.pad_s,
            decision_type=dtype,
            highlight_1=h1,
            highlight_2=h2,
        ))
    return PathScript(
        seed=seed,
        trial_duration_s=cfg.trial_duration_s,
        scroll_speed_mm_s=cfg.scroll_speed_mm_s,
        x_max_mm=cfg.x_max_mm,
        segments=tuple(segments),
    )


def _locate(script: PathScript, t: float):
    if t < 0.0 or t > script.trial_duration_s:
        raise ValueError(f"t = {t} outside script range [0, {script.trial_duration_s}]")
    starts = [s.t0_s for s in script.segments]
    i = bisect.bisect_right(starts, t) - 1
    return script.segments[max(i, 0)]


def _choice_offsets(seg: ChoiceSpec, x_max: float, u: float) -> tuple[float, float]:
    """Left/right path offsets at time u since choice start (equal when single)."""
    if u < seg.pre_s:
        return 0.0, 0.0
    w = u - seg.pre_s
    if w < seg.branch_s:
        r = shape(w / seg.fork_ramp_s) if w < seg.fork_ramp_s else 1.0
        return -x_max * r, x_max * r
    w -= seg.branch_s
    if w < seg.merge_ramp_s:
        r = 1.0 - shape(w / seg.merge_ramp_s)
        return -x_max * r, x_max * r
    return 0.0, 0.0


def _body_offset(seg: BodySegment, u: float) -> float:
    s = np.sin(np.pi * u / seg.duration_s)
    return float(seg.amplitude_mm * s * s)


def target_at(script: PathScript, t: float):
    """Path target at time t: a single offset (mm) or a (left, right) branch pair.

    Branches exist from the fork until they have merged back to center.
    """
    seg = _locate(script, t)
    u = t - seg.t0_s
    if isinstance(seg, BodySegment):
        if u < seg.duration_s:
            return _body_offset(seg, u)
        return 0.0
    left, right = _choice_offsets(seg, script.x_max_mm, u)
    in_branch = seg.pre_s <= u < seg.pre_s + seg.branch_s + seg.merge_ramp_s
    if in_branch:
        return (left, right)
    return left  # single path (pre-fork straight or post-merge pad), == right


def feedback_color(distance_mm: float) -> Color:
    """Cursor color from the distance to the closest path, mm."""
    if distance_mm < 0.0:
        raise ValueError("distance must be >= 0")
    if distance_mm < GREEN_MAX_MM:
        return Color.GREEN
    if distance_mm < ORANGE_MAX_MM:
        return Color.ORANGE
    return Color.RED


def actual_direction(log, choice: ChoiceSpec) -> int:
    """Ground-truth side taken at a fork: sign of the mean cursor position over
    the last 0.5 s of the branch hold. 0 means undecided (excluded from
    accuracy denominators)."""
    dt = log.dt_s
    k_hi = int(round(choice.t_merge_s / dt))
    k_lo = int(round((choice.t_merge_s - 0.5) / dt))
    if k_lo < 0 or k_hi >= len(log.cursor):
        raise ValueError("log does not cover the choice interval")
    m = float(np.mean(log.cursor[k_lo:k_hi + 1]))
    if m > 0.0:
        return RIGHT
    if m < 0.0:
        return LEFT
    return NO_SIDE


def sample_series(script: PathScript, dt_s: float, n_ticks: int) -> dict:
    """Vectorized per-tick path arrays for the trial runner.

    Returns left/right offsets, their time derivatives, the phase tag and the
    covering choice index (-1 outside choice segments) for ticks 0..n_ticks.
    """
    n = n_ticks + 1
    t = np.arange(n) * dt_s
    left = np.zeros(n)
    right = np.zeros(n)
    vleft = np.zeros(n)
    vright = np.zeros(n)
    phase = np.zeros(n, dtype=np.uint8)
    choice = np.full(n, -1, dtype=np.int32)
    x_max = script.x_max_mm
    for seg in script.segments:
        if isinstance(seg, BodySegment):
            lo = int(np.ceil(seg.t0_s / dt_s - 1e-9))
            hi = min(int(np.floor((seg.t0_s + seg.duration_s) / dt_s + 1e-9)), n - 1)
            u = t[lo:hi + 1] - seg.t0_s
            s = np.sin(np.pi * u / seg.duration_s)
            x = seg.amplitude_mm * s * s
            v = seg.amplitude_mm * (np.pi / seg.duration_s) * np.sin(2 * np.pi * u / seg.duration_s)
            left[lo:hi + 1] = x
            right[lo:hi + 1] = x
            vleft[lo:hi + 1] = v
            vright[lo:hi + 1] = v
            phase[lo:hi + 1] = Phase.BODY
        else:
            lo = int(np.ceil(seg.t0_s / dt_s - 1e-9))
            hi = min(int(np.floor(seg.end_s / dt_s + 1e-9)), n - 1)
            u = t[lo:hi + 1] - seg.t0_s
            choice[lo:hi + 1] = seg.index
            # pre-fork straight
            pre = u < seg.pre_s
            phase[lo:hi + 1][pre] = Phase.CHOICE_PRE
            # fork ramp + hold
            w = u - seg.pre_s
            ramp = (w >= 0) & (w < seg.fork_ramp_s)
            tau = np.clip(w / seg.fork_ramp_s, 0.0, 1.0)
            r = np.where(w < seg.fork_ramp_s, shape(tau), 1.0)
            rv = np.where(ramp, shape_rate(tau) / seg.fork_ramp_s, 0.0)
            post = (w >= 0) & (w < seg.branch_s)
            # merge ramp back to center
            wm = w - seg.branch_s
            merging = (wm >= 0) & (wm < seg.merge_ramp_s)
            tau_m = np.clip(wm / seg.merge_ramp_s, 0.0, 1.0)
            r = np.where(merging, 1.0 - shape(tau_m), r)
            rv = np.where(merging, -shape_rate(tau_m) / seg.merge_ramp_s, rv)
            done = wm >= seg.merge_ramp_s
            r = np.where(done, 0.0, r)
            rv = np.where(done, 0.0, rv)
            branchy = post | merging | done
            right[lo:hi + 1] = np.where(branchy, x_max * r, 0.0)
            left[lo:hi + 1] = np.where(branchy, -x_max * r, 0.0)
            vright[lo:hi + 1] = np.where(branchy, x_max * rv, 0.0)
            vleft[lo:hi + 1] = np.where(branchy, -x_max * rv, 0.0)
            phase[lo:hi + 1][post] = Phase.CHOICE_POST
            phase[lo:hi + 1][merging | done] = Phase.MERGE
    return {
        "left": left, "right": right, "vleft": vleft, "vright": vright,
        "phase": phase, "choice": choice,
    }


# --- JSON serialization (script_version 1) ---------------------------------

def script_to_dict(script: PathScript) -> dict:
    segs = []
    for seg in script.segments:
        if isinstance(seg, BodySegment):
            segs.append({
                "kind": "body",
                "t0_s": seg.t0_s,
                "duration_s": seg.duration_s,
                "amplitude_mm": seg.amplitude_mm,
            })
        else:
            segs.append({
                "kind": "choice",
                "index": seg.index,
                "t0_s": seg.t0_s,
                "pre_s": seg.pre_s,
                "branch_s": seg.branch_s,
                "fork_ramp_s": seg.fork_ramp_s,
                "merge_ramp_s": seg.merge_ramp_s,
                "pad_s": seg.pad_s,
                "decision_type": seg.decision_type.value,
                "highlight_1": side_name(seg.highlight_1),
                "highlight_2": side_name(seg.highlight_2),
            })
    return {
        "script_version": SCRIPT_VERSION,
        "seed": script.seed,
        "trial_duration_s": script.trial_duration_s,
        "scroll_speed_mm_s": script.scroll_speed_mm_s,
        "x_max_mm": script.x_max_mm,
        "segments": segs,
    }


def script_to_json(script: PathScript) -> str:
    return json.dumps(script_to_dict(script), sort_keys=True)


_BODY_KEYS = {"kind", "t0_s", "duration_s", "amplitude_mm"}
_CHOICE_KEYS = {"kind", "index", "t0_s", "pre_s", "branch_s", "fork_ramp_s",
                "merge_ramp_s", "pad_s", "decision_type", "highlight_1", "highlight_2"}
_SCRIPT_KEYS = {"script_version", "seed", "trial_duration_s", "scroll_speed_mm_s",
                "x_max_mm", "segments"}


def script_from_dict(d: dict) -> PathScript:
    unknown = set(d) - _SCRIPT_KEYS
    if unknown:
        raise ConfigError(f"unknown script keys: {sorted(unknown)}")
    if d.get("script_version") != SCRIPT_VERSION:
        raise ConfigError(f"unsupported script_version: {d.get('script_version')!r}")
    segments = []
    for sd in d["segments"]:
        kind = sd.get("kind")
        if kind == "body":
            unknown = set(sd) - _BODY_KEYS
            if unknown:
                raise ConfigError(f"unknown body segment keys: {sorted(unknown)}")
            segments.append(BodySegment(
                t0_s=sd["t0_s"], duration_s=sd["duration_s"], amplitude_mm=sd["amplitude_mm"]))
        elif kind == "choice":
            unknown = set(sd) - _CHOICE_KEYS
            if unknown:
                raise ConfigError(f"unknown choice segment keys: {sorted(unknown)}")
            segments.append(ChoiceSpec(
                index=sd["index"], t0_s=sd["t0_s"], pre_s=sd["pre_s"],
                branch_s=sd["branch_s"], fork_ramp_s=sd["fork_ramp_s"],
                merge_ramp_s=sd["merge_ramp_s"], pad_s=sd["pad_s"],
                decision_type=DecisionType(sd["decision_type"]),
                highlight_1=parse_side(sd["highlight_1"]),
                highlight_2=parse_side(sd["highlight_2"]),
            ))
        else:
            raise ConfigError(f"unknown segment kind: {kind!r}")
    return PathScript(
        seed=d["seed"],
        trial_duration_s=d["trial_duration_s"],
        scroll_speed_mm_s=d["scroll_speed_mm_s"],
        x_max_mm=d["x_max_mm"],
        segments=tuple(segments),
    )


def script_from_json(text: str) -> PathScript:
    return script_from_dict(json.loads(text))
