"""Intention predictors over fork-decision windows.

Six windowed statistics read the shared cursor (or summed forces) over a
fixed analysis window and call the side from the statistic's sign; the
first-crossing predictor instead scans the individual handle positions for
the earliest exit from a +/- threshold band and may keep scanning past the
analysis end, up to the merge.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .pathgen import LEFT, NO_SIDE, RIGHT, ChoiceSpec, target_at

DEFAULT_T_START_S = 0.0
DEFAULT_T_STOP_S = 0.9
DEFAULT_CROSS_THRESHOLD_MM = 7.5  # 30 % of the 25 mm center-to-branch distance
VELOCITY_SMOOTH_SAMPLES = 5


class PredictorKind(str, enum.Enum):
    XT = "XT"    # cursor position at window end
    XM = "XM"    # mean cursor position
    VT = "VT"    # cursor velocity at window end
    VM = "VM"    # mean cursor velocity
    FM = "FM"    # mean summed agent force
    SRMS = "SRMS"  # mean signed squared deviation from the window mean
    FIRST_CROSSING = "1C"

    @property
    def windowed(self) -> bool:
        return self is not PredictorKind.FIRST_CROSSING


WINDOWED_KINDS = tuple(k for k in PredictorKind if k.windowed)


@dataclass(frozen=True)
class ChoiceWindow:
    """Uniformly sampled series around one fork, times relative to choice start.

    The primary series span [t_start, t_stop]; x1_ext/x2_ext continue the
    handle series beyond t_stop so the crossing scan can run up to the merge.
    """

    t_start_s: float
    t_stop_s: float
    dt_s: float
    cursor: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    velocity: np.ndarray
    force_sum: np.ndarray
    truth: int = NO_SIDE
    t_choice_s: float = 1.0
    x1_ext: np.ndarray = field(default_factory=lambda: np.empty(0))
    x2_ext: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        n = int(round((self.t_stop_s - self.t_start_s) / self.dt_s)) + 1
        lengths = {len(self.cursor), len(self.x1), len(self.x2),
                   len(self.velocity), len(self.force_sum)}
        if lengths != {n}:
            raise ValueError(f"series lengths {lengths} do not match N = {n}")
        if self.t_stop_s > self.t_choice_s + 1e-9:
            raise ValueError("analysis window must end at or before the fork")

    @property
    def n(self) -> int:
        return len(self.cursor)


@dataclass(frozen=True)
class Prediction:
    kind: str
    direction: int          # LEFT / RIGHT, NO_SIDE for a NoCall (1C only)
    decision_time_s: float  # nan when no call was made
    statistic: float = float("nan")
    tie: bool = False

    @property
    def called(self) -> bool:
        return self.direction != NO_SIDE


@dataclass(frozen=True)
class PredictorReport:
    kind: str
    accuracy: float
    mean_decision_time_s: float  # over calls; nan when nothing was called
    call_rate: float
    n: int


def estimate_velocity(cursor: np.ndarray, dt_s: float,
                      smooth_samples: int = VELOCITY_SMOOTH_SAMPLES) -> np.ndarray:
    """Central-difference velocity with a short boxcar smoothing window."""
    c = np.asarray(cursor, dtype=float)
    v = np.empty_like(c)
    if len(c) < 2:
        v[:] = 0.0
        return v
    v[1:-1] = (c[2:] - c[:-2]) / (2.0 * dt_s)
    v[0] = (c[1] - c[0]) / dt_s
    v[-1] = (c[-1] - c[-2]) / dt_s
    if smooth_samples > 1 and len(v) >= smooth_samples:
        half = smooth_samples // 2
        padded = np.pad(v, half, mode="edge")
        kernel = np.ones(smooth_samples) / smooth_samples
        v = np.convolve(padded, kernel, mode="valid")
    return v


def extract_window(log, choice: ChoiceSpec,
                   t_start_s: float = DEFAULT_T_START_S,
                   t_stop_s: float = DEFAULT_T_STOP_S,
                   truth: int | None = None) -> ChoiceWindow:
    """Cut the analysis window for one choice out of a full-rate trial log.

    Positions are re-zeroed to the path center at choice start; the handle
    series also carry an extension up to the merge for the crossing scan.
    """
    dt = log.dt_s
    k0 = int(round(choice.t0_s / dt))
    ka = k0 + int(round(t_start_s / dt))
    kb = k0 + int(round(t_stop_s / dt))
    k_merge = k0 + int(round((choice.pre_s + choice.branch_s) / dt))
    if ka < 0 or k_merge >= len(log.cursor):
        raise ValueError("log does not cover the requested window")
    center = target_at(log.script, choice.t0_s)
    if isinstance(center, tuple):  # cannot happen at a choice start
        center = 0.0
    cursor = np.asarray(log.cursor[ka:kb + 1], dtype=float) - center
    x1 = np.asarray(log.x1[ka:kb + 1], dtype=float) - center
    x2 = np.asarray(log.x2[ka:kb + 1], dtype=float) - center
    force_sum = np.asarray(log.f1[ka:kb + 1], dtype=float) + np.asarray(
        log.f2[ka:kb + 1], dtype=float)
    velocity = estimate_velocity(cursor, dt)
    if truth is None:
        from .pathgen import actual_direction
        truth = actual_direction(log, choice)
    return ChoiceWindow(
        t_start_s=t_start_s, t_stop_s=t_stop_s, dt_s=dt,
        cursor=cursor, x1=x1, x2=x2, velocity=velocity, force_sum=force_sum,
        truth=truth,
        x1_ext=np.asarray(log.x1[kb + 1:k_merge + 1], dtype=float) - center,
        x2_ext=np.asarray(log.x2[kb + 1:k_merge + 1], dtype=float) - center,
    )


def _sign_call(kind: PredictorKind, value: float, t_stop_s: float) -> Prediction:
    if value > 0.0:
        return Prediction(kind.value, RIGHT, t_stop_s, value)
    if value < 0.0:
        return Prediction(kind.value, LEFT, t_stop_s, value)
    # exact tie: fixed, reproducible break to the right
    return Prediction(kind.value, RIGHT, t_stop_s, value, tie=True)


def predict(kind: PredictorKind, w: ChoiceWindow) -> Prediction:
    """Evaluate one windowed statistic and call the side from its sign."""
    if not kind.windowed:
        raise ValueError("use first_crossing() for the crossing predictor")
    if kind is PredictorKind.XT:
        value = float(w.cursor[-1])
    elif kind is PredictorKind.XM:
        value = float(np.mean(w.cursor))
    elif kind is PredictorKind.VT:
        value = float(w.velocity[-1])
    elif kind is PredictorKind.VM:
        value = float(np.mean(w.velocity))
    elif kind is PredictorKind.FM:
        value = float(np.mean(w.force_sum))
    else:  # SRMS
        dev = w.cursor - np.mean(w.cursor)
        value = float(np.mean(dev * np.abs(dev)))
    return _sign_call(kind, value, w.t_stop_s)


def first_crossing(w: ChoiceWindow, x_th_mm: float = DEFAULT_CROSS_THRESHOLD_MM,
                   on_cursor: bool = False) -> Prediction:
    """Earliest time either handle leaves the +/- x_th band around center.

    Scans in time order over the window plus its extension (up to the merge).
    The optional cursor mode scans the shared cursor instead of the handles.
    """
    if x_th_mm <= 0.0:
        raise ValueError("x_th_mm must be > 0")
    kind = PredictorKind.FIRST_CROSSING.value
    if on_cursor:
        a = w.cursor
        b = None
    else:
        a = np.concatenate([w.x1, w.x1_ext]) if len(w.x1_ext) else w.x1
        b = np.concatenate([w.x2, w.x2_ext]) if len(w.x2_ext) else w.x2
    mask = np.abs(a) > x_th_mm
    if b is not None:
        mask = mask | (np.abs(b) > x_th_mm)
    if not mask.any():
        return Prediction(kind, NO_SIDE, float("nan"))
    idx = int(np.argmax(mask))
    va = a[idx]
    if b is not None and abs(b[idx]) > abs(va):
        va = b[idx]
    t = w.t_start_s + idx * w.dt_s
    return Prediction(kind, RIGHT if va > 0 else LEFT, t, float(va))


def evaluate(predictions: list[Prediction], truths: list[int]) -> PredictorReport:
    """Accuracy / timing summary for one predictor over a corpus.

    NoCalls count as incorrect; the mean decision time runs over calls only.
    Truths must already exclude undecided outcomes.
    """
    if not predictions:
        raise ValueError("empty prediction list")
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths differ in length")
    if any(t == NO_SIDE for t in truths):
        raise ValueError("truths must exclude undecided outcomes")
    n = len(predictions)
    correct = sum(1 for p, t in zip(predictions, truths) if p.direction == t)
    calls = [p for p in predictions if p.called]
    mean_t = float(np.mean([p.decision_time_s for p in calls])) if calls else float("nan")
    return PredictorReport(
        kind=predictions[0].kind,
        accuracy=correct / n,
        mean_decision_time_s=mean_t,
        call_rate=len(calls) / n,
        n=n,
    )


def windows_from_log(log, t_start_s: float = DEFAULT_T_START_S,
                     t_stop_s: float = DEFAULT_T_STOP_S) -> list[ChoiceWindow]:
    """All decided choice windows of one trial log (undecided forks dropped)."""
    from .pathgen import actual_direction
    out = []
    for choice in log.script.choices:
        truth = actual_direction(log, choice)
        if truth == NO_SIDE:
            continue
        out.append(extract_window(log, choice, t_start_s, t_stop_s, truth=truth))
    return out


def run_suite(windows: list[ChoiceWindow],
              x_th_mm: float = DEFAULT_CROSS_THRESHOLD_MM,
              on_cursor: bool = False) -> list[PredictorReport]:
    """Evaluate all seven predictors over a window corpus."""
    truths = [w.truth for w in windows]
    reports = []
    for kind in WINDOWED_KINDS:
        preds = [predict(kind, w) for w in windows]
        reports.append(evaluate(preds, truths))
    crossings = [first_crossing(w, x_th_mm, on_cursor) for w in windows]
    reports.append(evaluate(crossings, truths))
    return reports


def report_rows(reports: list[PredictorReport]) -> list[dict]:
    return [
        {
            "name": r.kind,
            "accuracy": r.accuracy,
            "mean_decision_time_s": r.mean_decision_time_s,
            "call_rate": r.call_rate,
            "n": r.n,
        }
        for r in reports
    ]
