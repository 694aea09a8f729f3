"""Tracking performance, dominance and the two-sample tests used in analysis.

Per-choice tracking error is an RMS between the target path (the chosen
branch once the fork has opened) and the virtual object; performance rescales
it against the largest RMS of the analysis batch so that 1 is perfect and 0
is the worst observed choice. Group comparisons use a pooled-variance
two-sample Student's t-test (Welch variant behind a flag) with the two-sided
p-value computed through the regularized incomplete beta function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateSampleError(ValueError):
    """Both samples are constant; the t statistic is undefined."""


# --- tracking error --------------------------------------------------------

def rms(target, obj) -> float:
    """Root-mean-square deviation between target and object series, mm."""
    t = np.asarray(target, dtype=float)
    o = np.asarray(obj, dtype=float)
    if t.shape != o.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {o.shape}")
    if t.size == 0:
        raise ValueError("empty series")
    d = t - o
    return float(np.sqrt(np.mean(d * d)))


def performance(rms_mm: float, rms_max_mm: float) -> float:
    """Normalized tracking score in [0, 1]; higher is better."""
    if rms_max_mm <= 0.0:
        raise ValueError("rms_max_mm must be > 0")
    if rms_mm < 0.0 or rms_mm > rms_max_mm:
        raise ValueError(f"rms {rms_mm} outside [0, rms_max {rms_max_mm}]")
    return 1.0 - rms_mm / rms_max_mm


# --- Student's t ------------------------------------------------------------

_BETACF_MAX_ITER = 300
_BETACF_EPS = 3e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: float) -> float:
    """Two-sided tail probability of the t distribution."""
    if df <= 0.0:
        raise ValueError("df must be > 0")
    p = betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return min(max(p, 0.0), 1.0)


def t_test(a, b, welch: bool = False) -> tuple[float, float]:
    """Two-sample t-test; returns (t, two-sided p).

    Pooled-variance Student's by default; the Welch variant drops the equal
    variance assumption and uses the Welch-Satterthwaite df.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least 2 values")
    ma, mb = float(np.mean(a)), float(np.mean(b))
    va, vb = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    if welch:
        sa, sb = va / na, vb / nb
        se2 = sa + sb
        if se2 <= 0.0:
            raise DegenerateSampleError("zero variance in both samples")
        df = se2 * se2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
        denom = math.sqrt(se2)
    else:
        df = na + nb - 2
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        if sp2 <= 0.0:
            raise DegenerateSampleError("zero pooled variance")
        denom = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    t = (ma - mb) / denom
    return t, student_t_sf2(t, df)


# --- per-choice records and batch summaries ---------------------------------

@dataclass
class PerformanceRecord:
    """One analysed choice."""

    condition: str
    decision_type: str
    rms_mm: float
    leader: int                     # 1 = human-side agent, 2 = partner side, 0 = unresolved
    start_time_1_s: float | None
    start_time_2_s: float | None
    direction: int
    performance: float | None = None


def records_from_logs(logs) -> list[PerformanceRecord]:
    out = []
    for log in logs:
        for ann in log.choices:
            out.append(PerformanceRecord(
                condition=log.condition,
                decision_type=ann.decision_type,
                rms_mm=ann.rms_mm,
                leader=ann.leader,
                start_time_1_s=ann.start_time_1_s,
                start_time_2_s=ann.start_time_2_s,
                direction=ann.direction,
            ))
    return out


def apply_performance(records: list[PerformanceRecord]) -> float:
    """Fill the performance field against the batch-wide maximum RMS."""
    if not records:
        raise ValueError("no records")
    rms_max = max(r.rms_mm for r in records)
    if rms_max <= 0.0:
        rms_max = 1.0  # all-perfect batch; any positive scale works
    for r in records:
        r.performance = performance(r.rms_mm, rms_max)
    return rms_max


def dominance(records: list[PerformanceRecord]) -> float:
    """Fraction of resolved choices led by the human-side agent."""
    resolved = [r for r in records if r.leader in (1, 2)]
    if not resolved:
        raise ValueError("no resolved records")
    return sum(1 for r in resolved if r.leader == 1) / len(resolved)


_DTYPE_PAIRS = (("SAME", "ONE"), ("SAME", "OPPO"), ("ONE", "OPPO"))
_COND_PAIRS = (("ALONE", "HFOP"), ("HRP", "HFOP"), ("ALONE", "HRP"))


def _group(records, condition=None, decision_type=None):
    out = []
    for r in records:
        if condition is not None and r.condition != condition:
            continue
        if decision_type is not None and r.decision_type != decision_type:
            continue
        out.append(r.performance)
    return out


def _safe_test(a, b, welch):
    if len(a) < 2 or len(b) < 2:
        return {"t": None, "p": None, "n_a": len(a), "n_b": len(b)}
    try:
        t, p = t_test(a, b, welch=welch)
    except DegenerateSampleError:
        return {"t": None, "p": None, "n_a": len(a), "n_b": len(b)}
    return {"t": t, "p": p, "n_a": len(a), "n_b": len(b)}


def leader_follower_times(records) -> tuple[list[float], list[float]]:
    leader_ts, follower_ts = [], []
    for r in records:
        if r.leader not in (1, 2):
            continue
        lead = r.start_time_1_s if r.leader == 1 else r.start_time_2_s
        follow = r.start_time_2_s if r.leader == 1 else r.start_time_1_s
        if lead is None or follow is None:
            continue
        leader_ts.append(lead)
        follower_ts.append(follow)
    return leader_ts, follower_ts


def analysis_report(records: list[PerformanceRecord], welch: bool = False) -> dict:
    """Batch summary: performance per condition x decision type, pairwise
    tests in the layout of the result tables, dominance and starting times."""
    rms_max = apply_performance(records)
    conditions = sorted({r.condition for r in records})
    report: dict = {
        "report_version": 1,
        "rms_max_mm": rms_max,
        "n_choices": len(records),
        "choice_counts": {c: sum(1 for r in records if r.condition == c)
                          for c in conditions},
        "performance": {},
        "decision_type_tests": {},
        "condition_tests": {},
    }
    for cond in conditions:
        report["performance"][cond] = {}
        for dt in ("SAME", "ONE", "OPPO"):
            vals = _group(records, cond, dt)
            report["performance"][cond][dt] = {
                "n": len(vals),
                "mean": float(np.mean(vals)) if vals else None,
                "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else None,
            }
        report["decision_type_tests"][cond] = {
            f"{a}_vs_{b}": _safe_test(_group(records, cond, a), _group(records, cond, b), welch)
            for a, b in _DTYPE_PAIRS
        }
    for dt in ("SAME", "ONE", "OPPO"):
        report["condition_tests"][dt] = {
            f"{a}_vs_{b}": _safe_test(_group(records, a, dt), _group(records, b, dt), welch)
            for a, b in _COND_PAIRS
            if a in conditions and b in conditions
        }
    hrp = [r for r in records if r.condition == "HRP"]
    if any(r.leader in (1, 2) for r in hrp):
        report["dominance"] = {
            "human_lead_fraction": dominance(hrp),
            "n_resolved": sum(1 for r in hrp if r.leader in (1, 2)),
        }
    leader_ts, follower_ts = leader_follower_times(records)
    if leader_ts:
        entry = {
            "n_pairs": len(leader_ts),
            "leader_mean_s": float(np.mean(leader_ts)),
            "follower_mean_s": float(np.mean(follower_ts)),
        }
        entry.update(_safe_test(leader_ts, follower_ts, welch))
        report["starting_times"] = entry
    return report
