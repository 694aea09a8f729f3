"""Fixed-timestep dynamics of two handles rigidly coupled to a shared virtual object.

Each handle is a point mass carrying half of the object inertia; the pair is
joined by a stiff spring-damper standing in for the rigid virtual coupling.
Integration is semi-implicit Euler at 1 kHz: velocities first, then positions.
All public values are mm / mm/s / N; the force balance itself runs in SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

MM_PER_M = 1000.0
FORCE_SANITY_LIMIT_N = 50.0


class StateCorruptionError(RuntimeError):
    """A dynamics update consumed or produced a non-finite value."""


@dataclass(frozen=True)
class SimParams:
    """Physical constants of the simulated rig."""

    dt_s: float = 0.001
    handle_mass_kg: float = 0.03
    object_mass_kg: float = 0.04
    coupling_kp_n_per_m: float = 13000.0
    coupling_kd_n_s_per_m: float = 36.0
    damping_b_n_s_per_m: float = 0.5
    lateral_limit_mm: float = 40.0

    def __post_init__(self):
        if self.dt_s <= 0.0:
            raise ValueError("dt_s must be > 0")
        if self.handle_mass_kg <= 0.0 or self.object_mass_kg <= 0.0:
            raise ValueError("masses must be > 0")
        if self.coupling_kp_n_per_m < 0.0:
            raise ValueError("coupling_kp_n_per_m must be >= 0")
        if self.lateral_limit_mm <= 0.0:
            raise ValueError("lateral_limit_mm must be > 0")

    @property
    def effective_mass_kg(self) -> float:
        """Mass moved by one agent force: handle plus its half of the object."""
        return self.handle_mass_kg + 0.5 * self.object_mass_kg


@dataclass(frozen=True)
class DyadState:
    """Positions/velocities of both handles plus the forces acting at one tick.

    f1/f2 are the agent forces commanded at this tick; f_couple is the
    coupling force the spring-damper exerts on handle 1 (handle 2 feels the
    negation) evaluated at this state.
    """

    t: float = 0.0
    x1: float = 0.0
    x2: float = 0.0
    v1: float = 0.0
    v2: float = 0.0
    f1: float = 0.0
    f2: float = 0.0
    f_couple: float = 0.0

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.t, self.x1, self.x2, self.v1, self.v2, self.f1, self.f2)
        )


def cursor_position(state: DyadState) -> float:
    """Shared-cursor position: the mean of the two handle positions, mm."""
    return (state.x1 + state.x2) / 2.0


def coupling_force(x1: float, x2: float, v1: float, v2: float, params: SimParams) -> float:
    """Spring-damper force on handle 1 from the virtual coupling, N."""
    return (
        params.coupling_kp_n_per_m * (x2 - x1)
        + params.coupling_kd_n_s_per_m * (v2 - v1)
    ) / MM_PER_M


def interaction_force(state: DyadState) -> float:
    """Signed coupling force on handle 1 (positive pushes it rightward), N."""
    return state.f_couple


def _step_raw(x1, v1, x2, v2, f1, f2, dt, kp, kd, b, m_eff, lim):
    """One semi-implicit Euler step on plain floats (mm/mm/s in, same out).

    Shared by step_dyad and the trial runner hot loop so both integrate with
    bit-identical arithmetic.
    """
    fc = (kp * (x2 - x1) + kd * (v2 - v1)) / MM_PER_M
    a1 = (f1 + fc - b * v1 / MM_PER_M) / m_eff
    a2 = (f2 - fc - b * v2 / MM_PER_M) / m_eff
    v1 = v1 + a1 * dt * MM_PER_M
    v2 = v2 + a2 * dt * MM_PER_M
    x1 = x1 + v1 * dt
    x2 = x2 + v2 * dt
    if x1 > lim:
        x1 = lim
        v1 = 0.0
    elif x1 < -lim:
        x1 = -lim
        v1 = 0.0
    if x2 > lim:
        x2 = lim
        v2 = 0.0
    elif x2 < -lim:
        x2 = -lim
        v2 = 0.0
    fc_next = (kp * (x2 - x1) + kd * (v2 - v1)) / MM_PER_M
    return x1, v1, x2, v2, fc_next


def step_dyad(state: DyadState, f1: float, f2: float, params: SimParams) -> DyadState:
    """Advance the dyad one tick under agent forces f1/f2 (N).

    Deterministic: identical inputs produce a bit-identical successor state.
    Positions are clamped to the lateral travel limit with velocity zeroed at
    the stop.
    """
    if not state.is_finite() or not (math.isfinite(f1) and math.isfinite(f2)):
        raise StateCorruptionError("non-finite state or force input")
    if abs(f1) > FORCE_SANITY_LIMIT_N or abs(f2) > FORCE_SANITY_LIMIT_N:
        raise ValueError(f"agent force beyond {FORCE_SANITY_LIMIT_N} N sanity cap")
    x1, v1, x2, v2, fc = _step_raw(
        state.x1, state.v1, state.x2, state.v2, f1, f2,
        params.dt_s,
        params.coupling_kp_n_per_m,
        params.coupling_kd_n_s_per_m,
        params.damping_b_n_s_per_m,
        params.effective_mass_kg,
        params.lateral_limit_mm,
    )
    out = DyadState(
        t=state.t + params.dt_s,
        x1=x1, x2=x2, v1=v1, v2=v2, f1=f1, f2=f2, f_couple=fc,
    )
    if not out.is_finite():
        raise StateCorruptionError("dynamics produced a non-finite state")
    return out
