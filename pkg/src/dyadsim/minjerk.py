"""Quintic point-to-point reaching profile with zero endpoint velocity/acceleration."""
from __future__ import annotations


def shape(tau):
    """Normalized profile s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5 on [0, 1].

    Works elementwise on numpy arrays as well as on scalars; the caller is
    responsible for clamping tau into [0, 1].
    """
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))


def shape_rate(tau):
    """d s / d tau = 30 tau^2 - 60 tau^3 + 30 tau^4."""
    return tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau))


def min_jerk(x0: float, xf: float, duration_s: float, t_s: float) -> tuple[float, float]:
    """Position and velocity of the reach at elapsed time t_s.

    t_s is clamped to [0, duration_s], so evaluation outside the reach holds
    the endpoints with zero velocity. Units of the output follow x0/xf
    (mm in, mm and mm/s out).
    """
    if duration_s <= 0.0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if t_s < 0.0:
        t_s = 0.0
    elif t_s > duration_s:
        t_s = duration_s
    tau = t_s / duration_s
    span = xf - x0
    x = x0 + span * shape(tau)
    v = span * shape_rate(tau) / duration_s
    return x, v


PEAK_SPEED_FACTOR = 1.875  # max of shape_rate, reached at tau = 0.5
