import numpy as np
import pytest

from dyadsim.harness import ExperimentConfig
from dyadsim.pathgen import (BodySegment, ChoiceSpec, DecisionType, PathScript,
                             TrialConfig)


def short_trial(n_choices=2) -> TrialConfig:
    return TrialConfig(trial_duration_s=7.5 * n_choices, n_choices=n_choices)


def fixed_script(highlights, dtype=DecisionType.SAME, amp=15.0) -> PathScript:
    """Hand-built script with explicit per-choice highlights.

    highlights: list of (h1, h2) pairs with values in {-1, 0, +1}.
    """
    cfg = short_trial(len(highlights))
    segments = []
    for i, (h1, h2) in enumerate(highlights):
        t0 = i * cfg.block_s
        segments.append(BodySegment(t0_s=t0, duration_s=cfg.body_duration_s,
                                    amplitude_mm=amp))
        segments.append(ChoiceSpec(
            index=i, t0_s=t0 + cfg.body_duration_s, pre_s=cfg.pre_fork_s,
            branch_s=cfg.branch_s, fork_ramp_s=cfg.fork_ramp_s,
            merge_ramp_s=cfg.merge_ramp_s, pad_s=cfg.pad_s,
            decision_type=dtype, highlight_1=h1, highlight_2=h2))
    return PathScript(seed=0, trial_duration_s=cfg.trial_duration_s,
                      scroll_speed_mm_s=cfg.scroll_speed_mm_s,
                      x_max_mm=cfg.x_max_mm, segments=tuple(segments))


class FakeLog:
    """Minimal log stand-in for pure series-level tests."""

    def __init__(self, cursor, dt_s=0.001, x1=None, x2=None, f1=None, f2=None,
                 script=None):
        self.cursor = np.asarray(cursor, dtype=float)
        self.dt_s = dt_s
        self.x1 = np.asarray(x1 if x1 is not None else cursor, dtype=float)
        self.x2 = np.asarray(x2 if x2 is not None else cursor, dtype=float)
        self.f1 = np.asarray(f1 if f1 is not None else np.zeros_like(self.cursor))
        self.f2 = np.asarray(f2 if f2 is not None else np.zeros_like(self.cursor))
        self.script = script


@pytest.fixture(scope="session")
def default_cfg() -> ExperimentConfig:
    return ExperimentConfig(seed=11)


@pytest.fixture(scope="session")
def hfop_corpus(default_cfg):
    """13 HFOP trials (~200 decided choices), shared by the slow tests."""
    from dyadsim.harness import run_batch
    return run_batch("HFOP", 13, default_cfg)
