"""dyadsim: deterministic 1-DOF haptic co-manipulation test-bed.

Two handles rigidly coupled to a shared virtual object track a scripted path
with timed fork decisions. The package provides the dyad dynamics, the path
scripting, seven intention predictors, a statistical leader/follower robot
partner, a synthetic human surrogate, an experiment harness with performance
statistics, and a realtime session server for browser play.
"""

__version__ = "0.1.0"

from .simcore import (DyadState, SimParams, StateCorruptionError,  # noqa: F401
                      cursor_position, interaction_force, step_dyad)
from .pathgen import (Color, DecisionType, PathScript, Phase, TrialConfig,  # noqa: F401
                      actual_direction, feedback_color, generate_script, target_at)
from .minjerk import min_jerk  # noqa: F401
from .predictors import (ChoiceWindow, Prediction, PredictorKind,  # noqa: F401
                         PredictorReport, evaluate, extract_window,
                         first_crossing, predict)
from .partner import (PartnerConfig, PartnerState, PlannedTrajectory,  # noqa: F401
                      detect_initiative, draw_start_time, partner_step)
from .surrogate import SurrogateConfig, SurrogateState, surrogate_step  # noqa: F401
from .metrics import (PerformanceRecord, dominance, performance, rms,  # noqa: F401
                      t_test)
from .harness import (ALONE, CONDITIONS, HFOP, HRP, ROBOT_ALONE,  # noqa: F401
                      ExperimentConfig, TrialLog, TrialRunner, load_config,
                      load_log, run_batch, run_experiment, run_trial, save_log)
from .errors import ConfigError, ProtocolError  # noqa: F401
