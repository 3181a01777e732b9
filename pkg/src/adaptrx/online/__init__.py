"""Online adaptation: update-cadence delay model, drift schedules, the
two fine-tuning receiver architectures, and the continual runner."""
from .delay import (
    DelayParams,
    TimingRegime,
    UpdatePolicy,
    backprop_delay,
    classify_case,
    required_parallelism,
)
from .drift import (
    RANDOM_WALK,
    STEP_FAST,
    STEP_SLOW,
    VARIANTS,
    DriftSchedule,
    DriftTracker,
)
from .trainer import (
    Architecture,
    StepCounters,
    StepInfo,
    TrainerState,
    make_trainer,
    trainer_step,
)
from .runner import TraceRow, WindowedTrace, run_continual, windowed_trace

__all__ = [
    "Architecture", "DelayParams", "DriftSchedule", "DriftTracker",
    "RANDOM_WALK", "STEP_FAST", "STEP_SLOW", "StepCounters", "StepInfo",
    "TimingRegime", "TraceRow", "TrainerState", "UpdatePolicy", "VARIANTS",
    "backprop_delay", "classify_case", "make_trainer", "required_parallelism",
    "run_continual", "trainer_step", "windowed_trace", "WindowedTrace",
]
