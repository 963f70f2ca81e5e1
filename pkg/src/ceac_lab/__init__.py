"""ceac_lab: trunk-driven prosthetic elbow control, simulated and measured.

A deterministic human-in-the-loop simulator and analysis toolkit for
trunk-to-elbow velocity control: the CEAC law (dynamic low-pass
reference with a deadzone-proportional velocity command and a backward
freeze rule) and its fixed-reference CCC baseline, a planar sagittal
human-prosthesis model with a scripted virtual pilot, the drawing and
reaching task battery, and the full movement-quality metric suite.
"""

from .control import (
    ControlCommand,
    ControlMode,
    ControllerParams,
    ControllerState,
    freeze_predicate,
    make_initial_state,
    no_effect_speed,
    step_controller,
    time_constant,
)
from .kinematics import (
    BodyState,
    PenPose,
    Plane,
    SegmentLengths,
    decompose_velocity,
    forward_kinematics,
    jacobians,
)
from .pilot import (
    IkSolution,
    Interpolation,
    PilotMode,
    PilotPolicy,
    TrunkScript,
    natural_limb_ik,
    release_catch_policy,
    sample_trunk,
    shoulder_compensate,
)
from .tasks import (
    SpeedInstruction,
    TaskKind,
    TaskProgress,
    TaskSpec,
    TargetLayout,
    TrackScale,
    evaluate_sample,
    line_task,
    racetrack_task,
    reaching_task,
)
from .signals import TimeSeries, butterworth_coeffs, differentiate, filtfilt
from .metrics import (
    MetricReport,
    completion_time,
    path_length_ratio,
    precision_score,
    range_of_motion,
    sjvi,
    sparc,
    total_movement,
)
from .config import ArmCondition, TaskRef, TrialConfig, config_hash, load_config, save_config
from .logs import TrialLog, read_external_csv
from .trial import SimulationDiverged, TrialEngine, compute_report, run_sweep, run_trial

__version__ = "0.1.0"
