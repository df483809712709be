"""Seedable simulator and experiment harness for guided target search
with a 360-degree telepresence robot.

The package has three layers: an abstract attention-guidance MDP with a
tabular Q-learning trainer and an exact value-iteration solver; a grid-world
simulation with simulated 360-degree detection, a probabilistic virtual
human, and a particle-filter intent estimator; and five closed-loop systems
(MFO, ADV, FGS, RLGS, GHAL360) wired into a paired-trial experiment
harness, trace logs, and a live teleop session service.
"""

from .wedges import (
    NUM_ACTIONS,
    NUM_STATES,
    NUM_WEDGES,
    GuidanceAction,
    Rotation,
    WedgeValue,
    circular_distance,
    decode_state,
    encode_state,
    mirror_wedges,
    rotate_wedges,
    to_egocentric,
    wedge_of_bearing,
)
from .mdp import (
    MdpConfig,
    ScenarioConfig,
    StepOutcome,
    initial_state,
    reward,
    solve_value_iteration,
    step,
    transition,
)
from .learning import (
    CheckpointCurve,
    QTable,
    TrainerConfig,
    TrainResult,
    evaluate_checkpoints,
    fgs_action,
    load_qtable,
    save_qtable,
    train,
)
from .world import (
    ControlCommand,
    DetectionModel,
    DetectorConfig,
    HeadMotion,
    HumanConfig,
    HumanMove,
    HumanState,
    MapError,
    MapObject,
    RobotPose,
    World,
    apply_human_move,
    detect,
    geodesic_distances,
    line_of_sight,
    load_map,
    parse_map,
    step_robot,
    target_in_focus,
    virtual_human_step,
)
from .intent import (
    Evidence,
    FilterConfig,
    IntentEstimate,
    IntentFilter,
    ParticleSet,
    controller,
    estimate_intent,
    init_particles,
    predict,
    resample,
    rotate_particles,
    update_weights,
)
from .systems import (
    SystemKind,
    TickRecord,
    TrialConfig,
    TrialResult,
    paired_seeds,
    run_trial,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    emit,
    run_experiment,
    sample_start_poses,
    shipped_maps,
)
from .teleop import (
    PROTOCOL_VERSION,
    ProtocolError,
    SessionConfig,
    SessionCore,
    create_app,
    record_session,
    serve_session,
)
from .trace import read_trace, replay, write_trace

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
