"""rcjhand: rolling-contact-joint hand kinematics and design optimization.

Library layout:

    transforms   rigid-transform arithmetic
    geometry     joint/link/finger/hand models, poses, ROM validation
    kinematics   rolling-joint forward kinematics
    cables       hole model, tendon lengths, antagonistic pairing
    radius_opt   rolling-radius minimax optimization and sweeps
    workspace    reachable-workspace voxelization, opposability index
    actuation    motor <-> pose mappings, pose presets
    trajectory   pose trajectories and RMSE comparison
    config       YAML configuration documents (shipped defaults)
    cli          command-line pipelines over all of the above
"""

from .actuation import (ActuatorConfig, CouplingRule, MotorState,
                        motor_to_pose, pose_to_motor, preset_pose)
from .cables import (AntagonisticPair, CableHole, DorsopalmarSide,
                     LateralSide, Tendon, TendonRoutingPlan, cable_deviation,
                     cable_state, joint_cable_length, paired_deviation,
                     tendon_deviation, tendon_length)
from .config import (LoadedConfig, default_config_path, load_config,
                     load_default, parse_config, save_config)
from .errors import (ConfigError, ConvergenceError, CouplingViolationError,
                     InvalidGeometryError, NoMinimumError, RcjHandError,
                     ResolutionMismatchError, RomViolationError,
                     UnknownPairError, UnknownPresetError, UnknownTendonError,
                     UnreachablePayoutError)
from .geometry import (FINGER_ORDER, FingerModel, HandModel, JointAxis,
                       JointGeometry, LinkGeometry, Pose, validate_rom)
from .kinematics import (FrameChain, batch_tip_positions, finger_fk, hand_fk,
                         link_offset, roll_transform, tip_positions)
from .radius_opt import (RadiusProblem, SweepResult, deviation_problem,
                         flexion_problem, optimize_radius, problem_for_joint,
                         residual, sweep)
from .trajectory import (NoOverlapError, RmseReport, Trajectory,
                         generate_trajectory, read_trajectory_csv,
                         trajectory_rmse, write_trajectory_csv)
from .transforms import RigidTransform
from .workspace import (OpposabilityReport, VoxelGrid, intersect_volume,
                        opposability_index, sample_workspace,
                        write_pointcloud_csv)

__version__ = "0.1.0"
