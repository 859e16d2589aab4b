"""Whole-body task-priority motion control for a non-holonomic wheeled mobile manipulator.

A differential-drive base (two driven wheels) carries a serial revolute arm.
The package models the constrained kinematics, plans quintic end-effector
trajectories, resolves actuator rates with null-space-projected secondary
tasks, and simulates the closed loop deterministically.
"""

from .controller import (
    ControlDiagnostics,
    ControlOutput,
    ControlParams,
    null_projector,
    pose_error,
    pseudoinverse,
    resolve_rates,
)
from .dynamics import (
    FullSpaceDynamics,
    ReducedDynamics,
    SampleBodyParams,
    reduce_dynamics,
    sample_rigid_body_model,
)
from .errors import ContractViolation, IllConditioned, InvalidInterval, ScenarioError
from .model import (
    ActuatedVelocity,
    ArmJoint,
    GeneralizedState,
    Pose,
    RobotGeometry,
    arm_jacobian,
    arm_manipulability,
    constraint_matrix,
    forward_kinematics,
    generalized_jacobian,
    lift_velocity,
    nullspace_basis,
    whole_body_jacobian,
)
from .scenario import Scenario, load_geometry, load_scenario, scenario_from_dict
from .sim import SimLog, emit_csv, run_scenario, step
from .tasks import (
    ConstraintTaskParams,
    SecondaryVelocity,
    combine_secondary,
    joint_limit_distance,
    joint_limit_task,
    manipulability_task,
)
from .trajectory import (
    BoundaryConditions,
    QuinticSegment,
    eval_quintic,
    plan_approach,
    solve_quintic,
)

__version__ = "0.1.0"
