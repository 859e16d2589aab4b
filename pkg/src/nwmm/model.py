"""Kinematics of a differential-drive base carrying a serial revolute arm.

Generalized coordinates are ordered

    q = (x_m, y_m, phi, theta_l, theta_r, q_n[0], ..., q_n[n-1])

planar base pose in the global frame, wheel spin angles, arm joint angles.
Actuated velocities are xi_dot = (theta_l_dot, theta_r_dot, q_n_dot),
dimension 2 + n.

The lateral no-slip and pure-rolling conditions are encoded by a 3 x (5+n)
constraint matrix A(q) with A(q) q_dot = 0; feasible velocities are spanned
by the basis S(q) returned by `nullspace_basis`, with A(q) S(q) = 0.  Under
this (A, S) pair the heading rate is

    phi_dot = c * (theta_l_dot - theta_r_dot),    c = wheel_radius / (2 mu)

i.e. a faster left wheel turns the base counter-clockwise.  Wheel spin
angles never move the end effector directly; they act only through the base
pose via S.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .rotations import axis_angle_matrix, matrix_to_quat, quat_to_matrix

_EYE4 = np.eye(4)


def _cross_rows(a, b):
    """Row-wise cross product of (n, 3) arrays."""
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


@dataclass(frozen=True)
class ArmJoint:
    """One revolute joint: fixed 4x4 offset from the parent frame, unit rotation axis."""

    origin: np.ndarray
    axis: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        axis = np.asarray(self.axis, dtype=float)
        if origin.shape != (4, 4):
            raise ContractViolation("joint origin must be a 4x4 transform")
        norm = np.linalg.norm(axis)
        if axis.shape != (3,) or norm < 1e-12:
            raise ContractViolation("joint axis must be a nonzero 3-vector")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "axis", axis / norm)
        # split once; the FK loop composes rotation and translation separately
        object.__setattr__(self, "origin_rot", origin[:3, :3].copy())
        object.__setattr__(self, "origin_pos", origin[:3, 3].copy())


@dataclass(frozen=True)
class RobotGeometry:
    """Kinematic parameters of the base and the arm.

    mu             half wheel track [m]
    rho            offset from the base rotation center to its mass center [m]
    wheel_radius   wheel radius [m]
    arm_mount      fixed 4x4 transform, base frame -> arm base frame
    arm_chain      serial revolute joints, ordered root to tip
    joint_limits   (n, 2) lower/upper arm joint limits [rad]
    tool           optional fixed 4x4 transform after the last joint
    manipulability_rows
                   twist rows (subset of 0..5) used for the manipulability
                   measure; None means all six.  Chains that cannot span all
                   six twist directions (n < 6, planar test chains) need a
                   row subset, otherwise the measure is identically zero.
    """

    mu: float
    rho: float
    wheel_radius: float
    arm_mount: np.ndarray
    arm_chain: tuple
    joint_limits: np.ndarray
    tool: np.ndarray | None = None
    manipulability_rows: tuple | None = None

    def __post_init__(self):
        if not (self.mu > 0.0 and self.wheel_radius > 0.0 and self.rho >= 0.0):
            raise ContractViolation("require mu > 0, wheel_radius > 0, rho >= 0")
        mount = np.asarray(self.arm_mount, dtype=float)
        if mount.shape != (4, 4):
            raise ContractViolation("arm_mount must be a 4x4 transform")
        chain = tuple(self.arm_chain)
        limits = np.asarray(self.joint_limits, dtype=float)
        if limits.shape != (len(chain), 2):
            raise ContractViolation("joint_limits must be (arm_dof, 2)")
        if not np.all(limits[:, 0] < limits[:, 1]):
            raise ContractViolation("each lower joint limit must be below the upper")
        tool = None if self.tool is None else np.asarray(self.tool, dtype=float)
        if tool is not None and tool.shape != (4, 4):
            raise ContractViolation("tool must be a 4x4 transform")
        rows = self.manipulability_rows
        if rows is not None:
            rows = tuple(int(r) for r in rows)
            if not rows or any(r < 0 or r > 5 for r in rows):
                raise ContractViolation("manipulability_rows must be a subset of 0..5")
        object.__setattr__(self, "arm_mount", mount)
        object.__setattr__(self, "arm_chain", chain)
        object.__setattr__(self, "joint_limits", limits)
        object.__setattr__(self, "tool", tool)
        object.__setattr__(self, "manipulability_rows", rows)
        if tool is not None:
            object.__setattr__(self, "_tool_rot", tool[:3, :3].copy())
            object.__setattr__(self, "_tool_pos", tool[:3, 3].copy())

    @property
    def arm_dof(self):
        return len(self.arm_chain)

    @property
    def wheel_spacing_ratio(self):
        """c = wheel_radius / (2 mu), the wheel-to-heading rate factor."""
        return self.wheel_radius / (2.0 * self.mu)


@dataclass
class GeneralizedState:
    """Full configuration: base pose q_m, wheel angles q_w, arm angles q_n.

    phi is stored unwrapped (no modular reduction) so wheel odometry stays
    consistent across full turns.
    """

    q_m: np.ndarray
    q_w: np.ndarray
    q_n: np.ndarray

    def __post_init__(self):
        self.q_m = np.asarray(self.q_m, dtype=float)
        self.q_w = np.asarray(self.q_w, dtype=float)
        self.q_n = np.asarray(self.q_n, dtype=float)
        if self.q_m.shape != (3,) or self.q_w.shape != (2,):
            raise ContractViolation("q_m must be length 3 and q_w length 2")
        if self.q_n.ndim != 1:
            raise ContractViolation("q_n must be a flat joint vector")

    @property
    def dim(self):
        return 5 + self.q_n.shape[0]

    def as_vector(self):
        return np.concatenate([self.q_m, self.q_w, self.q_n])

    @classmethod
    def from_vector(cls, vec, arm_dof):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (5 + arm_dof,):
            raise ContractViolation("state vector must have length 5 + arm_dof")
        return cls(vec[:3], vec[3:5], vec[5:])


@dataclass(frozen=True)
class ActuatedVelocity:
    """Actuator rates (theta_l_dot, theta_r_dot, q_n_dot), wheels first."""

    xi_dot: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi_dot, dtype=float)
        if xi.ndim != 1 or xi.shape[0] < 2:
            raise ContractViolation("xi_dot must be a flat vector of length 2 + arm_dof")
        object.__setattr__(self, "xi_dot", xi)

    @property
    def wheels(self):
        return self.xi_dot[:2]

    @property
    def arm(self):
        return self.xi_dot[2:]


@dataclass(frozen=True)
class Pose:
    """Position plus scalar-first unit quaternion, global frame."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float)
        q = np.asarray(self.orientation, dtype=float)
        if p.shape != (3,) or q.shape != (4,):
            raise ContractViolation("position must be length 3, orientation length 4")
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ContractViolation("orientation quaternion must be unit norm")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q)

    def rotation_matrix(self):
        return quat_to_matrix(self.orientation)

    def as_matrix(self):
        T = np.eye(4)
        T[:3, :3] = self.rotation_matrix()
        T[:3, 3] = self.position
        return T

    @classmethod
    def from_matrix(cls, T):
        return cls(np.array(T[:3, 3]), matrix_to_quat(T[:3, :3]))


def constraint_matrix(q, g):
    """Velocity constraint matrix A(q), shape 3 x (5+n), with A(q) q_dot = 0.

    Row 0 is the lateral no-slip condition, rows 1 and 2 are the pure-rolling
    conditions of the left and right wheel.  Columns past index 4 (arm) are
    zero; rank is 3 for every configuration.
    """
    phi = q.q_m[2]
    s, c = np.sin(phi), np.cos(phi)
    A = np.zeros((3, 5 + g.arm_dof))
    A[0, 0] = -s
    A[0, 1] = c
    A[0, 2] = -g.rho
    A[1, 0] = -c
    A[1, 1] = -s
    A[1, 2] = -g.mu
    A[1, 3] = g.wheel_radius
    A[2, 0] = -c
    A[2, 1] = -s
    A[2, 2] = g.mu
    A[2, 4] = g.wheel_radius
    return A


def nullspace_basis(q, g):
    """Feasible-velocity basis S(q), shape (5+n) x (2+n), with A(q) S(q) = 0.

    q_dot = S(q) xi_dot maps actuator rates to generalized velocities.  The
    lower-right n x n block is the identity: arm joints pass through
    unchanged.
    """
    phi = q.q_m[2]
    s, c = np.sin(phi), np.cos(phi)
    n = g.arm_dof
    cw = g.wheel_spacing_ratio
    S = np.zeros((5 + n, 2 + n))
    S[0, 0] = cw * (g.mu * c - g.rho * s)
    S[0, 1] = cw * (g.mu * c + g.rho * s)
    S[1, 0] = cw * (g.mu * s + g.rho * c)
    S[1, 1] = cw * (g.mu * s - g.rho * c)
    S[2, 0] = cw
    S[2, 1] = -cw
    S[3, 0] = 1.0
    S[4, 1] = 1.0
    S[5:, 2:] = np.eye(n)
    return S


def lift_velocity(q, xi_dot, g):
    """Generalized velocity q_dot = S(q) xi_dot; satisfies the lateral constraint exactly."""
    xi = xi_dot.xi_dot if isinstance(xi_dot, ActuatedVelocity) else np.asarray(xi_dot, dtype=float)
    if xi.shape != (2 + g.arm_dof,):
        raise ContractViolation(
            f"xi_dot must have length {2 + g.arm_dof}, got {xi.shape}"
        )
    if q.q_n.shape[0] != g.arm_dof:
        raise ContractViolation("state arm dimension does not match geometry")
    return nullspace_basis(q, g) @ xi


def base_transform(q_m):
    """4x4 world transform of the base frame: planar translation plus yaw."""
    x, y, phi = q_m
    s, c = np.sin(phi), np.cos(phi)
    T = np.eye(4)
    T[0, 0] = c
    T[0, 1] = -s
    T[1, 0] = s
    T[1, 1] = c
    T[0, 3] = x
    T[1, 3] = y
    return T


def chain_frames(root, q_n, g):
    """End-effector transform and per-joint (axis, origin) pairs of the arm chain.

    `root` is the world pose of the arm-base frame (compose the mount before
    calling).  Axis/origin are taken at the joint frame before its own
    rotation, the correct point/direction pair for a geometric Jacobian
    column.
    """
    if q_n.shape[0] != g.arm_dof:
        raise ContractViolation("q_n length does not match the arm chain")
    root = np.asarray(root, dtype=float)
    R = root[:3, :3]
    p = root[:3, 3]
    axes = np.empty((g.arm_dof, 3))
    origins = np.empty((g.arm_dof, 3))
    for i, joint in enumerate(g.arm_chain):
        p = R @ joint.origin_pos + p
        R = R @ joint.origin_rot
        axes[i] = R @ joint.axis
        origins[i] = p
        R = R @ axis_angle_matrix(joint.axis, q_n[i])
    if g.tool is not None:
        p = R @ g._tool_pos + p
        R = R @ g._tool_rot
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = p
    return T, axes, origins


def forward_kinematics(q, g):
    """End-effector pose in the global frame."""
    T, _, _ = chain_frames(base_transform(q.q_m) @ g.arm_mount, q.q_n, g)
    return Pose.from_matrix(T)


def generalized_jacobian(q, g):
    """J_q, shape 6 x (5+n): q_dot -> end-effector twist (v; omega), world frame.

    Wheel-angle columns are zero; wheel spin reaches the end effector only
    through the base pose, i.e. through S.
    """
    T, axes, origins = chain_frames(base_transform(q.q_m) @ g.arm_mount, q.q_n, g)
    p = T[:3, 3]
    n = g.arm_dof
    J = np.zeros((6, 5 + n))
    J[0, 0] = 1.0
    J[1, 1] = 1.0
    J[0, 2] = -(p[1] - q.q_m[1])
    J[1, 2] = p[0] - q.q_m[0]
    J[5, 2] = 1.0
    J[:3, 5:] = _cross_rows(axes, p - origins).T
    J[3:, 5:] = axes.T
    return J


def whole_body_jacobian(q, g):
    """J_xi = J_q S, shape 6 x (2+n): actuator rates -> end-effector twist."""
    return generalized_jacobian(q, g) @ nullspace_basis(q, g)


def arm_jacobian(q_n, g):
    """Geometric Jacobian of the arm alone, 6 x n, in the arm-base frame."""
    q_n = np.asarray(q_n, dtype=float)
    T, axes, origins = chain_frames(_EYE4, q_n, g)
    J = np.empty((6, g.arm_dof))
    J[:3] = _cross_rows(axes, T[:3, 3] - origins).T
    J[3:] = axes.T
    return J


def arm_manipulability(q_n, g):
    """sqrt(det(J J^T)) of the arm-only Jacobian; zero iff it is row-rank deficient.

    Independent of the base pose by construction.  Rows enter per
    g.manipulability_rows (all six by default).
    """
    J = arm_jacobian(q_n, g)
    if g.manipulability_rows is not None:
        J = J[list(g.manipulability_rows), :]
    if J.shape[0] > J.shape[1]:
        return 0.0  # fewer joints than task rows: J J^T is always rank deficient
    # product of singular values equals sqrt(det(J J^T)) and is far better
    # conditioned near singularities than the Gram determinant
    return float(np.prod(np.linalg.svd(J, compute_uv=False)))
