"""Task-priority resolved-rate control.

The commanded actuator velocity is

    xi_dot = J+ x_dot_cmd + (I - J+ J) xi_dot_0

where J+ is the Moore-Penrose pseudoinverse of the whole-body Jacobian and
xi_dot_0 any secondary joint velocity.  x_dot_cmd closes the loop around the
trajectory feedforward with a proportional pose-error term; without it,
open-loop integration drifts.

Two inverses with different jobs: the task-space inverse is damped below a
singular-value threshold (sigma -> sigma / (sigma^2 + lambda^2)), while the
null-space projector always uses the exact pseudoinverse (singular values
truncated at 1e-10).  Damping inside the projector would break idempotence
and leak secondary velocity into the task space.

Rate saturation scales the whole command vector uniformly; per-actuator
clamping would destroy the null-space property mid-saturation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .model import arm_manipulability, forward_kinematics, whole_body_jacobian
from .rotations import rotation_vector

_NULLSPACE_TRUNCATION = 1e-10


@dataclass(frozen=True)
class ControlParams:
    """Feedback gains, damping and saturation limits.

    rate_limits is a per-actuator bound on |xi_dot| (length 2 + n), or None
    for no saturation.
    """

    kp_pos: float = 2.0
    kp_ori: float = 2.0
    damping_lambda: float = 0.05
    sigma_min_threshold: float = 0.01
    rate_limits: np.ndarray | None = None

    def __post_init__(self):
        if self.kp_pos < 0.0 or self.kp_ori < 0.0:
            raise ContractViolation("feedback gains must be non-negative")
        if self.damping_lambda < 0.0 or self.sigma_min_threshold < 0.0:
            raise ContractViolation("damping parameters must be non-negative")
        if self.rate_limits is not None:
            limits = np.asarray(self.rate_limits, dtype=float)
            if limits.ndim != 1 or np.any(limits <= 0.0):
                raise ContractViolation("rate_limits must be positive")
            object.__setattr__(self, "rate_limits", limits)


@dataclass(frozen=True)
class ControlDiagnostics:
    manipulability: float
    tracking_error: np.ndarray
    nullspace_norm: float
    damping_active: bool


@dataclass(frozen=True)
class ControlOutput:
    xi_dot_cmd: np.ndarray
    diagnostics: ControlDiagnostics


def _inverted_singular_values(s, params):
    lam = params.damping_lambda
    thr = params.sigma_min_threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.where(s > 0.0, 1.0 / s, 0.0)
        denom = s * s + lam * lam
        damped = np.where(denom > 0.0, s / denom, 0.0)
    return np.where(s >= thr, exact, damped)


def pseudoinverse(J, params):
    """SVD pseudoinverse; singular values below the threshold are damped.

    With damping_lambda = 0 this is the exact Moore-Penrose inverse.
    """
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    return Vt.T @ (_inverted_singular_values(s, params)[:, None] * U.T)


def exact_pseudoinverse(J, truncation=_NULLSPACE_TRUNCATION):
    """Undamped Moore-Penrose inverse with hard truncation of tiny singular values."""
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    inv = np.zeros_like(s)
    keep = s > truncation
    inv[keep] = 1.0 / s[keep]
    return Vt.T @ (inv[:, None] * U.T)


def null_projector(J, params=None):
    """N = I - J+ J with the exact (undamped) pseudoinverse.

    N is idempotent and J N = 0 regardless of any damping settings, which is
    why `params` does not influence it.
    """
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    mask = (s > _NULLSPACE_TRUNCATION).astype(float)
    return np.eye(J.shape[1]) - Vt.T @ (mask[:, None] * Vt)


def pose_error(x_des, x_cur):
    """6-vector (position difference; rotation vector of R_des R_cur^T), world frame."""
    e_pos = x_des.position - x_cur.position
    e_ori = rotation_vector(x_des.rotation_matrix() @ x_cur.rotation_matrix().T)
    return np.concatenate([e_pos, e_ori])


def resolve_rates(q, g, x_des, v_des, xi_dot_0, params):
    """One controller tick: actuator rates for the desired pose and twist.

    xi_dot_0 may be a SecondaryVelocity or a bare vector of length 2 + n.
    """
    v_des = np.asarray(v_des, dtype=float)
    if v_des.shape != (6,):
        raise ContractViolation("v_des must be a 6-twist")
    xi0 = np.asarray(getattr(xi_dot_0, "xi_dot_0", xi_dot_0), dtype=float)
    if xi0.shape != (2 + g.arm_dof,):
        raise ContractViolation(f"xi_dot_0 must have length {2 + g.arm_dof}")

    x_cur = forward_kinematics(q, g)
    err = pose_error(x_des, x_cur)
    x_cmd = v_des + np.concatenate([params.kp_pos * err[:3], params.kp_ori * err[3:]])

    J = whole_body_jacobian(q, g)
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    J_pinv = Vt.T @ (_inverted_singular_values(s, params)[:, None] * U.T)
    mask = (s > _NULLSPACE_TRUNCATION).astype(float)
    xi_null = xi0 - Vt.T @ (mask * (Vt @ xi0))

    xi = J_pinv @ x_cmd + xi_null
    if params.rate_limits is not None:
        if params.rate_limits.shape != xi.shape:
            raise ContractViolation("rate_limits length must match the actuator count")
        over = np.max(np.abs(xi) / params.rate_limits)
        if over > 1.0:
            xi = xi / over

    diag = ControlDiagnostics(
        manipulability=arm_manipulability(q.q_n, g),
        tracking_error=err,
        nullspace_norm=float(np.linalg.norm(xi_null)),
        damping_active=bool(s.min() < params.sigma_min_threshold),
    )
    return ControlOutput(xi, diag)
