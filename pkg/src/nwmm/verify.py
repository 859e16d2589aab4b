"""Model self-checks backing the CLI `check` subcommand.

Each check runs over randomized configurations drawn from a seeded
generator and returns (name, worst value, tolerance, passed).
"""

from dataclasses import dataclass

import numpy as np

from .controller import exact_pseudoinverse, null_projector
from .model import (
    GeneralizedState,
    constraint_matrix,
    forward_kinematics,
    lift_velocity,
    nullspace_basis,
    whole_body_jacobian,
)
from .rotations import rotation_vector


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self):
        return self.worst < self.tolerance


def random_state(g, rng):
    q_m = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-np.pi, np.pi)])
    q_w = rng.uniform(-10, 10, size=2)
    lo, hi = g.joint_limits[:, 0], g.joint_limits[:, 1]
    q_n = rng.uniform(np.maximum(lo, -np.pi), np.minimum(hi, np.pi))
    return GeneralizedState(q_m, q_w, q_n)


def finite_difference_twist(q, g, xi, step=1e-6):
    """End-effector twist by central differences of the kinematics along S(q) xi."""
    qv = q.as_vector()
    direction = lift_velocity(q, xi, g)
    up = forward_kinematics(GeneralizedState.from_vector(qv + step * direction, g.arm_dof), g)
    down = forward_kinematics(GeneralizedState.from_vector(qv - step * direction, g.arm_dof), g)
    v = (up.position - down.position) / (2.0 * step)
    w = rotation_vector(up.rotation_matrix() @ down.rotation_matrix().T) / (2.0 * step)
    return np.concatenate([v, w])


def check_constraint_consistency(g, rng, trials=1000, tol=1e-12):
    worst = 0.0
    for _ in range(trials):
        q = random_state(g, rng)
        worst = max(worst, float(np.abs(constraint_matrix(q, g) @ nullspace_basis(q, g)).max()))
    return CheckResult("constraint consistency max|A S|", worst, tol)


def check_jacobian(g, rng, trials=50, tol=1e-5):
    worst = 0.0
    for _ in range(trials):
        q = random_state(g, rng)
        xi = rng.normal(size=2 + g.arm_dof)
        twist = whole_body_jacobian(q, g) @ xi
        fd = finite_difference_twist(q, g, xi)
        scale = max(np.linalg.norm(twist), 1e-9)
        worst = max(worst, float(np.linalg.norm(twist - fd) / scale))
    return CheckResult("whole-body Jacobian FD relative error", worst, tol)


def check_projector(g, rng, trials=50, tol=1e-9):
    worst = 0.0
    for _ in range(trials):
        q = random_state(g, rng)
        J = whole_body_jacobian(q, g)
        J_pinv = exact_pseudoinverse(J)
        N = null_projector(J)
        worst = max(
            worst,
            float(np.abs(J @ J_pinv @ J - J).max()),
            float(np.abs(J_pinv @ J @ J_pinv - J_pinv).max()),
            float(np.abs((J @ J_pinv) - (J @ J_pinv).T).max()),
            float(np.abs((J_pinv @ J) - (J_pinv @ J).T).max()),
            float(np.abs(N @ N - N).max()),
            float(np.abs(J @ N).max()),
        )
    return CheckResult("pseudoinverse/projector residual", worst, tol)


def check_dynamics_reduction(g, params, rng, trials=20, tol=1e-10):
    """Worst asymmetry of M_xi and violation of positive definiteness."""
    from .dynamics import reduce_dynamics, sample_rigid_body_model

    worst = 0.0
    for _ in range(trials):
        q = random_state(g, rng)
        xi = rng.normal(size=2 + g.arm_dof)
        q_dot = nullspace_basis(q, g) @ xi
        red = reduce_dynamics(q, q_dot, sample_rigid_body_model(q, q_dot, g, params), g)
        worst = max(
            worst,
            float(np.abs(red.inertia_xi - red.inertia_xi.T).max()),
            float(max(0.0, -np.linalg.eigvalsh(red.inertia_xi).min())),
        )
    return CheckResult("reduced inertia symmetric positive definite", worst, tol)


def run_all_checks(g, seed=0, trials=200, tol_scale=1.0, dynamics_params=None):
    rng = np.random.default_rng(seed)
    results = [
        check_constraint_consistency(g, rng, trials=max(trials, 100), tol=1e-12 * tol_scale),
        check_jacobian(g, rng, trials=min(max(trials // 4, 10), 100), tol=1e-5 * tol_scale),
        check_projector(g, rng, trials=min(max(trials // 4, 10), 100), tol=1e-9 * tol_scale),
    ]
    if dynamics_params is not None:
        results.append(check_dynamics_reduction(g, dynamics_params, rng, tol=1e-10 * tol_scale))
    return results
