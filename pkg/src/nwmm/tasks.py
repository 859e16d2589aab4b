"""Secondary joint-space tasks executed in the null space of the main task.

Both tasks emit arm-only velocities; wheel components are always zero.  The
joint-limit repulsion magnitude k_i * d_i^2 inside the activation band is
kept as published even though it grows with clearance (the opposite of a
classical potential field) and jumps to zero at d = gamma_start.  A
continuous inverse-distance profile k_i * (1/d - 1/gamma_start)^2 is
available behind the `limit_profile` switch.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .model import arm_manipulability

LIMIT_PROFILES = ("quadratic", "inverse")

_INVERSE_FLOOR = 1e-9


@dataclass(frozen=True)
class ConstraintTaskParams:
    """Gains and switches for the two constraint tasks.

    k0            manipulability-gradient gain
    k_i           per-joint repulsion gain (scalar broadcasts)
    gamma_start   activation distance of the repulsion band [rad]
    fd_step       central-difference step for the manipulability gradient [rad]
    limit_profile "quadratic" (published form) or "inverse"
    """

    k0: float = 1.0
    k_i: float | np.ndarray = 1.0
    gamma_start: float = 0.3
    fd_step: float = 1e-5
    limit_profile: str = "quadratic"

    def __post_init__(self):
        if not self.k0 > 0.0:
            raise ContractViolation("k0 must be positive")
        k_i = np.atleast_1d(np.asarray(self.k_i, dtype=float))
        if np.any(k_i < 0.0):
            raise ContractViolation("k_i must be non-negative")
        if not self.gamma_start > 0.0:
            raise ContractViolation("gamma_start must be positive")
        if not 0.0 < self.fd_step < 1e-2:
            raise ContractViolation("fd_step must lie in (0, 1e-2)")
        if self.limit_profile not in LIMIT_PROFILES:
            raise ContractViolation(f"limit_profile must be one of {LIMIT_PROFILES}")
        object.__setattr__(self, "k_i", k_i)

    def joint_gains(self, n):
        if self.k_i.shape == (1,):
            return np.full(n, self.k_i[0])
        if self.k_i.shape != (n,):
            raise ContractViolation(f"k_i must be scalar or length {n}")
        return self.k_i


@dataclass(frozen=True)
class SecondaryVelocity:
    """Joint-space velocity xi_dot_0 fed to the null-space projector."""

    xi_dot_0: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi_dot_0, dtype=float)
        if xi.ndim != 1 or xi.shape[0] < 2:
            raise ContractViolation("xi_dot_0 must be a flat vector of length 2 + arm_dof")
        object.__setattr__(self, "xi_dot_0", xi)


def manipulability_task(q, g, params):
    """Gradient-ascent velocity k0 * (d omega / d q_n)^T, wheels zero.

    The gradient is taken by central finite differences of the arm
    manipulability, which stays defined at exact singularities.
    """
    n = g.arm_dof
    h = params.fd_step
    grad = np.empty(n)
    q_n = np.array(q.q_n, dtype=float)
    for i in range(n):
        saved = q_n[i]
        q_n[i] = saved + h
        up = arm_manipulability(q_n, g)
        q_n[i] = saved - h
        down = arm_manipulability(q_n, g)
        q_n[i] = saved
        grad[i] = (up - down) / (2.0 * h)
    out = np.zeros(2 + n)
    out[2:] = params.k0 * grad
    return SecondaryVelocity(out)


def joint_limit_distance(gamma, limits):
    """Distance from a joint angle to the nearer of its limits.

    Returns min(|gamma - lower|, |gamma - upper|) inside the range and 0.0
    at or beyond either limit; a zero therefore flags a limit violation.
    """
    lo, hi = limits
    return max(0.0, min(gamma - lo, hi - gamma))


def outside_limits(q_n, g):
    """Boolean mask of arm joints at or beyond their limits."""
    lo, hi = g.joint_limits[:, 0], g.joint_limits[:, 1]
    q_n = np.asarray(q_n, dtype=float)
    return (q_n <= lo) | (q_n >= hi)


def joint_limit_task(q, g, params):
    """Repulsive velocity pushing active joints toward their range midpoint.

    Magnitude follows the selected profile inside d <= gamma_start and is
    zero outside; the sign is that of (midpoint - angle), so a joint exactly
    at midrange gets no push.
    """
    n = g.arm_dof
    gains = params.joint_gains(n)
    out = np.zeros(2 + n)
    for i in range(n):
        lo, hi = g.joint_limits[i]
        d = joint_limit_distance(q.q_n[i], (lo, hi))
        if d > params.gamma_start:
            continue
        if params.limit_profile == "quadratic":
            mag = gains[i] * d * d
        else:
            inv = 1.0 / max(d, _INVERSE_FLOOR) - 1.0 / params.gamma_start
            mag = gains[i] * inv * inv
        out[2 + i] = np.sign(0.5 * (lo + hi) - q.q_n[i]) * mag
    return SecondaryVelocity(out)


def combine_secondary(tasks, weights=None):
    """Weighted sum of secondary velocities (default weights all one)."""
    if not tasks:
        raise ContractViolation("need at least one task to combine")
    if weights is None:
        weights = np.ones(len(tasks))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(tasks),):
        raise ContractViolation("one weight per task required")
    dim = tasks[0].xi_dot_0.shape[0]
    total = np.zeros(dim)
    for w, task in zip(weights, tasks):
        if task.xi_dot_0.shape[0] != dim:
            raise ContractViolation("secondary velocities must share a dimension")
        total += w * task.xi_dot_0
    return SecondaryVelocity(total)
