"""Reduced dynamics of the constrained system, for model verification.

Starting from the unconstrained equation of motion

    M(q) q_ddot + V(q, q_dot) q_dot + G(q) = B(q) tau + A(q)^T lambda

substituting q_dot = S(q) xi_dot and premultiplying by S^T eliminates the
constraint forces (A S = 0) and yields dynamics in actuated coordinates:

    M_xi xi_ddot + V_xi xi_dot + G_xi = u,        u = S^T B tau

with M_xi = S^T M S, V_xi = S^T (M S_dot + V S), G_xi = S^T G.  S_dot is a
central finite difference of S along q_dot (step 1e-6); deriving it by hand
invites sign errors and the difference is easy to verify.

This module is a read-out, not a torque controller: disturbances are fixed
to zero and nothing here closes a loop.  `sample_rigid_body_model` supplies
a simple physically consistent test model (planar rigid base plus point-mass
links, Coriolis matrix built from Christoffel symbols of M) so the reduction
can be exercised against energy conservation.
"""

from dataclasses import dataclass

import numpy as np

from .model import GeneralizedState, base_transform, chain_frames, nullspace_basis
from .errors import ContractViolation

_FD_STEP = 1e-6
_MASS_EPSILON = 1e-9


def _check_spd(M, name):
    if np.abs(M - M.T).max() > 1e-10:
        raise ContractViolation(f"{name} must be symmetric within 1e-10")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ContractViolation(f"{name} must be positive definite") from None


@dataclass(frozen=True)
class FullSpaceDynamics:
    """Evaluated M, V, G, B of the unconstrained model at one (q, q_dot)."""

    inertia: np.ndarray
    coriolis: np.ndarray
    gravity: np.ndarray
    input_map: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.inertia, dtype=float)
        _check_spd(M, "inertia")
        object.__setattr__(self, "inertia", M)
        object.__setattr__(self, "coriolis", np.asarray(self.coriolis, dtype=float))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        object.__setattr__(self, "input_map", np.asarray(self.input_map, dtype=float))


@dataclass(frozen=True)
class ReducedDynamics:
    """Dynamics in actuated coordinates after constraint elimination."""

    inertia_xi: np.ndarray
    coriolis_xi: np.ndarray
    gravity_xi: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.inertia_xi, dtype=float)
        _check_spd(M, "inertia_xi")
        object.__setattr__(self, "inertia_xi", M)
        object.__setattr__(self, "coriolis_xi", np.asarray(self.coriolis_xi, dtype=float))
        object.__setattr__(self, "gravity_xi", np.asarray(self.gravity_xi, dtype=float))


def nullspace_basis_rate(q, q_dot, g, step=_FD_STEP):
    """S_dot = dS/dt along q_dot, by central differences."""
    qv = q.as_vector()
    n = g.arm_dof
    up = nullspace_basis(GeneralizedState.from_vector(qv + step * q_dot, n), g)
    down = nullspace_basis(GeneralizedState.from_vector(qv - step * q_dot, n), g)
    return (up - down) / (2.0 * step)


def reduce_dynamics(q, q_dot, full, g):
    """M_xi = S^T M S, V_xi = S^T (M S_dot + V S), G_xi = S^T G."""
    q_dot = np.asarray(q_dot, dtype=float)
    S = nullspace_basis(q, g)
    S_dot = nullspace_basis_rate(q, q_dot, g)
    M_xi = S.T @ full.inertia @ S
    M_xi = 0.5 * (M_xi + M_xi.T)
    V_xi = S.T @ (full.inertia @ S_dot + full.coriolis @ S)
    G_xi = S.T @ full.gravity
    return ReducedDynamics(M_xi, V_xi, G_xi)


@dataclass(frozen=True)
class SampleBodyParams:
    """Masses for the planar-base + point-mass-link test model.

    link_masses are lumped at the outboard end of each link (the next joint
    origin; the end effector for the last).  gravity is the scalar
    acceleration along -z.
    """

    base_mass: float
    base_inertia: float
    wheel_inertia: float
    link_masses: np.ndarray
    gravity: float = 9.81

    def __post_init__(self):
        masses = np.atleast_1d(np.asarray(self.link_masses, dtype=float))
        if self.base_mass <= 0.0 or self.base_inertia <= 0.0 or self.wheel_inertia <= 0.0:
            raise ContractViolation("base and wheel masses/inertias must be positive")
        if np.any(masses < 0.0):
            raise ContractViolation("link masses must be non-negative")
        object.__setattr__(self, "link_masses", masses)


def _sample_inertia_gravity_raw(qv, g, params):
    """M and G of the sample model from a raw state vector (hot path)."""
    n = g.arm_dof
    d = 5 + n
    phi = qv[2]
    s, c = np.sin(phi), np.cos(phi)

    M = np.zeros((d, d))
    m, rho = params.base_mass, g.rho
    # rigid planar base with its center of mass offset rho along the body x axis
    M[0, 0] = m
    M[1, 1] = m
    M[0, 2] = M[2, 0] = -m * rho * s
    M[1, 2] = M[2, 1] = m * rho * c
    M[2, 2] = params.base_inertia + m * rho * rho
    M[3, 3] = M[4, 4] = params.wheel_inertia

    G = np.zeros(d)
    root = base_transform(qv[:3]) @ g.arm_mount
    T, axes, origins = chain_frames(root, qv[5:], g)
    points = np.empty((n, 3))
    points[: n - 1] = origins[1:]
    points[n - 1] = T[:3, 3]
    Ji = np.zeros((3, d))
    Ji[0, 0] = 1.0
    Ji[1, 1] = 1.0
    for i in range(n):
        mi = params.link_masses[i]
        if mi == 0.0:
            continue
        px, py, pz = points[i]
        Ji[0, 2] = -(py - qv[1])
        Ji[1, 2] = px - qv[0]
        Ji[:, 5:] = 0.0
        for j in range(i + 1):
            ax, ay, az = axes[j]
            rx, ry, rz = px - origins[j, 0], py - origins[j, 1], pz - origins[j, 2]
            Ji[0, 5 + j] = ay * rz - az * ry
            Ji[1, 5 + j] = az * rx - ax * rz
            Ji[2, 5 + j] = ax * ry - ay * rx
        M += mi * Ji.T @ Ji
        G += mi * params.gravity * Ji[2]
    M[np.diag_indices(d)] += _MASS_EPSILON
    return 0.5 * (M + M.T), G


def _christoffel_coriolis_raw(qv, q_dot, g, params, step=_FD_STEP):
    """V(q, q_dot) from Christoffel symbols of M, by central differences.

    M depends on phi and the arm angles only, so only those coordinates are
    differentiated.
    """
    d = 5 + g.arm_dof
    dM = np.zeros((d, d, d))
    for k in (2, *range(5, d)):
        bumped = qv.copy()
        bumped[k] = qv[k] + step
        up, _ = _sample_inertia_gravity_raw(bumped, g, params)
        bumped[k] = qv[k] - step
        down, _ = _sample_inertia_gravity_raw(bumped, g, params)
        dM[k] = (up - down) / (2.0 * step)
    term1 = np.einsum("i,ikj->kj", q_dot, dM)
    term2 = np.einsum("i,jki->kj", q_dot, dM)
    term3 = np.einsum("i,kij->kj", q_dot, dM)
    return 0.5 * (term1 + term2 - term3)


def sample_rigid_body_model(q, q_dot, g, params):
    """Physically consistent FullSpaceDynamics for testing the reduction.

    With this V, d(M)/dt - 2V is skew-symmetric, so free motion with zero
    gravity conserves kinetic energy.  B maps the 2 + n actuator torques
    onto the wheel and arm coordinates, zeros elsewhere.
    """
    q_dot = np.asarray(q_dot, dtype=float)
    n = g.arm_dof
    if q.q_n.shape[0] != n:
        raise ContractViolation("state arm dimension does not match geometry")
    if params.link_masses.shape[0] != n:
        raise ContractViolation("need one link mass per arm joint")
    qv = q.as_vector()
    M, G = _sample_inertia_gravity_raw(qv, g, params)
    V = _christoffel_coriolis_raw(qv, q_dot, g, params)
    B = np.zeros((5 + n, 2 + n))
    B[3, 0] = 1.0
    B[4, 1] = 1.0
    B[5:, 2:] = np.eye(n)
    return FullSpaceDynamics(M, V, G, B)


def actuation_readout(full, tau, g, q):
    """u = S^T B tau, the generalized force conjugate to xi."""
    S = nullspace_basis(q, g)
    return S.T @ full.input_map @ np.asarray(tau, dtype=float)
