import numpy as np
import pytest

from nwmm.model import ArmJoint, GeneralizedState, RobotGeometry
from nwmm.scenario import load_geometry


def transform(x=0.0, y=0.0, z=0.0):
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def make_base_geometry(mu=0.25, rho=0.1, wheel_radius=0.125, **kwargs):
    """Base parameters with a trivial 1R arm unless a chain is given."""
    kwargs.setdefault("arm_mount", np.eye(4))
    kwargs.setdefault("arm_chain", (ArmJoint(np.eye(4), [0, 0, 1]),))
    kwargs.setdefault("joint_limits", np.array([[-np.pi, np.pi]] * len(kwargs["arm_chain"])))
    return RobotGeometry(mu=mu, rho=rho, wheel_radius=wheel_radius, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def panda_geometry():
    return load_geometry("builtin:panda")


@pytest.fixture
def chain_1r():
    """Single revolute joint about z with a unit link along x."""
    return make_base_geometry(arm_chain=(ArmJoint(np.eye(4), [0, 0, 1]),), tool=transform(x=1.0))


@pytest.fixture
def chain_2r():
    """Planar 2R chain, unit links, manipulability on the x/y position rows."""
    return make_base_geometry(
        arm_chain=(ArmJoint(np.eye(4), [0, 0, 1]), ArmJoint(transform(x=1.0), [0, 0, 1])),
        tool=transform(x=1.0),
        manipulability_rows=(0, 1),
    )


def random_geometry(rng, n_joints=None):
    """Random base parameters and a random serial chain."""
    if n_joints is None:
        n_joints = int(rng.integers(1, 6))
    joints = []
    for _ in range(n_joints):
        T = np.eye(4)
        T[:3, 3] = rng.uniform(-0.3, 0.3, size=3)
        axis = rng.normal(size=3)
        while np.linalg.norm(axis) < 1e-6:
            axis = rng.normal(size=3)
        joints.append(ArmJoint(T, axis))
    mount = np.eye(4)
    mount[:3, 3] = rng.uniform(-0.2, 0.2, size=3)
    return RobotGeometry(
        mu=rng.uniform(0.1, 0.5),
        rho=rng.uniform(0.0, 0.25),
        wheel_radius=rng.uniform(0.05, 0.25),
        arm_mount=mount,
        arm_chain=tuple(joints),
        joint_limits=np.array([[-np.pi, np.pi]] * n_joints),
    )


def random_state(g, rng):
    return GeneralizedState(
        np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2 * np.pi, 2 * np.pi)]),
        rng.uniform(-10, 10, size=2),
        rng.uniform(g.joint_limits[:, 0] * 0.9, g.joint_limits[:, 1] * 0.9),
    )


def two_link_dynamics_setup():
    """Base + 2-link sample model used by the energy-conservation tests."""
    from nwmm.dynamics import SampleBodyParams

    g = make_base_geometry(
        arm_mount=transform(z=0.3),
        arm_chain=(ArmJoint(np.eye(4), [0, 0, 1]), ArmJoint(transform(x=0.5), [0, 1, 0])),
        joint_limits=np.array([[-np.pi, np.pi]] * 2),
        tool=transform(x=0.5),
    )
    params = SampleBodyParams(
        base_mass=10.0, base_inertia=0.5, wheel_inertia=0.02,
        link_masses=np.array([1.5, 1.0]), gravity=0.0,
    )
    q0 = GeneralizedState([0.0, 0.0, 0.3], [0.0, 0.0], [0.4, 0.7])
    xi0 = np.array([1.0, -0.5, 0.8, -0.6])
    return g, params, q0, xi0


def free_motion_rollout(g, params, q0, xi0, duration, dt):
    """RK4 integration of the reduced dynamics with zero input and gravity.

    Returns the relative kinetic-energy drift over the run.
    """
    from nwmm.dynamics import reduce_dynamics, sample_rigid_body_model
    from nwmm.model import nullspace_basis

    n = g.arm_dof

    def reduced(qv, xi):
        q = GeneralizedState.from_vector(qv, n)
        q_dot = nullspace_basis(q, g) @ xi
        return q_dot, reduce_dynamics(q, q_dot, sample_rigid_body_model(q, q_dot, g, params), g)

    def deriv(qv, xi):
        q_dot, red = reduced(qv, xi)
        return q_dot, np.linalg.solve(red.inertia_xi, -(red.coriolis_xi @ xi) - red.gravity_xi)

    def energy(qv, xi):
        _, red = reduced(qv, xi)
        return 0.5 * xi @ red.inertia_xi @ xi

    qv, xi = q0.as_vector(), np.array(xi0, dtype=float)
    e0 = energy(qv, xi)
    for _ in range(int(round(duration / dt))):
        k1q, k1x = deriv(qv, xi)
        k2q, k2x = deriv(qv + 0.5 * dt * k1q, xi + 0.5 * dt * k1x)
        k3q, k3x = deriv(qv + 0.5 * dt * k2q, xi + 0.5 * dt * k2x)
        k4q, k4x = deriv(qv + dt * k3q, xi + dt * k3x)
        qv = qv + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        xi = xi + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    return abs(energy(qv, xi) - e0) / abs(e0)
