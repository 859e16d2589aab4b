import numpy as np
import pytest

from nwmm.errors import ContractViolation
from nwmm.model import (
    ActuatedVelocity,
    ArmJoint,
    GeneralizedState,
    Pose,
    arm_jacobian,
    arm_manipulability,
    constraint_matrix,
    forward_kinematics,
    generalized_jacobian,
    lift_velocity,
    nullspace_basis,
    whole_body_jacobian,
)
from nwmm.rotations import rotation_vector

from conftest import make_base_geometry, random_geometry, random_state, transform


def lateral_residual(q_dot, phi, rho):
    return abs(-q_dot[0] * np.sin(phi) + q_dot[1] * np.cos(phi) - rho * q_dot[2])


def rolling_residuals(q_dot, phi, g):
    # wheel labeling of the adopted (A, S) pair: phi_dot = c (theta_l_dot - theta_r_dot)
    fwd = q_dot[0] * np.cos(phi) + q_dot[1] * np.sin(phi)
    left = fwd + g.mu * q_dot[2] - g.wheel_radius * q_dot[3]
    right = fwd - g.mu * q_dot[2] - g.wheel_radius * q_dot[4]
    return abs(left), abs(right)


class TestConstraintMatrix:
    def test_phi_zero_rows(self, panda_geometry):
        # direct substitution with sin 0 = 0, cos 0 = 1
        g = make_base_geometry(mu=0.25, rho=0.1, wheel_radius=0.125,
                               arm_chain=panda_geometry.arm_chain,
                               joint_limits=panda_geometry.joint_limits)
        q = GeneralizedState([0, 0, 0], [0, 0], np.zeros(7))
        A = constraint_matrix(q, g)
        assert A.shape == (3, 12)
        np.testing.assert_allclose(A[0, :5], [0, 1, -0.1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(A[1, :5], [-1, 0, -0.25, 0.125, 0], atol=1e-15)
        np.testing.assert_allclose(A[2, :5], [-1, 0, 0.25, 0, 0.125], atol=1e-15)
        np.testing.assert_allclose(A[:, 5:], 0.0)

    def test_phi_quarter_turn_row(self):
        # frozen from the symbolic substitution oracle (see oracle test below)
        g = make_base_geometry(mu=0.25, rho=0.1, wheel_radius=0.125)
        q = GeneralizedState([0, 0, np.pi / 2], [0, 0], np.zeros(1))
        A = constraint_matrix(q, g)
        np.testing.assert_allclose(A[0, :3], [-1.0, 0.0, -0.1], atol=1e-12)

    def test_symbolic_substitution_oracle(self):
        sympy = pytest.importorskip("sympy")
        phi, mu, rho, R = sympy.symbols("phi mu rho R")
        A_sym = sympy.Matrix(
            [
                [-sympy.sin(phi), sympy.cos(phi), -rho, 0, 0],
                [-sympy.cos(phi), -sympy.sin(phi), -mu, R, 0],
                [-sympy.cos(phi), -sympy.sin(phi), mu, 0, R],
            ]
        )
        subs = {phi: sympy.pi / 2, mu: sympy.Rational(1, 4), rho: sympy.Rational(1, 10), R: sympy.Rational(1, 8)}
        expected = np.array(A_sym.subs(subs).evalf(), dtype=float)
        g = make_base_geometry(mu=0.25, rho=0.1, wheel_radius=0.125)
        q = GeneralizedState([0, 0, np.pi / 2], [0, 0], np.zeros(1))
        np.testing.assert_allclose(constraint_matrix(q, g)[:, :5], expected, atol=1e-12)

    def test_full_rank_everywhere(self, rng):
        for _ in range(50):
            g = random_geometry(rng)
            q = random_state(g, rng)
            assert np.linalg.matrix_rank(constraint_matrix(q, g)) == 3


class TestNullspaceBasis:
    def test_annihilates_constraints(self, rng):
        worst = 0.0
        for _ in range(300):
            g = random_geometry(rng)
            q = random_state(g, rng)
            worst = max(worst, np.abs(constraint_matrix(q, g) @ nullspace_basis(q, g)).max())
        assert worst < 1e-12

    def test_substitution_entries(self):
        # c = R / (2 mu) = 0.25; entry (0,0) = c mu, (2,0) = c, (2,1) = -c
        g = make_base_geometry(mu=0.25, rho=0.0, wheel_radius=0.125)
        q = GeneralizedState([0, 0, 0], [0, 0], np.zeros(1))
        S = nullspace_basis(q, g)
        assert S.shape == (6, 3)
        assert S[0, 0] == pytest.approx(0.0625, abs=1e-15)
        assert S[2, 0] == pytest.approx(0.25, abs=1e-15)
        assert S[2, 1] == pytest.approx(-0.25, abs=1e-15)

    def test_equal_wheel_rates_do_not_turn(self, rng):
        g = random_geometry(rng)
        q = random_state(g, rng)
        xi = np.zeros(2 + g.arm_dof)
        xi[:2] = 3.7
        assert abs((nullspace_basis(q, g) @ xi)[2]) < 1e-15

    def test_full_column_rank(self, rng):
        for _ in range(20):
            g = random_geometry(rng)
            q = random_state(g, rng)
            S = nullspace_basis(q, g)
            assert np.linalg.matrix_rank(S) == 2 + g.arm_dof

    def test_arm_block_is_identity(self, panda_geometry, rng):
        q = random_state(panda_geometry, rng)
        S = nullspace_basis(q, panda_geometry)
        np.testing.assert_allclose(S[5:, 2:], np.eye(7))
        np.testing.assert_allclose(S[:5, 2:], 0.0)


class TestLiftVelocity:
    def test_zero_in_zero_out(self, chain_1r):
        q = GeneralizedState([1, 2, 3], [0, 0], [0.5])
        np.testing.assert_allclose(lift_velocity(q, np.zeros(3), chain_1r), 0.0)

    def test_straight_drive_rates(self):
        g = make_base_geometry(mu=0.25, rho=0.0, wheel_radius=0.125)
        q = GeneralizedState([0, 0, 0], [0, 0], np.zeros(1))
        q_dot = lift_velocity(q, [1.0, 1.0, 0.0], g)
        assert q_dot[0] == pytest.approx(0.125, abs=1e-15)
        assert q_dot[1] == pytest.approx(0.0, abs=1e-15)
        assert q_dot[2] == pytest.approx(0.0, abs=1e-15)

    def test_constraints_hold_for_random_inputs(self, rng):
        for _ in range(100):
            g = random_geometry(rng)
            q = random_state(g, rng)
            xi = rng.normal(size=2 + g.arm_dof)
            q_dot = lift_velocity(q, xi, g)
            assert lateral_residual(q_dot, q.q_m[2], g.rho) < 1e-12
            left, right = rolling_residuals(q_dot, q.q_m[2], g)
            assert left < 1e-12 and right < 1e-12

    def test_dimension_mismatch_raises(self, chain_1r):
        q = GeneralizedState([0, 0, 0], [0, 0], [0.0])
        with pytest.raises(ContractViolation):
            lift_velocity(q, np.zeros(5), chain_1r)

    def test_accepts_actuated_velocity(self, chain_1r):
        q = GeneralizedState([0, 0, 0], [0, 0], [0.0])
        xi = ActuatedVelocity(np.array([1.0, -1.0, 0.2]))
        np.testing.assert_allclose(
            lift_velocity(q, xi, chain_1r), lift_velocity(q, xi.xi_dot, chain_1r)
        )


class TestForwardKinematics:
    def test_identity_joints_compose_fixed_offsets(self, rng):
        g = random_geometry(rng)
        q = GeneralizedState([0, 0, 0], [0, 0], np.zeros(g.arm_dof))
        expected = g.arm_mount.copy()
        for joint in g.arm_chain:
            expected = expected @ joint.origin
        if g.tool is not None:
            expected = expected @ g.tool
        pose = forward_kinematics(q, g)
        np.testing.assert_allclose(pose.position, expected[:3, 3], atol=1e-12)

    def test_base_translation_transports_end_effector(self, panda_geometry, rng):
        q_n = random_state(panda_geometry, rng).q_n
        p0 = forward_kinematics(GeneralizedState([0, 0, 0.4], [0, 0], q_n), panda_geometry)
        p1 = forward_kinematics(GeneralizedState([1, 2, 0.4], [5, -3], q_n), panda_geometry)
        np.testing.assert_allclose(p1.position - p0.position, [1, 2, 0], atol=1e-12)
        np.testing.assert_allclose(p1.orientation, p0.orientation, atol=1e-12)

    def test_single_revolute_quarter_turn(self, chain_1r):
        q = GeneralizedState([0, 0, 0], [0, 0], [np.pi / 2])
        pose = forward_kinematics(q, chain_1r)
        np.testing.assert_allclose(pose.position, [0, 1, 0], atol=1e-12)

    def test_wheel_angles_do_not_move_end_effector(self, panda_geometry, rng):
        q_n = random_state(panda_geometry, rng).q_n
        p0 = forward_kinematics(GeneralizedState([0.3, -0.2, 0.7], [0, 0], q_n), panda_geometry)
        p1 = forward_kinematics(GeneralizedState([0.3, -0.2, 0.7], [9, -4], q_n), panda_geometry)
        np.testing.assert_allclose(p1.position, p0.position)
        np.testing.assert_allclose(p1.orientation, p0.orientation)


def finite_difference_twist(q, g, xi, step=1e-6):
    """Independent oracle: differentiate the kinematics along S(q) xi."""
    qv = q.as_vector()
    d = lift_velocity(q, xi, g)
    up = forward_kinematics(GeneralizedState.from_vector(qv + step * d, g.arm_dof), g)
    down = forward_kinematics(GeneralizedState.from_vector(qv - step * d, g.arm_dof), g)
    v = (up.position - down.position) / (2 * step)
    w = rotation_vector(up.rotation_matrix() @ down.rotation_matrix().T) / (2 * step)
    return np.concatenate([v, w])


class TestWholeBodyJacobian:
    def test_matches_finite_differences(self, rng):
        for _ in range(40):
            g = random_geometry(rng)
            q = random_state(g, rng)
            xi = rng.normal(size=2 + g.arm_dof)
            twist = whole_body_jacobian(q, g) @ xi
            fd = finite_difference_twist(q, g, xi)
            scale = max(np.linalg.norm(twist), 1e-9)
            assert np.linalg.norm(twist - fd) / scale < 1e-5

    def test_wheel_columns_of_generalized_jacobian_are_zero(self, panda_geometry, rng):
        q = random_state(panda_geometry, rng)
        J_q = generalized_jacobian(q, panda_geometry)
        np.testing.assert_allclose(J_q[:, 3:5], 0.0)

    def test_arm_columns_equal_world_frame_arm_jacobian(self, panda_geometry, rng):
        from nwmm.model import base_transform, chain_frames

        g = panda_geometry
        q = random_state(g, rng)
        J_xi = whole_body_jacobian(q, g)
        root = base_transform(q.q_m) @ g.arm_mount
        T, axes, origins = chain_frames(root, q.q_n, g)
        p = T[:3, 3]
        for i in range(g.arm_dof):
            np.testing.assert_allclose(J_xi[:3, 2 + i], np.cross(axes[i], p - origins[i]), atol=1e-12)
            np.testing.assert_allclose(J_xi[3:, 2 + i], axes[i], atol=1e-12)

    def test_nullspace_velocity_gives_zero_twist(self, panda_geometry, rng):
        from scipy.linalg import null_space

        q = random_state(panda_geometry, rng)
        J = whole_body_jacobian(q, panda_geometry)
        basis = null_space(J)
        assert basis.shape[1] == 3
        v = basis @ rng.normal(size=basis.shape[1])
        assert np.linalg.norm(J @ v) < 1e-12


class TestArmManipulability:
    def test_stretched_chain_is_singular(self, chain_2r):
        assert arm_manipulability(np.array([0.3, 0.0]), chain_2r) < 1e-9

    def test_planar_2r_analytic_value(self, chain_2r):
        # omega = l1 l2 |sin theta2| with unit links
        assert arm_manipulability(np.array([0.0, np.pi / 2]), chain_2r) == pytest.approx(1.0, abs=1e-12)
        for t2 in (0.3, 1.1, 2.5, -0.7):
            assert arm_manipulability(np.array([0.9, t2]), chain_2r) == pytest.approx(
                abs(np.sin(t2)), abs=1e-9
            )

    def test_independent_of_first_joint(self, chain_2r, rng):
        t2 = 0.8
        values = [arm_manipulability(np.array([t1, t2]), chain_2r) for t1 in rng.uniform(-3, 3, 5)]
        np.testing.assert_allclose(values, values[0], atol=1e-12)

    def test_non_negative_and_zero_iff_rank_deficient(self, panda_geometry, rng):
        for _ in range(20):
            q_n = random_state(panda_geometry, rng).q_n
            w = arm_manipulability(q_n, panda_geometry)
            J = arm_jacobian(q_n, panda_geometry)
            assert w >= 0.0
            if np.linalg.matrix_rank(J, tol=1e-8) == 6:
                assert w > 0.0


class TestTypes:
    def test_geometry_validation(self):
        with pytest.raises(ContractViolation):
            make_base_geometry(mu=-1.0)
        with pytest.raises(ContractViolation):
            make_base_geometry(
                arm_chain=(ArmJoint(np.eye(4), [0, 0, 1]),),
                joint_limits=np.array([[1.0, -1.0]]),
            )
        with pytest.raises(ContractViolation):
            ArmJoint(np.eye(4), [0.0, 0.0, 0.0])

    def test_state_dimension_and_vector_round_trip(self, rng):
        q = GeneralizedState(rng.normal(size=3), rng.normal(size=2), rng.normal(size=7))
        assert q.dim == 12
        q2 = GeneralizedState.from_vector(q.as_vector(), 7)
        np.testing.assert_allclose(q2.as_vector(), q.as_vector())

    def test_pose_rejects_non_unit_quaternion(self):
        with pytest.raises(ContractViolation):
            Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 1e-3]))

    def test_actuated_velocity_ordering(self):
        xi = ActuatedVelocity(np.array([1.0, 2.0, 3.0, 4.0]))
        np.testing.assert_allclose(xi.wheels, [1.0, 2.0])
        np.testing.assert_allclose(xi.arm, [3.0, 4.0])
