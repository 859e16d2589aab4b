"""Small rotation utilities used throughout the package.

Conventions:
- quaternions are scalar-first (w, x, y, z) and unit norm
- rpy = (roll, pitch, yaw) with R = Rz(yaw) @ Ry(pitch) @ Rx(roll)
- rotation vectors are axis * angle
"""

import numpy as np


def skew(v):
    """3x3 cross-product matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _vee(m):
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def axis_angle_matrix(axis, angle):
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    s, c = np.sin(angle), np.cos(angle)
    t = 1.0 - c
    return np.array(
        [
            [c + t * x * x, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, c + t * y * y, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, c + t * z * z],
        ]
    )


def rpy_matrix(roll, pitch, yaw):
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    sr, cr = np.sin(roll), np.cos(roll)
    sp, cp = np.sin(pitch), np.cos(pitch)
    sy, cy = np.sin(yaw), np.cos(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def matrix_to_rpy(R):
    """Inverse of rpy_matrix; at |pitch| = pi/2 the roll/yaw split is fixed by roll = 0."""
    sp = -R[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = np.arcsin(sp)
    if abs(sp) > 1.0 - 1e-12:
        # gimbal: only roll - yaw (or roll + yaw) observable
        return np.array([0.0, pitch, np.arctan2(-R[0, 1], R[1, 1])])
    roll = np.arctan2(R[2, 1], R[2, 2])
    yaw = np.arctan2(R[1, 0], R[0, 0])
    return np.array([roll, pitch, yaw])


def quat_to_matrix(q):
    """Rotation matrix of a scalar-first unit quaternion."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R):
    """Scalar-first unit quaternion of a rotation matrix (w >= 0)."""
    t = np.trace(R)
    if t > 0.0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(R[i, i] - R[j, j] - R[k, k] + 1.0) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def rotation_vector(R):
    """Axis * angle of a rotation matrix, angle in [0, pi]."""
    c = min(1.0, max(-1.0, (np.trace(R) - 1.0) / 2.0))
    angle = np.arccos(c)
    if angle < 1e-7:
        return _vee(R - R.T) / 2.0
    if angle > np.pi - 1e-5:
        # skew part vanishes at pi; recover the axis from the symmetric part
        B = (R + np.eye(3)) / 2.0
        d = np.sqrt(np.maximum(np.diag(B), 0.0))
        k = int(np.argmax(d))
        axis = B[:, k] / d[k]
        axis = axis / np.linalg.norm(axis)
        s = _vee(R - R.T) / 2.0
        if s @ axis < 0.0:
            axis = -axis
        return axis * angle
    return _vee(R - R.T) / (2.0 * np.sin(angle)) * angle


def rpy_rates_to_omega(rpy, rpy_dot):
    """World angular velocity from rpy and rpy rates (rpy_matrix convention)."""
    roll, pitch, yaw = rpy
    sy, cy = np.sin(yaw), np.cos(yaw)
    sp, cp = np.sin(pitch), np.cos(pitch)
    # columns: roll axis Rz@Ry@ex, pitch axis Rz@ey, yaw axis ez
    E = np.array(
        [
            [cy * cp, -sy, 0.0],
            [sy * cp, cy, 0.0],
            [-sp, 0.0, 1.0],
        ]
    )
    return E @ np.asarray(rpy_dot, dtype=float)
