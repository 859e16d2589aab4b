"""Quintic Cartesian trajectory generation for the end-effector approach.

A segment interpolates each axis (x, y, z, roll, pitch, yaw) with a degree-5
polynomial that fixes position, velocity and acceleration at both endpoints:

    P(tau)  = c0 + c1 tau + c2 tau^2 + c3 tau^3 + c4 tau^4 + c5 tau^5
    P'(tau) = c1 + 2 c2 tau + 3 c3 tau^2 + 4 c4 tau^3 + 5 c5 tau^4
    P''(tau)= 2 c2 + 6 c3 tau + 12 c4 tau^2 + 20 c5 tau^3

Coefficients are stored in segment-local time tau = t - t_start; the solve
runs in normalized time u = tau / T and rescales, so conditioning does not
degrade with long spans.  Evaluation outside [t_start, t_end] clamps to the
nearer boundary (position and derivatives), so a controller reading past the
end simply holds the goal.

The approach plan is two sequential segments: translate to the target point
with zero boundary rates, then rotate the roll/pitch/yaw axes onto the
target orientation.  Orientation is interpolated per axis on roll/pitch/yaw;
fine for the single-axis pitch alignment this library targets, but subject
to the usual gimbal caveat near |pitch| = pi/2.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, InvalidInterval
from .model import Pose
from .rotations import matrix_to_quat, matrix_to_rpy, rpy_matrix, rpy_rates_to_omega

AXES = ("x", "y", "z", "roll", "pitch", "yaw")

# boundary-condition rows of the quintic system in normalized time u in [0, 1]
_UNIT_SYSTEM = np.array(
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        [0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 2.0, 6.0, 12.0, 20.0],
    ]
)

_MIN_SPAN = 1e-6


@dataclass(frozen=True)
class BoundaryConditions:
    """Position/velocity/acceleration of one axis at both segment ends."""

    x_s: float
    v_s: float
    a_s: float
    x_e: float
    v_e: float
    a_e: float


@dataclass(frozen=True)
class QuinticSegment:
    """One six-axis quintic segment over [t_start, t_end].

    coeffs has shape (6 axes, 6 powers) in segment-local time t - t_start.
    """

    coeffs: np.ndarray
    t_start: float
    t_end: float
    axes: tuple = AXES

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (len(self.axes), 6):
            raise InvalidInterval("coeffs must be (n_axes, 6)")
        if not self.t_end > self.t_start:
            raise InvalidInterval("segment requires t_end > t_start")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def duration(self):
        return self.t_end - self.t_start

    def to_dict(self):
        return {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "axes": list(self.axes),
            "coeffs": {ax: list(row) for ax, row in zip(self.axes, self.coeffs)},
        }

    @classmethod
    def from_dict(cls, d):
        axes = tuple(d["axes"])
        coeffs = np.array([d["coeffs"][ax] for ax in axes], dtype=float)
        return cls(coeffs, float(d["t_start"]), float(d["t_end"]), axes)

    def to_json(self):
        return json.dumps(self.to_dict())


def solve_quintic(bc, t_s, t_e):
    """Coefficients c0..c5 meeting all six boundary conditions.

    Returned coefficients are in time measured from t_s.  Raises
    InvalidInterval when t_e <= t_s and IllConditioned when the span is
    below 1e-6 s.
    """
    if not t_e > t_s:
        raise InvalidInterval(f"need t_e > t_s, got [{t_s}, {t_e}]")
    T = t_e - t_s
    if T < _MIN_SPAN:
        raise IllConditioned(f"span {T:g} s is too short to solve reliably")
    rhs = np.array([bc.x_s, bc.x_e, bc.v_s * T, bc.v_e * T, bc.a_s * T**2, bc.a_e * T**2])
    c_unit = np.linalg.solve(_UNIT_SYSTEM, rhs)
    return c_unit / T ** np.arange(6)


def eval_quintic(seg, t):
    """Position, velocity, acceleration of every axis at time t.

    t outside [t_start, t_end] clamps to the nearer boundary and returns the
    boundary derivative values.
    """
    tau = min(max(t, seg.t_start), seg.t_end) - seg.t_start
    powers = tau ** np.arange(6)
    c = seg.coeffs
    pos = c @ powers
    vel = c[:, 1:] @ (np.arange(1, 6) * powers[:5])
    acc = c[:, 2:] @ (np.arange(2, 6) * np.arange(1, 5) * powers[:4])
    return pos, vel, acc


def _rest_to_rest(values_s, values_e, t_s, t_e):
    rows = [
        solve_quintic(BoundaryConditions(vs, 0.0, 0.0, ve, 0.0, 0.0), t_s, t_e)
        for vs, ve in zip(values_s, values_e)
    ]
    return QuinticSegment(np.vstack(rows), t_s, t_e)


def plan_approach(start, pruning_point, t_translate, t_rotate):
    """Two-segment approach: translate to the target point, then rotate onto it.

    Segment 1 moves x/y/z from the start position to the target position with
    the orientation held; segment 2 holds position and interpolates
    roll/pitch/yaw to the target orientation along the shorter angular
    difference per axis.  Both segments have zero boundary velocity and
    acceleration, so the junction is position- and velocity-continuous.
    """
    if not (t_translate > 0.0 and t_rotate > 0.0):
        raise InvalidInterval("phase durations must be positive")
    rpy_s = matrix_to_rpy(start.rotation_matrix())
    rpy_g = matrix_to_rpy(pruning_point.rotation_matrix())
    delta = rpy_g - rpy_s
    delta = np.arctan2(np.sin(delta), np.cos(delta))
    rpy_goal = rpy_s + delta

    p_s = start.position
    p_g = pruning_point.position
    seg1 = _rest_to_rest(
        np.concatenate([p_s, rpy_s]), np.concatenate([p_g, rpy_s]), 0.0, t_translate
    )
    seg2 = _rest_to_rest(
        np.concatenate([p_g, rpy_s]),
        np.concatenate([p_g, rpy_goal]),
        t_translate,
        t_translate + t_rotate,
    )
    return [seg1, seg2]


def evaluate_plan(segments, t):
    """Evaluate a sequential segment list at time t (clamped at both ends)."""
    if not segments:
        raise InvalidInterval("empty plan")
    active = segments[-1]
    for seg in segments:
        if t < seg.t_end:
            active = seg
            break
    return eval_quintic(active, t)


def reference_pose_twist(segments, t):
    """Desired end-effector Pose and 6-twist (v; omega, world frame) at time t."""
    pos, vel, _ = evaluate_plan(segments, t)
    quat = matrix_to_quat(rpy_matrix(*pos[3:]))
    twist = np.concatenate([vel[:3], rpy_rates_to_omega(pos[3:], vel[3:])])
    return Pose(pos[:3], quat), twist
