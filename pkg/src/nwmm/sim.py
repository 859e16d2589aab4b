"""Deterministic closed-loop kinematic simulation.

The loop per control tick: read the trajectory reference, evaluate the
secondary tasks, resolve rates, integrate q_dot = S(q) xi_dot with classical
RK4 holding xi_dot constant over the step (a velocity-commanded robot with
zero-order hold).  A 0.5 s settle margin after the rotation phase lets the
feedback term close the residual error before the final row is logged.

Runs are bit-deterministic for identical scenarios.  With `split_rate`
enabled the arm command is re-evaluated at 1 kHz inside each tick while the
wheel command is held at the tick rate.
"""

from dataclasses import dataclass

import numpy as np

from .controller import resolve_rates
from .errors import ContractViolation
from .model import (
    ActuatedVelocity,
    GeneralizedState,
    forward_kinematics,
    nullspace_basis,
)
from .tasks import SecondaryVelocity, combine_secondary, joint_limit_task, manipulability_task
from .trajectory import plan_approach, reference_pose_twist

SETTLE_MARGIN = 0.5
ARM_PERIOD = 1e-3


@dataclass(frozen=True)
class SimLog:
    """Time-indexed record of one run; all arrays share the leading axis.

    ee_pose rows are (px, py, pz, qw, qx, qy, qz); tracking_error rows are
    (position error; rotation-vector error); constraint_residual is the
    lateral no-slip condition evaluated on the reconstructed q_dot.
    """

    t: np.ndarray
    q_m: np.ndarray
    q_w: np.ndarray
    q_n: np.ndarray
    xi_dot_cmd: np.ndarray
    ee_pose: np.ndarray
    tracking_error: np.ndarray
    omega: np.ndarray
    constraint_residual: np.ndarray

    def __post_init__(self):
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0.0):
            raise ContractViolation("log times must be strictly increasing")

    def __len__(self):
        return self.t.shape[0]

    @property
    def arm_dof(self):
        return self.q_n.shape[1]


def step(q, xi_dot, dt, g):
    """Integrate q_dot = S(q) xi_dot over one step of classical RK4."""
    if dt <= 0.0:
        raise ContractViolation("dt must be positive")
    xi = xi_dot.xi_dot if isinstance(xi_dot, ActuatedVelocity) else np.asarray(xi_dot, dtype=float)
    if xi.shape != (2 + g.arm_dof,):
        raise ContractViolation(f"xi_dot must have length {2 + g.arm_dof}")
    n = g.arm_dof

    def rate(vec):
        return nullspace_basis(GeneralizedState.from_vector(vec, n), g) @ xi

    qv = q.as_vector()
    k1 = rate(qv)
    k2 = rate(qv + 0.5 * dt * k1)
    k3 = rate(qv + 0.5 * dt * k2)
    k4 = rate(qv + dt * k3)
    return GeneralizedState.from_vector(qv + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), n)


def _secondary_velocity(q, scenario):
    g = scenario.geometry
    w_manip, w_limit = scenario.task_weights
    tasks, weights = [], []
    if w_manip != 0.0:
        tasks.append(manipulability_task(q, g, scenario.tasks))
        weights.append(w_manip)
    if w_limit != 0.0:
        tasks.append(joint_limit_task(q, g, scenario.tasks))
        weights.append(w_limit)
    if not tasks:
        return SecondaryVelocity(np.zeros(2 + g.arm_dof))
    return combine_secondary(tasks, weights)


def _control_tick(q, scenario, segments, t):
    x_des, v_des = reference_pose_twist(segments, t)
    xi0 = _secondary_velocity(q, scenario)
    return resolve_rates(q, scenario.geometry, x_des, v_des, xi0, scenario.controller)


def _lateral_residual(q, xi_cmd, g):
    qd = nullspace_basis(q, g) @ xi_cmd
    phi = q.q_m[2]
    return abs(-qd[0] * np.sin(phi) + qd[1] * np.cos(phi) - g.rho * qd[2])


def run_scenario(scenario):
    """Plan, then tick the controller at 1/dt until the settle margin ends."""
    g = scenario.geometry
    q = GeneralizedState(
        np.array(scenario.initial_state.q_m),
        np.array(scenario.initial_state.q_w),
        np.array(scenario.initial_state.q_n),
    )
    start = forward_kinematics(q, g)
    t_translate, t_rotate = scenario.phase_durations
    segments = plan_approach(start, scenario.pruning_point, t_translate, t_rotate)
    t_final = t_translate + t_rotate + SETTLE_MARGIN
    n_steps = int(round(t_final / scenario.dt))

    rows = {name: [] for name in (
        "t", "q_m", "q_w", "q_n", "xi_dot_cmd", "ee_pose",
        "tracking_error", "omega", "constraint_residual",
    )}
    for k in range(n_steps + 1):
        t = k * scenario.dt
        out = _control_tick(q, scenario, segments, t)
        pose = forward_kinematics(q, g)
        rows["t"].append(t)
        rows["q_m"].append(q.q_m.copy())
        rows["q_w"].append(q.q_w.copy())
        rows["q_n"].append(q.q_n.copy())
        rows["xi_dot_cmd"].append(out.xi_dot_cmd)
        rows["ee_pose"].append(np.concatenate([pose.position, pose.orientation]))
        rows["tracking_error"].append(out.diagnostics.tracking_error)
        rows["omega"].append(out.diagnostics.manipulability)
        rows["constraint_residual"].append(_lateral_residual(q, out.xi_dot_cmd, g))
        if k == n_steps:
            break
        if scenario.split_rate:
            q = _advance_split_rate(q, scenario, segments, t, out)
        else:
            q = step(q, out.xi_dot_cmd, scenario.dt, g)

    return SimLog(**{name: np.asarray(data) for name, data in rows.items()})


def _advance_split_rate(q, scenario, segments, t, tick_out):
    """Advance one base tick with the arm re-resolved at 1 kHz, wheels held."""
    wheels = tick_out.xi_dot_cmd[:2]
    substeps = max(1, int(round(scenario.dt / ARM_PERIOD)))
    h = scenario.dt / substeps
    out = tick_out
    for j in range(substeps):
        if j > 0:
            out = _control_tick(q, scenario, segments, t + j * h)
        cmd = np.concatenate([wheels, out.xi_dot_cmd[2:]])
        q = step(q, cmd, h, scenario.geometry)
    return q


def csv_header(arm_dof):
    """Exact CSV column header for a log with the given arm size."""
    cols = ["t", "x_m", "y_m", "phi", "theta_l", "theta_r"]
    cols += [f"q_n_{i}" for i in range(arm_dof)]
    cols += [f"xi_dot_{i}" for i in range(2 + arm_dof)]
    cols += ["ee_x", "ee_y", "ee_z", "ee_qw", "ee_qx", "ee_qy", "ee_qz"]
    cols += ["err_x", "err_y", "err_z", "err_wx", "err_wy", "err_wz"]
    cols += ["omega", "constraint_residual"]
    return ",".join(cols)


def emit_csv(log, path):
    """Write the log as CSV, 9 significant digits, newline-terminated."""
    lines = [csv_header(log.arm_dof)]
    for i in range(len(log)):
        values = np.concatenate(
            [
                [log.t[i]],
                log.q_m[i],
                log.q_w[i],
                log.q_n[i],
                log.xi_dot_cmd[i],
                log.ee_pose[i],
                log.tracking_error[i],
                [log.omega[i], log.constraint_residual[i]],
            ]
        )
        lines.append(",".join(format(v, ".9g") for v in values))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
