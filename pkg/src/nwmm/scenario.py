"""Scenario and geometry documents.

Everything is a single JSON document, SI units, angles in radians.  Any key
may instead carry a `_deg` suffix to give its value in degrees; the loader
converts and strips the suffix (supplying both forms is an error).

Geometry schema::

    {
      "mu": 0.25, "rho": 0.1, "wheel_radius": 0.125,
      "arm_mount": {"xyz": [x, y, z], "rpy": [r, p, y]},
      "tool":      {"xyz": ..., "rpy": ...},          # optional
      "manipulability_rows": [0, 1, 2, 3, 4, 5],       # optional
      "arm_chain": [
        {"xyz": [...], "rpy": [...], "axis": [0, 0, 1], "limits": [lo, hi]},
        ...
      ]
    }

Scenario schema::

    {
      "geometry": {...} | "geometry_file": "path-or-builtin:name",
      "initial_state": {"q_m": [x, y, phi], "q_w": [l, r], "q_n": [...]},
      "pruning_point": {"position": [...], "rpy": [...] | "quat": [w,x,y,z]}
                       | {"offset_from_initial_ee":
                           {"position": [...], "rpy": [...]}},
      "phase_durations": {"t_translate": s, "t_rotate": s},
      "dt": 0.02,
      "seed": 0,
      "controller": {"kp_pos", "kp_ori", "damping_lambda",
                     "sigma_min_threshold", "rate_limits": x | [...],
                     "split_rate": false},
      "tasks": {"k0", "k_i", "gamma_start", "fd_step", "limit_profile",
                "weights": [w_manipulability, w_joint_limits]},
      "dynamics": {"base_mass", "base_inertia", "wheel_inertia",
                   "link_masses", "gravity"}                    # optional
    }

The `offset_from_initial_ee` form resolves the pruning point at load time
from the initial end-effector pose; the positional offset and the rpy offset
are applied in the global frame.
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .controller import ControlParams
from .dynamics import SampleBodyParams
from .errors import ContractViolation, ScenarioError
from .model import ArmJoint, GeneralizedState, Pose, RobotGeometry, forward_kinematics
from .rotations import matrix_to_quat, rpy_matrix
from .tasks import ConstraintTaskParams

MAX_DT = 0.02


@dataclass
class Scenario:
    geometry: RobotGeometry
    initial_state: GeneralizedState
    pruning_point: Pose
    phase_durations: tuple
    dt: float
    controller: ControlParams
    tasks: ConstraintTaskParams
    task_weights: tuple = (1.0, 1.0)
    split_rate: bool = False
    seed: int = 0
    dynamics: SampleBodyParams | None = None

    def __post_init__(self):
        if not 0.0 < self.dt <= MAX_DT:
            raise ScenarioError(f"dt must be in (0, {MAX_DT}] s, got {self.dt}")
        t_translate, t_rotate = self.phase_durations
        if t_translate <= 0.0 or t_rotate <= 0.0:
            raise ScenarioError("phase durations must be positive")
        self.phase_durations = (float(t_translate), float(t_rotate))
        self.task_weights = tuple(float(w) for w in self.task_weights)
        if len(self.task_weights) != 2:
            raise ScenarioError("task_weights must be (manipulability, joint_limits)")


def _strip_deg(node):
    if isinstance(node, dict):
        out = {}
        for key, value in node.items():
            if key.endswith("_deg"):
                base = key[:-4]
                if base in node:
                    raise ScenarioError(f"both '{base}' and '{key}' given")
                try:
                    out[base] = np.deg2rad(np.asarray(value, dtype=float)).tolist()
                except (TypeError, ValueError):
                    raise ScenarioError(f"'{key}' must be numeric") from None
            else:
                out[key] = _strip_deg(value)
        return out
    if isinstance(node, list):
        return [_strip_deg(item) for item in node]
    return node


def _transform(node, what):
    if node is None:
        return np.eye(4)
    try:
        xyz = np.asarray(node.get("xyz", [0.0, 0.0, 0.0]), dtype=float)
        rpy = np.asarray(node.get("rpy", [0.0, 0.0, 0.0]), dtype=float)
    except (AttributeError, ValueError):
        raise ScenarioError(f"{what} must be an object with 'xyz'/'rpy'") from None
    if xyz.shape != (3,) or rpy.shape != (3,):
        raise ScenarioError(f"{what}: 'xyz' and 'rpy' must be 3-vectors")
    T = np.eye(4)
    T[:3, :3] = rpy_matrix(*rpy)
    T[:3, 3] = xyz
    return T


def geometry_from_dict(doc):
    doc = _strip_deg(doc)
    try:
        chain_doc = doc["arm_chain"]
        mu = float(doc["mu"])
        rho = float(doc["rho"])
        wheel_radius = float(doc["wheel_radius"])
    except KeyError as missing:
        raise ScenarioError(f"geometry is missing {missing}") from None
    joints, limits = [], []
    for i, jd in enumerate(chain_doc):
        axis = jd.get("axis", [0.0, 0.0, 1.0])
        joints.append(ArmJoint(_transform(jd, f"arm_chain[{i}]"), axis))
        if "limits" not in jd:
            raise ScenarioError(f"arm_chain[{i}] is missing 'limits'")
        limits.append(jd["limits"])
    rows = doc.get("manipulability_rows")
    return RobotGeometry(
        mu=mu,
        rho=rho,
        wheel_radius=wheel_radius,
        arm_mount=_transform(doc.get("arm_mount"), "arm_mount"),
        arm_chain=tuple(joints),
        joint_limits=np.asarray(limits, dtype=float),
        tool=_transform(doc["tool"], "tool") if "tool" in doc else None,
        manipulability_rows=tuple(rows) if rows is not None else None,
    )


def load_geometry(source, base_dir=None):
    """Geometry from a dict, a filesystem path, or 'builtin:<name>'."""
    if isinstance(source, dict):
        return geometry_from_dict(source)
    name = str(source)
    if name.startswith("builtin:"):
        ref = resources.files("nwmm").joinpath(f"configs/{name[8:]}.json")
        try:
            text = ref.read_text()
        except FileNotFoundError:
            raise ScenarioError(f"no builtin geometry '{name[8:]}'") from None
    else:
        path = Path(name)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read geometry file {path}: {exc}") from None
    return geometry_from_dict(json.loads(text))


def _parse_pose(node, geometry, initial_state):
    if "offset_from_initial_ee" in node:
        off = node["offset_from_initial_ee"]
        start = forward_kinematics(initial_state, geometry)
        pos = start.position + np.asarray(off.get("position", [0, 0, 0]), dtype=float)
        R = rpy_matrix(*off.get("rpy", [0, 0, 0])) @ start.rotation_matrix()
        return Pose(pos, matrix_to_quat(R))
    try:
        pos = np.asarray(node["position"], dtype=float)
    except KeyError:
        raise ScenarioError("pruning_point needs 'position' or 'offset_from_initial_ee'") from None
    if "quat" in node:
        quat = np.asarray(node["quat"], dtype=float)
        quat = quat / np.linalg.norm(quat)
    else:
        quat = matrix_to_quat(rpy_matrix(*node.get("rpy", [0, 0, 0])))
    return Pose(pos, quat)


def scenario_from_dict(doc, base_dir=None):
    doc = _strip_deg(doc)
    if "geometry" in doc:
        geometry = load_geometry(doc["geometry"], base_dir)
    elif "geometry_file" in doc:
        geometry = load_geometry(doc["geometry_file"], base_dir)
    else:
        raise ScenarioError("scenario needs 'geometry' or 'geometry_file'")

    try:
        st = doc["initial_state"]
        initial = GeneralizedState(
            np.asarray(st["q_m"], dtype=float),
            np.asarray(st.get("q_w", [0.0, 0.0]), dtype=float),
            np.asarray(st["q_n"], dtype=float),
        )
    except KeyError as missing:
        raise ScenarioError(f"initial_state is missing {missing}") from None
    if initial.q_n.shape[0] != geometry.arm_dof:
        raise ScenarioError("initial q_n length does not match the arm chain")

    try:
        durations = doc["phase_durations"]
        phase = (float(durations["t_translate"]), float(durations["t_rotate"]))
        pruning = _parse_pose(doc["pruning_point"], geometry, initial)
        dt = float(doc["dt"])
    except KeyError as missing:
        raise ScenarioError(f"scenario is missing {missing}") from None

    ctrl_doc = dict(doc.get("controller", {}))
    split_rate = bool(ctrl_doc.pop("split_rate", False))
    limits = ctrl_doc.get("rate_limits")
    if limits is not None and np.isscalar(limits):
        ctrl_doc["rate_limits"] = np.full(2 + geometry.arm_dof, float(limits))
    elif limits is not None:
        ctrl_doc["rate_limits"] = np.asarray(limits, dtype=float)
    try:
        controller = ControlParams(**ctrl_doc)
    except (TypeError, ContractViolation) as exc:
        raise ScenarioError(f"bad controller parameters: {exc}") from None

    task_doc = dict(doc.get("tasks", {}))
    weights = task_doc.pop("weights", (1.0, 1.0))
    try:
        tasks = ConstraintTaskParams(**task_doc)
    except (TypeError, ContractViolation) as exc:
        raise ScenarioError(f"bad task parameters: {exc}") from None

    dynamics = None
    if "dynamics" in doc:
        dyn_doc = dict(doc["dynamics"])
        try:
            dynamics = SampleBodyParams(**dyn_doc)
        except (TypeError, ContractViolation) as exc:
            raise ScenarioError(f"bad dynamics parameters: {exc}") from None

    return Scenario(
        geometry=geometry,
        initial_state=initial,
        pruning_point=pruning,
        phase_durations=phase,
        dt=dt,
        controller=controller,
        tasks=tasks,
        task_weights=tuple(weights),
        split_rate=split_rate,
        seed=int(doc.get("seed", 0)),
        dynamics=dynamics,
    )


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from None
    return scenario_from_dict(doc, base_dir=path.parent)
