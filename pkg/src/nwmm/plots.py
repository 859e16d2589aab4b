"""Static SVG charts of a simulation log."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)


def emit_plots(log, out_dir, geometry=None, prefix=""):
    """Write base-path, tracking-error, manipulability and joint-angle SVGs.

    Joint-limit bands are drawn when a geometry is supplied.  Returns the
    list of written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots()
    if len(log):
        ax.plot(log.q_m[:, 0], log.q_m[:, 1])
    ax.set_xlabel("x_m [m]")
    ax.set_ylabel("y_m [m]")
    ax.set_title("base path")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True)
    path = out_dir / f"{prefix}base_path.svg"
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    if len(log):
        ax.plot(log.t, np.linalg.norm(log.tracking_error[:, :3], axis=1), label="position [m]")
        ax.plot(log.t, np.linalg.norm(log.tracking_error[:, 3:], axis=1), label="orientation [rad]")
        ax.legend()
    ax.set_xlabel("t [s]")
    ax.set_ylabel("tracking error")
    ax.set_title("end-effector tracking error")
    ax.grid(True)
    path = out_dir / f"{prefix}tracking_error.svg"
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    if len(log):
        ax.plot(log.t, log.omega)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("manipulability [-]")
    ax.set_title("arm manipulability")
    ax.grid(True)
    path = out_dir / f"{prefix}manipulability.svg"
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    n = log.q_n.shape[1] if log.q_n.ndim == 2 else 0
    for i in range(n):
        (line,) = ax.plot(log.t, log.q_n[:, i], label=f"q_n_{i}")
        if geometry is not None and len(log):
            lo, hi = geometry.joint_limits[i]
            ax.fill_between(log.t, lo, hi, color=line.get_color(), alpha=0.06)
    if n:
        ax.legend(ncol=2, fontsize="small")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("joint angle [rad]")
    ax.set_title("arm joint angles (shaded: limit ranges)")
    ax.grid(True)
    path = out_dir / f"{prefix}joint_angles.svg"
    _save(fig, path)
    written.append(path)

    return written
