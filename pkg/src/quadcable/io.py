"""Trajectory CSV, gnuplot data files and run summaries."""
import json
from pathlib import Path

import numpy as np

from .integrators import TrajectoryLog


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(log, path):
    """Comma-separated, header row, LF endings, 17 significant digits."""
    lines = [",".join(log.columns)]
    lines.extend(",".join(map(_fmt, row)) for row in log.data)
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_csv(path):
    text = Path(path).read_text(encoding="utf-8")
    header, *rows = text.strip("\n").split("\n")
    data = [[float(v) for v in r.split(",")] for r in rows]
    return TrajectoryLog(header.split(","), np.array(data).reshape(len(data), -1))


def matrix_csv(M, path):
    """Row-major matrix with a ``# rows x cols`` header line."""
    M = np.atleast_2d(M)
    lines = [f"# {M.shape[0]} x {M.shape[1]}"]
    lines.extend(",".join(map(_fmt, row)) for row in M)
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def read_matrix_csv(path):
    lines = Path(path).read_text(encoding="utf-8").strip("\n").split("\n")
    r, c = (int(v) for v in lines[0].lstrip("# ").split(" x "))
    M = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return M.reshape(r, c)


def _dat(path, names, cols):
    lines = ["# " + " ".join(names)]
    for row in np.column_stack(cols):
        lines.append(" ".join(map(_fmt, row)))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


GNUPLOT_SCRIPT = """\
set terminal pngcairo size 1200,900
set output 'fig2.png'
set multiplot layout 2,2
set title 'quadrotor position x (solid) and x_d (dashed)'
plot 'position.dat' u 1:2 w l t 'x1', '' u 1:3 w l t 'x2', '' u 1:4 w l t 'x3', \\
     '' u 1:5 w l dt 2 t 'xd1', '' u 1:6 w l dt 2 t 'xd2', '' u 1:7 w l dt 2 t 'xd3'
set title 'link errors'
set logscale y
plot 'link_errors.dat' u 1:2 w l t 'e_q', '' u 1:3 w l t 'e_omega'
unset logscale y
set title 'angular velocity Omega (solid) and Omega_c (dashed)'
plot 'angular_velocity.dat' u 1:2 w l t 'W1', '' u 1:3 w l t 'W2', '' u 1:4 w l t 'W3', \\
     '' u 1:5 w l dt 2 t 'Wc1', '' u 1:6 w l dt 2 t 'Wc2', '' u 1:7 w l dt 2 t 'Wc3'
set title 'control force -f R e3'
plot 'control.dat' u 1:2 w l t 'u1', '' u 1:3 w l t 'u2', '' u 1:4 w l t 'u3'
unset multiplot
"""


def write_plot_data(log, out_dir, x_d=(0.0, 0.0, 0.0)):
    """Data files for the four panels: position, link errors, angular
    velocity against its command, and the thrust vector."""
    out = Path(out_dir)
    t = log.t
    x = log.vector("x")
    xd = np.tile(np.asarray(x_d, dtype=float), (len(t), 1))
    _dat(out / "position.dat", ["t", "x1", "x2", "x3", "xd1", "xd2", "xd3"], [t, x, xd])
    _dat(out / "link_errors.dat", ["t", "e_q", "e_omega"], [t, log["e_q"], log["e_omega"]])
    _dat(out / "angular_velocity.dat",
         ["t", "Omega1", "Omega2", "Omega3", "Omega_c1", "Omega_c2", "Omega_c3"],
         [t, log.vector("Omega"), log.vector("Omega_c")])
    b3 = np.stack([log["R13"], log["R23"], log["R33"]], axis=1)
    u = -log["f"][:, None] * b3
    _dat(out / "control.dat", ["t", "u1", "u2", "u3", "f", "M1", "M2", "M3"],
         [t, u, log["f"], log.vector("M")])
    (out / "fig2.gp").write_text(GNUPLOT_SCRIPT, encoding="utf-8")


def summarize(log, x_d=(0.0, 0.0, 0.0)):
    x = log.vector("x")
    E = log["E"]
    E0 = E[0]
    return {
        "samples": len(log),
        "final_time": float(log.t[-1]),
        "final_position_error": float(np.linalg.norm(x[-1] - np.asarray(x_d))),
        "final_e_q": float(log["e_q"][-1]),
        "final_e_omega": float(log["e_omega"][-1]),
        "min_f": float(log["f"].min()),
        "max_f": float(log["f"].max()),
        "energy_drift": float(np.max(np.abs(E - E0)) / max(1.0, abs(E0))),
    }


def write_summary(summary, path):
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
