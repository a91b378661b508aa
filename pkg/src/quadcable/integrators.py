"""Fixed-step integrators that keep the state on R^3 x SO(3) x (S^2)^n.

The attitude is advanced multiplicatively, ``R <- R exp(dt * Omega_eff)``,
with Munthe-Kaas corrected stage rates so RK4 stays fourth order on SO(3);
link directions are integrated in R^3 and then renormalized, and link
angular velocities re-projected onto the tangent planes.

Control is sampled once at the start of every step and held across the
stages (zero-order hold), which lets stateful controllers keep their
finite-difference memory consistent with the step sequence.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import chain_derivative
from .dynamics import (COND_LIMIT, ControlInput, SystemState, attitude_acceleration,
                       generalized_momentum, total_energy)
from .analysis import link_error_metrics
from .errors import NonFinite, SingularMassMatrix, ValidationError
from .manifold import cross, exp_so3


class Scheme(str, Enum):
    RK4 = "rk4"
    EULER = "euler"


@dataclass
class IntegratorConfig:
    dt: float = 1e-3
    scheme: Scheme = Scheme.RK4
    renormalize_every: int = 1

    def __post_init__(self):
        self.dt = float(self.dt)
        self.scheme = Scheme(self.scheme)
        if not self.dt > 0:
            raise ValidationError("time step must be positive", "integrator.dt")
        if int(self.renormalize_every) != self.renormalize_every or self.renormalize_every < 1:
            raise ValidationError("must be an integer >= 1", "integrator.renormalize_every")
        self.renormalize_every = int(self.renormalize_every)


def _resolve(control, time, state):
    if control is None:
        return ControlInput()
    if isinstance(control, ControlInput):
        return control
    return control(time, state)


def _derivative(p, t, x, v, R, Omega, q, omega, u):
    # q, omega pass through the projection inside the kernel, so stage
    # points slightly off the manifold still see a tangent vector field
    xdd, qdot, wdot, ratio = chain_derivative(
        t.M00, t.M0, t.Mij, t.gravity, t.g, q, omega, u.thrust_vector(R))
    if not ratio <= COND_LIMIT:
        raise SingularMassMatrix(f"mass matrix condition estimate exceeds {COND_LIMIT:.0e}")
    return v, xdd, Omega, attitude_acceleration(p, Omega, u.M), qdot, wdot


def _dexpinv(theta, w):
    """Increment rate for R = R0 exp(theta) driven by body rate ``w``,
    truncated after the terms a fourth-order scheme needs."""
    tw = cross(theta, w)
    return w + 0.5 * tw + cross(theta, tw) / 12.0


def _advance(p, t, s, u, dt, scheme):
    x0, v0, R0, W0, q0, w0 = s.x, s.v, s.R, s.Omega, s.q, s.omega
    k1 = _derivative(p, t, x0, v0, R0, W0, q0, w0, u)
    if scheme is Scheme.EULER:
        dx, dv, dR, dW, dq, dw = k1
        return (x0 + dt * dx, v0 + dt * dv, R0 @ exp_so3(dt * dR),
                W0 + dt * dW, q0 + dt * dq, w0 + dt * dw)

    # Munthe-Kaas stages: the attitude slope is the body rate mapped
    # through dexp^-1 at the stage increment theta
    def stage(k, c):
        dx, dv, dR, dW, dq, dw = k
        theta = c * dR
        d = _derivative(p, t, x0 + c * dx, v0 + c * dv, R0 @ exp_so3(theta),
                        W0 + c * dW, q0 + c * dq, w0 + c * dw, u)
        return (d[0], d[1], _dexpinv(theta, d[2])) + d[3:]

    k2 = stage(k1, 0.5 * dt)
    k3 = stage(k2, 0.5 * dt)
    k4 = stage(k3, dt)
    comb = [(a + 2.0 * b + 2.0 * c + d) * (dt / 6.0) for a, b, c, d in zip(k1, k2, k3, k4)]
    return (x0 + comb[0], v0 + comb[1], R0 @ exp_so3(comb[2]),
            W0 + comb[3], q0 + comb[4], w0 + comb[5])


def step(p, t, s, control, cfg, time=0.0, index=0):
    """Advance ``s`` by one step of ``cfg.dt``.

    ``control`` is a ControlInput, ``None`` (zero input) or a callable
    ``control(time, state) -> ControlInput``. ``index`` is the step counter
    used to schedule renormalization.
    """
    u = _resolve(control, time, s)
    return _step_with(p, t, s, u, cfg, index)


def _step_with(p, t, s, u, cfg, index):
    x, v, R, W, q, w = _advance(p, t, s, u, cfg.dt, cfg.scheme)
    out = SystemState.__new__(SystemState)
    out.x, out.v, out.R, out.Omega, out.q, out.omega = x, v, R, W, q, w
    if (index + 1) % cfg.renormalize_every == 0:
        out.q = q / np.linalg.norm(q, axis=1)[:, None]
        out.omega = w - np.einsum("ij,ij->i", out.q, w)[:, None] * out.q
    if not out.is_finite():
        raise NonFinite(f"non-finite state after step {index}", step=index)
    return out


def _columns(n):
    cols = ["t"]
    cols += [f"x{i}" for i in (1, 2, 3)]
    cols += [f"v{i}" for i in (1, 2, 3)]
    cols += [f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    cols += [f"Omega{i}" for i in (1, 2, 3)]
    cols += [f"Omega_c{i}" for i in (1, 2, 3)]
    for k in range(1, n + 1):
        cols += [f"q{k}_{i}" for i in (1, 2, 3)]
    for k in range(1, n + 1):
        cols += [f"omega{k}_{i}" for i in (1, 2, 3)]
    cols += ["f"] + [f"M{i}" for i in (1, 2, 3)]
    cols += ["E"] + [f"p{i}" for i in (1, 2, 3)]
    cols += ["e_q", "e_omega", "Psi_R"]
    return cols


class TrajectoryLog:
    """Sampled time series; one row per sample, columns named in ``columns``."""

    def __init__(self, columns, data):
        self.columns = list(columns)
        self.data = np.asarray(data, dtype=float).reshape(-1, len(self.columns))
        self._index = {c: i for i, c in enumerate(self.columns)}

    def __len__(self):
        return len(self.data)

    def __getitem__(self, name):
        return self.data[:, self._index[name]]

    def vector(self, prefix, width=3):
        return np.stack([self[f"{prefix}{i}"] for i in range(1, width + 1)], axis=1)

    @property
    def t(self):
        return self["t"]

    @property
    def n(self):
        return sum(1 for c in self.columns if c.startswith("q") and c.endswith("_1"))


def _sample(p, t, time, s, u, diag):
    Omega_c = np.zeros(3)
    psi = 0.0
    if diag is not None:
        cmd, errs = diag
        if cmd is not None:
            Omega_c = cmd.Omega_c
        if errs is not None:
            psi = errs.Psi_R
    e_q, e_w = link_error_metrics(s)
    return np.concatenate([
        [time], s.x, s.v, s.R.ravel(), s.Omega, Omega_c, s.q.ravel(), s.omega.ravel(),
        [u.f], u.M, [total_energy(p, t, s)], generalized_momentum(t, s), [e_q, e_w, psi],
    ])


def _diagnostics(control):
    fn = getattr(control, "diagnostics", None)
    return fn() if fn is not None else None


def simulate(p, t, s0, control, cfg, duration, decimation=1, on_step=None):
    """Fixed-step loop returning a TrajectoryLog.

    Rows are emitted every ``decimation`` steps, including the initial
    state, so the log has ``floor(duration / (dt * decimation)) + 1`` rows.
    """
    if duration < 0:
        raise ValidationError("duration must be non-negative", "duration")
    decimation = int(decimation)
    if decimation < 1:
        raise ValidationError("decimation must be >= 1", "outputs.decimation")
    n_steps = int(np.floor(duration / cfg.dt + 1e-9))
    rows = []
    s = s0.copy()
    for k in range(n_steps + 1):
        time = k * cfg.dt
        u = _resolve(control, time, s)
        if k % decimation == 0:
            rows.append(_sample(p, t, time, s, u, _diagnostics(control)))
        if on_step is not None:
            on_step(k, time, s, u)
        if k == n_steps:
            break
        s = _step_with(p, t, s, u, cfg, k)
    return TrajectoryLog(_columns(s0.n), rows)
