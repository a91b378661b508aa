"""Geometric hover controller for the quadrotor with a suspended chain.

The translational loop designs a force ``A`` from linear feedback on the
quadrotor position and link directions; the attitude loop rotates the
thrust axis ``R e3`` onto ``-A/|A|`` and the thrust magnitude is the
projection ``f = -A . R e3``.
"""
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ControlInput, build_inertia_table
from .errors import DegenerateThrust, HeadingParallel, ValidationError
from .manifold import E1, E3, cross, hat, skew_vee

# Gains from the numerical example (n = 5).
DEFAULT_KQ = (11.01, 6.67, 1.97, 0.41, 0.069)
DEFAULT_KOMEGA = (0.93, 0.24, 0.032, 0.030, 0.025)

C = np.eye(3)[:, :2]
# Maps the 2-vector C^T xi back into R^3 as the force direction that
# restores the link, i.e. e3 x (C C^T xi).
LINK_EMBED = hat(E3) @ C


@dataclass
class ControllerConfig:
    x_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    b1_d: np.ndarray = field(default_factory=lambda: E1.copy())
    k_x: float = 12.8
    k_xdot: float = 4.22
    k_q: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_KQ))
    k_omega: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_KOMEGA))
    kR_eff: float = 0.65
    kOmega_eff: float = 0.11
    omega_c_dt: float = None
    max_Omega_c: float = 50.0
    max_Omegadot_c: float = 500.0

    def __post_init__(self):
        self.x_d = np.asarray(self.x_d, dtype=float)
        self.b1_d = np.asarray(self.b1_d, dtype=float)
        self.k_q = np.atleast_1d(np.asarray(self.k_q, dtype=float))
        self.k_omega = np.atleast_1d(np.asarray(self.k_omega, dtype=float))
        if self.x_d.shape != (3,):
            raise ValidationError("must be a 3-vector", "controller.x_d")
        nb = np.linalg.norm(self.b1_d)
        if self.b1_d.shape != (3,) or nb == 0:
            raise ValidationError("must be a nonzero 3-vector", "controller.b1_d")
        self.b1_d = self.b1_d / nb
        for name in ("k_x", "k_xdot", "kR_eff", "kOmega_eff", "max_Omega_c", "max_Omegadot_c"):
            if not getattr(self, name) > 0:
                raise ValidationError("gain must be positive", f"controller.{name}")
        if len(self.k_q) != len(self.k_omega):
            raise ValidationError("k_q and k_omega lengths differ", "controller.k_omega")
        if np.any(self.k_q <= 0) or np.any(self.k_omega <= 0):
            raise ValidationError("link gains must be positive", "controller.k_q")
        if self.omega_c_dt is not None and not self.omega_c_dt > 0:
            raise ValidationError("must be positive", "controller.omega_c_dt")

    def check_links(self, n):
        if len(self.k_q) != n:
            raise ValidationError(
                f"{len(self.k_q)} link gains given for {n} links", "controller.k_q")


@dataclass
class AttitudeCommand:
    R_c: np.ndarray
    Omega_c: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Omegadot_c: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class AttitudeErrors:
    e_R: np.ndarray
    e_Omega: np.ndarray
    Psi_R: float


def fictitious_delta_u(s, cfg):
    """Linear feedback force about the hanging equilibrium at ``cfg.x_d``."""
    du = -cfg.k_x * (s.x - cfg.x_d) - cfg.k_xdot * s.v
    xi = cross(E3, s.q)
    du -= LINK_EMBED @ (C.T @ (cfg.k_q @ xi + cfg.k_omega @ s.omega))
    return du


def ideal_thrust_A(s, table, cfg):
    """Ideal thrust vector; equals ``-f R e3`` at hover, i.e. ``-M00 g e3``."""
    return fictitious_delta_u(s, cfg) - table.M00 * table.g * E3


def desired_attitude(A, b1_d):
    nA = np.linalg.norm(A)
    if nA < 1e-6:
        raise DegenerateThrust(f"|A| = {nA:.3e} N is below 1e-6")
    b3 = -A / nA
    H = hat(b3)
    b2 = H @ b1_d
    nb2 = np.linalg.norm(b2)
    if nb2 < 1e-6:
        raise HeadingParallel("b1_d is parallel to the commanded thrust axis")
    b1 = -(H @ b2)
    return np.column_stack([b1 / np.linalg.norm(b1), b2 / nb2, b3])


def _clamp(v, bound):
    nv = np.linalg.norm(v)
    if nv > bound:
        return v * (bound / nv)
    return v


def desired_angular_velocity(prev, curr_Rc, dt, max_rate=np.inf, max_accel=np.inf):
    """Finite-difference Omega_c and Omegadot_c from successive R_c.

    ``prev`` is the previous AttitudeCommand or None at start-up, in which
    case both rates are zero.
    """
    if not dt > 0:
        raise ValidationError("dt must be positive", "dt")
    if prev is None:
        return np.zeros(3), np.zeros(3)
    D = prev.R_c.T @ curr_Rc
    Omega_c = _clamp(skew_vee(D) / dt, max_rate)
    Omegadot_c = _clamp((Omega_c - prev.Omega_c) / dt, max_accel)
    return Omega_c, Omegadot_c


def attitude_errors(s, cmd):
    RtRc = s.R.T @ cmd.R_c
    e_R = skew_vee(cmd.R_c.T @ s.R)
    e_Omega = s.Omega - RtRc @ cmd.Omega_c
    # 1/2 tr(I - Rc^T R) written as |Rc^T R - I|_F^2 / 4 to avoid
    # cancellation near zero error
    D = cmd.R_c.T @ s.R - np.eye(3)
    psi = 0.25 * np.sum(D * D)
    return AttitudeErrors(e_R=e_R, e_Omega=e_Omega, Psi_R=float(psi))


def control_input(s, J, cfg, cmd, A, errs=None):
    if errs is None:
        errs = attitude_errors(s, cmd)
    f = -A @ s.R[:, 2]
    RtRc = s.R.T @ cmd.R_c
    M = (-cfg.kR_eff * errs.e_R - cfg.kOmega_eff * errs.e_Omega
         + cross(s.Omega, J @ s.Omega)
         - J @ (cross(s.Omega, RtRc @ cmd.Omega_c) - RtRc @ cmd.Omegadot_c))
    return ControlInput(f=f, M=M)


class GeometricController:
    """Stateful wrapper: remembers the previous command for differencing.

    Call it as ``controller(time, state)``; it must be queried once per
    integration step, in order. ``dt`` defaults to the integrator step.
    """

    def __init__(self, params, cfg, dt, table=None):
        cfg.check_links(params.n)
        self.params = params
        self.cfg = cfg
        self.table = table if table is not None else build_inertia_table(params)
        self.dt = cfg.omega_c_dt if cfg.omega_c_dt is not None else dt
        self.reset()

    def reset(self):
        self.last_command = None
        self.last_errors = None
        self.last_A = None

    def command(self, s):
        A = ideal_thrust_A(s, self.table, self.cfg)
        Rc = desired_attitude(A, self.cfg.b1_d)
        Wc, dWc = desired_angular_velocity(
            self.last_command, Rc, self.dt, self.cfg.max_Omega_c, self.cfg.max_Omegadot_c)
        # no valid rate history yet on the second call
        if self.last_command is not None and self._calls < 2:
            dWc = np.zeros(3)
        return A, AttitudeCommand(Rc, Wc, dWc)

    def __call__(self, time, s):
        if self.last_command is None:
            self._calls = 0
        A, cmd = self.command(s)
        errs = attitude_errors(s, cmd)
        u = control_input(s, self.params.J, self.cfg, cmd, A, errs)
        self.last_A, self.last_command, self.last_errors = A, cmd, errs
        self._calls += 1
        return u

    def diagnostics(self):
        return self.last_command, self.last_errors


class ReducedController:
    """Applies the ideal thrust ``A`` directly as a free force (R follows R_c
    instantaneously); moments are zero."""

    def __init__(self, params, cfg, table=None):
        cfg.check_links(params.n)
        self.cfg = cfg
        self.table = table if table is not None else build_inertia_table(params)

    def __call__(self, time, s):
        A = ideal_thrust_A(s, self.table, self.cfg)
        return ControlInput(f=np.linalg.norm(A), M=np.zeros(3), force=A)
