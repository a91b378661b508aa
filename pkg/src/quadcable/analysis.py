"""Link error metrics and the attitude-loop Lyapunov certificate.

The certificate concerns the boundary-layer attitude error dynamics
``J eOmega' = -kR eR - kOmega eOmega``: a Lyapunov function W sandwiched
between two quadratic forms in ``zeta = [|eR|/eps, |eOmega|]`` with a
negative-definite bound on its derivative.
"""
from dataclasses import dataclass

import numpy as np

from .controller import AttitudeCommand, attitude_errors
from .dynamics import SystemState
from .errors import C3TooLarge, ValidationError
from .manifold import E3, exp_so3, skew_vee


def link_error_metrics(s):
    """(e_q, e_omega): summed link direction and rate errors from hanging."""
    e_q = np.linalg.norm(s.q - E3, axis=1).sum()
    e_w = np.linalg.norm(s.omega, axis=1).sum()
    return float(e_q), float(e_w)


def _extreme_eigs(J):
    ev = np.linalg.eigvalsh(np.asarray(J, dtype=float))
    return ev[0], ev[-1]


def c3_bound(kR, kOmega, J):
    lm, lM = _extreme_eigs(J)
    return min(np.sqrt(kR * lm),
               4 * kR * kOmega * lm ** 2 / (kOmega ** 2 * lM + 4 * kR * lm ** 2))


@dataclass
class LyapunovReport:
    c3_bound: float
    c3_used: float
    psi_R: float
    L1: np.ndarray
    L2: np.ndarray
    U: np.ndarray
    min_eig_L1: float
    min_eig_L2: float
    min_eig_U: float

    @property
    def positive_definite(self):
        return min(self.min_eig_L1, self.min_eig_L2, self.min_eig_U) > 0

    def rows(self):
        yield "c3_bound", self.c3_bound
        yield "c3_used", self.c3_used
        yield "psi_R", self.psi_R
        for name in ("L1", "L2", "U"):
            M = getattr(self, name)
            for i in range(2):
                for j in range(2):
                    yield f"{name}_{i + 1}{j + 1}", M[i, j]
            yield f"min_eig_{name}", getattr(self, f"min_eig_{name}")


def lyapunov_matrices(kR, kOmega, J, c3, psi_R=1.0):
    if not 0 < psi_R < 2:
        raise ValidationError("psi_R must lie in (0, 2)", "analysis.psi_R")
    bound = c3_bound(kR, kOmega, J)
    if c3 >= bound:
        raise C3TooLarge(f"c3 = {c3:.6g} is not below the bound {bound:.6g}")
    lm, lM = _extreme_eigs(J)
    L1 = np.array([[kR / 2, -c3 / 2], [-c3 / 2, lm / 2]])
    L2 = np.array([[kR / (2 - psi_R), c3 / 2], [c3 / 2, lM / 2]])
    off = -c3 * kOmega / (2 * lm)
    U = np.array([[c3 * kR / lM, off], [off, kOmega - c3]])
    return LyapunovReport(
        c3_bound=bound, c3_used=c3, psi_R=psi_R, L1=L1, L2=L2, U=U,
        min_eig_L1=np.linalg.eigvalsh(L1)[0],
        min_eig_L2=np.linalg.eigvalsh(L2)[0],
        min_eig_U=np.linalg.eigvalsh(U)[0],
    )


def lyapunov_value(errs, J, kR_eff, c3, eps=1.0):
    eO = errs.e_Omega
    return 0.5 * eO @ J @ eO + kR_eff * errs.Psi_R + (c3 / eps) * errs.e_R @ eO


def zeta(errs, eps=1.0):
    return np.array([np.linalg.norm(errs.e_R) / eps, np.linalg.norm(errs.e_Omega)])


@dataclass
class AttitudeTransient:
    t: np.ndarray
    W: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    Psi_R: np.ndarray
    zeta: np.ndarray


def attitude_transient(J, kR_eff, kOmega_eff, c3, R0, Omega0, R_c=None,
                       eps=1.0, psi_R=1.0, dt=1e-3, duration=3.0):
    """Integrate the attitude loop alone towards a fixed ``R_c`` and record
    W together with its quadratic lower/upper bounds."""
    J = np.asarray(J, dtype=float)
    Jinv = np.linalg.inv(J)
    R_c = np.eye(3) if R_c is None else np.asarray(R_c, dtype=float)
    rep = lyapunov_matrices(kR_eff * eps ** 2, kOmega_eff * eps, J, c3, psi_R)
    cmd = AttitudeCommand(R_c)

    # closed loop with Omega_c = 0: J Omega' = -kR eR - kOmega Omega
    def Wdot_rhs(R, W):
        return Jinv @ (-kR_eff * skew_vee(R_c.T @ R) - kOmega_eff * W)

    R = np.asarray(R0, dtype=float).copy()
    Om = np.asarray(Omega0, dtype=float).copy()
    steps = int(round(duration / dt))
    out = {k: [] for k in ("t", "W", "lower", "upper", "Psi_R", "zeta")}
    shell = SystemState.__new__(SystemState)
    for k in range(steps + 1):
        shell.R, shell.Omega = R, Om
        errs = attitude_errors(shell, cmd)
        z = zeta(errs, eps)
        out["t"].append(k * dt)
        out["W"].append(lyapunov_value(errs, J, kR_eff, c3, eps))
        out["lower"].append(z @ rep.L1 @ z)
        out["upper"].append(z @ rep.L2 @ z)
        out["Psi_R"].append(errs.Psi_R)
        out["zeta"].append(z)
        if k == steps:
            break
        # RK4 on (R, Omega) with multiplicative attitude stages
        k1 = Wdot_rhs(R, Om)
        W2 = Om + 0.5 * dt * k1
        R2 = R @ exp_so3(0.5 * dt * Om)
        k2 = Wdot_rhs(R2, W2)
        W3 = Om + 0.5 * dt * k2
        R3 = R @ exp_so3(0.5 * dt * W2)
        k3 = Wdot_rhs(R3, W3)
        W4 = Om + dt * k3
        R4 = R @ exp_so3(dt * W3)
        k4 = Wdot_rhs(R4, W4)
        R = R @ exp_so3(dt / 6 * (Om + 2 * W2 + 2 * W3 + W4))
        Om = Om + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return AttitudeTransient(**{k: np.array(v) for k, v in out.items()})
