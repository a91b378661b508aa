"""Linearization of the simplified model about the hanging equilibrium.

State ordering is ``[dx (3), C^T xi_1, ..., C^T xi_n]`` with
``C = [e1, e2]``; xi_i is the rotation vector taking e3 to q_i, so
``q_i ~ e3 + xi_i x e3`` to first order.
"""
from dataclasses import dataclass

import numpy as np

from .dynamics import ControlInput, SystemState, accelerations, build_inertia_table
from .errors import SingularMassMatrix
from .manifold import E3, exp_so3, hat

C = np.eye(3)[:, :2]


@dataclass
class LinearModel:
    M: np.ndarray
    G: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def dim(self):
        return self.M.shape[0]

    @property
    def n(self):
        return (self.dim - 3) // 2


@dataclass
class LinearState:
    dx: np.ndarray
    xq: np.ndarray
    dxdot: np.ndarray
    xqdot: np.ndarray

    def __post_init__(self):
        self.dx = np.asarray(self.dx, dtype=float)
        self.xq = np.asarray(self.xq, dtype=float).ravel()
        self.dxdot = np.asarray(self.dxdot, dtype=float)
        self.xqdot = np.asarray(self.xqdot, dtype=float).ravel()

    def position(self):
        return np.concatenate([self.dx, self.xq])

    def velocity(self):
        return np.concatenate([self.dxdot, self.xqdot])


def build_linear_model(p):
    t = build_inertia_table(p)
    n = p.n
    d = 3 + 2 * n
    M = np.zeros((d, d))
    G = np.zeros((d, d))
    B = np.zeros((d, 3))
    M[:3, :3] = t.M00 * np.eye(3)
    B[:3] = np.eye(3)
    e3C = hat(E3) @ C
    for i in range(n):
        si = slice(3 + 2 * i, 5 + 2 * i)
        M[:3, si] = -t.M0[i] * e3C
        M[si, :3] = M[:3, si].T
        G[si, si] = t.gravity[i] * np.eye(2)
        for j in range(n):
            M[si, 3 + 2 * j:5 + 2 * j] = t.Mij[i, j] * np.eye(2)
    return LinearModel(M=M, G=G, B=B, C=C.copy())


def first_order(lm):
    """(A, B) of the first-order system in ``[position; velocity]``."""
    d = lm.dim
    try:
        Minv = np.linalg.inv(lm.M)
    except np.linalg.LinAlgError as exc:
        raise SingularMassMatrix(str(exc)) from exc
    A = np.block([[np.zeros((d, d)), np.eye(d)],
                  [-Minv @ lm.G, np.zeros((d, d))]])
    Bt = np.vstack([np.zeros_like(lm.B), Minv @ lm.B])
    return A, Bt


def controllability_matrix(A, B):
    cols = [B]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.hstack(cols)


def controllability_rank(lm):
    A, B = first_order(lm)
    d = A.shape[0]
    # Column blocks grow like |A|^k; normalizing each block leaves the rank
    # unchanged and keeps the small singular values above round-off.
    blocks = []
    Ak_B = B
    for _ in range(d):
        blocks.append(Ak_B / np.linalg.norm(Ak_B))
        Ak_B = A @ Ak_B
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return int(np.sum(sv > sv[0] * d * 1e-12))


def linear_accelerations(lm, ls, du):
    """Solve ``M xddot + G x = B du`` for ``(dxddot, xqddot)``."""
    rhs = lm.B @ np.asarray(du, dtype=float) - lm.G @ ls.position()
    try:
        acc = np.linalg.solve(lm.M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMassMatrix(str(exc)) from exc
    return acc[:3], acc[3:]


def closed_loop_matrix(lm, cfg):
    """First-order closed-loop matrix of the linear model under the
    controller's link and position feedback."""
    from .controller import LINK_EMBED

    d = lm.dim
    n = lm.n
    Kx = np.zeros((3, d))
    Kv = np.zeros((3, d))
    Kx[:, :3] = cfg.k_x * np.eye(3)
    Kv[:, :3] = cfg.k_xdot * np.eye(3)
    for i in range(n):
        Kx[:, 3 + 2 * i:5 + 2 * i] = cfg.k_q[i] * LINK_EMBED
        Kv[:, 3 + 2 * i:5 + 2 * i] = cfg.k_omega[i] * LINK_EMBED
    Minv = np.linalg.inv(lm.M)
    return np.block([[np.zeros((d, d)), np.eye(d)],
                     [-Minv @ (lm.G + lm.B @ Kx), -Minv @ lm.B @ Kv]])


def state_from_linear(ls, x_d=None, h=1.0):
    """Nonlinear state at scale ``h`` of the linear perturbation ``ls``.

    q_i = exp(h xi_i) e3 and omega_i = h C xqdot_i projected onto the
    tangent plane at q_i.
    """
    x_d = np.zeros(3) if x_d is None else np.asarray(x_d, dtype=float)
    xq = ls.xq.reshape(-1, 2)
    wq = ls.xqdot.reshape(-1, 2)
    n = len(xq)
    q = np.array([exp_so3(h * (C @ xi)) @ E3 for xi in xq])
    omega = h * (wq @ C.T)
    omega -= np.einsum("ij,ij->i", q, omega)[:, None] * q
    return SystemState(x=x_d + h * ls.dx, v=h * ls.dxdot, R=np.eye(3),
                       Omega=np.zeros(3), q=q.reshape(n, 3), omega=omega)


def simplified_accelerations(p, t, s, u):
    """Accelerations of the simplified model with free force ``u`` in place
    of the thrust, returned in linear-state layout ``(xddot, C^T omegadot)``."""
    a = accelerations(p, t, s, ControlInput(force=u))
    return a.xddot, (a.omegadot @ C).ravel()


def linearization_residual(p, ls, du, h, x_d=None):
    """|nonlinear - h * linear| acceleration at perturbation scale ``h``."""
    t = build_inertia_table(p)
    lm = build_linear_model(p)
    s = state_from_linear(ls, x_d, h)
    u = h * np.asarray(du, dtype=float) - t.M00 * t.g * E3
    xdd, xqdd = simplified_accelerations(p, t, s, u)
    lx, lq = linear_accelerations(lm, ls, du)
    return float(np.linalg.norm(np.concatenate([xdd - h * lx, xqdd - h * lq])))
