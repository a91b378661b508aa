"""Euler-Lagrange dynamics of a quadrotor carrying an n-link chain.

Configuration: x in R^3, R in SO(3), q_1..q_n in S^2. Gravity points along
+e3, so the hover thrust ``-f R e3`` is upward for ``f > 0``.

Two equivalent forms of the translational/chain equations are provided:
``accelerations`` solves for (xddot, omegadot_i) and is the production
path; ``qddot_form_accelerations`` solves for (xddot, qddot_i) and exists
for cross-validation.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ._kernels import lu_solve_checked, omega_form_system
from .errors import SingularMassMatrix, ValidationError
from .manifold import E3, cross, is_rotation

COND_LIMIT = 1e12
I3 = np.eye(3)

# Numerical example values.
DEFAULT_J = np.diag([0.557, 0.557, 1.05]) * 1e-2


@dataclass
class PlantParams:
    m: float = 0.5
    J: np.ndarray = field(default_factory=lambda: DEFAULT_J.copy())
    link_masses: np.ndarray = field(default_factory=lambda: np.full(5, 0.1))
    link_lengths: np.ndarray = field(default_factory=lambda: np.full(5, 0.1))
    g: float = 9.81

    def __post_init__(self):
        self.m = float(self.m)
        self.g = float(self.g)
        self.J = np.asarray(self.J, dtype=float)
        if self.J.shape == (3,):
            self.J = np.diag(self.J)
        self.link_masses = np.atleast_1d(np.asarray(self.link_masses, dtype=float))
        self.link_lengths = np.atleast_1d(np.asarray(self.link_lengths, dtype=float))
        self.validate()
        self.J_inv = np.linalg.inv(self.J)

    @property
    def n(self):
        return len(self.link_masses)

    def validate(self):
        if not self.m > 0:
            raise ValidationError("quadrotor mass must be positive", "plant.m")
        if self.J.shape != (3, 3) or not np.allclose(self.J, self.J.T, atol=1e-15):
            raise ValidationError("inertia must be a symmetric 3x3 matrix", "plant.J")
        if np.min(np.linalg.eigvalsh(self.J)) <= 0:
            raise ValidationError("inertia must be positive-definite", "plant.J")
        if self.n < 1:
            raise ValidationError("at least one link is required", "plant.n")
        if len(self.link_lengths) != self.n:
            raise ValidationError(
                f"{len(self.link_lengths)} lengths given for {self.n} links", "plant.link_lengths")
        if np.any(self.link_masses <= 0):
            raise ValidationError("link masses must be positive", "plant.link_masses")
        if np.any(self.link_lengths <= 0):
            raise ValidationError("link lengths must be positive", "plant.link_lengths")
        if not np.isfinite(self.g):
            raise ValidationError("gravity must be finite", "plant.g")


@dataclass
class InertiaTable:
    """Constant coefficients of the chain's kinetic and potential energy.

    ``gravity[i]`` is (sum_{a>=i} m_a) g l_i, the coefficient multiplying
    ``e3 . q_i`` in the potential energy.
    """
    M00: float
    M0: np.ndarray
    Mij: np.ndarray
    gravity: np.ndarray
    g: float

    @property
    def n(self):
        return len(self.M0)


def build_inertia_table(p):
    tail = np.cumsum(p.link_masses[::-1])[::-1]
    l = p.link_lengths
    idx = np.arange(p.n)
    tail_max = tail[np.maximum.outer(idx, idx)]
    return InertiaTable(
        M00=p.m + p.link_masses.sum(),
        M0=tail * l,
        Mij=tail_max * np.outer(l, l),
        gravity=tail * p.g * l,
        g=p.g,
    )


@dataclass
class SystemState:
    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray
    q: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.x = np.array(self.x, dtype=float)
        self.v = np.array(self.v, dtype=float)
        self.R = np.array(self.R, dtype=float)
        self.Omega = np.array(self.Omega, dtype=float)
        self.q = np.array(self.q, dtype=float).reshape(-1, 3)
        self.omega = np.array(self.omega, dtype=float).reshape(-1, 3)

    @property
    def n(self):
        return len(self.q)

    @classmethod
    def hanging(cls, n, x=(0.0, 0.0, 0.0)):
        """All links along +e3, everything at rest, R = I."""
        return cls(x=x, v=np.zeros(3), R=np.eye(3), Omega=np.zeros(3),
                   q=np.tile(E3, (n, 1)), omega=np.zeros((n, 3)))

    def copy(self):
        return SystemState(self.x, self.v, self.R, self.Omega, self.q, self.omega)

    def qdot(self):
        return cross(self.omega, self.q)

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in
                   (self.x, self.v, self.R, self.Omega, self.q, self.omega))

    def check(self, tol=1e-9):
        """Raise ValidationError if any manifold constraint is violated."""
        if self.omega.shape != self.q.shape:
            raise ValidationError("omega and q must have the same number of links", "state.omega")
        if not self.is_finite():
            raise ValidationError("non-finite component", "state")
        if not is_rotation(self.R, tol):
            raise ValidationError("R is not a rotation matrix", "state.R")
        if np.max(np.abs(np.linalg.norm(self.q, axis=1) - 1.0)) > tol:
            raise ValidationError("link directions must be unit vectors", "state.q")
        if np.max(np.abs(np.einsum("ij,ij->i", self.q, self.omega))) > tol:
            raise ValidationError("link angular velocities must be normal to q_i", "state.omega")

    def projected(self):
        """Copy with unit q_i and omega_i re-projected onto the tangent planes."""
        q = self.q / np.linalg.norm(self.q, axis=1)[:, None]
        omega = self.omega - np.einsum("ij,ij->i", q, self.omega)[:, None] * q
        return SystemState(self.x, self.v, self.R, self.Omega, q, omega)


@dataclass
class ControlInput:
    """Thrust magnitude and body moment.

    When ``force`` is set it replaces the thrust vector ``-f R e3`` in the
    translational equation (the simplified model with a fictitious input).
    """
    f: float = 0.0
    M: np.ndarray = field(default_factory=lambda: np.zeros(3))
    force: np.ndarray = None

    def __post_init__(self):
        self.f = float(self.f)
        self.M = np.asarray(self.M, dtype=float)
        if self.force is not None:
            self.force = np.asarray(self.force, dtype=float)

    def thrust_vector(self, R):
        if self.force is not None:
            return self.force
        return -self.f * R[:, 2]


ZERO_INPUT = ControlInput()


@dataclass
class Accelerations:
    xddot: np.ndarray
    omegadot: np.ndarray
    Omegadot: np.ndarray


def _hats(q):
    n = len(q)
    H = np.zeros((n, 3, 3))
    H[:, 0, 1] = -q[:, 2]
    H[:, 0, 2] = q[:, 1]
    H[:, 1, 0] = q[:, 2]
    H[:, 1, 2] = -q[:, 0]
    H[:, 2, 0] = -q[:, 1]
    H[:, 2, 1] = q[:, 0]
    return H


def _assemble(corner, top, left, blocks):
    n = blocks.shape[0]
    N = 3 + 3 * n
    A = np.empty((N, N))
    A[:3, :3] = corner
    A[:3, 3:] = top.transpose(1, 0, 2).reshape(3, 3 * n)
    A[3:, :3] = left.reshape(3 * n, 3)
    A[3:, 3:] = blocks.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)
    return A


def _omega_system(t, s, u):
    return omega_form_system(t.M00, t.M0, t.Mij, t.gravity, t.g,
                             s.q, s.omega, u.thrust_vector(s.R))


def mass_matrix_omega_form(t, s):
    return _omega_system(t, s, ZERO_INPUT)[0]


def rhs_omega_form(t, s, u=ZERO_INPUT):
    return _omega_system(t, s, u)[1]


def _solve(A, b):
    lu, piv = lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() == 0.0 or d.max() / d.min() > COND_LIMIT:
        raise SingularMassMatrix(f"mass matrix condition estimate exceeds {COND_LIMIT:.0e}")
    return lu_solve((lu, piv), b, check_finite=False)


def attitude_acceleration(p, Omega, M):
    return p.J_inv @ (M - cross(Omega, p.J @ Omega))


def accelerations(p, t, s, u=ZERO_INPUT):
    sol, ratio = lu_solve_checked(*_omega_system(t, s, u))
    if not ratio <= COND_LIMIT:
        raise SingularMassMatrix(f"mass matrix condition estimate exceeds {COND_LIMIT:.0e}")
    omegadot = sol[3:].reshape(-1, 3)
    omegadot -= np.einsum("ij,ij->i", s.q, omegadot)[:, None] * s.q
    return Accelerations(xddot=sol[:3], omegadot=omegadot,
                         Omegadot=attitude_acceleration(p, s.Omega, u.M))


def mass_matrix_qddot_form(t, s):
    H = _hats(s.q)
    H2 = np.einsum("iab,ibc->iac", H, H)
    blocks = -t.Mij[:, :, None, None] * H2[:, None, :, :]
    idx = np.arange(t.n)
    blocks[idx, idx] = t.Mij[idx, idx, None, None] * I3
    top = t.M0[:, None, None] * I3
    return _assemble(t.M00 * I3, top, -t.M0[:, None, None] * H2, blocks)


def rhs_qddot_form(t, s, u=ZERO_INPUT):
    q = s.q
    qd = s.qdot()
    qd2 = np.einsum("ij,ij->i", qd, qd)
    row0 = u.thrust_vector(s.R) + t.M00 * t.g * E3
    # hat(q)^2 e3 = (q . e3) q - e3
    q2e3 = q[:, 2:3] * q - E3
    rows = -(qd2 * np.diag(t.Mij))[:, None] * q - t.gravity[:, None] * q2e3
    return np.concatenate([row0, rows.ravel()])


def qddot_form_accelerations(t, s, u=ZERO_INPUT):
    """Returns ``(xddot, qddot)`` with qddot of shape (n, 3)."""
    sol = _solve(mass_matrix_qddot_form(t, s), rhs_qddot_form(t, s, u))
    return sol[:3], sol[3:].reshape(-1, 3)


def kinetic_energy(p, t, s):
    qd = s.qdot()
    return (0.5 * t.M00 * s.v @ s.v
            + s.v @ (t.M0 @ qd)
            + 0.5 * np.einsum("ij,ik,jk->", t.Mij, qd, qd)
            + 0.5 * s.Omega @ p.J @ s.Omega)


def potential_energy(p, t, s):
    return -t.gravity @ s.q[:, 2] - t.M00 * t.g * s.x[2]


def total_energy(p, t, s):
    return kinetic_energy(p, t, s) + potential_energy(p, t, s)


def generalized_momentum(t, s):
    return t.M00 * s.v + t.M0 @ s.qdot()


def link_positions(s, p):
    """Positions of the link point masses, shape (n, 3)."""
    return s.x + np.cumsum(p.link_lengths[:, None] * s.q, axis=0)


