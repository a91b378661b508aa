"""Brute-force Euler-Lagrange oracle for a single link.

Works in minimal coordinates ``(x, theta, phi)`` with
``q = [sin th cos ph, sin th sin ph, cos th]`` and builds the Lagrangian
directly from the point-mass positions ``x`` and ``x + l q``; it never
touches the inertia table. Derivatives of L are taken numerically:
exact polarization differences in the velocities (L is quadratic in them)
and complex-step differentiation in the coordinates.
"""
import numpy as np

from .manifold import cross

_CSTEP = 1e-30


def _q_and_partials(th, ph):
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    q = np.array([st * cp, st * sp, ct])
    q_t = np.array([ct * cp, ct * sp, -st])
    q_p = np.array([-st * sp, st * cp, 0.0 * st])
    return q, q_t, q_p


def lagrangian(coords, vel, m, m1, l1, g):
    """L = T - V for quadrotor translation plus one pendulum link.

    Written with plain arithmetic so complex coordinates propagate.
    """
    x = coords[:3]
    q, q_t, q_p = _q_and_partials(coords[3], coords[4])
    xd = vel[:3]
    qd = q_t * vel[3] + q_p * vel[4]
    p1 = x + l1 * q
    v1 = xd + l1 * qd
    T = 0.5 * m * np.sum(xd * xd) + 0.5 * m1 * np.sum(v1 * v1)
    V = -m * g * x[2] - m1 * g * p1[2]
    return T - V


def _grad_coords(fun, coords):
    out = np.empty(len(coords))
    for k in range(len(coords)):
        z = coords.astype(complex)
        z[k] += 1j * _CSTEP
        out[k] = fun(z).imag / _CSTEP
    return out


def _velocity_gradient(L, coords, vel):
    # central difference is exact for a quadratic in vel
    d = len(vel)
    g = np.empty(d, dtype=complex)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        g[i] = 0.5 * (L(coords, vel + e) - L(coords, vel - e))
    return g


def minimal_accelerations(coords, vel, force, m, m1, l1, g):
    """Generalized accelerations from the Euler-Lagrange equations with a
    force ``force`` acting on the quadrotor position."""
    coords = np.asarray(coords, dtype=float)
    vel = np.asarray(vel, dtype=float)
    d = len(vel)

    def L(c, v):
        return lagrangian(c, v, m, m1, l1, g)

    H = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = 1.0
            ej[j] = 1.0
            H[i, j] = 0.25 * (L(coords, vel + ei + ej) - L(coords, vel + ei - ej)
                              - L(coords, vel - ei + ej) + L(coords, vel - ei - ej))
    dLdq = _grad_coords(lambda c: L(c, vel), coords)
    # mixed partials d/dq (dL/dv)
    Hvq = np.empty((d, d))
    for k in range(d):
        z = coords.astype(complex)
        z[k] += 1j * _CSTEP
        Hvq[:, k] = _velocity_gradient(L, z, vel).imag / _CSTEP
    Q = np.zeros(d)
    Q[:3] = force
    return np.linalg.solve(H, Q + dLdq - Hvq @ vel)


def to_minimal(x, v, q, omega):
    """Minimal coordinates and rates of a single-link state."""
    th = np.arccos(np.clip(q[2], -1.0, 1.0))
    ph = np.arctan2(q[1], q[0])
    _, q_t, q_p = _q_and_partials(th, ph)
    qd = cross(omega, q)
    rates = np.linalg.lstsq(np.column_stack([q_t, q_p]), qd, rcond=None)[0]
    return np.concatenate([x, [th, ph]]), np.concatenate([v, rates])


def oracle_accelerations(params, s, u):
    """(xddot, omegadot_1) for an n = 1 state, via minimal coordinates."""
    if s.n != 1:
        raise ValueError("the oracle handles exactly one link")
    m1 = params.link_masses[0]
    l1 = params.link_lengths[0]
    coords, vel = to_minimal(s.x, s.v, s.q[0], s.omega[0])
    acc = minimal_accelerations(coords, vel, u.thrust_vector(s.R), params.m, m1, l1, params.g)
    th, ph = coords[3:]
    thd, phd = vel[3:]
    q, q_t, q_p = _q_and_partials(th, ph)
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    q_tp = np.array([-ct * sp, ct * cp, 0.0])
    q_pp = np.array([-st * cp, -st * sp, 0.0])
    qdd = (q_t * acc[3] + q_p * acc[4]
           - q * thd ** 2 + 2 * q_tp * thd * phd + q_pp * phd ** 2)
    # omega = q x qdot, so omegadot = q x qddot
    return acc[:3], cross(q, qdd)
