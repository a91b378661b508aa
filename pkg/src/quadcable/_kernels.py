"""Compiled inner loops for the omega-form equations of motion."""
import numpy as np
from numba import njit


@njit(cache=True)
def omega_form_system(M00, M0, Mij, gravity, g, q, omega, thrust):
    """Assemble mass matrix ``A`` and right-hand side ``b`` of the
    omega-form equations, unknowns ordered (xddot, omegadot_1..n)."""
    n = q.shape[0]
    N = 3 + 3 * n
    A = np.zeros((N, N))
    b = np.zeros(N)
    w2 = np.empty(n)
    for j in range(n):
        w2[j] = omega[j, 0] ** 2 + omega[j, 1] ** 2 + omega[j, 2] ** 2

    for a in range(3):
        A[a, a] = M00
        b[a] = thrust[a]
    b[2] += M00 * g

    for i in range(n):
        x, y, z = q[i, 0], q[i, 1], q[i, 2]
        r = 3 + 3 * i
        c = M0[i]
        # (0, i) = -M0i hat(q_i), (i, 0) = M0i hat(q_i)
        A[0, r + 1] = c * z
        A[0, r + 2] = -c * y
        A[1, r + 0] = -c * z
        A[1, r + 2] = c * x
        A[2, r + 0] = c * y
        A[2, r + 1] = -c * x
        for a in range(3):
            for k in range(3):
                A[r + k, a] = A[a, r + k]
            b[a] += c * w2[i] * q[i, a]
        for j in range(n):
            rj = 3 + 3 * j
            if j == i:
                for a in range(3):
                    A[r + a, r + a] = Mij[i, i]
                continue
            # -Mij hat(q_i) hat(q_j) = -Mij (q_j q_i^T - (q_i . q_j) I)
            dot = x * q[j, 0] + y * q[j, 1] + z * q[j, 2]
            m = Mij[i, j]
            for a in range(3):
                for k in range(3):
                    A[r + a, rj + k] = -m * q[j, a] * q[i, k]
                A[r + a, rj + a] += m * dot
        # row i: q_i x (sum_j Mij |w_j|^2 q_j) + gravity_i q_i x e3
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        for j in range(n):
            if j != i:
                cw = Mij[i, j] * w2[j]
                s0 += cw * q[j, 0]
                s1 += cw * q[j, 1]
                s2 += cw * q[j, 2]
        b[r + 0] = y * s2 - z * s1 + gravity[i] * y
        b[r + 1] = z * s0 - x * s2 - gravity[i] * x
        b[r + 2] = x * s1 - y * s0
    return A, b


@njit(cache=True)
def lu_solve_checked(A, b):
    """Gaussian elimination with partial pivoting.

    Returns the solution and the ratio max|U_kk| / min|U_kk| used as a
    cheap condition estimate (inf when a pivot vanishes).
    """
    N = A.shape[0]
    U = A.copy()
    x = b.copy()
    for k in range(N):
        p = k
        best = abs(U[k, k])
        for r in range(k + 1, N):
            v = abs(U[r, k])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            return x, np.inf
        if p != k:
            for c in range(N):
                tmp = U[k, c]
                U[k, c] = U[p, c]
                U[p, c] = tmp
            tmp = x[k]
            x[k] = x[p]
            x[p] = tmp
        piv = U[k, k]
        for r in range(k + 1, N):
            f = U[r, k] / piv
            if f != 0.0:
                U[r, k] = 0.0
                for c in range(k + 1, N):
                    U[r, c] -= f * U[k, c]
                x[r] -= f * x[k]
    dmax = 0.0
    dmin = np.inf
    for k in range(N):
        d = abs(U[k, k])
        dmax = max(dmax, d)
        dmin = min(dmin, d)
    for k in range(N - 1, -1, -1):
        acc = x[k]
        for c in range(k + 1, N):
            acc -= U[k, c] * x[c]
        x[k] = acc / U[k, k]
    return x, dmax / dmin


@njit(cache=True)
def chain_derivative(M00, M0, Mij, gravity, g, q_raw, omega_raw, thrust):
    """Chain part of the vector field evaluated through the projection
    onto the unit spheres and their tangent planes.

    Returns ``(xddot, qdot, omegadot, ratio)``.
    """
    n = q_raw.shape[0]
    q = np.empty((n, 3))
    omega = np.empty((n, 3))
    for i in range(n):
        nq = np.sqrt(q_raw[i, 0] ** 2 + q_raw[i, 1] ** 2 + q_raw[i, 2] ** 2)
        for a in range(3):
            q[i, a] = q_raw[i, a] / nq
        d = q[i, 0] * omega_raw[i, 0] + q[i, 1] * omega_raw[i, 1] + q[i, 2] * omega_raw[i, 2]
        for a in range(3):
            omega[i, a] = omega_raw[i, a] - d * q[i, a]
    A, b = omega_form_system(M00, M0, Mij, gravity, g, q, omega, thrust)
    sol, ratio = lu_solve_checked(A, b)
    xddot = sol[:3].copy()
    qdot = np.empty((n, 3))
    omegadot = np.empty((n, 3))
    for i in range(n):
        r = 3 + 3 * i
        d = q[i, 0] * sol[r] + q[i, 1] * sol[r + 1] + q[i, 2] * sol[r + 2]
        for a in range(3):
            omegadot[i, a] = sol[r + a] - d * q[i, a]
        w = omega[i]
        qdot[i, 0] = w[1] * q[i, 2] - w[2] * q[i, 1]
        qdot[i, 1] = w[2] * q[i, 0] - w[0] * q[i, 2]
        qdot[i, 2] = w[0] * q[i, 1] - w[1] * q[i, 0]
    return xddot, qdot, omegadot, ratio
