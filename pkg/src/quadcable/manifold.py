"""Small exact primitives on SO(3) and S^2.

All functions take and return plain numpy arrays; vectors are shape (3,)
and matrices shape (3, 3).
"""
import math

import numpy as np

from .errors import NotSkew

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

ORTHO_TOL = 1e-9
UNIT_TOL = 1e-9


def hat(v):
    """Skew-symmetric matrix with ``hat(v) @ w == cross(v, w)``."""
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def vee(M, tol=1e-9):
    """Inverse of :func:`hat`. Raises NotSkew if ``M`` is not skew within ``tol``."""
    M = np.asarray(M, dtype=float)
    sym = 0.5 * (M + M.T)
    if np.max(np.abs(sym)) > tol:
        raise NotSkew(f"symmetric part {np.max(np.abs(sym)):.3e} exceeds {tol:.1e}")
    return np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]]) * 0.5


def skew_vee(M):
    """vee of the skew part of ``M``, with no tolerance check."""
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def exp_so3(v):
    """Rodrigues formula; Taylor series below 1e-6 rad."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    th2 = x * x + y * y + z * z
    if th2 < 1e-12:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        th = math.sqrt(th2)
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    # I + a K + b K^2 with K = hat(v), K^2 = v v^T - |v|^2 I
    return np.array([
        [1.0 - b * (y * y + z * z), b * x * y - a * z, b * x * z + a * y],
        [b * x * y + a * z, 1.0 - b * (x * x + z * z), b * y * z - a * x],
        [b * x * z - a * y, b * y * z + a * x, 1.0 - b * (x * x + y * y)],
    ])


def cross(a, b):
    """Cross product over the last axis; much cheaper than np.cross for
    single vectors and (n, 3) stacks."""
    if a.ndim == 1 and b.ndim == 1:
        a0, a1, a2 = a
        b0, b1, b2 = b
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def project_tangent(q, w):
    """Component of ``w`` orthogonal to the unit vector ``q``."""
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    return w - (q @ w) * q


def q_squared_hat(q):
    """hat(q) @ hat(q), which equals q q^T - I for unit q."""
    Q = hat(q)
    return Q @ Q


def is_rotation(R, tol=ORTHO_TOL):
    R = np.asarray(R, dtype=float)
    return (R.shape == (3, 3)
            and np.all(np.isfinite(R))
            and np.linalg.norm(R.T @ R - np.eye(3)) <= tol
            and np.linalg.det(R) > 0.0)


def is_unit(q, tol=UNIT_TOL):
    q = np.asarray(q, dtype=float)
    return q.shape == (3,) and abs(np.linalg.norm(q) - 1.0) <= tol


def normalize(q):
    return q / np.linalg.norm(q)
