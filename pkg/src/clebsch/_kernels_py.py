"""Pure-numpy implementations of the hot kernels.

Same signatures and formulas as the compiled ``_kernels`` module; selected by
:mod:`clebsch.kernels` when the extension is unavailable or disabled.
"""

import math

import numpy as np

PEAKED = 0
GAUSSIAN = 1

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def kernel_value(r, kind, alpha):
    r = np.abs(np.asarray(r, dtype=float))
    if kind == PEAKED:
        return np.exp(-r / alpha) / (2.0 * alpha)
    return np.exp(-0.5 * (r / alpha) ** 2) * (_INV_SQRT_2PI / alpha)


def kernel_radial_derivative(r, kind, alpha):
    """dG/dr for r >= 0; zero at r == 0 by the symmetric-subgradient convention."""
    r = np.abs(np.asarray(r, dtype=float))
    g = kernel_value(r, kind, alpha)
    if kind == PEAKED:
        d = -g / alpha
    else:
        d = -(r / alpha**2) * g
    return np.where(r > 0.0, d, 0.0)


def _pairwise(Q, kind, alpha):
    diff = Q[:, None, :] - Q[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    G = kernel_value(r, kind, alpha)
    dG = kernel_radial_derivative(r, kind, alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0.0, diff / r[..., None], 0.0)
    return G, dG[..., None] * unit


def particle_rhs(Q, P, kind, alpha):
    Q = np.ascontiguousarray(Q, dtype=float)
    P = np.ascontiguousarray(P, dtype=float)
    G, gradG = _pairwise(Q, kind, alpha)
    Qdot = G @ P
    PP = P @ P.T
    Pdot = -np.einsum("ij,ijk->ik", PP, gradG)
    return Qdot, Pdot


def particle_hamiltonian(Q, P, kind, alpha):
    Q = np.ascontiguousarray(Q, dtype=float)
    P = np.ascontiguousarray(P, dtype=float)
    G, _ = _pairwise(Q, kind, alpha)
    return 0.5 * float(np.sum((P @ P.T) * G))


def velocity_at(Q, P, X, kind, alpha):
    Q = np.ascontiguousarray(Q, dtype=float)
    P = np.ascontiguousarray(P, dtype=float)
    X = np.ascontiguousarray(X, dtype=float)
    diff = X[:, None, :] - Q[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    return kernel_value(r, kind, alpha) @ P


def _cayley_fixed_point(m_prev, inv_inertia, h, tol, max_iter):
    x = m_prev * inv_inertia
    c = m_prev + 0.5 * h * np.cross(m_prev, x) + 0.25 * h * h * np.dot(x, m_prev) * x
    m = m_prev.copy()
    res = math.inf
    for k in range(1, max_iter + 1):
        x = m * inv_inertia
        m_next = c + 0.5 * h * np.cross(m, x) - 0.25 * h * h * np.dot(x, m) * x
        # Frobenius norm of hat(v) is sqrt(2)|v|
        res = _SQRT2 * math.sqrt(float(np.dot(m_next - m, m_next - m)))
        scale = max(1.0, _SQRT2 * math.sqrt(float(np.dot(m_next, m_next))))
        m = m_next
        if res <= tol * scale:
            return m, k, res
    return m, -max_iter, res


def cayley_rb_solve(m_prev, inv_inertia, h, tol, max_iter):
    """One reduced Cayley rigid-body step in body-momentum vector form.

    Returns ``(m_next, iterations, residual)``; ``iterations < 0`` signals
    non-convergence.
    """
    return _cayley_fixed_point(
        np.asarray(m_prev, dtype=float), np.asarray(inv_inertia, dtype=float), h, tol, max_iter
    )


def cay_hat(w):
    """``cay(hat(w)) = I + 4/(4 + |w|^2) (W + W^2/2)``."""
    W = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return np.eye(3) + (4.0 / (4.0 + float(np.dot(w, w)))) * (W + 0.5 * (W @ W))


def cayley_rb_trajectory(m0, Q0, inv_inertia, h, n_steps, tol, max_iter):
    """Coupled Cayley Clebsch trajectory ``(m_n, Q_n)``.

    Returns ``(M, Qs, iters, failed_step)`` with ``failed_step == -1`` when
    every step converged.
    """
    inv_inertia = np.asarray(inv_inertia, dtype=float)
    M = np.empty((n_steps + 1, 3))
    Qs = np.empty((n_steps + 1, 3, 3))
    iters = np.zeros(n_steps, dtype=np.int64)
    M[0] = m0
    Qs[0] = Q0
    for n in range(n_steps):
        Qs[n + 1] = Qs[n] @ cay_hat(h * M[n] * inv_inertia)
        m, k, _ = _cayley_fixed_point(M[n], inv_inertia, h, tol, max_iter)
        if k < 0:
            return M[: n + 1], Qs[: n + 1], iters[:n], n
        M[n + 1] = m
        iters[n] = k
    return M, Qs, iters, -1
