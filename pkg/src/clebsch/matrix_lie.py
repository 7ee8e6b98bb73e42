"""Dense small-matrix algebra for matrix Lie groups.

Matrices are plain ``numpy`` arrays of shape ``(d, d)``; algebra elements of
so(3) are skew-symmetric 3x3 arrays and dual elements (momenta) share that
representation through the trace pairing

    <A, B> = kappa * Tr(A B^T),   kappa = 1/2,

chosen so that ``trace_pair(hat(u), hat(v)) == u @ v``.

The Cayley transform and its inverse stand in for exp/log in every stepper;
``matrix_exp_ref`` and ``matrix_log_ref`` are high-accuracy oracles for tests
and order studies only.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DomainError

PAIRING_KAPPA = 0.5

# relative tolerance for accepting a matrix as skew-symmetric
SKEW_TOL = 1e-12
# condition-number ceiling for the Cayley factors
COND_LIMIT = 1e12


def hat(v):
    """Skew matrix of a 3-vector, ``hat(v) @ w == np.cross(v, w)``."""
    v = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def skew(A):
    """Skew-symmetric part ``(A - A^T) / 2``."""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A - A.T)


def vee(X, tol=SKEW_TOL):
    """Inverse of :func:`hat`.

    Raises :class:`DomainError` when ``X`` is not skew to within
    ``tol * (1 + ||X||)``; otherwise returns the vector of its skew part.
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (3, 3):
        raise DomainError(f"vee expects a 3x3 matrix, got shape {X.shape}")
    asym = np.linalg.norm(X + X.T)
    if asym > tol * (1.0 + np.linalg.norm(X)):
        raise DomainError(f"matrix is not skew-symmetric (||X + X^T|| = {asym:.3e})")
    S = skew(X)
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def trace_pair(A, B, kappa=PAIRING_KAPPA):
    """Scaled trace pairing ``kappa * Tr(A B^T)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return kappa * float(np.sum(A * B))


def _checked_solve_right(M, F, what):
    """Return ``M @ inv(F)`` after checking that ``F`` is well conditioned."""
    if np.linalg.cond(F) > COND_LIMIT:
        raise DomainError(f"{what} is singular")
    # M F^{-1} = (F^{-T} M^T)^T
    return np.linalg.solve(F.T, M.T).T


def cay(X):
    """Cayley transform ``(I + X/2)(I - X/2)^{-1}``.

    Orthogonal for skew ``X``. Raises :class:`DomainError` if ``I - X/2`` is
    singular.
    """
    X = np.asarray(X, dtype=float)
    eye = np.eye(X.shape[0])
    return _checked_solve_right(eye + 0.5 * X, eye - 0.5 * X, "I - X/2")


def cay_inv(A):
    """Inverse Cayley transform ``2 (A - I)(A + I)^{-1}``.

    Agrees with the matrix logarithm to second order in ``A - I``. Raises
    :class:`DomainError` near rotations by pi, where ``A + I`` is singular.
    """
    A = np.asarray(A, dtype=float)
    eye = np.eye(A.shape[0])
    return _checked_solve_right(2.0 * (A - eye), A + eye, "A + I")


def _half_sum_inv(A):
    A = np.asarray(A, dtype=float)
    F = 0.5 * (A + np.eye(A.shape[0]))
    if np.linalg.cond(F) > COND_LIMIT:
        raise DomainError("A + I is singular")
    return np.linalg.inv(F)


def tangent_cay_inv(A, dA):
    """Derivative of :func:`cay_inv` at ``A`` in direction ``dA``.

    ``S dA S`` with ``S = ((A + I)/2)^{-1}``.
    """
    S = _half_sum_inv(A)
    return S @ np.asarray(dA, dtype=float) @ S


def tangent_cay_inv_adjoint(A, M):
    """Transpose of ``tangent_cay_inv(A, .)`` under the trace pairing: ``S^T M S^T``."""
    S = _half_sum_inv(A)
    return S.T @ np.asarray(M, dtype=float) @ S.T


def tangent_cay_inv_adjoint_inv(A, M):
    """Inverse of :func:`tangent_cay_inv_adjoint`: ``F^T M F^T`` with ``F = (A + I)/2``."""
    A = np.asarray(A, dtype=float)
    F = 0.5 * (A + np.eye(A.shape[0]))
    return F.T @ np.asarray(M, dtype=float) @ F.T


def induced_bracket(u, v):
    """Bracket induced on the algebra by right multiplication: the commutator ``uv - vu``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u @ v - v @ u


def ad(u, v):
    """``ad_u v = -[u, v]``."""
    return -induced_bracket(u, v)


def ad_star(u, m):
    """Dual of :func:`ad` under the trace pairing, ``m u^T - u^T m``.

    For skew ``u`` this is the commutator ``[u, m]``.
    """
    u = np.asarray(u, dtype=float)
    m = np.asarray(m, dtype=float)
    return m @ u.T - u.T @ m


def group_residual(Q):
    """Frobenius distance of ``Q^T Q`` from the identity."""
    Q = np.asarray(Q, dtype=float)
    return float(np.linalg.norm(Q.T @ Q - np.eye(Q.shape[0])))


def matrix_exp_ref(X, terms=24):
    """Matrix exponential by truncated Taylor series with scaling and squaring.

    Test oracle; the integrators never call it.
    """
    X = np.asarray(X, dtype=float)
    norm = np.linalg.norm(X, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.25)))) if norm > 0.25 else 0
    Y = X / 2.0**s
    result = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for k in range(1, terms + 1):
        term = term @ Y / k
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def _sqrtm_db(A, tol=1e-15, max_iter=60):
    # Denman-Beavers iteration
    Y = A.copy()
    Z = np.eye(A.shape[0])
    for _ in range(max_iter):
        Y_next = 0.5 * (Y + np.linalg.inv(Z))
        Z_next = 0.5 * (Z + np.linalg.inv(Y))
        done = np.linalg.norm(Y_next - Y) <= tol * np.linalg.norm(Y_next)
        Y, Z = Y_next, Z_next
        if done:
            return Y
    raise DomainError("matrix square root iteration did not converge")


def matrix_log_ref(A, terms=40):
    """Matrix logarithm by inverse scaling and squaring plus the Mercator series.

    Restricted to ``||A - I||_2 < 1``; raises :class:`DomainError` outside.
    Test oracle only.
    """
    A = np.asarray(A, dtype=float)
    eye = np.eye(A.shape[0])
    if np.linalg.norm(A - eye, 2) >= 1.0:
        raise DomainError("matrix_log_ref requires ||A - I|| < 1")
    k = 0
    B = A
    while np.linalg.norm(B - eye, 2) > 0.05:
        B = _sqrtm_db(B)
        k += 1
    Z = B - eye
    result = np.zeros_like(A)
    power = eye
    for j in range(1, terms + 1):
        power = power @ Z
        result = result + ((-1.0) ** (j + 1) / j) * power
    return result * 2.0**k
