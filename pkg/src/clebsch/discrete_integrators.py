"""Discrete Clebsch integrators and reference steppers.

Group steppers replace exp/log by the Cayley pair (``cay`` / ``cay_inv``),
which keeps ``Q`` exactly in the orthogonal group and gives closed-form
tangent maps. Implicit relations are solved by fixed-point iteration started
from the previous value; failure to converge raises
:class:`~clebsch.exceptions.SolverConvergenceError` instead of returning an
unconverged value.

Vector-space steppers (symplectic Euler A/B, implicit midpoint) act on
canonical systems exposing ``velocity(q, p) = dH/dp`` and
``force(q, p) = -dH/dq``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ClebschError, SolverConvergenceError
from .matrix_lie import (
    cay,
    cay_inv,
    skew,
    tangent_cay_inv_adjoint,
    tangent_cay_inv_adjoint_inv,
)
from .clebsch_core import CotangentState


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    solver_tol: float = 1e-13
    solver_max_iter: int = 50

    def __post_init__(self):
        # negative steps integrate backwards (used for adjointness checks)
        if not (np.isfinite(self.dt) and self.dt != 0):
            raise ValueError(f"dt must be finite and nonzero, got {self.dt}")
        if not self.solver_tol > 0:
            raise ValueError(f"solver_tol must be positive, got {self.solver_tol}")
        if self.solver_max_iter < 1:
            raise ValueError(f"solver_max_iter must be >= 1, got {self.solver_max_iter}")


@dataclass
class DiscreteTrajectory:
    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)


def _record(info, iterations, residual):
    if info is not None:
        info["iterations"] = iterations
        info["residual"] = residual


def fixed_point(g, x0, tol, max_iter, what="fixed-point iteration"):
    """Iterate ``x <- g(x)`` until ``||g(x) - x|| <= tol * max(1, ||g(x)||)``.

    Returns ``(x, iterations, residual)``.
    """
    x = x0
    res = np.inf
    for k in range(1, max_iter + 1):
        x_next = g(x)
        res = float(np.linalg.norm(x_next - x))
        x = x_next
        if res <= tol * max(1.0, float(np.linalg.norm(x))):
            return x, k, res
    raise SolverConvergenceError(
        f"{what} did not converge in {max_iter} iterations (residual {res:.3e})",
        iterations=max_iter,
        residual=res,
    )


def phi_dt(Q2, Q1, dt):
    """Discrete time derivative at ``Q1``: ``Q1 cay_inv(Q1^{-1} Q2) / dt``."""
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    return Q1 @ cay_inv(np.linalg.solve(Q1, Q2)) / dt


# ---------------------------------------------------------------------------
# vector-space steppers


def symplectic_euler_A_step(state, system, config, info=None):
    """Symplectic Euler-A: implicit in ``P``, explicit in ``Q``.

    ``P' = P + dt force(Q, P')``, ``Q' = Q + dt velocity(Q, P')``.
    """
    Q, P = state
    dt = config.dt
    P_new, k, res = fixed_point(
        lambda p: P + dt * system.force(Q, p),
        P,
        config.solver_tol,
        config.solver_max_iter,
        "symplectic Euler-A momentum update",
    )
    _record(info, k, res)
    return Q + dt * system.velocity(Q, P_new), P_new


def symplectic_euler_B_step(state, system, config, info=None):
    """Symplectic Euler-B, the adjoint of A: implicit in ``Q``, explicit in ``P``.

    ``Q' = Q + dt velocity(Q', P)``, ``P' = P + dt force(Q', P)``.
    """
    Q, P = state
    dt = config.dt
    Q_new, k, res = fixed_point(
        lambda q: Q + dt * system.velocity(q, P),
        Q,
        config.solver_tol,
        config.solver_max_iter,
        "symplectic Euler-B position update",
    )
    _record(info, k, res)
    return Q_new, P + dt * system.force(Q_new, P)


def euler_AB_step(state, system, config, info=None):
    """Half step of Euler-A followed by a half step of Euler-B (second order)."""
    half = StepperConfig(0.5 * config.dt, config.solver_tol, config.solver_max_iter)
    return symplectic_euler_B_step(symplectic_euler_A_step(state, system, half), system, half, info)


def implicit_midpoint_step(state, system, config, info=None):
    """Implicit midpoint rule for the canonical system, solved by fixed point."""
    Q, P = state
    dt = config.dt
    y0 = np.stack([Q, P])

    def g(y):
        qm = 0.5 * (Q + y[0])
        pm = 0.5 * (P + y[1])
        return y0 + dt * np.stack([system.velocity(qm, pm), system.force(qm, pm)])

    y, k, res = fixed_point(
        g, y0, config.solver_tol, config.solver_max_iter, "implicit midpoint"
    )
    _record(info, k, res)
    return y[0], y[1]


# ---------------------------------------------------------------------------
# group steppers


def _frob(A):
    return float(np.linalg.norm(A))


def _momentum_fixed_point(update, mu0, config, what):
    # convergence measured on the momentum iterate in Frobenius norm
    return fixed_point(update, mu0, config.solver_tol, config.solver_max_iter, what)


def _known_side(mu_prev, l, dt):
    X_prev = l.legendre_inverse(skew(mu_prev))
    A_prev = cay(dt * X_prev)
    # A'^T (T_A' cay_inv)^T mu'
    return X_prev, A_prev, A_prev.T @ tangent_cay_inv_adjoint(A_prev, mu_prev)


def reduced_relation_residual(mu_prev, mu_next, l, dt):
    """Frobenius residual of the eliminated discrete relation

    ``A'^T (T_A' cay_inv)^T mu' = (T_A cay_inv)^T(mu) A^T``,  ``A = cay(dt G(mu))``.
    """
    _, _, C = _known_side(np.asarray(mu_prev, dtype=float), l, dt)
    A = cay(dt * l.legendre_inverse(mu_next))
    return _frob(tangent_cay_inv_adjoint(A, mu_next) @ A.T - C)


def reduced_ep_step(mu_prev, l, config, info=None):
    """Reduced discrete Euler-Poincare step with (Q, P) eliminated.

    Solves the relation in :func:`reduced_relation_residual` for ``mu`` with
    all tangent maps of ``cay_inv`` written generically; the initial guess is
    ``mu_prev``.
    """
    mu_prev = np.asarray(mu_prev, dtype=float)
    dt = config.dt
    _, _, C = _known_side(mu_prev, l, dt)

    def update(mu):
        A = cay(dt * l.legendre_inverse(mu))
        # exact solution is skew; projection only strips roundoff
        return skew(tangent_cay_inv_adjoint_inv(A, np.linalg.solve(A, C.T).T))

    mu, k, res = _momentum_fixed_point(update, mu_prev, config, "reduced EP step")
    _record(info, k, res)
    return mu


def cayley_rigid_body_step(mu_prev, l, config, info=None):
    """Reduced Cayley rigid-body step in expanded matrix form.

    Solves ``(I - dt X'/2) mu' (I + dt X'/2) = (I + dt X/2) mu (I - dt X/2)``
    with ``X = G(mu)``, iterating its rearrangement

        mu = mu' + dt/2 (mu'X' + mu X) + dt/2 (X'^T mu' + X^T mu)
                 + dt^2/4 (X mu X - X' mu' X').
    """
    mu_prev = np.asarray(mu_prev, dtype=float)
    h = config.dt
    Xp = l.legendre_inverse(mu_prev)
    known = mu_prev + 0.5 * h * (mu_prev @ Xp + Xp.T @ mu_prev) - 0.25 * h * h * (Xp @ mu_prev @ Xp)

    def update(mu):
        X = l.legendre_inverse(mu)
        return known + 0.5 * h * (mu @ X + X.T @ mu) + 0.25 * h * h * (X @ mu @ X)

    mu, k, res = _momentum_fixed_point(update, mu_prev, config, "Cayley rigid-body step")
    _record(info, k, res)
    return mu


def cayley_relation_residual(mu_prev, mu_next, l, dt):
    """Frobenius residual of the unexpanded Cayley relation."""
    eye = np.eye(3)
    Xp = dt * l.legendre_inverse(mu_prev)
    X = dt * l.legendre_inverse(mu_next)
    lhs = (eye - 0.5 * Xp) @ mu_prev @ (eye + 0.5 * Xp)
    rhs = (eye + 0.5 * X) @ mu_next @ (eye - 0.5 * X)
    return _frob(lhs - rhs)


def cayley_momentum_update(Q_prev, P_prev, X_prev, X_next, dt):
    """Canonical ``P^n`` from the discrete Clebsch equations, given ``X'`` and ``X^n``.

    ``P^n = Q^n^{-T} (T_A cay_inv)^{-T}[A'^T (T_A' cay_inv)^T (Q'^T P') A^{-T}]``
    with ``A' = cay(dt X')``, ``A = cay(dt X^n)`` and ``Q^n = Q' A'``.
    """
    Q_prev = np.asarray(Q_prev, dtype=float)
    A_prev = cay(dt * X_prev)
    Q_next = Q_prev @ A_prev
    C = A_prev.T @ tangent_cay_inv_adjoint(A_prev, Q_prev.T @ np.asarray(P_prev, dtype=float))
    A = cay(dt * np.asarray(X_next, dtype=float))
    inner = tangent_cay_inv_adjoint_inv(A, np.linalg.solve(A, C.T).T)
    return np.linalg.solve(Q_next.T, inner)


def discrete_clebsch_step(state, l, config, info=None):
    """One step of the first-order discrete Clebsch integrator on the group.

    ``X' = G(skew(Q'^T P'))`` and ``Q^n = Q' cay(dt X')``. ``X^n`` is found by
    iterating the canonical momentum update (:func:`cayley_momentum_update`)
    together with ``X^n = G(skew(Q^n^T P^n))``; the returned momentum is the
    reconstruction ``P^n = Q^n dl/dX(X^n)``, equal to the canonical update at
    convergence.

    Returns ``(new_state, X')``.
    """
    Q_prev = np.asarray(state.Q, dtype=float)
    P_prev = np.asarray(state.P, dtype=float)
    dt = config.dt
    X_prev = l.legendre_inverse(skew(Q_prev.T @ P_prev))
    Q_next = Q_prev @ cay(dt * X_prev)

    def update(mu):
        P = cayley_momentum_update(Q_prev, P_prev, X_prev, l.legendre_inverse(mu), dt)
        return skew(Q_next.T @ P)

    mu, k, res = _momentum_fixed_point(
        update, skew(Q_prev.T @ P_prev), config, "discrete Clebsch momentum update"
    )
    _record(info, k, res)
    X_next = l.legendre_inverse(mu)
    return CotangentState(Q_next, Q_next @ l.dl_dX(X_next)), X_prev


# ---------------------------------------------------------------------------
# reference integrator and order estimation


def rk4_step(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_reference(rhs, y0, dt, n_steps):
    """Classical RK4 trajectory; returns an array of shape ``(n_steps + 1, *y0.shape)``."""
    y = np.array(y0, dtype=float)
    out = np.empty((n_steps + 1,) + y.shape)
    out[0] = y
    for n in range(n_steps):
        y = rk4_step(rhs, y, dt)
        out[n + 1] = y
    return out


class ConvergenceError(ClebschError, ValueError):
    """Order estimate is meaningless (too few step sizes, roundoff-level errors)."""


@dataclass
class ConvergenceResult:
    dts: np.ndarray
    errors: np.ndarray
    local_slopes: np.ndarray
    slope: float

    def table(self):
        lines = [f"{'dt':>12} {'error':>14} {'local_slope':>12}"]
        for i, (dt, err) in enumerate(zip(self.dts, self.errors)):
            local = "" if i == 0 else f"{self.local_slopes[i - 1]:12.4f}"
            lines.append(f"{dt:12.6g} {err:14.6e} {local:>12}")
        lines.append(f"fitted slope: {self.slope:.4f}")
        return "\n".join(lines)


def _n_steps(t_final, dt):
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return n


def convergence_order(stepper, reference, y0, t_final, dt_list, error=None):
    """Least-squares slope of ``log(error)`` against ``log(dt)``.

    ``stepper(y, dt) -> y`` advances one step; ``reference`` is the accurate
    state at ``t_final``. ``dt_list`` needs at least three entries, each half
    the previous one. Raises :class:`ConvergenceError` when any error sits at
    roundoff level.
    """
    dts = np.asarray(dt_list, dtype=float)
    if dts.size < 3:
        raise ConvergenceError("convergence study needs at least three step sizes")
    ratios = dts[:-1] / dts[1:]
    if not np.allclose(ratios, 2.0, rtol=1e-9):
        raise ConvergenceError("step sizes must halve successively")
    ref = np.asarray(reference, dtype=float)
    if error is None:
        error = lambda a, b: float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    errs = []
    for dt in dts:
        y = np.array(y0, dtype=float)
        for _ in range(_n_steps(t_final, dt)):
            y = stepper(y, dt)
        errs.append(error(y, ref))
    errs = np.array(errs)
    floor = 1e-13 * max(1.0, float(np.linalg.norm(ref)))
    if np.any(errs <= floor):
        raise ConvergenceError(
            f"errors at roundoff level (min {errs.min():.3e}); order is not measurable"
        )
    logd, loge = np.log(dts), np.log(errs)
    local = np.diff(loge) / np.diff(logd)
    slope = float(np.polyfit(logd, loge, 1)[0])
    return ConvergenceResult(dts, errs, local, slope)
