"""The free rigid body on SO(3) and a linear-potential (heavy-top style) variant.

Reduced states are carried as body-momentum 3-vectors ``m`` internally; the
matrix form ``hat(m)`` is what the generic machinery in
:mod:`clebsch.clebsch_core` and :mod:`clebsch.discrete_integrators` sees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .clebsch_core import ReducedLagrangian
from .discrete_integrators import StepperConfig
from .exceptions import SolverConvergenceError
from .matrix_lie import hat, trace_pair, vee

FIGURE1_INERTIA = (0.5, 0.6, 1.0)
FIGURE1_DT = 0.1
DEFAULT_OMEGA0 = tuple(np.ones(3) / np.sqrt(3.0))


@dataclass(frozen=True)
class InertiaTensor:
    """Principal moments of inertia (body frame aligned with principal axes)."""

    moments: tuple = FIGURE1_INERTIA

    def __post_init__(self):
        moments = tuple(float(x) for x in self.moments)
        if len(moments) != 3:
            raise ValueError("inertia needs three principal moments")
        if not all(np.isfinite(x) and x > 0 for x in moments):
            raise ValueError(f"principal moments must be positive, got {moments}")
        object.__setattr__(self, "moments", moments)

    @property
    def diag(self):
        return np.array(self.moments)

    @property
    def inverse_diag(self):
        return 1.0 / np.array(self.moments)


class RigidBodyLagrangian(ReducedLagrangian):
    """``l(hat(w)) = w . I w / 2``; with the half-trace pairing ``dl/dX = hat(I w)``."""

    def __init__(self, inertia):
        self.inertia = inertia if isinstance(inertia, InertiaTensor) else InertiaTensor(inertia)
        self._I = self.inertia.diag
        self._Iinv = self.inertia.inverse_diag

    def value(self, X):
        w = vee(X)
        return 0.5 * float(w @ (self._I * w))

    def dl_dX(self, X):
        return hat(self._I * vee(X))

    def legendre_inverse(self, mu):
        return hat(self._Iinv * vee(mu))


class LinearPotentialLagrangian(RigidBodyLagrangian):
    """Rigid body with ``V(Q) = <F, Q>``, so ``dV/dQ = F`` under the same pairing."""

    has_potential = True

    def __init__(self, inertia, F):
        super().__init__(inertia)
        self.F = np.array(F, dtype=float).reshape(3, 3)

    def potential(self, Q):
        return trace_pair(self.F, Q)

    def dV_dQ(self, Q):
        return self.F.copy()


def rigid_lagrangian(inertia=FIGURE1_INERTIA):
    return RigidBodyLagrangian(inertia)


def linear_potential_lagrangian(inertia, F):
    return LinearPotentialLagrangian(inertia, F)


def heavy_top_force(chi, direction=(0.0, 0.0, 1.0)):
    """``F = e chi^T``: ``V(Q) = (e . Q chi) / 2`` for body point ``chi`` and spatial axis ``e``."""
    return np.outer(np.asarray(direction, dtype=float), np.asarray(chi, dtype=float))


def energy(mu, inertia):
    """Kinetic energy ``m . I^{-1} m / 2`` of a body momentum (vector or skew matrix)."""
    m = _as_vec(mu)
    Iinv = InertiaTensor(_moments(inertia)).inverse_diag
    return 0.5 * float(m @ (Iinv * m))


def spatial_momentum(Q, mu):
    """Spatial momentum ``Q mu Q^T``."""
    Q = np.asarray(Q, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if mu.shape == (3,):
        mu = hat(mu)
    return Q @ mu @ Q.T


def cayley_discrete_momentum(mu, X, dt):
    """``(I + dt X/2) mu (I - dt X/2)``: the momentum the Cayley scheme carries exactly.

    The reduced Cayley step maps it by ``A^T . A`` with orthogonal
    ``A = cay(dt X)``, so its norm and ``Q (.) Q^T`` are invariant.
    """
    half = 0.5 * dt * np.asarray(X, dtype=float)
    eye = np.eye(3)
    return (eye + half) @ np.asarray(mu, dtype=float) @ (eye - half)


def cayley_discrete_momentum_vec(m, inertia, dt):
    """Vector form of :func:`cayley_discrete_momentum` for rows of ``m``."""
    m = np.asarray(m, dtype=float)
    b = 0.5 * dt * m * InertiaTensor(_moments(inertia)).inverse_diag
    bm = np.sum(b * m, axis=-1, keepdims=True)
    return m + np.cross(b, m) + bm * b


def _moments(inertia):
    return inertia.moments if isinstance(inertia, InertiaTensor) else inertia


def _as_vec(mu):
    mu = np.asarray(mu, dtype=float)
    return vee(mu) if mu.shape == (3, 3) else mu


def body_momentum(omega, inertia):
    return InertiaTensor(_moments(inertia)).diag * np.asarray(omega, dtype=float)


def ep_rhs_vec(m, inv_inertia):
    """``m x I^{-1} m``; vector form of the free rigid-body Euler-Poincare field."""
    return np.cross(m, m * inv_inertia)


@dataclass
class RigidBodyTrajectory:
    """Coupled Cayley Clebsch trajectory with post-hoc diagnostics."""

    times: np.ndarray
    m: np.ndarray  # body momentum dl/dX, rows
    Q: np.ndarray
    iterations: np.ndarray
    inertia: InertiaTensor
    dt: float

    @property
    def energy(self):
        return 0.5 * np.sum(self.m * self.m * self.inertia.inverse_diag, axis=1)

    @property
    def discrete_momentum(self):
        return cayley_discrete_momentum_vec(self.m, self.inertia, self.dt)

    @property
    def casimir(self):
        """Squared norm of the exactly carried discrete momentum."""
        Y = self.discrete_momentum
        return np.sum(Y * Y, axis=1)

    @property
    def spatial(self):
        """Spatial momentum ``Q Y Q^T`` in vector form, ``Q @ Y`` per row."""
        return np.einsum("nij,nj->ni", self.Q, self.discrete_momentum)

    @property
    def group_residual(self):
        eye = np.eye(3)
        QtQ = np.einsum("nki,nkj->nij", self.Q, self.Q)
        return np.linalg.norm(QtQ - eye, axis=(1, 2))


def cayley_clebsch_trajectory(m0, inertia, dt, n_steps, Q0=None, config=None):
    """Run the coupled Cayley Clebsch integrator through the compiled kernel.

    Equivalent to repeated :func:`~clebsch.discrete_integrators.discrete_clebsch_step`
    with ``P = Q hat(m)``; ``m0`` is the initial body momentum vector.
    """
    inertia = inertia if isinstance(inertia, InertiaTensor) else InertiaTensor(inertia)
    config = config or StepperConfig(dt)
    Q0 = np.eye(3) if Q0 is None else np.asarray(Q0, dtype=float)
    M, Qs, iters, failed = kernels.cayley_rb_trajectory(
        np.asarray(m0, dtype=float),
        Q0,
        inertia.inverse_diag,
        float(dt),
        int(n_steps),
        float(config.solver_tol),
        int(config.solver_max_iter),
    )
    if failed >= 0:
        raise SolverConvergenceError(
            f"Cayley step {failed} did not converge in {config.solver_max_iter} iterations",
            iterations=config.solver_max_iter,
        )
    times = dt * np.arange(n_steps + 1)
    return RigidBodyTrajectory(times, M, Qs, iters, inertia, float(dt))


def rk4_ep_vec(m0, inertia, dt, n_steps):
    """RK4 trajectory of the vector Euler equations (reference for period and order)."""
    Iinv = InertiaTensor(_moments(inertia)).inverse_diag
    m = np.array(m0, dtype=float)
    out = np.empty((n_steps + 1, 3))
    out[0] = m
    for n in range(n_steps):
        k1 = ep_rhs_vec(m, Iinv)
        k2 = ep_rhs_vec(m + 0.5 * dt * k1, Iinv)
        k3 = ep_rhs_vec(m + 0.5 * dt * k2, Iinv)
        k4 = ep_rhs_vec(m + dt * k3, Iinv)
        m = m + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[n + 1] = m
    return out


def estimate_period(m0, inertia, dt_ref=0.01, t_max=500.0, tol=1e-3, min_time=None):
    """First return time of the body momentum to within ``tol`` (relative) of ``m0``.

    Integrates an RK4 reference in chunks, scans the distance to ``m0`` for
    local minima and refines each minimum by a parabola through its neighbours.
    """
    m0 = np.asarray(m0, dtype=float)
    scale = np.linalg.norm(m0)
    start = max(int(np.ceil((min_time or 10 * dt_ref) / dt_ref)), 1)
    n_total = int(np.ceil(t_max / dt_ref))
    chunk = 2000
    m = m0
    dist = [0.0]
    offset = 0
    while offset < n_total:
        traj = rk4_ep_vec(m, inertia, dt_ref, chunk)
        dist.extend((np.linalg.norm(traj[1:] - m0, axis=1) / scale).tolist())
        m = traj[-1]
        offset += chunk
        for i in range(max(start, len(dist) - chunk - 1), len(dist) - 1):
            if dist[i] <= dist[i - 1] and dist[i] < dist[i + 1]:
                y0, y1, y2 = dist[i - 1] ** 2, dist[i] ** 2, dist[i + 1] ** 2
                denom = y0 - 2 * y1 + y2
                shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
                d_min = np.sqrt(max(y1 - 0.25 * (y0 - y2) * shift, 0.0))
                if d_min < tol:
                    return (i + shift) * dt_ref
    raise ValueError(f"no return within t_max={t_max}; increase t_max")


@dataclass
class Figure1Result:
    trajectory: RigidBodyTrajectory
    period: float
    n_periods: float
    casimir_rel_drift: float
    legendre_momentum_rel_drift: float
    energy_rel_dev: float
    energy_trend: float
    energy_trend_stderr: float
    spatial_drift: float


def _trend(t, y):
    # OLS slope and its standard error
    A = np.vstack([t, np.ones_like(t)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(len(t) - 2, 1)
    s2 = float(resid @ resid) / dof
    se = np.sqrt(s2 / float(np.sum((t - t.mean()) ** 2)))
    return float(coef[0]), float(se)


def figure1_experiment(
    omega0=DEFAULT_OMEGA0,
    inertia=FIGURE1_INERTIA,
    dt=FIGURE1_DT,
    n_periods=100,
    config=None,
):
    """Long Cayley Clebsch run over ``n_periods`` estimated orbital periods.

    The run length is rounded up to whole steps past ``n_periods`` periods of
    the reference orbit. Energy trend is fitted over the last whole number of
    periods that fits in the run.
    """
    inertia = InertiaTensor(_moments(inertia))
    m0 = body_momentum(omega0, inertia)
    period = estimate_period(m0, inertia)
    n_steps = int(np.ceil(n_periods * period / dt))
    traj = cayley_clebsch_trajectory(m0, inertia, dt, n_steps, config=config)

    C = traj.casimir
    casimir_drift = float(np.max(np.abs(np.sqrt(C) - np.sqrt(C[0]))) / np.sqrt(C[0]))
    norms = np.linalg.norm(traj.m, axis=1)
    legendre_drift = float(np.max(np.abs(norms - norms[0])) / norms[0])
    E = traj.energy
    rel = (E - E[0]) / E[0]
    # fit over an integer number of periods to avoid a phase-induced slope
    n_fit = int(np.floor(np.floor(n_steps * dt / period) * period / dt)) + 1
    slope, se = _trend(traj.times[:n_fit], rel[:n_fit])
    pi = traj.spatial
    spatial_drift = float(np.max(np.linalg.norm(pi - pi[0], axis=1)) / np.linalg.norm(pi[0]))
    return Figure1Result(
        trajectory=traj,
        period=period,
        n_periods=n_steps * dt / period,
        casimir_rel_drift=casimir_drift,
        legendre_momentum_rel_drift=legendre_drift,
        energy_rel_dev=float(np.max(np.abs(rel))),
        energy_trend=slope,
        energy_trend_stderr=se,
        spatial_drift=spatial_drift,
    )
