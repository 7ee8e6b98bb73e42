"""Singular (particle) solutions of EPDiff.

``N`` labelled points ``Q_i`` in R^n carry momenta ``P_i``; the velocity is the
kernel-smoothed momentum ``u(x) = sum_j P_j G(|x - Q_j|)`` and the particles
obey the canonical equations of ``H = 1/2 sum_ij (P_i . P_j) G(|Q_i - Q_j|)``.
Pairwise sums go through :mod:`clebsch.kernels`.

The default kernel ``G(r) = exp(-|r|/alpha) / (2 alpha)`` is the Green's
function of ``1 - alpha^2 d^2/dx^2`` in 1D (peakons). ``grad G(0)`` is taken
as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .discrete_integrators import (
    StepperConfig,
    euler_AB_step,
    implicit_midpoint_step,
    rk4_step,
    symplectic_euler_A_step,
    symplectic_euler_B_step,
)

_KINDS = {"peaked": kernels.PEAKED, "gaussian": kernels.GAUSSIAN}


@dataclass(frozen=True)
class Kernel:
    alpha: float = 1.0
    kind: str = "peaked"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {sorted(_KINDS)}")

    @property
    def code(self):
        return _KINDS[self.kind]

    def G(self, r):
        return kernels.kernel_value(r, self.code, self.alpha)

    def dG(self, r):
        return kernels.kernel_radial_derivative(r, self.code, self.alpha)


@dataclass(frozen=True)
class ParticleEnsemble:
    Q: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        Q = np.atleast_2d(np.array(self.Q, dtype=float))
        P = np.atleast_2d(np.array(self.P, dtype=float))
        if Q.ndim != 2 or Q.shape != P.shape:
            raise ValueError(f"Q and P must both be (N, n); got {Q.shape} and {P.shape}")
        if Q.shape[0] < 1:
            raise ValueError("need at least one particle")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(P))):
            raise ValueError("particle data must be finite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)

    @classmethod
    def line(cls, q, p):
        """1D ensemble from position and momentum sequences."""
        return cls(np.reshape(q, (-1, 1)), np.reshape(p, (-1, 1)))

    @property
    def n_particles(self):
        return self.Q.shape[0]

    @property
    def dim(self):
        return self.Q.shape[1]

    def permuted(self, order):
        return ParticleEnsemble(self.Q[order], self.P[order])


def velocity_field(ens, k, x):
    """``u(x)`` at one point (shape ``(n,)``) or many (shape ``(M, n)``)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1 and x.shape[0] == ens.dim
    pts = x.reshape(1, -1) if single else x.reshape(-1, ens.dim)
    u = kernels.velocity_at(ens.Q, ens.P, pts, k.code, k.alpha)
    return u[0] if single else u


def particle_rhs(ens, k):
    """``(Qdot, Pdot)`` with ``Pdot_i = -sum_j (P_i . P_j) grad G(Q_i - Q_j)``."""
    return kernels.particle_rhs(ens.Q, ens.P, k.code, k.alpha)


def hamiltonian_particles(ens, k):
    return kernels.particle_hamiltonian(ens.Q, ens.P, k.code, k.alpha)


def total_momentum(P):
    return np.sum(np.asarray(P, dtype=float), axis=0)


class ParticleSystem:
    """Canonical system adapter for the steppers in :mod:`clebsch.discrete_integrators`."""

    def __init__(self, kernel):
        self.kernel = kernel
        self._code = kernel.code
        self._alpha = kernel.alpha

    def velocity(self, Q, P):
        return kernels.particle_rhs(Q, P, self._code, self._alpha)[0]

    def force(self, Q, P):
        return kernels.particle_rhs(Q, P, self._code, self._alpha)[1]

    def energy(self, Q, P):
        return kernels.particle_hamiltonian(Q, P, self._code, self._alpha)

    def vector_field(self, y):
        Qdot, Pdot = kernels.particle_rhs(y[0], y[1], self._code, self._alpha)
        return np.stack([Qdot, Pdot])


def _rk4_particle_step(state, system, config, info=None):
    y = rk4_step(system.vector_field, np.stack(state), config.dt)
    if info is not None:
        info["iterations"] = 0
    return y[0], y[1]


STEPPERS = {
    "euler-a": symplectic_euler_A_step,
    "euler-b": symplectic_euler_B_step,
    "euler-ab": euler_AB_step,
    "implicit-midpoint": implicit_midpoint_step,
    "rk4-ref": _rk4_particle_step,
}


@dataclass
class ParticleTrajectory:
    times: np.ndarray
    Q: np.ndarray  # (T, N, n)
    P: np.ndarray
    iterations: np.ndarray

    def ensemble(self, i):
        return ParticleEnsemble(self.Q[i], self.P[i])


def integrate_particles(ens, k, scheme, dt, n_steps, config=None, stride=1):
    """Integrate with one of :data:`STEPPERS`, storing every ``stride``-th state."""
    try:
        step = STEPPERS[scheme]
    except KeyError:
        raise ValueError(f"unknown particle scheme {scheme!r}") from None
    config = config or StepperConfig(dt)
    system = ParticleSystem(k)
    Q, P = ens.Q.copy(), ens.P.copy()
    n_out = n_steps // stride + 1
    Qs = np.empty((n_out,) + Q.shape)
    Ps = np.empty((n_out,) + P.shape)
    Qs[0], Ps[0] = Q, P
    iters = np.zeros(n_steps, dtype=np.int64)
    info = {}
    for n in range(n_steps):
        Q, P = step((Q, P), system, config, info)
        iters[n] = info.get("iterations", 0)
        if (n + 1) % stride == 0:
            Qs[(n + 1) // stride] = Q
            Ps[(n + 1) // stride] = P
    times = dt * stride * np.arange(n_out)
    return ParticleTrajectory(times, Qs, Ps, iters)


# ---------------------------------------------------------------------------
# grid reconstruction (1D, peaked kernel)


@dataclass
class GridField:
    x: np.ndarray
    u: np.ndarray
    m: np.ndarray

    @property
    def spacing(self):
        return float(self.x[1] - self.x[0])


def momentum_map_grid(ens, k, grid):
    """Sample ``u`` on a uniform 1D grid and apply ``1 - alpha^2 d^2/dx^2``.

    The second derivative is the 3-point central difference with zero values
    outside the grid. The result approximates ``sum_i P_i delta(x - Q_i)`` as
    grid-scale peaks. Requires the peaked kernel, spacing <= alpha/4 and a
    margin of at least 5 alpha around every particle.
    """
    if ens.dim != 1:
        raise ValueError("grid reconstruction is implemented for 1D ensembles")
    if k.kind != "peaked":
        raise ValueError("grid reconstruction inverts 1 - alpha^2 d^2/dx^2 and needs the peaked kernel")
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("grid must be a 1D array with at least 3 points")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0) or h[0] <= 0:
        raise ValueError("grid must be uniform and increasing")
    h = float(h[0])
    if h > k.alpha / 4:
        raise ValueError(f"grid spacing {h} too coarse; need <= alpha/4 = {k.alpha / 4}")
    margin = 5 * k.alpha
    if ens.Q.min() - x[0] < margin - 1e-12 or x[-1] - ens.Q.max() < margin - 1e-12:
        raise ValueError(f"grid must extend at least 5 alpha = {margin} beyond all particles")
    u = velocity_field(ens, k, x.reshape(-1, 1))[:, 0]
    padded = np.concatenate([[0.0], u, [0.0]])
    d2 = (padded[2:] - 2 * padded[1:-1] + padded[:-2]) / (h * h)
    m = u - k.alpha**2 * d2
    return GridField(x, u, m)


def reconstruct_velocity(field, k, x=None):
    """``u(x) = h sum_k m_k G(x - x_k)``: the kernel convolution of the grid momentum."""
    x = field.x if x is None else np.asarray(x, dtype=float)
    diff = x[:, None] - field.x[None, :]
    return field.spacing * (k.G(diff) @ field.m)


# ---------------------------------------------------------------------------
# weak form of EPDiff


@dataclass(frozen=True)
class BumpTestFunction:
    """Vector test function ``w(x) = direction * b(|x - center| / radius)``.

    ``b(s) = exp(1 - 1/(1 - s^2))`` on ``s < 1``, zero elsewhere (smooth,
    compactly supported).
    """

    center: tuple
    radius: float
    direction: tuple

    def _profile(self, x):
        c = np.asarray(self.center, dtype=float)
        d = np.asarray(x, dtype=float) - c
        s2 = np.sum(d * d, axis=-1) / self.radius**2
        inside = s2 < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            b = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - s2)), 0.0)
            # d b / d x = b * (-2 / (1 - s^2)^2) * d / radius^2
            fac = np.where(inside, -2.0 / (1.0 - s2) ** 2 / self.radius**2, 0.0)
        return b, (b * fac)[..., None] * d

    def value(self, x):
        b, _ = self._profile(x)
        return b[..., None] * np.asarray(self.direction, dtype=float)

    def gradient(self, x):
        """``(grad w)_{kl} = d w^k / d x^l``, shape ``(..., n, n)``."""
        _, db = self._profile(x)
        e = np.asarray(self.direction, dtype=float)
        return e[:, None] * db[..., None, :]


@dataclass(frozen=True)
class ConstantTestFunction:
    vector: tuple

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.vector, dtype=float), x.shape).copy()

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n))


def _particle_gradients(Q, P, k):
    # grad u at each particle: sum_j P_j (x) grad G(Q_i - Q_j), shape (N, n, n)
    diff = Q[:, None, :] - Q[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    dG = k.dG(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0, diff / r[..., None], 0.0)
    gradG = dG[..., None] * unit  # (N, N, n)
    return np.einsum("jk,ijl->ikl", P, gradG)


def weak_form_terms(Q, P, w, k):
    """``(<m, w>, <(grad u)^T m, w>, <m, grad w . u>)`` in particle form."""
    u = kernels.velocity_at(Q, P, Q, k.code, k.alpha)
    grad_u = _particle_gradients(Q, P, k)
    wv = w.value(Q)
    gw = w.gradient(Q)
    pair = float(np.sum(P * wv))
    stretch = float(np.einsum("ikl,ik,il->", grad_u, P, wv))
    transport = float(np.einsum("ik,ikl,il->", P, gw, u))
    return pair, stretch, transport


def weak_epdiff_residual(trajectory, test_functions, k):
    """Max over test functions and interior times of

        d/dt <m, w> + <(grad u)^T m, w> - <m, grad w . u>

    with the time derivative by central differences of stored states. The
    minus sign on the transport term is the one that follows from
    differentiating ``sum_i P_i . w(Q_i)`` along the particle equations.
    """
    T = len(trajectory.times)
    if T < 3:
        raise ValueError("need at least three stored states for central differences")
    dts = np.diff(trajectory.times)
    worst = 0.0
    for w in test_functions:
        terms = np.array(
            [weak_form_terms(trajectory.Q[i], trajectory.P[i], w, k) for i in range(T)]
        )
        ddt = (terms[2:, 0] - terms[:-2, 0]) / (dts[1:] + dts[:-1])
        res = ddt + terms[1:-1, 1] - terms[1:-1, 2]
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def trailing_speeds(trajectory, window):
    """Mean particle velocities over the last ``window`` time units (1D)."""
    t = trajectory.times
    i0 = int(np.searchsorted(t, t[-1] - window))
    return (trajectory.Q[-1, :, 0] - trajectory.Q[i0, :, 0]) / (t[-1] - t[i0])


def leading_speeds(trajectory, window):
    """Mean particle velocities over the first ``window`` time units (1D)."""
    t = trajectory.times
    i1 = int(np.searchsorted(t, t[0] + window))
    return (trajectory.Q[i1, :, 0] - trajectory.Q[0, :, 0]) / (t[i1] - t[0])
