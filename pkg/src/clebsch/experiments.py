"""Experiment drivers shared by the command line and the test suites.

Each ``run_*`` function takes an :class:`~clebsch.config.ExperimentConfig`
and returns a :class:`RunResult`: a column header, a 2D array of rows and a
dict of summary diagnostics. Diagnostics are computed from the stored
trajectory after integration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .clebsch_core import (
    RIGHT_MULT,
    CotangentState,
    canonical_vector_field,
    check_closure,
    hamiltonian,
    momentum_map,
)
from .config import Particle
from .discrete_integrators import (
    StepperConfig,
    convergence_order,
    implicit_midpoint_step,
    rk4_reference,
    rk4_step,
    symplectic_euler_A_step,
    symplectic_euler_B_step,
)
from .epdiff_particles import (
    Kernel,
    ParticleEnsemble,
    ParticleSystem,
    hamiltonian_particles,
    integrate_particles,
)
from .exceptions import SolverConvergenceError
from .matrix_lie import cay, hat, vee
from .rigid_body import (
    InertiaTensor,
    body_momentum,
    cayley_clebsch_trajectory,
    linear_potential_lagrangian,
)

RIGID_COLUMNS = ("t", "m1", "m2", "m3", "energy", "casimir", "pi1", "pi2", "pi3", "group_residual")

# used by the convergence command when the config lists no particles
DEFAULT_CONVERGENCE_PARTICLES = (Particle((-2.0,), (1.0,)), Particle((0.0,), (0.5,)))

DEFAULT_DT_LIST = {
    "cayley-clebsch": (0.04, 0.02, 0.01, 0.005),
    "rk4-ref": (0.2, 0.1, 0.05, 0.025),
    "euler-a": (0.04, 0.02, 0.01, 0.005),
    "euler-b": (0.04, 0.02, 0.01, 0.005),
    "implicit-midpoint": (0.04, 0.02, 0.01, 0.005),
}


@dataclass
class RunResult:
    columns: tuple
    rows: np.ndarray
    summary: dict


def _stepper_config(cfg, dt=None):
    return StepperConfig(cfg.dt if dt is None else dt, cfg.solver_tol, cfg.solver_max_iter)


def _iteration_stats(iters):
    iters = np.asarray(iters)
    if iters.size == 0:
        return {"solver_iterations_max": 0, "solver_iterations_mean": 0.0}
    return {
        "solver_iterations_max": int(iters.max()),
        "solver_iterations_mean": float(iters.mean()),
    }


def _rel_drift(x):
    x = np.asarray(x, dtype=float)
    scale = max(float(np.max(np.abs(x[0]))), np.finfo(float).tiny)
    return float(np.max(np.abs(x - x[0])) / scale)


def _group_residual(Qs):
    QtQ = np.einsum("nki,nkj->nij", Qs, Qs)
    return np.linalg.norm(QtQ - np.eye(3), axis=(1, 2))


def rigid_vector_field(inv_inertia):
    """Free rigid body on ``y = [m, vec(Q)]``: ``mdot = m x I^-1 m``, ``Qdot = Q hat(I^-1 m)``."""

    def f(y):
        m = y[:3]
        w = m * inv_inertia
        Q = y[3:].reshape(3, 3)
        return np.concatenate([np.cross(m, w), (Q @ hat(w)).ravel()])

    return f


def cayley_coupled_step(inv_inertia, tol=1e-13, max_iter=50):
    """One coupled Cayley step on ``y = [m, vec(Q)]`` (for order studies)."""
    def step(y, dt):
        m = y[:3]
        Q = y[3:].reshape(3, 3)
        w = dt * m * inv_inertia
        Q_next = Q @ _cay_hat(w)
        m_next, k, res = kernels.cayley_rb_solve(m, inv_inertia, dt, tol, max_iter)
        if k < 0:
            raise SolverConvergenceError(
                f"Cayley step did not converge (residual {res:.3e})", iterations=max_iter, residual=res
            )
        return np.concatenate([m_next, Q_next.ravel()])

    return step


def _cay_hat(w):
    W = hat(w)
    return np.eye(3) + (4.0 / (4.0 + float(w @ w))) * (W + 0.5 * (W @ W))


def run_rigid_body(cfg):
    inertia = InertiaTensor(cfg.inertia)
    m0 = body_momentum(cfg.initial_omega(), inertia)
    n = cfg.n_steps
    if cfg.scheme == "cayley-clebsch":
        traj = cayley_clebsch_trajectory(m0, inertia, cfg.dt, n, config=_stepper_config(cfg))
        times, m, energy = traj.times, traj.m, traj.energy
        casimir, pi, gres = traj.casimir, traj.spatial, traj.group_residual
        iters = traj.iterations
    else:
        y0 = np.concatenate([m0, np.eye(3).ravel()])
        Y = rk4_reference(rigid_vector_field(inertia.inverse_diag), y0, cfg.dt, n)
        times = cfg.dt * np.arange(n + 1)
        m = Y[:, :3]
        Qs = Y[:, 3:].reshape(-1, 3, 3)
        energy = 0.5 * np.sum(m * m * inertia.inverse_diag, axis=1)
        casimir = np.sum(m * m, axis=1)
        pi = np.einsum("nij,nj->ni", Qs, m)
        gres = _group_residual(Qs)
        iters = np.zeros(0, dtype=np.int64)
    rows = np.column_stack([times, m, energy, casimir, pi, gres])
    summary = {
        "experiment": cfg.experiment,
        "scheme": cfg.scheme,
        "steps": n,
        "max_energy_drift": _rel_drift(energy),
        "casimir_drift": _rel_drift(casimir),
        "momentum_drift": float(np.max(np.linalg.norm(pi - pi[0], axis=1)) / np.linalg.norm(pi[0])),
        "max_group_residual": float(np.max(gres)),
        **_iteration_stats(iters),
    }
    return RunResult(RIGID_COLUMNS, rows, summary)


def run_rigid_body_potential(cfg):
    inertia = InertiaTensor(cfg.inertia)
    F = np.array(cfg.potential, dtype=float).reshape(3, 3)
    l = linear_potential_lagrangian(inertia, F)
    m0 = body_momentum(cfg.initial_omega(), inertia)
    n = cfg.n_steps
    y0 = np.stack([np.eye(3), hat(m0)])
    Y = rk4_reference(canonical_vector_field(l), y0, cfg.dt, n)
    times = cfg.dt * np.arange(n + 1)
    Qs = Y[:, 0]
    mus = [momentum_map(CotangentState(Y[i, 0], Y[i, 1])) for i in range(n + 1)]
    m = np.array([vee(mu) for mu in mus])
    energy = np.array([hamiltonian(CotangentState(Y[i, 0], Y[i, 1]), l) for i in range(n + 1)])
    casimir = np.sum(m * m, axis=1)
    pi = np.einsum("nij,nj->ni", Qs, m)
    gres = _group_residual(Qs)
    rows = np.column_stack([times, m, energy, casimir, pi, gres])
    summary = {
        "experiment": cfg.experiment,
        "scheme": cfg.scheme,
        "steps": n,
        "max_energy_drift": _rel_drift(energy),
        "casimir_drift": _rel_drift(casimir),
        "momentum_drift": float(np.max(np.linalg.norm(pi - pi[0], axis=1)) / np.linalg.norm(pi[0])),
        "max_group_residual": float(np.max(gres)),
        **_iteration_stats([]),
    }
    return RunResult(RIGID_COLUMNS, rows, summary)


def _ensemble(cfg, default=()):
    parts = cfg.particles or default
    if not parts:
        raise ValueError("no particles configured")
    return ParticleEnsemble(
        np.array([x.q for x in parts], dtype=float), np.array([x.p for x in parts], dtype=float)
    )


def run_epdiff(cfg):
    k = Kernel(cfg.alpha, cfg.kernel)
    ens = _ensemble(cfg)
    traj = integrate_particles(ens, k, cfg.scheme, cfg.dt, cfg.n_steps, _stepper_config(cfg))
    N = ens.n_particles
    q = traj.Q[:, :, 0]
    p = traj.P[:, :, 0]
    energy = np.array([hamiltonian_particles(traj.ensemble(i), k) for i in range(len(traj.times))])
    total_p = p.sum(axis=1)
    rows = np.column_stack([traj.times, q, p, energy, total_p])
    columns = ("t",) + tuple(f"q_{i + 1}" for i in range(N)) + tuple(f"p_{i + 1}" for i in range(N))
    columns += ("energy", "total_p")
    summary = {
        "experiment": cfg.experiment,
        "scheme": cfg.scheme,
        "steps": cfg.n_steps,
        "particles": N,
        "max_energy_drift": _rel_drift(energy),
        "momentum_drift": float(np.max(np.abs(total_p - total_p[0]))),
        **_iteration_stats(traj.iterations),
    }
    return RunResult(columns, rows, summary)


RUNNERS = {
    "rigid-body": run_rigid_body,
    "rigid-body-potential": run_rigid_body_potential,
    "epdiff-1d": run_epdiff,
}


def run_experiment(cfg):
    """Dispatch on ``cfg.experiment``; adds ``wall_time`` to the summary."""
    try:
        runner = RUNNERS[cfg.experiment]
    except KeyError:
        raise ValueError(f"experiment {cfg.experiment!r} has no trajectory output") from None
    t0 = time.perf_counter()
    result = runner(cfg)
    result.summary["wall_time"] = time.perf_counter() - t0
    return result


# ---------------------------------------------------------------------------
# convergence studies


_PROBLEM_OF_EXPERIMENT = {"rigid-body": "rigid-body", "epdiff-1d": "epdiff-1d"}


def convergence_problem(cfg):
    """``(stepper, y0, reference, description)`` for the configured scheme.

    Rigid-body schemes start from ``omega0`` with ``Q = I``: ``cayley-clebsch``
    is measured on the coupled ``(m, Q)`` state against a fine RK4
    trajectory, ``rk4-ref`` on ``m`` against RK4 at an eighth of the smallest
    step. Particle schemes use the configured (or a default two-peakon)
    ensemble against implicit midpoint at an eighth of the smallest step.
    """
    dts = cfg.dt_list or DEFAULT_DT_LIST[cfg.scheme]
    T = cfg.t_final
    problem = cfg.problem or _PROBLEM_OF_EXPERIMENT.get(cfg.experiment)
    if not problem:
        problem = "rigid-body" if cfg.scheme in ("cayley-clebsch", "rk4-ref") else "epdiff-1d"
    if problem == "rigid-body":
        inertia = InertiaTensor(cfg.inertia)
        Iinv = inertia.inverse_diag
        m0 = body_momentum(cfg.initial_omega(), inertia)
        f = rigid_vector_field(Iinv)
        fine = min(dts) / 8
        if cfg.scheme == "cayley-clebsch":
            y0 = np.concatenate([m0, np.eye(3).ravel()])
            ref = rk4_reference(f, y0, fine, int(round(T / fine)))[-1]
            stepper = cayley_coupled_step(Iinv, cfg.solver_tol, cfg.solver_max_iter)
            return stepper, y0, ref, dts, "coupled (m, Q) Cayley trajectory vs RK4"
        if cfg.scheme == "rk4-ref":
            g = lambda m: np.cross(m, m * Iinv)
            ref = rk4_reference(g, m0, fine, int(round(T / fine)))[-1]
            return (lambda y, dt: rk4_step(g, y, dt)), m0, ref, dts, "RK4 on m vs RK4 at dt/8"
        raise ValueError(f"scheme {cfg.scheme!r} is not defined on the rigid-body problem")
    k = Kernel(cfg.alpha, cfg.kernel)
    ens = _ensemble(cfg, DEFAULT_CONVERGENCE_PARTICLES)
    system = ParticleSystem(k)
    steps = {
        "euler-a": symplectic_euler_A_step,
        "euler-b": symplectic_euler_B_step,
        "implicit-midpoint": implicit_midpoint_step,
        "rk4-ref": lambda s, sys_, c, info=None: tuple(rk4_step(sys_.vector_field, np.stack(s), c.dt)),
    }
    if cfg.scheme not in steps:
        raise ValueError(f"scheme {cfg.scheme!r} is not defined on the particle problem")
    step = steps[cfg.scheme]

    def stepper(y, dt):
        Q, P = step((y[0], y[1]), system, _stepper_config(cfg, dt))
        return np.stack([Q, P])

    fine = min(dts) / 8
    n_fine = int(round(T / fine))
    ref_traj = integrate_particles(
        ens, k, "implicit-midpoint", fine, n_fine, _stepper_config(cfg, fine), stride=n_fine
    )
    ref = np.stack([ref_traj.Q[-1], ref_traj.P[-1]])
    return stepper, np.stack([ens.Q, ens.P]), ref, dts, f"{cfg.scheme} on particles vs implicit midpoint at dt/8"


def run_convergence(cfg):
    stepper, y0, ref, dts, desc = convergence_problem(cfg)
    result = convergence_order(stepper, ref, y0, cfg.t_final, dts)
    return result, desc


# ---------------------------------------------------------------------------
# closure check


def random_closure_samples(rng, n):
    out = []
    for _ in range(n):
        u = hat(rng.standard_normal(3))
        v = hat(rng.standard_normal(3))
        Q = cay(hat(rng.standard_normal(3)))
        out.append((u, v, Q))
    return out


def run_closure_check(seed=0, n=100):
    """Closure report for right multiplication and for a corrupted bracket."""
    rng = np.random.default_rng(seed)
    samples = random_closure_samples(rng, n)
    good = check_closure(RIGHT_MULT, samples)
    bad = check_closure(RIGHT_MULT, samples, bracket=lambda u, v: u @ v + v @ u)
    return good, bad
