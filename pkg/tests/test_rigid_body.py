import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clebsch.clebsch_core import lift, momentum_map
from clebsch.discrete_integrators import StepperConfig, cayley_relation_residual, discrete_clebsch_step
from clebsch.exceptions import SolverConvergenceError
from clebsch.matrix_lie import hat, trace_pair, vee
from clebsch.rigid_body import (
    FIGURE1_INERTIA,
    InertiaTensor,
    body_momentum,
    cayley_clebsch_trajectory,
    cayley_discrete_momentum,
    energy,
    estimate_period,
    heavy_top_force,
    linear_potential_lagrangian,
    rigid_lagrangian,
    rk4_ep_vec,
    spatial_momentum,
)

from oracles import EULER_M_T1, FIGURE1_PERIOD, random_rotation

vec3 = arrays(np.float64, 3, elements=st.floats(-3, 3, allow_nan=False))
M0 = body_momentum(np.ones(3) / np.sqrt(3), FIGURE1_INERTIA)


def test_inertia_validation():
    with pytest.raises(ValueError):
        InertiaTensor((1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        InertiaTensor((1.0, 2.0))
    assert np.array_equal(InertiaTensor().diag, [0.5, 0.6, 1.0])


def test_rigid_lagrangian_examples():
    l = rigid_lagrangian()
    assert l.value(hat([1.0, 0, 0])) == pytest.approx(0.25, abs=0)


@given(vec3)
def test_legendre_inverse_undoes_dl_dX(w):
    l = rigid_lagrangian()
    X = hat(w)
    assert np.max(np.abs(l.legendre_inverse(l.dl_dX(X)) - X)) <= 1e-14 * (1 + np.abs(w).max())


def test_dl_dX_matches_central_differences(rng):
    l = rigid_lagrangian()
    X = hat(rng.standard_normal(3))
    dX = hat(rng.standard_normal(3))
    exact = trace_pair(l.dl_dX(X), dX)
    errs = []
    for eps in (1e-2, 5e-3):
        fd = (l.value(X + eps * dX) - l.value(X - eps * dX)) / (2 * eps)
        errs.append(abs(fd - exact))
    # value is quadratic, so central differences are exact up to roundoff
    assert max(errs) < 1e-12


def test_energy_and_spatial_momentum_examples(rng):
    assert energy(hat([0.5, 0, 0]), FIGURE1_INERTIA) == pytest.approx(0.25, abs=1e-16)
    assert energy(np.array([0.5, 0, 0]), FIGURE1_INERTIA) == pytest.approx(0.25, abs=1e-16)
    mu = hat(rng.standard_normal(3))
    assert np.array_equal(spatial_momentum(np.eye(3), mu), mu)
    Q = random_rotation(rng)
    # Q hat(m) Q^T = hat(Q m) for rotations
    assert np.allclose(spatial_momentum(Q, mu), hat(Q @ vee(mu)), atol=1e-14)


def test_linear_potential_lagrangian():
    F = heavy_top_force([0.0, 0.2, 0.5])
    lp = linear_potential_lagrangian(FIGURE1_INERTIA, F)
    assert lp.has_potential
    assert np.array_equal(lp.dV_dQ(np.eye(3)), F)
    assert lp.potential(np.eye(3)) == pytest.approx(0.5 * np.trace(F.T), abs=1e-16)
    free = linear_potential_lagrangian(FIGURE1_INERTIA, np.zeros((3, 3)))
    assert free.potential(random_rotation(np.random.default_rng(0))) == 0.0


def test_rk4_euler_reference_and_invariants():
    traj = rk4_ep_vec(M0, FIGURE1_INERTIA, 1e-3, 10_000)
    assert np.max(np.abs(traj[1000] - EULER_M_T1)) < 1e-12
    C = np.sum(traj * traj, axis=1)
    E = np.array([energy(m, FIGURE1_INERTIA) for m in traj[::100]])
    assert np.max(np.abs(C - C[0])) < 1e-10
    assert np.max(np.abs(E - E[0])) < 1e-10


def test_period_estimate_matches_frozen_value():
    assert estimate_period(M0, FIGURE1_INERTIA) == pytest.approx(FIGURE1_PERIOD, rel=1e-9)


def test_compiled_trajectory_matches_generic_clebsch_step(rng):
    l = rigid_lagrangian()
    Q0 = random_rotation(rng)
    m0 = rng.standard_normal(3)
    dt, n = 0.1, 100
    fast = cayley_clebsch_trajectory(m0, FIGURE1_INERTIA, dt, n, Q0=Q0)
    st = lift(l.legendre_inverse(hat(m0)), Q0, l)
    cfg = StepperConfig(dt)
    for k in range(1, n + 1):
        st, _ = discrete_clebsch_step(st, l, cfg)
        if k % 20 == 0:
            assert np.max(np.abs(st.Q - fast.Q[k])) < 1e-12
            assert np.max(np.abs(vee(momentum_map(st)) - fast.m[k])) < 1e-12


def test_discrete_invariants_over_ten_thousand_steps():
    traj = cayley_clebsch_trajectory(M0, FIGURE1_INERTIA, 0.1, 10_000)
    pi = traj.spatial
    assert np.max(np.abs(pi - pi[0])) < 1e-11
    Yn = np.sqrt(traj.casimir)
    assert np.max(np.abs(Yn - Yn[0])) < 1e-11
    assert np.max(traj.group_residual) < 1e-12 * np.sqrt(10_000)
    # matrix form of the carried momentum agrees with the vector form
    X = hat(traj.m[7] * traj.inertia.inverse_diag)
    Y = cayley_discrete_momentum(hat(traj.m[7]), X, 0.1)
    assert np.allclose(vee(Y), traj.discrete_momentum[7], atol=1e-15)
    E = traj.energy
    assert np.max(np.abs(E - E[0]) / E[0]) < 0.05


def test_steady_rotations_are_fixed_points():
    l = rigid_lagrangian()
    for ax in np.eye(3):
        m = 1.4 * ax
        traj = cayley_clebsch_trajectory(m, FIGURE1_INERTIA, 0.1, 50)
        assert np.max(np.abs(traj.m - m)) < 1e-14
        assert cayley_relation_residual(hat(m), hat(m), l, 0.1) < 1e-14


def test_middle_axis_instability():
    e = np.eye(3)
    perturb = 0.01 * np.array([0.3, 0.5, -0.4])
    dev = []
    for i in range(3):
        m0 = e[i] + perturb
        m0 /= np.linalg.norm(m0)
        traj = cayley_clebsch_trajectory(m0, FIGURE1_INERTIA, 0.1, 500)  # t in [0, 50]
        unit = traj.m / np.linalg.norm(traj.m, axis=1)[:, None]
        dev.append(np.max(np.linalg.norm(unit - e[i], axis=1)))
    assert dev[1] > 0.5
    assert dev[0] < 0.1 and dev[2] < 0.1


def test_solver_failure_propagates():
    with pytest.raises(SolverConvergenceError):
        cayley_clebsch_trajectory(
            np.array([3.0, 4.0, 5.0]), FIGURE1_INERTIA, 2.0, 5, config=StepperConfig(2.0, solver_max_iter=3)
        )
