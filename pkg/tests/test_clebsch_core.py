import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clebsch.clebsch_core import (
    RIGHT_MULT,
    CotangentState,
    canonical_vector_field,
    check_closure,
    clebsch_rhs,
    clebsch_rhs_with_potential,
    diamond,
    ep_advected_rhs,
    ep_advected_vector_field,
    ep_rhs,
    ep_vector_field,
    hamiltonian,
    lift,
    momentum_map,
)
from clebsch.discrete_integrators import rk4_reference
from clebsch.experiments import random_closure_samples
from clebsch.matrix_lie import cay, hat, skew, trace_pair, vee
from clebsch.rigid_body import heavy_top_force, linear_potential_lagrangian, rigid_lagrangian

from oracles import random_rotation

I_FIG = (0.5, 0.6, 1.0)
vec3 = arrays(np.float64, 3, elements=st.floats(-2, 2, allow_nan=False))


@pytest.fixture
def l():
    return rigid_lagrangian(I_FIG)


def random_state(rng, l):
    Q = random_rotation(rng)
    return lift(hat(rng.standard_normal(3)), Q, l)


# diamond and momentum map


def test_diamond_examples(rng):
    Q = random_rotation(rng)
    assert np.allclose(diamond(Q, Q), 0.0, atol=1e-15)
    m = rng.standard_normal(3)
    assert np.allclose(diamond(Q @ hat(m), Q), -hat(m), atol=1e-14)


def test_diamond_pairing_identity_on_100_samples(rng):
    worst = 0.0
    for _ in range(100):
        P = rng.standard_normal((3, 3))
        Q = random_rotation(rng) if rng.random() < 0.5 else rng.standard_normal((3, 3))
        X = hat(rng.standard_normal(3))
        worst = max(worst, abs(trace_pair(diamond(P, Q), X) + trace_pair(P, RIGHT_MULT.apply(X, Q))))
    assert worst <= 1e-12


def test_momentum_map_examples(l):
    st0 = lift(hat([1.0, 0.0, 0.0]), np.eye(3), l)
    assert np.allclose(momentum_map(st0), hat([0.5, 0.0, 0.0]), atol=0)
    assert np.array_equal(momentum_map(CotangentState(np.eye(3), np.zeros((3, 3)))), np.zeros((3, 3)))


def test_momentum_map_after_one_rk4_step_matches_ep_step(l, rng):
    st0 = random_state(rng, l)
    dt = 1e-3
    can = rk4_reference(canonical_vector_field(l), st0.as_array(), dt, 1)[-1]
    ep = rk4_reference(ep_vector_field(l), momentum_map(st0), dt, 1)[-1]
    assert np.max(np.abs(momentum_map(CotangentState.from_array(can)) - ep)) < 1e-15


# Clebsch equations


def test_clebsch_rhs_zero_momentum(l):
    Qd, Pd = clebsch_rhs(CotangentState(np.eye(3), np.zeros((3, 3))), l)
    assert np.array_equal(Qd, np.zeros((3, 3))) and np.array_equal(Pd, np.zeros((3, 3)))


def test_clebsch_rhs_principal_axis_steady_rotation(l):
    omega = 1.7
    st0 = lift(hat([omega, 0, 0]), np.eye(3), l)
    Qd, Pd = clebsch_rhs(st0, l)
    assert np.allclose(Qd, hat([omega, 0, 0]), atol=1e-15)
    assert np.allclose(Pd, st0.P @ hat([omega, 0, 0]), atol=1e-15)
    # body momentum stays fixed along the flow, up to RK4 truncation
    # (RK4 does not keep Q exactly orthogonal)
    traj = rk4_reference(canonical_vector_field(l), st0.as_array(), 1e-2, 200)
    mus = [momentum_map(CotangentState.from_array(y)) for y in traj]
    assert max(np.max(np.abs(m - mus[0])) for m in mus) < 1e-9


def test_clebsch_rhs_gives_commutator_for_QtP(l, rng):
    st0 = random_state(rng, l)
    Qd, Pd = clebsch_rhs(st0, l)
    Q, P = st0.Q, st0.P
    X = l.legendre_inverse(momentum_map(st0))
    M = Q.T @ P
    assert np.allclose(Qd.T @ P + Q.T @ Pd, M @ X - X @ M, atol=1e-14)
    # and along a trajectory, by central differences
    dt = 1e-3
    traj = rk4_reference(canonical_vector_field(l), st0.as_array(), dt, 2)
    M_of = lambda y: y[0].T @ y[1]
    fd = (M_of(traj[2]) - M_of(traj[0])) / (2 * dt)
    M1 = M_of(traj[1])
    X1 = l.legendre_inverse(skew(M1))
    assert np.allclose(fd, M1 @ X1 - X1 @ M1, atol=1e-6)


def test_clebsch_hamiltonian_examples(l):
    assert hamiltonian(CotangentState(np.eye(3), np.zeros((3, 3))), l) == 0.0
    st0 = lift(hat([1.0, 0, 0]), np.eye(3), l)
    assert hamiltonian(st0, l) == pytest.approx(0.25, abs=1e-15)


def test_clebsch_flow_invariants(l):
    rng = np.random.default_rng(11)
    st0 = random_state(rng, l)
    traj = rk4_reference(canonical_vector_field(l), st0.as_array(), 1e-3, 10_000)
    H = np.array([hamiltonian(CotangentState.from_array(y), l) for y in traj[::50]])
    assert np.max(np.abs(H - H[0])) < 1e-8
    QtP = np.einsum("nki,nkj->nij", traj[:, 0], traj[:, 1])
    assert np.max(np.abs(QtP + np.transpose(QtP, (0, 2, 1)))) < 1e-10
    QtQ = np.einsum("nki,nkj->nij", traj[:, 0], traj[:, 0])
    assert np.max(np.linalg.norm(QtQ - np.eye(3), axis=(1, 2))) < 1e-9


# potential


def test_potential_rhs_examples(l, rng):
    st0 = random_state(rng, l)
    zero = linear_potential_lagrangian(I_FIG, np.zeros((3, 3)))
    a, b = clebsch_rhs(st0, l), clebsch_rhs_with_potential(st0, zero)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    F = rng.standard_normal((3, 3))
    lp = linear_potential_lagrangian(I_FIG, F)
    _, Pd = clebsch_rhs_with_potential(st0, lp)
    assert np.allclose(Pd - a[1], -F, atol=1e-15)


def test_linear_potential_gradient_matches_finite_differences(rng):
    F = rng.standard_normal((3, 3))
    lp = linear_potential_lagrangian(I_FIG, F)
    Q = random_rotation(rng)
    dQ = rng.standard_normal((3, 3))
    eps = 1e-6
    fd = (lp.potential(Q + eps * dQ) - lp.potential(Q - eps * dQ)) / (2 * eps)
    assert fd == pytest.approx(trace_pair(lp.dV_dQ(Q), dQ), abs=1e-9)


def test_heavy_top_energy_conserved_by_rk4():
    lp = linear_potential_lagrangian(I_FIG, heavy_top_force([0.0, 0.0, 0.8]))
    st0 = lift(hat([0.9, -0.4, 1.3]), cay(hat([0.3, 0.2, -0.1])), lp)
    traj = rk4_reference(canonical_vector_field(lp), st0.as_array(), 1e-3, 10_000)
    H = np.array([hamiltonian(CotangentState.from_array(y), lp) for y in traj[::50]])
    assert np.max(np.abs(H - H[0])) < 1e-8


# reduced equations


def test_ep_rhs_examples(l):
    for ax in np.eye(3):
        assert np.allclose(ep_rhs(hat(2.0 * ax), l), 0.0, atol=0)
    mu = hat([0.5, 0.6, 0.0])  # Omega = (1, 1, 0)
    assert np.allclose(vee(ep_rhs(mu, l)), [0.0, 0.0, -0.1], atol=1e-15)


@given(vec3)
def test_ep_rhs_conserves_casimir_at_rhs_level(m):
    l = rigid_lagrangian(I_FIG)
    mu = hat(m)
    assert abs(trace_pair(mu, ep_rhs(mu, l))) < 1e-14 * (1 + m @ m)


def test_ep_advected_reduces_without_potential(l, rng):
    mu = hat(rng.standard_normal(3))
    Q = random_rotation(rng)
    mud, Qd = ep_advected_rhs(mu, Q, l)
    assert np.array_equal(mud, ep_rhs(mu, l))
    assert np.array_equal(Qd, Q @ l.legendre_inverse(mu))


def test_ep_advected_initial_slope_matches_canonical_momentum_map(rng):
    F = rng.standard_normal((3, 3))
    lp = linear_potential_lagrangian(I_FIG, F)
    st0 = lift(hat(rng.standard_normal(3)), np.eye(3), lp)
    mud, _ = ep_advected_rhs(momentum_map(st0), st0.Q, lp)
    h = 1e-4
    f = canonical_vector_field(lp)
    fwd = rk4_reference(f, st0.as_array(), h, 1)[-1]
    bwd = rk4_reference(f, st0.as_array(), -h, 1)[-1]
    fd = (momentum_map(CotangentState.from_array(fwd)) - momentum_map(CotangentState.from_array(bwd))) / (2 * h)
    assert np.max(np.abs(fd - mud)) < 1e-6


def test_canonical_and_advected_trajectories_agree(rng):
    lp = linear_potential_lagrangian(I_FIG, heavy_top_force([0.1, -0.2, 0.6]))
    st0 = lift(hat(rng.standard_normal(3)), random_rotation(rng), lp)
    dt, n = 1e-3, 1000
    can = rk4_reference(canonical_vector_field(lp), st0.as_array(), dt, n)
    red = rk4_reference(ep_advected_vector_field(lp), np.stack([momentum_map(st0), st0.Q]), dt, n)
    diff = max(np.max(np.abs(momentum_map(CotangentState.from_array(can[i])) - red[i, 0])) for i in range(n + 1))
    assert diff < 1e-9


# closure


def test_closure_examples(rng):
    samples = random_closure_samples(rng, 100)
    assert check_closure(RIGHT_MULT, samples).max_residual < 1e-13
    same = [(u, u, Q) for u, _, Q in samples[:10]]
    rep = check_closure(RIGHT_MULT, same)
    assert rep.max_residual == 0.0 and rep.n_samples == 10
    corrupted = check_closure(RIGHT_MULT, samples, bracket=lambda u, v: u @ v + v @ u)
    assert corrupted.max_residual > 1.0 and not corrupted.passed()
