"""Parity between the compiled kernels and the numpy fallback."""

import numpy as np
import pytest

from clebsch import kernels

from oracles import random_rotation

BACKENDS = kernels.backends()
compiled = BACKENDS["compiled"]
python = BACKENDS["python"]

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_flag_is_consistent():
    assert kernels.BACKEND in ("compiled", "python")
    if compiled is None:
        assert kernels.BACKEND == "python"


@needs_compiled
@pytest.mark.parametrize("kind", [kernels.PEAKED, kernels.GAUSSIAN])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_particle_kernels_agree(rng, kind, dim):
    Q = rng.standard_normal((7, dim))
    P = rng.standard_normal((7, dim))
    X = rng.standard_normal((11, dim))
    for a, b in zip(compiled.particle_rhs(Q, P, kind, 0.8), python.particle_rhs(Q, P, kind, 0.8)):
        assert np.allclose(a, b, rtol=0, atol=1e-14)
    assert compiled.particle_hamiltonian(Q, P, kind, 0.8) == pytest.approx(
        python.particle_hamiltonian(Q, P, kind, 0.8), rel=1e-14
    )
    assert np.allclose(compiled.velocity_at(Q, P, X, kind, 0.8), python.velocity_at(Q, P, X, kind, 0.8), atol=1e-15)


@needs_compiled
def test_coincident_particles_have_zero_self_force():
    Q = np.array([[0.5], [0.5]])
    P = np.array([[1.0], [-2.0]])
    for mod in (compiled, python):
        _, Pd = mod.particle_rhs(Q, P, kernels.PEAKED, 1.0)
        assert np.array_equal(Pd, np.zeros_like(Pd))


@needs_compiled
def test_cayley_solve_agrees(rng):
    inv = 1.0 / np.array([0.5, 0.6, 1.0])
    for _ in range(10):
        m = rng.standard_normal(3)
        a, ka, _ = compiled.cayley_rb_solve(m, inv, 0.1, 1e-13, 50)
        b, kb, _ = python.cayley_rb_solve(m, inv, 0.1, 1e-13, 50)
        assert ka == kb and ka > 0
        assert np.allclose(a, b, rtol=0, atol=1e-14)
    _, k, _ = compiled.cayley_rb_solve(np.array([3.0, 4.0, 5.0]), inv, 2.0, 1e-13, 2)
    assert k < 0


@needs_compiled
def test_cayley_trajectory_agrees(rng):
    inv = 1.0 / np.array([0.5, 0.6, 1.0])
    m0 = rng.standard_normal(3)
    Q0 = random_rotation(rng)
    A = compiled.cayley_rb_trajectory(m0, Q0, inv, 0.1, 500, 1e-13, 50)
    B = python.cayley_rb_trajectory(m0, Q0, inv, 0.1, 500, 1e-13, 50)
    # identical arithmetic up to summation order; differences stay at roundoff
    assert np.max(np.abs(A[0] - B[0])) < 1e-11
    assert np.max(np.abs(A[1] - B[1])) < 1e-11
    assert A[3] == B[3] == -1
