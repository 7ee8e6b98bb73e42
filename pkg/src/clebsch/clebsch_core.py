"""Continuous-time Clebsch dynamics on the cotangent bundle of a matrix group.

The configuration ``Q`` evolves by the right-multiplication velocity map
``Qdot = Q X``; the Lagrange multiplier ``P`` is the canonical momentum. The
reduced Lagrangian ``l(X)`` (optionally ``l(X, Q) = kinetic - V(Q)``) fixes
``X`` through its Legendre inverse applied to the momentum map
``mu = skew(Q^T P)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_lie import ad_star, induced_bracket, skew, trace_pair


class VelocityMapRightMult:
    """``L_X Q = Q X`` together with its tangent map and that tangent's transpose."""

    def apply(self, X, Q):
        return np.asarray(Q) @ np.asarray(X)

    def tangent(self, X, Q, dQ):
        # T_Q L_X applied to dQ
        return np.asarray(dQ) @ np.asarray(X)

    def tangent_transpose(self, X, Q, P):
        # (T_Q L_X)^T P under the trace pairing
        return np.asarray(P) @ np.asarray(X).T


RIGHT_MULT = VelocityMapRightMult()


@dataclass(frozen=True)
class CotangentState:
    """Canonical phase point ``(Q, P)``."""

    Q: np.ndarray
    P: np.ndarray

    def as_array(self):
        return np.stack([self.Q, self.P])

    @classmethod
    def from_array(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(y[0], y[1])


class ReducedLagrangian:
    """Interface for reduced Lagrangians ``l(X)`` or ``l(X, Q) = kinetic(X) - V(Q)``.

    Subclasses implement :meth:`value`, :meth:`dl_dX` and
    :meth:`legendre_inverse`; those with a potential override
    :meth:`potential` and :meth:`dV_dQ` and set ``has_potential``.
    Derivatives are gradients under :func:`~clebsch.matrix_lie.trace_pair`.
    """

    has_potential = False

    def value(self, X):
        raise NotImplementedError

    def dl_dX(self, X):
        raise NotImplementedError

    def legendre_inverse(self, mu):
        raise NotImplementedError

    def potential(self, Q):
        return 0.0

    def dV_dQ(self, Q):
        return np.zeros_like(np.asarray(Q, dtype=float))

    def dl_dQ(self, Q):
        return -self.dV_dQ(Q)


def lift(X0, Q0, l):
    """Canonical initial data ``P0 = Q0 dl/dX(X0)``, so that ``Q0^T P0`` is the body momentum."""
    Q0 = np.asarray(Q0, dtype=float)
    return CotangentState(Q0.copy(), Q0 @ l.dl_dX(X0))


def diamond(P, Q):
    """``P <> Q``: skew part of ``-Q^T P``.

    Only the skew part is fixed by the defining relation
    ``<P <> Q, X> = -<P, Q X>`` for skew ``X``.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape:
        raise ValueError(f"dimension mismatch: {P.shape} vs {Q.shape}")
    return skew(-Q.T @ P)


def momentum_map(state):
    """Cotangent-lift momentum map ``-P <> Q = skew(Q^T P)``."""
    return -diamond(state.P, state.Q)


def clebsch_rhs(state, l):
    """Clebsch equations without potential: ``Qdot = Q X``, ``Pdot = P X``."""
    X = l.legendre_inverse(momentum_map(state))
    Qdot = RIGHT_MULT.apply(X, state.Q)
    Pdot = -RIGHT_MULT.tangent_transpose(X, state.Q, state.P)
    return Qdot, Pdot


def clebsch_rhs_with_potential(state, l):
    """Clebsch equations with ``Pdot`` augmented by ``dl/dQ = -dV/dQ``."""
    Qdot, Pdot = clebsch_rhs(state, l)
    return Qdot, Pdot + l.dl_dQ(state.Q)


def hamiltonian(state, l):
    """``H = <P, Q X> - l(X, Q)`` with ``X = G(-P <> Q)``."""
    X = l.legendre_inverse(momentum_map(state))
    return trace_pair(state.P, state.Q @ X) - l.value(X) + l.potential(state.Q)


def ep_rhs(mu, l):
    """Euler-Poincare vector field ``-ad*_X mu`` with ``X = G(mu)``."""
    X = l.legendre_inverse(mu)
    return -ad_star(X, mu)


def ep_advected_rhs(mu, Q, l):
    """Euler-Poincare equation with the configuration ``Q`` advected.

    Returns ``(mudot, Qdot)`` with ``mudot = -ad*_X mu - (dl/dQ) <> Q`` and
    ``Qdot = Q X``.
    """
    X = l.legendre_inverse(mu)
    mudot = -ad_star(X, mu) - diamond(l.dl_dQ(Q), Q)
    return mudot, RIGHT_MULT.apply(X, Q)


# Vector fields on stacked arrays, for generic one-step integrators.


def canonical_vector_field(l):
    """``f(y)`` for ``y = [Q, P]`` stacked along axis 0."""
    rhs = clebsch_rhs_with_potential if l.has_potential else clebsch_rhs

    def f(y):
        Qdot, Pdot = rhs(CotangentState(y[0], y[1]), l)
        return np.stack([Qdot, Pdot])

    return f


def ep_vector_field(l):
    return lambda mu: ep_rhs(mu, l)


def ep_advected_vector_field(l):
    """``f(y)`` for ``y = [mu, Q]`` stacked along axis 0."""

    def f(y):
        mudot, Qdot = ep_advected_rhs(y[0], y[1], l)
        return np.stack([mudot, Qdot])

    return f


@dataclass
class ClosureReport:
    max_residual: float
    n_samples: int

    def passed(self, tol=1e-13):
        return self.max_residual <= tol


def check_closure(velocity_map, samples, bracket=induced_bracket):
    """Check ``L_[u,v] Q = (T_Q L_v) L_u Q - (T_Q L_u) L_v Q`` on ``(u, v, Q)`` samples.

    Report-only: a failing bracket shows up as a large ``max_residual``.
    """
    worst = 0.0
    n = 0
    for u, v, Q in samples:
        lhs = velocity_map.apply(bracket(u, v), Q)
        rhs = velocity_map.tangent(v, Q, velocity_map.apply(u, Q)) - velocity_map.tangent(
            u, Q, velocity_map.apply(v, Q)
        )
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        n += 1
    return ClosureReport(worst, n)
