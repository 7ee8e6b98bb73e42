"""Clebsch variational integrators.

Canonical (Q, P) dynamics under the velocity map ``Qdot = Q X`` on SO(3),
their elimination to Euler-Poincare form, Cayley-transform discretisations,
the rigid body, and EPDiff particle (peakon) solutions.
"""

__version__ = "0.1.0"

from .exceptions import ClebschError, ConfigError, DomainError, SolverConvergenceError  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__",
    "BACKEND",
    "ClebschError",
    "ConfigError",
    "DomainError",
    "SolverConvergenceError",
]
