"""Hot-kernel dispatch.

Uses the compiled ``clebsch._kernels`` extension when importable, otherwise
the numpy fallback in ``clebsch._kernels_py``. Set ``CLEBSCH_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _kernels_py

PEAKED = _kernels_py.PEAKED
GAUSSIAN = _kernels_py.GAUSSIAN

if os.environ.get("CLEBSCH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

particle_rhs = _impl.particle_rhs
particle_hamiltonian = _impl.particle_hamiltonian
velocity_at = _impl.velocity_at
cayley_rb_solve = _impl.cayley_rb_solve
cayley_rb_trajectory = _impl.cayley_rb_trajectory

kernel_value = _kernels_py.kernel_value
kernel_radial_derivative = _kernels_py.kernel_radial_derivative


def backends():
    """Both backends by name; the compiled entry is ``None`` when not built."""
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None
    return {"python": _kernels_py, "compiled": compiled}
