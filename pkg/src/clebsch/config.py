"""Experiment configuration: ``key = value`` text files.

Blank lines and ``#`` comments are ignored. Each key may appear once except
``particle``, which is repeated once per particle as ``q1,...;p1,...``.
Every error carries the offending line number (or 0 for whole-file problems
such as a missing required field).

Keys::

    experiment       rigid-body | rigid-body-potential | epdiff-1d | convergence | closure-check
    dt               step size (default 0.1)
    t_final          end time (default 10)
    scheme           cayley-clebsch | euler-a | euler-b | rk4-ref | implicit-midpoint
    inertia          three principal moments (default 0.5,0.6,1)
    omega0           three angular velocity components, or ``random``
    potential        nine entries of F, row-major, for V(Q) = <F, Q>
    kernel           peaked | gaussian
    alpha            kernel length scale (default 1)
    particle         q;p (repeatable)
    dt_list          descending step sizes for the convergence command
    problem          rigid-body | epdiff-1d (convergence only)
    output_path      directory for run output (default ``out``)
    solver_tol       fixed-point tolerance (default 1e-13)
    solver_max_iter  fixed-point iteration cap (default 50)
    seed             integer seed for ``omega0 = random``; CLEBSCH_SEED overrides
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields

import numpy as np

from .exceptions import ConfigError

EXPERIMENTS = ("rigid-body", "rigid-body-potential", "epdiff-1d", "convergence", "closure-check")
SCHEMES = ("cayley-clebsch", "euler-a", "euler-b", "rk4-ref", "implicit-midpoint")
KERNELS = ("peaked", "gaussian")

DEFAULT_SCHEME = {
    "rigid-body": "cayley-clebsch",
    "rigid-body-potential": "rk4-ref",
    "epdiff-1d": "implicit-midpoint",
    "convergence": "cayley-clebsch",
    "closure-check": "cayley-clebsch",
}

# which schemes each experiment can run
ALLOWED_SCHEMES = {
    "rigid-body": ("cayley-clebsch", "rk4-ref"),
    "rigid-body-potential": ("rk4-ref",),
    "epdiff-1d": ("euler-a", "euler-b", "implicit-midpoint", "rk4-ref"),
    "convergence": SCHEMES,
    "closure-check": SCHEMES,
}

DEFAULT_OMEGA0 = tuple(float(x) for x in np.ones(3) / math.sqrt(3.0))
DEFAULT_POTENTIAL = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)

SEED_ENV = "CLEBSCH_SEED"


@dataclass(frozen=True)
class Particle:
    q: tuple
    p: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "rigid-body"
    dt: float = 0.1
    t_final: float = 10.0
    scheme: str = "cayley-clebsch"
    inertia: tuple = (0.5, 0.6, 1.0)
    omega0: tuple | str = DEFAULT_OMEGA0
    potential: tuple = DEFAULT_POTENTIAL
    kernel: str = "peaked"
    alpha: float = 1.0
    particles: tuple = ()
    dt_list: tuple = ()
    problem: str = ""
    output_path: str = "out"
    solver_tol: float = 1e-13
    solver_max_iter: int = 50
    seed: int | None = None

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    def resolved_seed(self, environ=None):
        env = os.environ if environ is None else environ
        raw = env.get(SEED_ENV, "").strip()
        if raw:
            try:
                return int(raw)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be a decimal integer, got {raw!r}", key=SEED_ENV) from None
        return 0 if self.seed is None else self.seed

    def initial_omega(self, environ=None):
        """``omega0`` as a vector; ``random`` draws a unit vector from the seed."""
        if self.omega0 != "random":
            return np.array(self.omega0, dtype=float)
        rng = np.random.default_rng(self.resolved_seed(environ))
        v = rng.standard_normal(3)
        return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# value parsers; each returns the parsed value or raises ValueError


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _positive(s):
    v = _float(s)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _int_pos(s):
    v = int(s)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def _floats(s, n=None):
    parts = [p.strip() for p in s.split(",")]
    if any(p == "" for p in parts):
        raise ValueError("empty entry in list")
    vals = tuple(_float(p) for p in parts)
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _choice(options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s

    return parse


def _inertia(s):
    vals = _floats(s, 3)
    if min(vals) <= 0:
        raise ValueError("principal moments must be positive")
    return vals


def _omega(s):
    return "random" if s == "random" else _floats(s, 3)


def _particle(s):
    if s.count(";") != 1:
        raise ValueError("expected q1,...;p1,...")
    q, p = (_floats(part) for part in s.split(";"))
    if len(q) != len(p):
        raise ValueError("q and p must have the same dimension")
    return Particle(q, p)


def _dt_list(s):
    vals = _floats(s)
    if min(vals) <= 0:
        raise ValueError("step sizes must be positive")
    return vals


def _seed(s):
    return int(s)


def _nonempty(s):
    if not s:
        raise ValueError("must not be empty")
    return s


PARSERS = {
    "experiment": _choice(EXPERIMENTS),
    "dt": _positive,
    "t_final": _positive,
    "scheme": _choice(SCHEMES),
    "inertia": _inertia,
    "omega0": _omega,
    "potential": lambda s: _floats(s, 9),
    "kernel": _choice(KERNELS),
    "alpha": _positive,
    "particle": _particle,
    "dt_list": _dt_list,
    "problem": _choice(("rigid-body", "epdiff-1d")),
    "output_path": _nonempty,
    "solver_tol": _positive,
    "solver_max_iter": _int_pos,
    "seed": _seed,
}


def parse_config(text, experiment=None, default_experiment=None):
    """Parse and validate configuration text.

    ``experiment`` (from the command line) is used when the file has no
    ``experiment`` key and must agree with it otherwise.
    ``default_experiment`` only fills in a missing key.
    """
    values = {}
    lines = {}
    particles = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        try:
            parsed = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno, key=key) from None
        if key == "particle":
            particles.append(parsed)
            lines.setdefault(key, lineno)
            continue
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", line=lineno, key=key)
        values[key] = parsed
        lines[key] = lineno

    if experiment is not None:
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}", key="experiment")
        if values.get("experiment", experiment) != experiment:
            raise ConfigError(
                f"experiment {values['experiment']!r} in file conflicts with {experiment!r}",
                line=lines["experiment"],
                key="experiment",
            )
        values["experiment"] = experiment
    if "experiment" not in values and default_experiment is not None:
        values["experiment"] = default_experiment
    if "experiment" not in values:
        raise ConfigError("missing required field 'experiment'", key="experiment")
    exp = values["experiment"]
    values.setdefault("scheme", DEFAULT_SCHEME[exp])
    if particles:
        values["particles"] = tuple(particles)
    cfg = ExperimentConfig(**values)
    _validate(cfg, lines)
    return cfg


def _validate(cfg, lines):
    def fail(msg, key):
        raise ConfigError(msg, line=lines.get(key, 0), key=key)

    if cfg.experiment == "closure-check":
        return
    if cfg.scheme not in ALLOWED_SCHEMES[cfg.experiment]:
        fail(
            f"scheme {cfg.scheme!r} not available for {cfg.experiment}; "
            f"use one of {', '.join(ALLOWED_SCHEMES[cfg.experiment])}",
            "scheme",
        )
    if cfg.experiment != "convergence":
        if not cfg.t_final > cfg.dt:
            fail(f"t_final ({cfg.t_final}) must exceed dt ({cfg.dt})", "t_final" if "t_final" in lines else "dt")
        steps = cfg.t_final / cfg.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            fail(f"t_final ({cfg.t_final}) must be a whole number of steps of dt ({cfg.dt})", "t_final" if "t_final" in lines else "dt")
    if cfg.experiment == "epdiff-1d" or (cfg.experiment == "convergence" and cfg.problem == "epdiff-1d"):
        if not cfg.particles:
            fail("missing required field 'particle' (at least one)", "particle")
        if any(len(p.q) != 1 for p in cfg.particles):
            fail("epdiff-1d particles must be one-dimensional", "particle")
    if cfg.dt_list:
        _check_dt_list(cfg.dt_list, lines.get("dt_list", 0))


def _check_dt_list(dts, line=0):
    if len(dts) < 3:
        raise ConfigError(f"dt_list needs at least 3 step sizes, got {len(dts)}", line=line, key="dt_list")
    for a, b in zip(dts, dts[1:]):
        if abs(a / b - 2.0) > 1e-9:
            raise ConfigError("dt_list must halve successively (descending by a factor 2)", line=line, key="dt_list")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def serialize(cfg):
    """Config text that :func:`parse_config` reads back to an equal config."""
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "particles":
            out.extend(f"particle = {_fmt(p.q)};{_fmt(p.p)}" for p in v)
        elif f.name in ("dt_list",) and not v:
            continue
        elif f.name == "problem" and not v:
            continue
        elif f.name == "seed" and v is None:
            continue
        else:
            out.append(f"{f.name} = {_fmt(v)}")
    return "\n".join(out) + "\n"


__all__ = [
    "ExperimentConfig",
    "Particle",
    "parse_config",
    "serialize",
    "EXPERIMENTS",
    "SCHEMES",
]
