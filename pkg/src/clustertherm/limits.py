"""Resource caps, overridable through environment variables.

CLUSTERTHERM_BRUTE_FORCE_CAP   max spins for exhaustive thermal sums (24)
CLUSTERTHERM_DENSE_CAP         max qubits for dense state vectors (26)
CLUSTERTHERM_OVERFLOW_CAP      max |beta * J| accepted by deformations (300)
CLUSTERTHERM_EIGEN_DIM_CAP     max Hilbert-space dimension for ground analysis (2**24)
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from .errors import InputError

_DEFAULTS = {
    "BRUTE_FORCE_CAP": 24,
    "DENSE_CAP": 26,
    "OVERFLOW_CAP": 300.0,
    "EIGEN_DIM_CAP": 2**24,
}

DENSE_EIGEN_CAP = 2**13
PARTIAL_TRACE_CAP = 12


def _read(name: str):
    default = _DEFAULTS[name]
    raw = os.environ.get(f"CLUSTERTHERM_{name}")
    if raw is None:
        return default
    try:
        return type(default)(raw)
    except ValueError as exc:
        raise InputError(f"CLUSTERTHERM_{name}={raw!r} is not a valid {type(default).__name__}") from exc


def brute_force_cap() -> int:
    return _read("BRUTE_FORCE_CAP")


def dense_cap() -> int:
    return _read("DENSE_CAP")


def overflow_cap() -> float:
    return _read("OVERFLOW_CAP")


def eigen_dim_cap() -> int:
    return _read("EIGEN_DIM_CAP")


@contextmanager
def override(**caps):
    """Temporarily set caps, e.g. ``override(dense_cap=20)``; ``None`` values are ignored."""
    saved = {}
    try:
        for key, value in caps.items():
            if value is None:
                continue
            name = key.upper()
            if name not in _DEFAULTS:
                raise InputError(f"unknown cap {key!r}")
            env = f"CLUSTERTHERM_{name}"
            saved[env] = os.environ.get(env)
            os.environ[env] = str(value)
        yield
    finally:
        for env, old in saved.items():
            if old is None:
                os.environ.pop(env, None)
            else:
                os.environ[env] = old
