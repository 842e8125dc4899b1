"""Kernel backend selection: compiled extension with pure-Python fallback.

The hot kernels (neighborhood growth, tensor filtering, vertex relaxation,
point-to-surface distances) exist twice with identical interfaces: a Cython
extension (``normalvote._kernels``) and a vectorized NumPy implementation
(``normalvote._kernels_py``). The compiled module is preferred when it
imported successfully; set ``NORMALVOTE_BACKEND=python`` or ``cython`` to
force one. ``benchmarks/bench_backends.py`` compares the two.
"""

import contextlib
import os
import time

from . import _kernels_py

try:
    from . import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

_BACKENDS = {"python": _kernels_py}
if _kernels_cy is not None:
    _BACKENDS["cython"] = _kernels_cy

_SCHEME_IDS = {"combinatorial": 0, "geometric": 1, "geodesic": 2}

_env = os.environ.get("NORMALVOTE_BACKEND", "").strip().lower()
if _env and _env not in _BACKENDS:
    raise ImportError(
        f"NORMALVOTE_BACKEND={_env!r} is not available; "
        f"choose one of {sorted(_BACKENDS)}")
_active = _env or ("cython" if _kernels_cy is not None else "python")


def active_backend():
    """Name of the backend currently in use."""
    return _active


def available_backends():
    return sorted(_BACKENDS)


def kernels():
    """The active kernel module."""
    return _BACKENDS[_active]


def use_backend(name):
    """Switch backends (used by tests and benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {sorted(_BACKENDS)}")
    _active = name


def scheme_id(kind):
    return _SCHEME_IDS[kind]


@contextlib.contextmanager
def phase_timer(timings, phase):
    """Accumulate wall-clock seconds for a pipeline phase; no-op if None."""
    if timings is None:
        yield
        return
    t0 = time.perf_counter()
    try:
        yield
    finally:
        timings[phase] = timings.get(phase, 0.0) + (time.perf_counter() - t0)
