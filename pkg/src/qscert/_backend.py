"""Simulation-kernel backend selection.

The environment variable ``QSCERT_BACKEND`` picks the kernels:

* ``auto`` (default): jit-compiled kernels when numba imports, else NumPy;
* ``numba``: require the jit backend (error if numba is unavailable);
* ``numpy``: force the pure-NumPy reference backend.

:func:`use` overrides the environment for the current process (handy in
tests and benchmarks).  Both backends consume identical random streams, so
the choice affects speed, not sampled jump chains.
"""

from __future__ import annotations

import os

_OVERRIDE = None
_NUMBA_MODULE = None
_NUMBA_FAILED = False


def use(name):
    """Force a backend ('numba', 'numpy', 'auto', or None to clear)."""
    global _OVERRIDE
    if name not in (None, "auto", "numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    _OVERRIDE = None if name in (None, "auto") else name


def _requested():
    if _OVERRIDE is not None:
        return _OVERRIDE
    return os.environ.get("QSCERT_BACKEND", "auto").strip().lower() or "auto"


def _load_numba():
    global _NUMBA_MODULE, _NUMBA_FAILED
    if _NUMBA_MODULE is None and not _NUMBA_FAILED:
        try:
            from . import _sim_numba

            _NUMBA_MODULE = _sim_numba
        except ImportError:
            _NUMBA_FAILED = True
    return _NUMBA_MODULE


def backend_name():
    """Resolved backend name ('numba' or 'numpy')."""
    req = _requested()
    if req == "numpy":
        return "numpy"
    if req == "numba":
        if _load_numba() is None:
            raise RuntimeError("QSCERT_BACKEND=numba but numba is not importable")
        return "numba"
    if req != "auto":
        raise ValueError(f"unknown QSCERT_BACKEND value {req!r}")
    return "numba" if _load_numba() is not None else "numpy"


def kernels():
    """The active kernel module (see backend_name)."""
    if backend_name() == "numba":
        return _NUMBA_MODULE
    from . import _sim_numpy

    return _sim_numpy
