"""Numba switch.

Hot kernels are written once as plain Python loops and compiled with
``numba.njit`` when numba is importable and ``ODDSPROB_NO_NUMBA`` is unset.
Every kernel also has a vectorised numpy twin in :mod:`oddsprob.kernels`;
the dispatcher picks one at import time.
"""
from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled() -> bool:
    return os.environ.get("ODDSPROB_NO_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships in the dev environment
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def njit(func):
    """Compile ``func`` in nopython mode if numba is available at all.

    The compiled object is only *dispatched to* when ``USE_NUMBA`` is true,
    but compiling lazily keeps both paths importable for benchmarks and tests.
    """
    if not HAVE_NUMBA:
        return func
    return _numba.njit(cache=True, nogil=True)(func)
