"""Optional numba acceleration.

Set ``RESTARTKIT_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels. If numba is not importable the numpy path is used regardless.
"""

import os

_FLAG = os.environ.get("RESTARTKIT_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
    "error_model": "numpy",
}


def njit(func):
    """Compile ``func`` with numba, or return it unchanged when disabled."""
    if _numba is None:
        return func
    return _numba.njit(**numba_default)(func)
