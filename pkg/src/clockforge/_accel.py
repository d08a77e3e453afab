"""Optional numba acceleration.

Hot kernels are written twice: an ``@njit`` loop version and a vectorised
numpy version. ``USE_NUMBA`` picks which one the public API calls. Set
``CLOCKFORGE_DISABLE_NUMBA=1`` to force the numpy path (numba missing has
the same effect).
"""

from __future__ import annotations

import os

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator


def _env_disabled() -> bool:
    return os.environ.get("CLOCKFORGE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = NUMBA_AVAILABLE and not _env_disabled()


def jit(func):
    """Compile ``func`` with nopython mode and on-disk caching."""
    return njit(cache=True, nogil=True)(func)


def pick(numba_impl, numpy_impl):
    """Return the implementation selected by ``USE_NUMBA``."""
    return numba_impl if USE_NUMBA else numpy_impl
