"""Selection between numba-compiled kernels and the pure-numpy path.

Set ``KERRQED_DISABLE_NUMBA=1`` to force the numpy implementations (also used
automatically when numba is not importable).
"""
import os

ENV_FLAG = "KERRQED_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(ENV_FLAG, "").strip() not in ("1", "true", "yes")


def njit(func):
    """``numba.njit(cache=True)`` when numba is available, else the plain function."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
