"""Switch between numba-compiled kernels and the pure-numpy fallback.

The choice is made once, at import time, from the ``PINCHFLOW_NUMBA``
environment variable (``0``/``false``/``off`` disables compilation).  When
numba cannot be imported the numpy path is used regardless.
"""

import os

_FLAG = os.environ.get("PINCHFLOW_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
