"""Numba switch for the hot kernels.

Every kernel module keeps two implementations: a loop version compiled with
``numba.njit`` and a vectorised numpy version. ``USE_JIT`` picks one at import
time. Set ``WILLMORE_ILP_DISABLE_JIT=1`` to force the numpy path (useful for
debugging and for machines without numba).
"""

import os

_FLAG = os.environ.get("WILLMORE_ILP_DISABLE_JIT", "0").strip().lower()
JIT_DISABLED = _FLAG not in ("", "0", "false", "no", "off")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_JIT = HAVE_NUMBA and not JIT_DISABLED


def njit(func):
    """Compile ``func`` in nopython mode when numba is present.

    The undecorated function is kept on ``.py_func`` either way so tests can
    run the interpreted loop against the compiled one.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True)(func)


def pick(jit_impl, numpy_impl):
    return jit_impl if USE_JIT else numpy_impl
