"""Kernel backend selection: numba-jitted loops or pure-numpy Python loops.

The hot piecewise-linear kernels in ``_kernels`` are written as plain loops
over float64 arrays so that the exact same source can run either
numba-compiled or interpreted.  The active backend is chosen once at import
time from the environment:

    SUPRELAX_BACKEND=numba   jit the kernels (default when numba imports)
    SUPRELAX_BACKEND=numpy   pure-numpy fallback, no compilation

Both paths produce bit-identical results: the jitted kernels avoid fastmath
and parallel scheduling so the floating-point evaluation order is unchanged.
``benchmarks/compare_backends.py`` times one against the other.
"""

import os

_requested = os.environ.get("SUPRELAX_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"SUPRELAX_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested != "numpy":
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        if _requested == "numba":
            raise
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        # identity decorator, usable bare or with options
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


BACKEND = "numba" if NUMBA_ENABLED else "numpy"
