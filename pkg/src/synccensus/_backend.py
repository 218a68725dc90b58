"""JIT backend selection.

Setting ``SYNCCENSUS_NO_NUMBA=1`` (or running without numba installed)
switches every kernel in :mod:`synccensus._kernels` to the plain-Python
fallback; results are identical, only slower.  ``BACKEND`` reports which
path is active.
"""

import os

_DISABLED = os.environ.get("SYNCCENSUS_NO_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

numba = None
if not _DISABLED:
    try:
        import numba  # noqa: F811
    except ImportError:
        numba = None

if numba is not None:
    BACKEND = "numba"

    def njit(*args, **kwargs):
        return numba.njit(*args, **kwargs)

else:
    BACKEND = "python"

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(func):
            return func

        return deco
