"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version that performs the same floating point operations in the same order,
so the two paths are bit-identical. Set ``SNRLAB_DISABLE_NUMBA=1`` to force
the numpy path (numba is also skipped silently when it is not importable).
"""

import os

import numpy as np

_FLAG = os.environ.get("SNRLAB_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def fwht_rows_numpy(a):
    """In-place unnormalized Sylvester-ordered WHT of each row of 2-D ``a``."""
    m, n = a.shape
    h = 1
    while h < n:
        v = a.reshape(m, n // (2 * h), 2, h)
        top = v[:, :, 0, :].copy()
        bot = v[:, :, 1, :]
        v[:, :, 0, :] += bot
        # top - bot, written back into the lower half
        np.subtract(top, bot, out=bot)
        h *= 2
    return a


if HAVE_NUMBA:

    @njit(nogil=True, cache=False)
    def fwht_rows_numba(a):
        m, n = a.shape
        h = 1
        while h < n:
            for r in range(m):
                for i in range(0, n, 2 * h):
                    for j in range(i, i + h):
                        u = a[r, j]
                        w = a[r, j + h]
                        a[r, j] = u + w
                        a[r, j + h] = u - w
            h *= 2
        return a

else:  # pragma: no cover
    fwht_rows_numba = None


def fwht_rows(a):
    if USE_NUMBA:
        return fwht_rows_numba(a)
    return fwht_rows_numpy(a)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
