"""Quadrature kernel backends.

The dense matrix of the displacement integral operator costs O(n^2 * order)
kernel evaluations and dominates inversion runtime, so it lives behind a
compiled Cython core with a NumPy fallback carrying the identical interface.
Set TUBEFLOOD_NO_EXTENSION=1 to force the fallback.
"""

import os

if os.environ.get("TUBEFLOOD_NO_EXTENSION"):
    from . import _ref as _impl
else:
    try:
        from . import _fast as _impl
    except ImportError:
        from . import _ref as _impl

t_matrix = _impl.t_matrix
BACKEND = _impl.BACKEND
