"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``BECPHASE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from becphase import _kernels_py

if os.environ.get("BECPHASE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from becphase import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

OK = _kernels_py.OK
NO_DENSITY = _kernels_py.NO_DENSITY
ZERO_PROBABILITY = _kernels_py.ZERO_PROBABILITY

exact_branch = _impl.exact_branch
exact_sequence = _impl.exact_sequence
lambda_sequence = _impl.lambda_sequence

BACKENDS = {"python": _kernels_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl
else:
    try:
        from becphase import _kernels as _compiled
        BACKENDS["cython"] = _compiled
    except ImportError:
        pass
