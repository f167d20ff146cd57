"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``UQREG_KERNELS=python`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("UQREG_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def log_mean_density(code: int, y, params):
    """log((1/K) sum_k p(y_i | theta_k)); ``code`` is the family code."""
    return _impl.log_mean_density(int(code), y, params)


def log_density_pairs(code: int, y, params):
    """log p(y_i | theta_i) for paired rows."""
    return _impl.log_density_pairs(int(code), y, params)
