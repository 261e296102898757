"""Hot matching kernels with a numba fast path and a pure-numpy fallback.

Backend selection, decided once at import:

  VIDEREX_KERNELS=numba   require numba (ImportError if missing)
  VIDEREX_KERNELS=numpy   force the pure-numpy implementations
  unset / auto            numba when importable, numpy otherwise

All kernels take C-contiguous float64 arrays and return raw sums of squared
pixel differences; callers apply the sqrt / pixel-count normalization.
"""

import os

_choice = os.environ.get("VIDEREX_KERNELS", "auto").lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"VIDEREX_KERNELS must be auto|numba|numpy, got {_choice!r}")

if _choice == "numpy":
    from . import _numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from . import _numpy as _impl
        BACKEND = "numpy"

sum_sq_diff = _impl.sum_sq_diff
batch_sum_sq_diff = _impl.batch_sum_sq_diff
ridf_sum_sq = _impl.ridf_sum_sq

__all__ = ["BACKEND", "sum_sq_diff", "batch_sum_sq_diff", "ridf_sum_sq"]
