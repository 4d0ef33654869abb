"""Hot-loop kernels: compiled extension when built, numpy fallback otherwise.

Set ``TAUBERKIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("TAUBERKIT_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

__all__ = ["BACKEND", "block_abel_sum", "dense_abel_sum"]


def block_abel_sum(bounds, initial: int, alpha: float, n_terms: int) -> float:
    # boundaries past the horizon never matter; clipping keeps them in int64
    clipped = np.fromiter((min(int(b), n_terms) for b in bounds), dtype=np.int64)
    return _impl.block_abel_sum(clipped, int(initial), float(alpha), int(n_terms))


def dense_abel_sum(values, alpha: float) -> float:
    return _impl.dense_abel_sum(np.ascontiguousarray(values, dtype=np.float64), float(alpha))
