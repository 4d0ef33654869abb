"""Pure-Python (numpy) versions of the dense Abel partial sums.

Same contracts as the compiled ``_kernels`` module; selected by
:mod:`tauberkit.kernels` when the extension is not built.
"""

import math

import numpy as np


def _powers(alpha, n_terms):
    p = np.empty(n_terms, dtype=np.float64)
    if n_terms:
        p[0] = 1.0
        if n_terms > 1:
            p[1:] = np.cumprod(np.full(n_terms - 1, alpha))
    return p


def block_abel_sum(bounds, initial, alpha, n_terms):
    """Sum of u_n * alpha**n for n < n_terms, u given by sorted toggle positions."""
    p = _powers(alpha, n_terms)
    pieces = []
    start, value = 0, int(initial)
    for b in bounds:
        b = int(b)
        if b >= n_terms:
            break
        if value:
            pieces.append(p[start:b])
        start, value = b, 1 - value
    if value and start < n_terms:
        pieces.append(p[start:n_terms])
    if not pieces:
        return 0.0
    return math.fsum(np.concatenate(pieces))


def dense_abel_sum(values, alpha):
    """Sum of values[n] * alpha**n."""
    values = np.asarray(values, dtype=np.float64)
    return math.fsum(values * _powers(alpha, len(values)))
