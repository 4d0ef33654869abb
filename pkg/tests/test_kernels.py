import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauberkit import _kernels_py, kernels

compiled = pytest.importorskip("tauberkit._kernels", reason="compiled extension not built")

alphas = st.floats(0.01, 0.9999)


def reference_dense(values, alpha):
    return math.fsum(v * alpha**i for i, v in enumerate(values))


def test_backend_selected():
    assert kernels.BACKEND == "compiled"


@given(st.lists(st.floats(-10, 10), max_size=300), alphas)
def test_dense_backends_agree(values, alpha):
    arr = np.array(values, dtype=np.float64)
    a = compiled.dense_abel_sum(arr, alpha)
    b = _kernels_py.dense_abel_sum(arr, alpha)
    scale = 1 + sum(abs(v) for v in values)
    assert abs(a - b) <= 1e-12 * scale
    assert abs(a - reference_dense(values, alpha)) <= 1e-12 * scale


@given(st.lists(st.integers(1, 5000), max_size=30, unique=True), st.integers(0, 1), alphas,
       st.integers(0, 6000))
def test_block_backends_agree(bounds, initial, alpha, n_terms):
    bounds = np.array(sorted(bounds), dtype=np.int64)
    a = compiled.block_abel_sum(bounds, initial, alpha, n_terms)
    b = _kernels_py.block_abel_sum(bounds, initial, alpha, n_terms)
    assert abs(a - b) <= 1e-12 * (1 + 1 / (1 - alpha))


def test_block_sum_matches_dense():
    bounds = [1, 3, 9, 33, 153]
    u = np.zeros(200)
    value, start = 0, 0
    for b in bounds + [200]:
        u[start:b] = value
        start, value = b, 1 - value
    for alpha in (0.3, 0.9, 0.99):
        dense = kernels.dense_abel_sum(u, alpha)
        block = kernels.block_abel_sum(bounds, 0, alpha, 200)
        assert dense == pytest.approx(block, rel=1e-13)


def test_wrapper_clips_huge_boundaries():
    huge = [5, 10**30]
    assert kernels.block_abel_sum(huge, 0, 0.5, 64) == pytest.approx(_kernels_py.block_abel_sum([5], 0, 0.5, 64))


def test_empty_inputs():
    assert kernels.dense_abel_sum([], 0.5) == 0.0
    assert kernels.block_abel_sum([], 0, 0.5, 100) == 0.0
    assert kernels.block_abel_sum([], 1, 0.5, 0) == 0.0
