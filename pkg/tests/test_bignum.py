from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauberkit.bignum import (
    Ball,
    HPReal,
    dsum,
    exp2_neg,
    factorial,
    factorial_ratio_prev,
    hp_log2_ratio,
    hp_sqrt,
    ln2_fixed,
)


def binary_log2_oracle(M: int, L: int, bits: int) -> Fraction:
    """log2(M/L) by the repeated-squaring bit algorithm on scaled integers.

    Independent of the atanh series used by the library; keeps 2*bits
    working bits so truncation stays far below 2**-bits.
    """
    w = 2 * bits + 32
    k = 0
    while (L << (k + 1)) <= M:
        k += 1
    y = (M << w) // (L << k)  # y in [1, 2) scaled by 2**w
    out = 0
    for _ in range(bits + 8):
        y = (y * y) >> w
        out <<= 1
        if y >= (2 << w):
            y >>= 1
            out |= 1
    return k + Fraction(out, 1 << (bits + 8))


def test_factorial_examples():
    assert factorial(0) == 1
    assert factorial(5) == 120
    assert factorial(10) == 3628800
    with pytest.raises(ValueError):
        factorial(-1)


def test_dsum_examples():
    assert [dsum(k) for k in (1, 3, 4)] == [1, 9, 33]
    with pytest.raises(ValueError):
        dsum(0)


@given(st.integers(0, 200))
def test_factorial_recurrence(n):
    assert factorial(n + 1) == (n + 1) * factorial(n)


@given(st.integers(2, 200))
def test_dsum_differences(k):
    assert dsum(k) - dsum(k - 1) == factorial(k)


def test_factorial_ratio_prev():
    assert factorial_ratio_prev(3) == Fraction(1, 2)
    assert factorial_ratio_prev(4) == Fraction(3, 8)
    vals = [factorial_ratio_prev(n) for n in range(2, 31)]
    # n=2 gives 1/2 as well; strict decrease from n=3 on
    assert all(a > b for a, b in zip(vals[1:], vals[2:]))
    assert all(factorial_ratio_prev(n) < Fraction(2, n) for n in range(4, 31))
    with pytest.raises(ValueError):
        factorial_ratio_prev(1)


def test_hp_sqrt_examples():
    assert hp_sqrt(4, 77).to_fraction() == 2
    assert hp_sqrt(1, 64).to_fraction() == 1
    r = hp_sqrt(2, 128)
    mpmath.mp.dps = 60
    assert mpmath.nstr(mpmath.mpf(r.mant) / 2**128, 30) == mpmath.nstr(mpmath.sqrt(2), 30)


@given(st.integers(1, 10**30), st.integers(64, 300))
def test_hp_sqrt_error(n, bits):
    r = hp_sqrt(n, bits)
    lo, hi = r.mant, r.mant + 1
    assert lo * lo <= n << (2 * bits) < hi * hi


def test_hp_log2_ratio_exact_cases():
    assert hp_log2_ratio(2, 1, 100).to_fraction() == 1
    assert hp_log2_ratio(8, 1, 100).to_fraction() == 3
    with pytest.raises(ValueError):
        hp_log2_ratio(1, 1)
    with pytest.raises(ValueError):
        hp_log2_ratio(3, 0)


def test_hp_log2_3_thirty_digits():
    bits = 128
    got = hp_log2_ratio(3, 1, bits).to_fraction()
    oracle = binary_log2_oracle(3, 1, bits)
    assert abs(got - oracle) <= Fraction(2, 1 << bits)
    mpmath.mp.dps = 60
    ref = mpmath.log(3, 2)
    assert mpmath.nstr(mpmath.mpf(got.numerator) / got.denominator, 30) == mpmath.nstr(ref, 30)


@given(st.integers(1, 10**12), st.integers(1, 10**12), st.sampled_from([64, 128, 256]))
def test_hp_log2_ratio_bound(a, b, bits):
    L, M = min(a, b), max(a, b)
    if L == M:
        M += 1
    got = hp_log2_ratio(M, L, bits).to_fraction()
    oracle = binary_log2_oracle(M, L, bits)
    assert abs(got - oracle) <= Fraction(2, 1 << bits) + Fraction(1, 1 << (bits + 7))


def test_ln2_fixed():
    mpmath.mp.dps = 120
    m, e = ln2_fixed(300)
    assert abs(mpmath.mpf(m) / mpmath.mpf(2) ** 300 - mpmath.log(2)) <= mpmath.mpf(e) / mpmath.mpf(2) ** 300


@given(st.fractions(min_value=0, max_value=200), st.sampled_from([80, 200]))
def test_exp2_neg_within_error(x, w):
    mpmath.mp.prec = w + 64
    mant, err = exp2_neg(x, w)
    exact = mpmath.power(2, -mpmath.mpf(x.numerator) / x.denominator)
    assert abs(mpmath.mpf(mant) / mpmath.mpf(2) ** w - exact) <= mpmath.mpf(err) / mpmath.mpf(2) ** w


@given(st.fractions(max_denominator=10**6), st.fractions(max_denominator=10**6), st.integers(64, 200))
def test_hpreal_ops_match_exact(p, q, bits):
    a, b = HPReal.from_fraction(p, bits), HPReal.from_fraction(q, bits)
    ulp = Fraction(1, 1 << bits)
    # from_fraction rounds down by < 1 ulp; each op adds at most one more
    assert abs((a + b).to_fraction() - (p + q)) < 2 * ulp
    assert abs((a - b).to_fraction() - (p - q)) < 2 * ulp
    bound_mul = ulp * (abs(p) + abs(q) + 2)
    assert abs((a * b).to_fraction() - p * q) <= bound_mul
    assert (a < b) == (a.to_fraction() < b.to_fraction())


def test_ball_arithmetic_encloses():
    x = Ball(Fraction(1, 3), Fraction(1, 100))
    y = Ball(Fraction(-2, 7), Fraction(1, 50))
    for u in (x.lo, x.mid, x.hi):
        for v in (y.lo, y.mid, y.hi):
            assert (x * y).contains(u * v)
            assert (x + y).contains(u + v)
            assert (x - y).contains(u - v)
    with pytest.raises(ValueError):
        Ball(0, -1)
