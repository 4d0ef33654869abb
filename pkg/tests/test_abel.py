import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauberkit import abel
from tauberkit.abel import LogAlpha, alpha_pow, closed_form, eval_closed, eval_naive, g_transform
from tauberkit.bignum import Ball, dsum, factorial
from tauberkit.seqcore import (
    RealSequence,
    alternating,
    constant,
    example1,
    example1_majorant,
    example2,
    negate,
    random_block_sequence,
)

BITS = 256


def dense_oracle(s, alpha: float) -> float:
    """(1-alpha) * sum u_n alpha**n by plain float summation with math.fsum."""
    n = int(math.log(1e-18) / math.log(alpha)) + 1
    u = s.dense(n)
    return (1 - alpha) * math.fsum(alpha**i for i in range(n) if u[i])


def test_alpha_pow_examples():
    half = LogAlpha.exact(1)
    assert alpha_pow(half, 2).value.contains(Fraction(1, 4))
    assert alpha_pow(half, 2).value.rad < Fraction(1, 2**250)
    assert alpha_pow(LogAlpha.exact(Fraction(1, 7)), 0).value == Ball.exact(1)


def test_alpha_pow_underflow():
    p = alpha_pow(LogAlpha.exact(1), 10**6)
    assert p.underflow and p.value.mid == 0
    assert p.value.rad == Fraction(1, 2 ** (BITS + 64))


@pytest.mark.parametrize("k", [3, 8, 14])
def test_alpha_pow_dyadic_factorial(k):
    a = abel.schedule("dyadic-factorial", [k])[0]
    mpmath.mp.prec = BITS + 40
    for n in range(1, k + 1):
        p = alpha_pow(a, factorial(n)).value
        exact = mpmath.power(2, -mpmath.mpf(factorial(n)) / factorial(k))
        assert abs(mpmath.mpf(p.mid.numerator) / p.mid.denominator - exact) <= mpmath.mpf(p.rad.numerator) / p.rad.denominator


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.fractions(Fraction(1, 10**8), Fraction(1, 10)))
def test_alpha_pow_homomorphism(e1, e2, t):
    a = LogAlpha.exact(t, 128)
    lhs = alpha_pow(a, e1 + e2).value
    rhs = alpha_pow(a, e1).value * alpha_pow(a, e2).value
    assert lhs.overlaps(rhs)


def test_closed_form_terms():
    assert closed_form(example1()).terms(4) == [(1, 1), (-1, 3), (1, 9), (-1, 33)]
    assert [b for _, b in closed_form(example2()).terms(6)] == [0, 1, 4, 6, 12, 24]
    assert closed_form(constant(1)).terms(5) == [(1, 0)]


def test_g_transform_structure():
    cf = closed_form(example2())
    assert g_transform(cf).terms(10) == closed_form(negate(example2())).terms(10)
    assert g_transform(g_transform(cf)).terms(10) == cf.terms(10)
    assert g_transform(closed_form(constant(0))).terms(3) == [(1, 0)]
    # g of example2: pairs alpha**(n!) - alpha**(2 n!)
    assert [b for _, b in g_transform(cf).terms(6)] == [1, 4, 6, 12, 24, 48]


def test_eval_closed_examples():
    for t in (Fraction(1, 3), Fraction(1, 1000)):
        assert eval_closed(closed_form(constant(1)), LogAlpha.exact(t)).contains(1)
    v = eval_closed(closed_form(example2()), LogAlpha.exact(1))
    assert abs(float(v.mid) - 0.547) < 5e-4
    assert v.overlaps(eval_naive(example2(), Fraction(1, 2)))
    tiny = eval_closed(closed_form(example1()), LogAlpha.exact(80))
    assert tiny.hi < Fraction(1, 2**70)


def test_g_at_half():
    g = eval_closed(g_transform(closed_form(example2())), LogAlpha.exact(1))
    # the n=1 and n=2 pairs share the boundary 2, leaving 1/2 - 1/16 + 1/64 - ...
    expected = Fraction(1, 2) - Fraction(1, 16) + Fraction(1, 64) - Fraction(1, 2**12) + Fraction(1, 2**24)
    assert g.contains(expected, Fraction(1, 2**47))


def test_eval_closed_rejects_malformed():
    bad = abel.AbelClosedForm(lambda: iter([0, 5, 5]))
    with pytest.raises(ValueError):
        eval_closed(bad, LogAlpha.exact(Fraction(1, 100)))
    with pytest.raises(ValueError):
        eval_closed(closed_form(example1()), LogAlpha.exact(1), tol=0)


def test_eval_naive_examples():
    assert eval_naive(constant(1), Fraction(9, 10)).contains(1)
    assert eval_naive(alternating(), Fraction(1, 2)).contains(Fraction(2, 3))
    with pytest.raises(ValueError):
        eval_naive(RealSequence(lambda n: Fraction(1)), Fraction(1, 2))
    with pytest.raises(ValueError):
        eval_naive(constant(1), Fraction(1))


def test_exact_periodic_abel():
    assert abel.exact_periodic_abel([1, 0], Fraction(1, 2)) == Fraction(2, 3)
    a = Fraction(3, 5)
    assert abel.exact_periodic_abel([1, 0], a) == 1 / (1 + a)


@pytest.mark.parametrize("make", [example1, example2, alternating, lambda: negate(example2())])
def test_evaluators_agree(make):
    s = make()
    cf = closed_form(s)
    rng = random.Random(5)
    alphas = sorted({Fraction(rng.randint(1, 99), 100) for _ in range(30)})[:20]
    for alpha in alphas:
        c = eval_closed(cf, LogAlpha.from_alpha(alpha))
        n = eval_naive(s, alpha)
        assert c.overlaps(n), (alpha, c, n)
        assert abs(float(c.mid) - dense_oracle(s, float(alpha))) < 1e-12


@given(st.fractions(Fraction(1, 10**6), Fraction(3)))
def test_complement(t):
    a = LogAlpha.exact(t)
    for s in (example1(), example2()):
        cf = closed_form(s)
        assert (eval_closed(cf, a) + eval_closed(g_transform(cf), a)).contains(1)


@given(st.integers(1, 4), st.fractions(Fraction(1, 10**5), Fraction(2)))
def test_majorization(k, t):
    a = LogAlpha.exact(t)
    f = eval_closed(closed_form(example1()), a)
    fk = eval_closed(closed_form(example1_majorant(k)), a)
    assert f.mid <= fk.mid + f.rad + fk.rad
    # majorant closed form: 1 - alpha**D(2k) + alpha**D(2k+1)
    explicit = 1 - alpha_pow(a, dsum(2 * k)).value + alpha_pow(a, dsum(2 * k + 1)).value
    assert fk.overlaps(explicit)


def test_lemma1_examples():
    a, v = abel.lemma1_critical(1, 2)
    assert a.t.contains(1) and v.contains(Fraction(1, 4))
    a, v = abel.lemma1_critical(1, 4)
    mpmath.mp.dps = 50
    alpha = mpmath.power(mpmath.mpf(1) / 4, mpmath.mpf(1) / 3)
    expected = alpha - alpha**4
    assert abs(float(v.mid) - float(expected)) < 1e-15
    assert abs(a.alpha - float(alpha)) < 1e-15
    with pytest.raises(ValueError):
        abel.lemma1_critical(4, 4)


def test_lemma1_beats_grid():
    grid = [i / 10_000 for i in range(1, 10_000)]
    rng = random.Random(2)
    pairs = [(1, 2), (1, 64), (63, 64)] + [tuple(sorted(rng.sample(range(1, 65), 2))) for _ in range(20)]
    for L, M in pairs:
        _, v = abel.lemma1_critical(L, M)
        best = max(x**L - x**M for x in grid)
        assert float(v.mid) >= best - 1e-8


def test_lemma1_max_tends_to_one():
    vals = [float(abel.lemma1_critical(1, 10**j)[1].mid) for j in range(1, 8)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.99


def test_schedule_examples():
    assert abel.schedule("dyadic-factorial", [1])[0].t.contains(1)
    b4 = abel.schedule("beta", [4])[0]
    assert b4.t == Ball.exact(Fraction(1, 12))
    b5 = abel.schedule("beta", [5])[0]
    mpmath.mp.prec = 300
    ref = 1 / (24 * mpmath.sqrt(5))
    assert abs(mpmath.mpf(b5.t.mid.numerator) / b5.t.mid.denominator - ref) < mpmath.mpf(2) ** -250
    ts = [a.t.mid for a in abel.schedule("beta", range(2, 12))]
    assert all(x > y for x, y in zip(ts, ts[1:]))
    with pytest.raises(ValueError):
        abel.schedule("beta", [])
    with pytest.raises(ValueError):
        abel.schedule("lemma1-pairs", [1])
    with pytest.raises(ValueError):
        abel.schedule("nope", [1])


def test_block_pairs():
    ones = abel.block_pairs(example1(), 1)
    zeros = abel.block_pairs(example1(), 0)
    assert [ones(k) for k in (1, 2, 3)] == [(1, 3), (9, 33), (153, 873)]
    assert [zeros(k) for k in (1, 2)] == [(3, 9), (33, 153)]
    with pytest.raises(IndexError):
        abel.block_pairs(constant(1), 1)(1)


def test_lemma1_schedule_on_example1_trends():
    cf = closed_form(example1())
    ks = range(2, 11)
    lo = abel.schedule("lemma1-pairs", ks, abel.block_pairs(example1(), 0))
    hi = abel.schedule("lemma1-pairs", ks, abel.block_pairs(example1(), 1))
    est = abel.abel_extremes(cf, {"lo": lo, "hi": hi}, ks={"lo": list(ks), "hi": list(ks)})
    assert est.trend == {"lo": "decreasing", "hi": "increasing"}
    assert est.lower.mid < Fraction(1, 5) and est.upper.mid > Fraction(4, 5)


def test_lemma1_ii_witness():
    cf = closed_form(example1())
    pairs = abel.block_pairs(example1(), 1)
    for k in range(3, 9):
        L, M = pairs(k)
        a, _ = abel.lemma1_critical(L, M)
        f = eval_closed(cf, a)
        assert f.lo > 1 - 2 * Fraction(L, M) * math.log2(M / L)


def test_abel_extremes_example2_dyadic():
    ks = list(range(2, 13))
    est = abel.abel_extremes(closed_form(example2()), abel.schedule("dyadic-factorial", ks), ks={"schedule": ks})
    track = est.tracks["schedule"]
    assert track.direction() == "increasing"
    assert all(v < Fraction(3, 4) for v in track.values)
    assert track.values[-1] > Fraction(2, 3)


def test_abel_extremes_constant():
    est = abel.abel_extremes(closed_form(constant(1)), abel.schedule("beta", range(2, 8)))
    assert est.lower.contains(1) and est.upper.contains(1)
    with pytest.raises(ValueError):
        abel.abel_extremes(closed_form(constant(1)), {"a": []})


def test_beta_interval_bound_monotone():
    vals = [abel.beta_interval_bound(k) for k in range(4, 17)]
    assert all(a.hi < b.lo for a, b in zip(vals[1:], vals))
    with pytest.raises(ValueError):
        abel.beta_interval_bound(1)


@pytest.mark.parametrize("k", [9])
def test_beta_interval_bound_dominates_grid(k):
    bound = abel.beta_interval_bound(k)
    t_hi = abel.schedule("beta", [k])[0].t.mid
    t_lo = abel.schedule("beta", [k + 1])[0].t.mid
    g = g_transform(closed_form(example2()))
    for i in range(64):
        t = t_lo + (t_hi - t_lo) * Fraction(i, 63)
        a = LogAlpha.exact(t)
        gk = alpha_pow(a, factorial(k)).value - alpha_pow(a, 2 * factorial(k)).value
        rest = eval_closed(g, a) - gk
        assert rest.hi <= bound.lo


def test_random_sequences_evaluators_agree():
    rng = random.Random(8)
    for _ in range(10):
        s = random_block_sequence(rng, 6)
        for alpha in (Fraction(1, 3), Fraction(9, 10), Fraction(99, 100)):
            assert eval_closed(closed_form(s), LogAlpha.from_alpha(alpha)).overlaps(eval_naive(s, alpha))
