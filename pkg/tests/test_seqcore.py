import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauberkit import seqcore
from tauberkit.bignum import dsum, factorial
from tauberkit.seqcore import (
    BlockSequence,
    RealSequence,
    SpecError,
    alternating,
    constant,
    example1,
    example1_majorant,
    example2,
    from_spec,
    negate,
    normalize_stream,
    shift,
)

N = 10_000


def brute_example1(n: int) -> int:
    k = 1
    while dsum(2 * k - 1) <= n:
        if n < dsum(2 * k):
            return 1
        k += 1
    return 0


def brute_example2(n: int) -> int:
    k = 1
    while factorial(k) <= n:
        if n < 2 * factorial(k):
            return 0
        k += 1
    return 1


def raw_term(initial, raw, n):
    return initial ^ (sum(1 for b in raw if b <= n) & 1)


def test_example1_terms():
    s = example1()
    assert s.head(5) == [1, 3, 9, 33, 153]
    assert (s.term(0), s.term(1), s.term(9)) == (0, 1, 1)
    assert (s.term(32), s.term(33)) == (1, 0)
    assert seqcore.term(s, 9) == 1


def test_example2_terms():
    s = example2()
    assert s.head(10) == [1, 4, 6, 12, 24, 48, 120, 240, 720, 1440]
    assert (s.term(0), s.term(2), s.term(4)) == (1, 0, 1)
    assert [s.term(n) for n in range(13)] == [1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 1]


def test_examples_match_definitions_exhaustively():
    d1, d2 = example1().dense(N), example2().dense(N)
    assert d1.tolist() == [brute_example1(n) for n in range(N)]
    assert d2.tolist() == [brute_example2(n) for n in range(N)]


def test_raw_and_normalized_streams_agree():
    raw = list(itertools.islice(seqcore._double_factorial_blocks(), 16))
    s = example2()
    for n in range(0, 3000, 7):
        assert s.term(n) == raw_term(1, raw, n)


def test_example2_stream_is_merged_factorials():
    fs = [factorial(k) for k in range(1, 21)]
    merged = sorted(fs + [2 * f for f in fs])
    expected = list(normalize_stream(merged))
    assert example2().head(len(expected)) == expected


def test_huge_index():
    assert constant(1).term(10**30) == 1
    assert example1().term(dsum(29)) == 1
    assert example1().term(dsum(30)) == 0


def test_majorant():
    m = example1_majorant(1)
    assert m.head(5) == [3, 9]
    assert (m.term(0), m.term(3), m.term(9)) == (1, 0, 1)
    base = example1().dense(N)
    for k in range(1, 5):
        assert np.all(example1_majorant(k).dense(N) >= base)
    with pytest.raises(ValueError):
        example1_majorant(0)


def test_negate():
    s = example2()
    assert negate(s).term(0) == 0
    assert negate(negate(s)).dense(500).tolist() == s.dense(500).tolist()
    assert negate(negate(s)).description == s.description
    assert negate(constant(1)).dense(10).tolist() == constant(0).dense(10).tolist()
    assert np.all(negate(s).dense(N) == 1 - s.dense(N))


def test_shift():
    s = example2()
    for k in (0, 1, 3, 5, 100):
        assert shift(s, k).dense(1000).tolist() == s.dense(1000 + k)[k:].tolist()


def test_alternating():
    assert alternating().dense(6).tolist() == [1, 0, 1, 0, 1, 0]


@given(st.lists(st.integers(1, 40), max_size=20), st.integers(0, 1))
def test_normalization_preserves_terms(raw, initial):
    raw = sorted(raw)
    norm = list(normalize_stream(raw))
    assert list(normalize_stream(norm)) == norm
    assert all(a < b for a, b in zip(norm, norm[1:]))
    s = BlockSequence(initial, lambda: iter(raw))
    for n in range(45):
        assert s.term(n) == raw_term(initial, raw, n)


def test_normalization_rejects_bad_streams():
    with pytest.raises(ValueError):
        list(normalize_stream([3, 2]))
    with pytest.raises(ValueError):
        list(normalize_stream([0, 2]))


def test_random_block_sequence_growth():
    rng = random.Random(3)
    for _ in range(20):
        s = random_seq = seqcore.random_block_sequence(rng)
        b = random_seq.head(20)
        assert all(b2 >= 2 * b1 for b1, b2 in zip(b, b[1:]))
        assert s.finite


def test_real_sequence_lower_bound():
    r = RealSequence(lambda n: Fraction(n - 2), Fraction(0))
    assert r.bounded_below
    assert r.term(3) == 1
    with pytest.raises(ValueError):
        r.term(0)
    assert RealSequence.from_block(example2()).term(2) == 0


def test_from_spec_presets():
    assert from_spec({"preset": "example1"}).head(3) == [1, 3, 9]
    assert from_spec({"preset": "negated-example2"}).initial_value == 0
    assert from_spec({"preset": "example1-majorant", "k": 2}).head(3) == [33, 153]
    with pytest.raises(SpecError, match="'k'"):
        from_spec({"preset": "example1-majorant"})
    with pytest.raises(SpecError, match="'preset'"):
        from_spec({"preset": "nope"})


def test_from_spec_explicit():
    s = from_spec({"initial_value": 0, "boundaries": [1, 2]})
    assert s.dense(5).tolist() == [0, 1, 0, 0, 0]
    g = from_spec({"initial_value": 1, "boundaries": [], "generator": "double-factorial-blocks"})
    assert g.head(6) == example2().head(6)
    d = from_spec({"initial_value": 0, "boundaries": ["2"], "generator": "dsum"})
    assert d.head(4) == [1, 2, 3, 9]
    for bad, field in [
        ({"boundaries": [1]}, "initial_value"),
        ({"initial_value": 2}, "initial_value"),
        ({"initial_value": 0, "boundaries": [3, 1]}, "boundaries"),
        ({"initial_value": 0, "boundaries": "1,2"}, "boundaries"),
        ({"initial_value": 0, "generator": "fib"}, "generator"),
    ]:
        with pytest.raises(SpecError, match=field):
            from_spec(bad)
