"""Abel means ``f(alpha) = (1 - alpha) * sum u_n alpha**n`` of block sequences.

Discount factors are kept in log form, ``alpha = 2**-t``, so powers with
factorial-size exponents reduce to ``2**-(t*E)`` with ``t*E`` computed
exactly or with a certified radius.  For a 0/1 block sequence the geometric
series telescopes: each one-block ``[a, b)`` contributes ``alpha**a - alpha**b``,
giving an alternating series of strictly decreasing powers
(:class:`AbelClosedForm`).  :func:`eval_naive` sums the defining series
directly in floating point and serves as the independent cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from . import kernels
from .bignum import (
    DEFAULT_BITS,
    GUARD_BITS,
    Ball,
    HPReal,
    dsum,
    exp2_neg,
    factorial,
    hp_log2_ratio,
    hp_sqrt,
    ln2_fixed,
)
from .seqcore import BlockSequence, RealSequence
from .trend import Track

__all__ = [
    "DEFAULT_TOL",
    "AbelClosedForm",
    "AbelEstimate",
    "LogAlpha",
    "Power",
    "abel_extremes",
    "alpha_pow",
    "beta_interval_bound",
    "block_pairs",
    "closed_form",
    "eval_closed",
    "eval_naive",
    "exact_periodic_abel",
    "g_transform",
    "lemma1_critical",
    "schedule",
]

DEFAULT_TOL = Fraction(1, 2**60)
_UNIT_ROUNDOFF = 2.0**-53


@dataclass(frozen=True, order=False)
class LogAlpha:
    """Discount factor ``alpha = 2**-t`` with ``t > 0`` enclosed by a ball.

    ``bits`` is the output precision F: powers are computed with F + 64
    fractional bits and underflow to the ball [0, 2**-(F+64)] once ``t*E > F + 64``.
    """

    t: Ball
    bits: int = DEFAULT_BITS
    label: str = ""

    def __post_init__(self):
        if self.t.lo <= 0:
            raise ValueError("LogAlpha needs t > 0 (alpha < 1)")
        if self.bits < 64:
            raise ValueError("precision must be at least 64 bits")

    @classmethod
    def exact(cls, t, bits: int = DEFAULT_BITS, label: str = "") -> LogAlpha:
        return cls(Ball.exact(Fraction(t)), bits, label)

    @classmethod
    def from_hp(cls, t: HPReal, bits: int = DEFAULT_BITS, ulps: int = 2, label: str = "") -> LogAlpha:
        return cls(t.ball(ulps), bits, label)

    @classmethod
    def from_alpha(cls, alpha, bits: int = DEFAULT_BITS) -> LogAlpha:
        """Convert an exact rational ``0 < alpha < 1`` via ``t = log2(1/alpha)``."""
        alpha = Fraction(alpha)
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        t = hp_log2_ratio(alpha.denominator, alpha.numerator, bits + GUARD_BITS)
        return cls(t.ball(2), bits, f"alpha={alpha}")

    @property
    def alpha(self) -> float:
        return 2.0 ** -float(self.t.mid)

    def alpha_ball(self) -> Ball:
        return alpha_pow(self, 1).value

    def __repr__(self):
        tag = f"{self.label}, " if self.label else ""
        return f"LogAlpha({tag}t={float(self.t.mid):.6g}, alpha={self.alpha:.12g})"


class Power(NamedTuple):
    value: Ball
    underflow: bool


def alpha_pow(a: LogAlpha, E: int) -> Power:
    """``alpha**E = 2**-(t*E)`` with a certified radius."""
    if E < 0:
        raise ValueError("exponent must be non-negative")
    if E == 0:
        return Power(Ball.exact(1), False)
    x_mid = a.t.mid * E
    x_rad = a.t.rad * E
    w = a.bits + GUARD_BITS
    if x_mid - x_rad > w:
        # true value lies in (0, 2**-w); keep the ball honest
        return Power(Ball(0, Fraction(1, 1 << w)), True)
    if x_rad > Fraction(1, 2):
        # exponent too uncertain to say anything beyond alpha**E in [0, 1]
        return Power(Ball(Fraction(1, 2), Fraction(1, 2)), False)
    mant, err = exp2_neg(x_mid, w)
    mid = Fraction(mant, 1 << w)
    eval_rad = Fraction(err, 1 << w)
    # d/dx 2**-x = -ln2 * 2**-x and ln2 * 2**(1/2) < 1
    rad = eval_rad + (mid + eval_rad) * x_rad
    return Power(Ball(mid, rad), False)


@dataclass(frozen=True)
class AbelClosedForm:
    """``f(alpha) = sum_j (-1)**j alpha**b_j`` over strictly increasing exponents ``b_j``.

    ``exponents`` is a zero-argument factory; the series may be infinite.
    """

    exponents: Callable[[], Iterator[int]] = field(repr=False)
    description: str = ""

    def terms(self, count: int) -> list[tuple[int, int]]:
        return [(1 if j % 2 == 0 else -1, b)
                for j, b in enumerate(itertools.islice(self.exponents(), count))]


def closed_form(s: BlockSequence) -> AbelClosedForm:
    """Telescoped form: exponents are 0 (if u_0 = 1) followed by the boundaries."""
    if s.initial_value:
        return AbelClosedForm(lambda: itertools.chain((0,), s.boundaries()), s.description)
    return AbelClosedForm(s.boundaries, s.description)


def g_transform(cf: AbelClosedForm) -> AbelClosedForm:
    """Closed form of ``1 - f``: drop a leading ``alpha**0`` or prepend one."""

    def gen():
        it = cf.exponents()
        first = next(it, None)
        if first is None:
            yield 0
            return
        if first != 0:
            yield 0
            yield first
        yield from it

    desc = cf.description[2:] if cf.description.startswith("1-") else f"1-{cf.description}"
    return AbelClosedForm(gen, desc)


def eval_closed(cf: AbelClosedForm, a: LogAlpha, tol=DEFAULT_TOL) -> Ball:
    """Sum the alternating closed form until the next magnitude drops below ``tol``.

    Magnitudes strictly decrease, so the omitted tail is bounded by the first
    omitted magnitude, which is added to the radius.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    total = Ball.exact(0)
    prev = None
    for j, b in enumerate(cf.exponents()):
        if prev is not None and b <= prev:
            raise ValueError(f"closed form exponents not increasing: {prev} -> {b}")
        prev = b
        p = alpha_pow(a, b)
        if p.underflow:
            # below 2**-(F+64); the alternating tail is no larger
            return total.widen(Fraction(1, 1 << (a.bits + GUARD_BITS)))
        if p.value.hi < tol:
            return total.widen(p.value.hi)
        total = total + p.value if j % 2 == 0 else total - p.value
    return total


def _naive_horizon(alpha: float, tol: float, bound: float) -> int:
    if bound == 0:
        return 0
    return max(1, math.ceil(math.log(tol / bound) / math.log(alpha)))


def eval_naive(s: BlockSequence | RealSequence, alpha, tol=1e-12) -> Ball:
    """Direct partial sum ``(1-alpha) sum_{n<N} u_n alpha**n`` in double precision.

    ``N`` is chosen so the tail ``B * alpha**N`` is at most ``tol``; the radius
    adds that tail to a bound on floating-point error (power recursion and
    compensated summation), ``B * u * (4/(1-alpha) + 2N + 16)`` with ``u = 2**-53``.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    tol = float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(s, BlockSequence):
        bound = 1.0
    else:
        if s.bound is None:
            raise ValueError("naive evaluation needs a declared bound |u_n| <= B")
        bound = float(s.bound)
    af = float(alpha)
    one_minus = float(1 - alpha)
    n_terms = _naive_horizon(af, tol, bound)
    if isinstance(s, BlockSequence):
        bounds = list(itertools.takewhile(lambda b: b < n_terms, s.boundaries()))
        raw = kernels.block_abel_sum(bounds, s.initial_value, af, n_terms)
    else:
        raw = kernels.dense_abel_sum(s.dense(n_terms), af)
    value = one_minus * raw
    rounding = bound * _UNIT_ROUNDOFF * (4.0 / one_minus + 2.0 * n_terms + 16.0)
    tail = bound * af ** n_terms
    return Ball(Fraction(value), Fraction(rounding) + Fraction(tail))


def exact_periodic_abel(pattern: Sequence, alpha) -> Fraction:
    """Exact Abel mean of the periodic sequence repeating ``pattern``.

    ``(1-alpha) * sum_{n<p} u_n alpha**n / (1 - alpha**p)``.
    """
    alpha = Fraction(alpha)
    p = len(pattern)
    if p == 0:
        raise ValueError("empty pattern")
    head = sum(Fraction(u) * alpha**n for n, u in enumerate(pattern))
    return (1 - alpha) * head / (1 - alpha**p)


def _t_bits(bits: int, scale: int) -> int:
    """Absolute precision for t so that t*E keeps ``bits`` bits when E ~ 1/t ~ scale."""
    return bits + max(int(scale).bit_length(), 1) + 8


def lemma1_critical(L: int, M: int, bits: int = DEFAULT_BITS) -> tuple[LogAlpha, Ball]:
    """Maximizer of ``alpha**L - alpha**M`` on [0, 1] and the maximum value.

    ``alpha = (L/M)**(1/(M-L))``, i.e. ``t = log2(M/L) / (M-L)``; the maximum is
    ``(L/M)**(L/(M-L)) - (L/M)**(M/(M-L)) = alpha**L - alpha**M``.
    """
    if not 0 < L < M:
        raise ValueError(f"lemma1_critical needs 0 < L < M, got L={L}, M={M}")
    tb = _t_bits(bits, M)
    log_ratio = hp_log2_ratio(M, L, tb)
    t = log_ratio / (M - L)
    # log error <= 2**(1-tb), divided by M-L >= 1, plus one floor
    a = LogAlpha(Ball(t.to_fraction(), Fraction(3, 1 << tb)), bits, f"lemma1({L},{M})")
    value = alpha_pow(a, L).value - alpha_pow(a, M).value
    return a, value


def block_pairs(s: BlockSequence, value: int) -> Callable[[int], tuple[int, int]]:
    """``k -> (start, end)`` of the k-th (1-based) finite block of ``value`` starting at n >= 1."""
    cache: list[tuple[int, int]] = []
    blocks = (
        (start, end) for start, end, v in s.blocks()
        if v == value and start >= 1 and end is not None
    )

    def pair(k: int) -> tuple[int, int]:
        if k < 1:
            raise ValueError("block index is 1-based")
        while len(cache) < k:
            nxt = next(blocks, None)
            if nxt is None:
                raise IndexError(f"sequence has fewer than {k} such blocks")
            cache.append(nxt)
        return cache[k - 1]

    return pair


def _beta_alpha(k: int, bits: int) -> LogAlpha:
    """beta_k = 2**-(1/((k-1)! sqrt k))."""
    fk = factorial(k - 1)
    r = math.isqrt(k)
    if r * r == k:
        return LogAlpha.exact(Fraction(1, fk * r), bits, f"beta({k})")
    tb = _t_bits(bits, fk * (r + 1))
    root = hp_sqrt(k, tb)
    # t = 2**(2 tb) / ((k-1)! * root_mant) / 2**tb; sqrt error < 2**-tb keeps t within 2 ulps
    t_mant = (1 << (2 * tb)) // (fk * root.mant)
    return LogAlpha(Ball(Fraction(t_mant, 1 << tb), Fraction(3, 1 << tb)), bits, f"beta({k})")


def schedule(kind: str, ks: Iterable[int], pairs: Callable[[int], tuple[int, int]] | None = None,
             bits: int = DEFAULT_BITS) -> list[LogAlpha]:
    """Discount factors approaching 1 along ``ks``.

    ``dyadic-factorial``: ``2**-(1/k!)``; ``beta``: ``2**-(1/((k-1)! sqrt k))``;
    ``lemma1-pairs``: the critical point of ``alpha**L - alpha**M`` for
    ``(L, M) = pairs(k)``.
    """
    ks = list(ks)
    if not ks:
        raise ValueError("empty schedule range")
    if kind == "dyadic-factorial":
        return [LogAlpha.exact(Fraction(1, factorial(k)), bits, f"dyadic({k})") for k in ks]
    if kind == "beta":
        return [_beta_alpha(k, bits) for k in ks]
    if kind == "lemma1-pairs":
        if pairs is None:
            raise ValueError("lemma1-pairs needs an exponent-pair generator")
        out = []
        for k in ks:
            L, M = pairs(k)
            a, _ = lemma1_critical(L, M, bits)
            out.append(LogAlpha(a.t, bits, f"lemma1[{k}]({L},{M})"))
        return out
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass
class AbelEstimate:
    """Tail-window extremes of f along one or more schedules."""

    lower: Ball
    upper: Ball
    tracks: dict[str, Track] = field(repr=False)
    description: str = ""

    @property
    def trend(self) -> dict[str, str]:
        return {name: tr.direction() for name, tr in self.tracks.items()}


def abel_extremes(cf: AbelClosedForm, schedules: dict[str, Sequence[LogAlpha]] | Sequence[LogAlpha],
                  tol=DEFAULT_TOL, ks: dict[str, Sequence[int]] | None = None) -> AbelEstimate:
    """Evaluate f along every schedule and take min/max over each schedule's last half."""
    if not isinstance(schedules, dict):
        schedules = {"schedule": list(schedules)}
    if not any(schedules.values()):
        raise ValueError("at least one schedule must be non-empty")
    tracks: dict[str, Track] = {}
    window: list[Ball] = []
    for name, points in schedules.items():
        track = Track()
        idx = ks[name] if ks and name in ks else range(len(points))
        for k, a in zip(idx, points):
            v = eval_closed(cf, a, tol)
            track.append(k, v.mid, v.rad)
        tracks[name] = track
        tail = track.tail()
        window.extend(Ball(m, r) for m, r in zip(tail.values, tail.radii))
    lower = min(window, key=lambda b: b.mid)
    upper = max(window, key=lambda b: b.mid)
    return AbelEstimate(lower, upper, tracks, cf.description)


def beta_interval_bound(k: int, bits: int = 128) -> Ball:
    """Enclosure of ``D(k-1)/((k-1)! sqrt k) * ln 2 + 2**(1 - sqrt(k+1))``.

    Upper bound on the sum of all ``alpha**(n!) - alpha**(2 n!)`` with ``n != k``
    over ``alpha`` in ``[beta_k, beta_{k+1}]``.
    """
    if k < 2:
        raise ValueError("beta_interval_bound needs k >= 2")
    w = bits + GUARD_BITS
    ln2, e_ln2 = ln2_fixed(w)
    root_k = hp_sqrt(k, w)
    head_ratio = Fraction(dsum(k - 1), factorial(k - 1))
    # head = ratio * ln2 / sqrt(k); sqrt and ln2 are each within a few ulps
    head = head_ratio * Fraction(ln2, 1 << w) / Fraction(root_k.mant, 1 << w)
    head_rad = head * Fraction(4 * (e_ln2 + 2), 1 << w) * 4
    root_k1 = hp_sqrt(k + 1, w)
    x = Fraction(root_k1.mant, 1 << w) - 1
    mant, err = exp2_neg(x, w)
    tail = Fraction(mant, 1 << w)
    tail_rad = Fraction(err + 2, 1 << w)
    return Ball(head + tail, head_rad + tail_rad)
