"""Exact and fixed-point arithmetic.

Naturals are Python ints and rationals are :class:`fractions.Fraction`.
:class:`HPReal` is a binary fixed-point real; :class:`Ball` is a midpoint
plus radius enclosure used for every certified real returned by the
package.

All fixed-point routines below round toward minus infinity and track a
worst-case error in units of the last place (ulps) so the returned radius
is a proven bound, not an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "DEFAULT_BITS",
    "GUARD_BITS",
    "Ball",
    "HPReal",
    "dsum",
    "exp2_neg",
    "factorial",
    "factorial_ratio_prev",
    "hp_log2_ratio",
    "hp_sqrt",
    "ln2_fixed",
]

DEFAULT_BITS = 256
GUARD_BITS = 64
MIN_BITS = 64


def factorial(n: int) -> int:
    if n < 0:
        raise ValueError(f"factorial needs n >= 0, got {n}")
    return math.factorial(n)


def dsum(k: int) -> int:
    """Return D(k) = 1! + 2! + ... + k!."""
    if k < 1:
        raise ValueError(f"dsum is defined for k >= 1, got {k}")
    total, f = 0, 1
    for i in range(1, k + 1):
        f *= i
        total += f
    return total


def factorial_ratio_prev(n: int) -> Fraction:
    """Return (1! + ... + (n-1)!) / n! exactly."""
    if n < 2:
        raise ValueError(f"factorial_ratio_prev needs n >= 2, got {n}")
    return Fraction(dsum(n - 1), factorial(n))


@dataclass(frozen=True)
class HPReal:
    """Fixed-point binary real ``mant / 2**bits``.

    Every arithmetic operation is exact or rounds down once, so its error is
    below ``2**-bits`` (and in particular below the documented ``2**(1-bits)``).
    Operands with different ``bits`` are aligned to the larger precision.
    """

    mant: int
    bits: int

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("bits must be non-negative")

    @classmethod
    def from_int(cls, n: int, bits: int) -> HPReal:
        return cls(n << bits, bits)

    @classmethod
    def from_fraction(cls, q: Fraction, bits: int) -> HPReal:
        q = Fraction(q)
        return cls((q.numerator << bits) // q.denominator, bits)

    def to_fraction(self) -> Fraction:
        return Fraction(self.mant, 1 << self.bits)

    def with_bits(self, bits: int) -> HPReal:
        if bits >= self.bits:
            return HPReal(self.mant << (bits - self.bits), bits)
        return HPReal(self.mant >> (self.bits - bits), bits)

    def _align(self, other):
        if isinstance(other, int):
            other = HPReal.from_int(other, self.bits)
        if not isinstance(other, HPReal):
            return None, None, None
        bits = max(self.bits, other.bits)
        return self.with_bits(bits).mant, other.with_bits(bits).mant, bits

    def __add__(self, other):
        a, b, bits = self._align(other)
        if a is None:
            return NotImplemented
        return HPReal(a + b, bits)

    __radd__ = __add__

    def __sub__(self, other):
        a, b, bits = self._align(other)
        if a is None:
            return NotImplemented
        return HPReal(a - b, bits)

    def __rsub__(self, other):
        a, b, bits = self._align(other)
        if a is None:
            return NotImplemented
        return HPReal(b - a, bits)

    def __neg__(self):
        return HPReal(-self.mant, self.bits)

    def __mul__(self, other):
        if isinstance(other, int):
            return HPReal(self.mant * other, self.bits)
        a, b, bits = self._align(other)
        if a is None:
            return NotImplemented
        return HPReal((a * b) >> bits, bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            if other == 0:
                raise ZeroDivisionError("HPReal division by zero")
            return HPReal(self.mant // other, self.bits)
        a, b, bits = self._align(other)
        if a is None:
            return NotImplemented
        if b == 0:
            raise ZeroDivisionError("HPReal division by zero")
        return HPReal((a << bits) // b, bits)

    def _cmp_key(self, other):
        a, b, _ = self._align(other)
        return a, b

    def __eq__(self, other):
        if not isinstance(other, (HPReal, int)):
            return NotImplemented
        a, b = self._cmp_key(other)
        return a == b

    def __lt__(self, other):
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other):
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._cmp_key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._cmp_key(other)
        return a >= b

    def __hash__(self):
        return hash(self.to_fraction())

    def __float__(self):
        return self.mant / (1 << self.bits) if self.bits < 1000 else float(self.to_fraction())

    def __repr__(self):
        return f"HPReal({float(self)!r}, bits={self.bits})"

    def ball(self, ulps: int = 2) -> Ball:
        """Enclosure assuming the value carries at most ``ulps`` last-place errors."""
        return Ball(self.to_fraction(), Fraction(ulps, 1 << self.bits))


@dataclass(frozen=True)
class Ball:
    """Closed interval ``[mid - rad, mid + rad]`` with exact rational ends."""

    mid: Fraction
    rad: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "mid", Fraction(self.mid))
        object.__setattr__(self, "rad", Fraction(self.rad))
        if self.rad < 0:
            raise ValueError("negative radius")

    @classmethod
    def exact(cls, value) -> Ball:
        return cls(Fraction(value), Fraction(0))

    @property
    def lo(self) -> Fraction:
        return self.mid - self.rad

    @property
    def hi(self) -> Fraction:
        return self.mid + self.rad

    def contains(self, x, slack=0) -> bool:
        return abs(Fraction(x) - self.mid) <= self.rad + Fraction(slack)

    def overlaps(self, other: Ball, slack=0) -> bool:
        return abs(self.mid - other.mid) <= self.rad + other.rad + Fraction(slack)

    def widen(self, extra) -> Ball:
        return Ball(self.mid, self.rad + Fraction(extra))

    def __add__(self, other):
        if isinstance(other, Ball):
            return Ball(self.mid + other.mid, self.rad + other.rad)
        return Ball(self.mid + Fraction(other), self.rad)

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.mid, self.rad)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Ball) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Ball):
            mid = self.mid * other.mid
            rad = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
            return Ball(mid, rad)
        q = Fraction(other)
        return Ball(self.mid * q, self.rad * abs(q))

    __rmul__ = __mul__

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"Ball({float(self.mid):.17g} ± {float(self.rad):.3g})"


def _atanh_fixed(p: int, q: int, w: int) -> tuple[int, int]:
    """atanh(p/q) for 0 <= p/q <= 1/3 as ``(mant, err_ulps)`` at ``w`` bits."""
    if p == 0:
        return 0, 0
    if 3 * p > q:
        raise ValueError("atanh argument outside [0, 1/3]")
    power = (p << w) // q
    pp, qq = p * p, q * q
    total = power
    k = 0
    while power:
        k += 1
        power = power * pp // qq
        total += power // (2 * k + 1)
    # truncated powers drift by <= k+1 ulps, each quotient adds 1 more, and
    # the dropped tail is below (k+2) * 9/8 ulps
    return total, 4 * k + 8


@lru_cache(maxsize=64)
def ln2_fixed(w: int) -> tuple[int, int]:
    """ln 2 = 2 atanh(1/3) at ``w`` fractional bits, as ``(mant, err_ulps)``."""
    m, e = _atanh_fixed(1, 3, w + 2)
    return (2 * m) >> 2, (2 * e) // 4 + 1


def hp_sqrt(n: int, bits: int = DEFAULT_BITS) -> HPReal:
    """floor(sqrt(n) * 2**bits) / 2**bits; error below ``2**-bits``."""
    if n < 1:
        raise ValueError(f"hp_sqrt needs n >= 1, got {n}")
    return HPReal(math.isqrt(n << (2 * bits)), bits)


def hp_log2_ratio(M: int, L: int, bits: int = DEFAULT_BITS) -> HPReal:
    """log2(M/L) for integers 0 < L < M, error at most ``2**(1-bits)``.

    The integer part comes from bit lengths; the fractional part is
    ``ln(y)/ln 2`` with ``y = M / (L 2**k)`` in ``[1, 2)`` and
    ``ln y = 2 atanh((y-1)/(y+1))`` summed in fixed point with guard bits.
    """
    if not (0 < L < M):
        raise ValueError(f"hp_log2_ratio needs 0 < L < M, got L={L}, M={M}")
    k = M.bit_length() - L.bit_length()
    if (L << k) > M:
        k -= 1
    base = L << k
    w = bits + GUARD_BITS
    num, den = M - base, M + base
    ln_y, e1 = _atanh_fixed(num, den, w)
    ln_y *= 2
    e1 *= 2
    ln2, e2 = ln2_fixed(w)
    frac = (ln_y << w) // ln2
    # |ln_y/ln2| < 1 so the quotient error is below (e1 + e2)/ln2 + 1 ulps,
    # far under 2**GUARD_BITS; one more rounding lands at `bits`
    assert (e1 + e2) * 2 + 1 < (1 << (GUARD_BITS - 1))
    return HPReal((k << bits) + (frac >> GUARD_BITS), bits)


def exp2_neg(x: Fraction, w: int) -> tuple[int, int]:
    """2**-x for rational x >= 0 at ``w`` fractional bits, as ``(mant, err_ulps)``."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("exp2_neg needs x >= 0")
    whole = x.numerator // x.denominator
    frac = x - whole
    if whole > w + 1:
        return 0, 1
    wg = w + 16
    one = 1 << wg
    if frac == 0:
        mant, err = one, 0
    else:
        ln2, e2 = ln2_fixed(wg)
        # y = frac * ln2 in [0, ln 2)
        y = (frac.numerator * ln2) // frac.denominator
        ey = e2 + 1
        total = one
        term = one
        k = 0
        while term:
            k += 1
            term = term * y // (k << wg)
            total = total - term if k % 2 else total + term
        # exp(-y) is 1-Lipschitz on y >= 0; since y/k < 0.7 the drift of each
        # truncated term stays below 1/(1 - 0.7) < 4 ulps
        mant, err = total, ey + 4 * k + 4
    mant >>= 16
    err = (err >> 16) + 1
    mant >>= whole
    err = (err >> whole) + 1
    return mant, err
