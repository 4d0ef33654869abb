"""Assemble lower/upper Cesàro and Abel limits and classify their relation.

For a sequence bounded on one side the four limits always satisfy
``C_lower <= A_lower <= A_upper <= C_upper``, and ``A_lower == A_upper`` forces
all four to coincide.  That leaves five equality/strict patterns, the
:class:`RelationClass` members numbered as in the classical list (2)-(6).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import abel, cesaro
from .bignum import DEFAULT_BITS, Ball
from .seqcore import BlockSequence, negate
from .trend import Track

__all__ = [
    "AnalyzeConfig",
    "ChainViolation",
    "DualityReport",
    "HLReport",
    "LimitEstimate",
    "LimitsReport",
    "RelationClass",
    "analyze",
    "classify",
    "default_abel_ks",
    "duality_check",
    "hardy_littlewood_consistency",
    "naive_grid",
    "relation_pattern",
]


class RelationClass(enum.Enum):
    ALL_EQUAL = "(2)"
    CHAIN_STRICT = "(3)"
    OUTER_EQUAL = "(4)"
    UPPER_EQUAL = "(5)"
    LOWER_EQUAL = "(6)"
    UNRESOLVED = "unresolved"
    INCONSISTENT = "inconsistent"

    @property
    def dual(self) -> RelationClass:
        """Class of the complemented sequence ``1 - u``."""
        swap = {RelationClass.UPPER_EQUAL: RelationClass.LOWER_EQUAL,
                RelationClass.LOWER_EQUAL: RelationClass.UPPER_EQUAL}
        return swap.get(self, self)


_PATTERNS = {
    "===": RelationClass.ALL_EQUAL,
    "<<<": RelationClass.CHAIN_STRICT,
    "=<=": RelationClass.OUTER_EQUAL,
    "<<=": RelationClass.UPPER_EQUAL,
    "=<<": RelationClass.LOWER_EQUAL,
}


class ChainViolation(ValueError):
    """The quadruple breaks ``C_lower <= A_lower <= A_upper <= C_upper`` beyond tolerance."""


def _gap_tolerances(delta) -> tuple[Fraction, Fraction, Fraction]:
    if isinstance(delta, (tuple, list)):
        if len(delta) != 3:
            raise ValueError("per-gap tolerance needs three entries")
        return tuple(Fraction(d) for d in delta)
    d = Fraction(delta)
    return d, d, d


def relation_pattern(q: Sequence, delta) -> str:
    """Three-character pattern of ``=``/``<`` over consecutive gaps of ``q``.

    A gap within its tolerance is ``=``; above it ``<``; below minus it the
    chain is violated and :class:`ChainViolation` is raised.
    """
    if len(q) != 4:
        raise ValueError("need the quadruple (C_lower, A_lower, A_upper, C_upper)")
    vals = [Fraction(x) for x in q]
    out = []
    for i, tol in enumerate(_gap_tolerances(delta)):
        if tol < 0:
            raise ValueError("tolerance must be non-negative")
        gap = vals[i + 1] - vals[i]
        if gap < -tol:
            raise ChainViolation(f"gap {i} is {float(gap):.3g}, below -{float(tol):.3g}")
        out.append("=" if gap <= tol else "<")
    return "".join(out)


def classify(q: Sequence, delta=Fraction(1, 1000)) -> RelationClass:
    """Map a quadruple to its relation class.

    Patterns with ``A_lower = A_upper`` but some strict Cesàro gap contradict
    the Hardy-Littlewood theorem and come back UNRESOLVED.
    """
    return _PATTERNS.get(relation_pattern(q, delta), RelationClass.UNRESOLVED)


def hardy_littlewood_note(pattern: str) -> str:
    if pattern in _PATTERNS:
        return ""
    if pattern[1] == "=":
        return "A_lower = A_upper with a strict Cesàro gap contradicts Hardy-Littlewood"
    return "pattern outside the admissible list"


def _log_spaced(lo: int, hi: int) -> tuple[int, ...]:
    ks, k = set(), float(lo)
    while k <= hi:
        ks.add(int(round(k)))
        k *= 1.2
    ks.add(hi)
    for p in range(hi.bit_length()):
        if lo <= 2**p <= hi:
            ks.add(2**p)
    return tuple(sorted(ks))


def default_abel_ks(k_max: int = 256) -> tuple[int, ...]:
    return _log_spaced(1, k_max)


def naive_grid(x_lo: float = 1.0, x_hi: float = 4.0, step: float = 0.25) -> tuple[Fraction, ...]:
    """``alpha = 1 - 10**-x`` for x from ``x_lo`` to ``x_hi`` (0.9 ... 0.9999 by default)."""
    count = int(round((x_hi - x_lo) / step))
    return tuple(1 - Fraction(1, int(round(10 ** (x_lo + i * step)))) for i in range(count + 1))


@dataclass(frozen=True)
class AnalyzeConfig:
    """Knobs for :func:`analyze`.

    ``abel_method`` is ``"closed"`` (closed form along Lemma-1 schedules) or
    ``"naive"`` (direct summation on ``grid``, compared with exact Cesàro
    extremes over the index window carrying the Abel weights).
    """

    bits: int = DEFAULT_BITS
    tol: Fraction = abel.DEFAULT_TOL
    delta: Fraction = Fraction(1, 1000)
    cesaro_k_max: int = 1024
    abel_ks: tuple[int, ...] = field(default_factory=default_abel_ks)
    abel_method: str = "closed"
    grid: tuple[Fraction, ...] = field(default_factory=naive_grid)
    naive_tol: float = 1e-9

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError("precision must be at least 64 bits")
        if Fraction(self.tol) <= 0 or Fraction(self.delta) <= 0:
            raise ValueError("tol and delta must be positive")
        if self.abel_method not in ("closed", "naive"):
            raise ValueError("abel_method is 'closed' or 'naive'")
        if any(not 0 < Fraction(a) < 1 for a in self.grid):
            raise ValueError("grid values must lie in (0, 1)")


@dataclass(frozen=True)
class LimitEstimate:
    """One of the four limits.

    ``value``/``radius`` is the certified tail-window extreme actually
    computed; ``limit``/``limit_radius`` is the projected limit used for
    classification, whose radius is a convergence estimate.
    """

    value: Fraction
    radius: Fraction
    limit: Fraction
    limit_radius: Fraction
    trend: str = "constant"
    source: str = ""

    @classmethod
    def exact(cls, value, source="") -> LimitEstimate:
        v = Fraction(value)
        return cls(v, Fraction(0), v, Fraction(0), "constant", source)

    def contains(self, x, slack=0) -> bool:
        return abs(Fraction(x) - self.limit) <= self.limit_radius + Fraction(slack)

    def complement(self) -> LimitEstimate:
        return LimitEstimate(1 - self.value, self.radius, 1 - self.limit, self.limit_radius,
                             {"increasing": "decreasing", "decreasing": "increasing"}.get(self.trend, self.trend),
                             self.source)

    def __float__(self):
        return float(self.limit)


NAMES = ("c_lower", "a_lower", "a_upper", "c_upper")


@dataclass(frozen=True)
class LimitsReport:
    c_lower: LimitEstimate
    a_lower: LimitEstimate
    a_upper: LimitEstimate
    c_upper: LimitEstimate
    relation_class: RelationClass
    delta: Fraction
    pattern: str = ""
    note: str = ""
    description: str = ""

    @property
    def estimates(self) -> tuple[LimitEstimate, ...]:
        return self.c_lower, self.a_lower, self.a_upper, self.c_upper

    @property
    def limits(self) -> tuple[Fraction, ...]:
        return tuple(e.limit for e in self.estimates)

    @property
    def consistent(self) -> bool:
        return self.relation_class is not RelationClass.INCONSISTENT

    def as_record(self) -> dict:
        rec = {
            "sequence": self.description,
            "relation_class": self.relation_class.name,
            "relation_label": self.relation_class.value,
            "pattern": self.pattern,
            "delta": float(self.delta),
            "note": self.note,
        }
        for name, e in zip(NAMES, self.estimates):
            rec[name] = {
                "limit": float(e.limit),
                "limit_radius": float(e.limit_radius),
                "value": float(e.value),
                "radius": float(e.radius),
                "trend": e.trend,
                "source": e.source,
            }
        return rec


def _assemble(estimates: Sequence[LimitEstimate], delta: Fraction, description: str) -> LimitsReport:
    radii = [e.limit_radius for e in estimates]
    per_gap = tuple(delta + radii[i] + radii[i + 1] for i in range(3))
    q = [e.limit for e in estimates]
    try:
        pattern = relation_pattern(q, per_gap)
    except ChainViolation as exc:
        return LimitsReport(*estimates, RelationClass.INCONSISTENT, delta, "", str(exc), description)
    cls = _PATTERNS.get(pattern, RelationClass.UNRESOLVED)
    return LimitsReport(*estimates, cls, delta, pattern, hardy_littlewood_note(pattern), description)


def _from_track(track: Track, value: Fraction, radius: Fraction, source: str) -> LimitEstimate:
    proj = track.project()
    numeric = max(track.radii[-3:], default=Fraction(0))
    return LimitEstimate(value, radius, Fraction(proj.limit), Fraction(proj.uncertainty) + numeric,
                         track.direction(), f"{source} [{proj.method}]")


def _closed_analysis(s: BlockSequence, config: AnalyzeConfig) -> list[LimitEstimate]:
    ces = cesaro.boundary_extremes(s, config.cesaro_k_max)
    if ces.eventual is not None:
        return [LimitEstimate.exact(ces.eventual, "eventually constant")] * 4
    c_lo = _from_track(ces.lower_track, ces.lower, Fraction(0), "cesaro block ends")
    c_hi = _from_track(ces.upper_track, ces.upper, Fraction(0), "cesaro block ends")
    cf = abel.closed_form(s)
    schedules, idx = {}, {}
    for name, value in (("zero-blocks", 0), ("one-blocks", 1)):
        pairs = abel.block_pairs(s, value)
        schedules[name] = abel.schedule("lemma1-pairs", config.abel_ks, pairs, config.bits)
        idx[name] = list(config.abel_ks)
    est = abel.abel_extremes(cf, schedules, config.tol, idx)
    lo_track, hi_track = est.tracks["zero-blocks"], est.tracks["one-blocks"]
    a_lo = _from_track(lo_track, est.lower.mid, est.lower.rad, "abel lemma1 zero-blocks")
    a_hi = _from_track(hi_track, est.upper.mid, est.upper.rad, "abel lemma1 one-blocks")
    return [c_lo, a_lo, a_hi, c_hi]


def abel_weight_window(alphas: Sequence[Fraction], eps: float) -> tuple[int, int]:
    """Index window ``[n_lo, n_hi]`` outside which every alpha's Abel weights sum to <= eps.

    ``f(alpha) = sum_n (1-alpha)**2 (n+1) alpha**n A_n`` with ``A_n`` the average
    of the first ``n+1`` terms; the weight below ``m`` is at most
    ``(1-alpha)**2 m (m+1) / 2`` and above ``m`` equals
    ``alpha**m (1 + m (1-alpha))``.
    """
    a_min, a_max = float(min(alphas)), float(max(alphas))
    n_lo = max(0, int(math.sqrt(2 * eps) / (1 - a_min)) - 1)
    n_hi = max(n_lo + 1, int(1 / (1 - a_max)))
    while a_max**n_hi * (1 + n_hi * (1 - a_max)) > eps:
        n_hi = int(n_hi * 1.25) + 1
    return n_lo, n_hi


def _naive_analysis(s: BlockSequence, config: AnalyzeConfig) -> list[LimitEstimate]:
    grid = sorted(Fraction(a) for a in config.grid)
    tail = grid[len(grid) // 2:]
    values = [abel.eval_naive(s, a, config.naive_tol) for a in tail]
    lo = min(values, key=lambda b: b.mid)
    hi = max(values, key=lambda b: b.mid)
    n_lo, n_hi = abel_weight_window(tail, float(config.delta) / 4)
    # A_n is average(s, n + 1)
    c_lo, c_hi = cesaro.window_extremes(s, n_lo + 1, n_hi + 1)
    trend = Track()
    for k, v in enumerate(values):
        trend.append(k, v.mid, v.rad)
    direction = trend.direction(1.0)
    return [
        LimitEstimate(c_lo, Fraction(0), c_lo, Fraction(0), "constant", f"cesaro window [{n_lo}, {n_hi}]"),
        LimitEstimate(lo.mid, lo.rad, lo.mid, lo.rad, direction, "abel naive grid"),
        LimitEstimate(hi.mid, hi.rad, hi.mid, hi.rad, direction, "abel naive grid"),
        LimitEstimate(c_hi, Fraction(0), c_hi, Fraction(0), "constant", f"cesaro window [{n_lo}, {n_hi}]"),
    ]


def analyze(s: BlockSequence, config: AnalyzeConfig | None = None) -> LimitsReport:
    """Estimate (C_lower, A_lower, A_upper, C_upper) and classify.

    A quadruple that breaks the Tauberian chain beyond its radii plus delta
    yields a report with class INCONSISTENT instead of a relation class.
    """
    config = config or AnalyzeConfig()
    if config.abel_method == "naive":
        estimates = _naive_analysis(s, config)
    else:
        estimates = _closed_analysis(s, config)
    return _assemble(estimates, Fraction(config.delta), s.description)


@dataclass(frozen=True)
class DualityReport:
    original: LimitsReport
    negated: LimitsReport
    values_match: bool
    classes_match: bool

    @property
    def ok(self) -> bool:
        return self.values_match and self.classes_match


def duality_check(s: BlockSequence, config: AnalyzeConfig | None = None) -> DualityReport:
    """Check that ``1 - u`` has the complemented, reversed quadruple and the dual class."""
    config = config or AnalyzeConfig()
    r1 = analyze(s, config)
    r2 = analyze(negate(s), config)
    mirrored = [e.complement() for e in reversed(r1.estimates)]
    slack = Fraction(config.delta)
    values_match = all(
        abs(m.limit - e.limit) <= m.limit_radius + e.limit_radius + slack
        for m, e in zip(mirrored, r2.estimates)
    )
    return DualityReport(r1, r2, values_match, r2.relation_class is r1.relation_class.dual)


@dataclass(frozen=True)
class HLReport:
    report: LimitsReport
    vacuous: bool
    holds: bool
    note: str


def hardy_littlewood_consistency(s: BlockSequence, config: AnalyzeConfig | None = None) -> HLReport:
    """If the Abel limits agree, the Cesàro limits must agree too."""
    config = config or AnalyzeConfig()
    r = analyze(s, config)
    delta = Fraction(config.delta)
    a_gap = abs(r.a_upper.limit - r.a_lower.limit)
    if a_gap > delta + r.a_upper.limit_radius + r.a_lower.limit_radius:
        return HLReport(r, True, True, f"Abel limits differ by {float(a_gap):.4g}; implication vacuous")
    c_gap = abs(r.c_upper.limit - r.c_lower.limit)
    slack = delta + sum(e.limit_radius for e in r.estimates)
    holds = c_gap <= slack
    note = "all four limits agree" if holds else f"Cesàro limits differ by {float(c_gap):.4g}"
    return HLReport(r, False, holds, note)
