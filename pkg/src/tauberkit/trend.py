"""Value tracks along schedules and their monotonicity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["Projection", "Track", "project_limit"]

# safety factor on the difference of successive extrapolants
UNCERTAINTY_FACTOR = 2


@dataclass(frozen=True)
class Projection:
    """Projected limit of a track plus an uncertainty estimate (not a proof)."""

    limit: float
    uncertainty: float
    method: str


def _fit_limit(ks, vs) -> float:
    # v_k = L + (a ln k + b) / k through three points
    A = np.array([[1.0, math.log(k) / k, 1.0 / k] for k in ks])
    return float(np.linalg.solve(A, np.asarray(vs, dtype=float))[0])


def _nearest(indices, target):
    return min(range(len(indices)), key=lambda i: (abs(indices[i] - target), -indices[i]))


def project_limit(indices, values, clip=(0.0, 1.0)) -> Projection:
    """Extrapolate a slowly converging track ``v_k -> L`` with ``|v_k - L| ~ ln(k)/k``.

    Fits ``L + (a ln k + b)/k`` through the points nearest ``K/4, K/2, K``
    (``K`` the last index) and again through ``K/8, K/4, K/2``; the limit is
    the first fit and the uncertainty is twice the disagreement.  Tracks too
    short for two fits fall back to the last value with the last step as
    uncertainty.
    """
    ks = [int(k) for k in indices]
    vs = [float(v) for v in values]
    if not vs:
        raise ValueError("empty track")
    lo, hi = clip
    K = ks[-1]
    picks = [_nearest(ks, K / 8), _nearest(ks, K / 4), _nearest(ks, K / 2), len(ks) - 1]
    if len(set(picks)) < 4 or ks[picks[0]] < 1:
        step = abs(vs[-1] - vs[-2]) if len(vs) > 1 else 0.0
        return Projection(min(max(vs[-1], lo), hi), step, "last-value")
    p8, p4, p2, p1 = picks
    now = _fit_limit([ks[p4], ks[p2], ks[p1]], [vs[p4], vs[p2], vs[p1]])
    before = _fit_limit([ks[p8], ks[p4], ks[p2]], [vs[p8], vs[p4], vs[p2]])
    unc = UNCERTAINTY_FACTOR * abs(now - before)
    return Projection(min(max(now, lo), hi), unc, "log-richardson")


@dataclass
class Track:
    """Values sampled along a schedule, in schedule order."""

    indices: list[int] = field(default_factory=list)
    values: list[Fraction] = field(default_factory=list)
    radii: list[Fraction] = field(default_factory=list)

    def append(self, index: int, value, radius=0) -> None:
        self.indices.append(index)
        self.values.append(Fraction(value))
        self.radii.append(Fraction(radius))

    def __len__(self):
        return len(self.values)

    def tail(self, fraction: float = 0.5) -> Track:
        start = int(len(self) * (1 - fraction))
        return Track(self.indices[start:], self.values[start:], self.radii[start:])

    def last(self) -> Fraction | None:
        return self.values[-1] if self.values else None

    def last_gap(self) -> Fraction | None:
        if len(self) < 2:
            return None
        return self.values[-1] - self.values[-2]

    def project(self, clip=(0.0, 1.0)) -> Projection:
        """Track indices are shifted to start at 1 before fitting."""
        shift = 1 - self.indices[0] if self.indices and self.indices[0] < 1 else 0
        return project_limit([k + shift for k in self.indices], self.values, clip)

    def direction(self, fraction: float = 0.5) -> str:
        """'increasing', 'decreasing', 'constant' or 'mixed' over the tail window.

        Steps smaller than the combined radii count as flat.
        """
        tail = self.tail(fraction)
        if len(tail) < 2:
            return "constant"
        ups = downs = 0
        for i in range(1, len(tail)):
            step = tail.values[i] - tail.values[i - 1]
            noise = tail.radii[i] + tail.radii[i - 1]
            if step > noise:
                ups += 1
            elif step < -noise:
                downs += 1
        if ups and downs:
            return "mixed"
        if ups:
            return "increasing"
        if downs:
            return "decreasing"
        return "constant"
