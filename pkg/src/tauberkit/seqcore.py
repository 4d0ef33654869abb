"""0/1 block sequences and general bounded real sequences.

A :class:`BlockSequence` is an initial value plus a lazy, strictly increasing
stream of toggle positions.  Boundaries may be astronomically large (the
factorial-sum stream of :func:`example1` reaches ``D(30) ~ 2.8e32``), so
terms are never materialized; every query walks only the boundaries that
lie below the queried index.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

import numpy as np

from .bignum import dsum, factorial

__all__ = [
    "BlockSequence",
    "RealSequence",
    "SpecError",
    "alternating",
    "constant",
    "example1",
    "example1_majorant",
    "example2",
    "from_boundaries",
    "from_spec",
    "negate",
    "normalize_stream",
    "random_block_sequence",
    "shift",
    "term",
]


class SpecError(ValueError):
    """Malformed sequence or model specification document."""


def normalize_stream(raw: Iterable[int]) -> Iterator[int]:
    """Drop toggles that cancel: a run of equal boundaries survives iff its length is odd.

    Lazy: a boundary is emitted once a strictly larger one has been read.
    Raises ValueError if the raw stream decreases or starts below 1.
    """
    pending, run = None, 0
    for b in raw:
        b = int(b)
        if b < 1:
            raise ValueError(f"boundaries must be >= 1, got {b}")
        if pending is not None and b < pending:
            raise ValueError(f"boundary stream decreases: {pending} -> {b}")
        if b == pending:
            run += 1
            continue
        if run % 2:
            yield pending
        pending, run = b, 1
    if run % 2:
        yield pending


@dataclass(frozen=True)
class BlockSequence:
    """A 0/1 sequence ``u_n = initial ^ (#boundaries <= n mod 2)``.

    ``raw_boundaries`` is a zero-argument factory returning a fresh iterator,
    so every consumer gets an independent cursor.  ``boundaries()`` yields the
    normalized stream.  ``finite`` marks streams known to terminate.
    """

    initial_value: int
    raw_boundaries: Callable[[], Iterator[int]] = field(repr=False)
    description: str = ""
    finite: bool = False

    def __post_init__(self):
        if self.initial_value not in (0, 1):
            raise ValueError("initial_value must be 0 or 1")

    def boundaries(self) -> Iterator[int]:
        return normalize_stream(self.raw_boundaries())

    def head(self, count: int) -> list[int]:
        return list(itertools.islice(self.boundaries(), count))

    def blocks(self) -> Iterator[tuple[int, int | None, int]]:
        """Yield ``(start, end, value)``; the last block of a finite stream has end None."""
        start, value = 0, self.initial_value
        for b in self.boundaries():
            yield start, b, value
            start, value = b, 1 - value
        yield start, None, value

    def term(self, n: int) -> int:
        if n < 0:
            raise ValueError("index must be non-negative")
        flips = 0
        for b in self.boundaries():
            if b > n:
                break
            flips += 1
        return self.initial_value ^ (flips & 1)

    __getitem__ = term

    def dense(self, length: int) -> np.ndarray:
        """First ``length`` terms as a uint8 array."""
        out = np.empty(length, dtype=np.uint8)
        for start, end, value in self.blocks():
            if start >= length:
                break
            stop = length if end is None else min(end, length)
            out[start:stop] = value
            if end is None:
                break
        return out

    def one_blocks(self) -> Iterator[tuple[int, int | None]]:
        for start, end, value in self.blocks():
            if value == 1 and end != start:
                yield start, end

    def __repr__(self):
        head = self.head(6)
        more = ", ..." if len(head) == 6 else ""
        return (f"BlockSequence({self.description or 'custom'}, initial={self.initial_value}, "
                f"boundaries=[{', '.join(map(str, head))}{more}])")


def term(s: BlockSequence, n: int) -> int:
    return s.term(n)


@dataclass(frozen=True)
class RealSequence:
    """Lazily evaluated sequence of exact rationals.

    ``lower`` is the declared lower bound (``bounded_below`` is its presence);
    ``bound`` bounds ``|u_n|`` and is required by the naive Abel evaluator.
    """

    term_fn: Callable[[int], Fraction] = field(repr=False)
    lower: Fraction | None = None
    bound: Fraction | None = None
    description: str = ""

    @property
    def bounded_below(self) -> bool:
        return self.lower is not None

    def term(self, n: int) -> Fraction:
        value = Fraction(self.term_fn(n))
        if self.lower is not None and value < self.lower:
            raise ValueError(f"term {n} = {value} violates declared lower bound {self.lower}")
        return value

    __getitem__ = term

    def dense(self, length: int) -> np.ndarray:
        return np.array([float(self.term(n)) for n in range(length)], dtype=np.float64)

    @classmethod
    def from_block(cls, s: BlockSequence) -> RealSequence:
        return cls(lambda n: Fraction(s.term(n)), Fraction(0), Fraction(1), s.description)


def from_boundaries(initial_value: int, boundaries: Iterable[int] | Callable[[], Iterator[int]],
                    description: str = "") -> BlockSequence:
    if callable(boundaries):
        return BlockSequence(initial_value, boundaries, description)
    frozen = tuple(int(b) for b in boundaries)
    # validate eagerly for finite lists
    list(normalize_stream(frozen))
    return BlockSequence(initial_value, lambda: iter(frozen), description, finite=True)


def constant(value: int) -> BlockSequence:
    return BlockSequence(value, lambda: iter(()), f"constant-{value}", finite=True)


def alternating() -> BlockSequence:
    """1, 0, 1, 0, ..."""
    return BlockSequence(1, lambda: itertools.count(1), "alternating")


def _dsum_stream() -> Iterator[int]:
    total, f = 0, 1
    for i in itertools.count(1):
        f *= i
        total += f
        yield total


def _factorial_stream(start: int = 1) -> Iterator[int]:
    f = factorial(start - 1)
    for k in itertools.count(start):
        f *= k
        yield f


def _double_factorial_blocks() -> Iterator[int]:
    for f in _factorial_stream():
        yield f
        yield 2 * f


def example1() -> BlockSequence:
    """Ones exactly on [D(2k-1), D(2k)); boundaries D(1), D(2), ... = 1, 3, 9, 33, ..."""
    return BlockSequence(0, _dsum_stream, "example1")


def example2() -> BlockSequence:
    """Zeros exactly on [k!, 2k!); normalized boundaries 1, 4, 6, 12, 24, 48, ..."""
    return BlockSequence(1, _double_factorial_blocks, "example2")


def example1_majorant(k: int) -> BlockSequence:
    """One everywhere except the single zero block [D(2k), D(2k+1))."""
    if k < 1:
        raise ValueError(f"majorant index must be >= 1, got {k}")
    pair = (dsum(2 * k), dsum(2 * k + 1))
    return BlockSequence(1, lambda: iter(pair), f"example1-majorant({k})", finite=True)


def negate(s: BlockSequence) -> BlockSequence:
    desc = s.description[len("negated-"):] if s.description.startswith("negated-") else f"negated-{s.description}"
    return BlockSequence(1 - s.initial_value, s.raw_boundaries, desc, s.finite)


def shift(s: BlockSequence, k: int) -> BlockSequence:
    """The tail ``u_k, u_{k+1}, ...`` re-indexed from 0."""
    if k < 0:
        raise ValueError("shift must be non-negative")
    if k == 0:
        return s
    initial = s.term(k)

    def raw():
        return (b - k for b in s.boundaries() if b > k)

    return BlockSequence(initial, raw, f"{s.description}[{k}:]", s.finite)


def random_block_sequence(rng: random.Random, max_blocks: int = 12) -> BlockSequence:
    """Random sequence with boundaries ``b[j+1] = b[j] * r_j``, ``r_j`` in ``{2, ..., j!+1}``.

    The ratio range grows factorially, so draws mix slowly growing blocks
    (convergent averages) with explosive ones (oscillating averages).
    """
    b = rng.randint(1, 4)
    out = [b]
    for j in range(1, max_blocks):
        b *= rng.randint(2, factorial(j) + 1)
        out.append(b)
    frozen = tuple(out)
    initial = rng.randint(0, 1)
    return BlockSequence(initial, lambda: iter(frozen), f"random({initial}; {', '.join(map(str, frozen))})",
                         finite=True)


_GENERATORS: dict[str, Callable[[], Iterator[int]]] = {
    "factorial": _factorial_stream,
    "double-factorial-blocks": _double_factorial_blocks,
    "dsum": _dsum_stream,
}


def _merge(finite: tuple[int, ...], gen: Callable[[], Iterator[int]]) -> Callable[[], Iterator[int]]:
    return lambda: heapq.merge(iter(finite), gen())


def from_spec(doc: dict) -> BlockSequence:
    """Build a sequence from a specification record.

    Either ``{"preset": name, "k": int}`` with ``name`` one of ``example1``,
    ``example2``, ``example1-majorant``, ``negated-example2``, ``negated-example1``,
    ``alternating``, ``constant-0``, ``constant-1``; or an explicit record
    ``{"initial_value": 0|1, "boundaries": [...], "generator": name}`` where the
    optional generator stream is merged into the finite list.
    """
    if not isinstance(doc, dict):
        raise SpecError("sequence spec must be a mapping")
    if "preset" in doc:
        name = doc["preset"]
        presets = {
            "example1": example1,
            "example2": example2,
            "negated-example1": lambda: negate(example1()),
            "negated-example2": lambda: negate(example2()),
            "alternating": alternating,
            "constant-0": lambda: constant(0),
            "constant-1": lambda: constant(1),
        }
        if name == "example1-majorant":
            k = doc.get("k")
            if not isinstance(k, int) or k < 1:
                raise SpecError("field 'k': example1-majorant needs an integer k >= 1")
            return example1_majorant(k)
        if name not in presets:
            raise SpecError(f"field 'preset': unknown preset {name!r}")
        return presets[name]()
    try:
        initial = doc["initial_value"]
    except KeyError:
        raise SpecError("field 'initial_value' is required without 'preset'") from None
    if initial not in (0, 1):
        raise SpecError(f"field 'initial_value': must be 0 or 1, got {initial!r}")
    bounds = doc.get("boundaries", [])
    if not isinstance(bounds, list) or not all(isinstance(b, (int, str)) for b in bounds):
        raise SpecError("field 'boundaries': must be a list of integers")
    try:
        finite = tuple(int(b) for b in bounds)
        list(normalize_stream(finite))
    except ValueError as exc:
        raise SpecError(f"field 'boundaries': {exc}") from None
    gen_name = doc.get("generator")
    desc = doc.get("description", "explicit")
    if gen_name is None:
        return BlockSequence(initial, lambda: iter(finite), desc, finite=True)
    if gen_name not in _GENERATORS:
        raise SpecError(f"field 'generator': unknown generator {gen_name!r}")
    return BlockSequence(initial, _merge(finite, _GENERATORS[gen_name]), desc)
