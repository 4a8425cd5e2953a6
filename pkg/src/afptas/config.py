"""Windows, configurations and generalized configurations.

A window is indexed by integers only: ``t`` selects the size (1+eps)^-t from
the geometric grid and ``count`` (BPCC only) the number of small items it may
hold. The window set itself is never materialised; it is (t_max+1)*(k+1) big.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Item, ItemType, Problem, inverse_epsilon


@dataclass(frozen=True, order=True)
class Window:
    t: int
    count: int | None = None


@dataclass(frozen=True)
class Configuration:
    """A multiset of item types, stored as sorted ``(type index, copies)`` pairs."""

    counts: tuple[tuple[int, int], ...]
    size: Fraction
    item_count: int

    @classmethod
    def build(cls, counts: Mapping[int, int] | Iterable[tuple[int, int]], types: Sequence[ItemType]) -> "Configuration":
        pairs = counts.items() if isinstance(counts, Mapping) else counts
        merged: dict[int, int] = {}
        for v, c in pairs:
            if c:
                merged[v] = merged.get(v, 0) + c
        ordered = tuple(sorted(merged.items()))
        size = sum((types[v].size * c for v, c in ordered), Fraction(0))
        return cls(ordered, size, sum(c for _, c in ordered))

    def count_of(self, v: int) -> int:
        for u, c in self.counts:
            if u == v:
                return c
        return 0

    @property
    def is_empty(self) -> bool:
        return not self.counts

    def fits(self, types: Sequence[ItemType], k: int | None = None) -> bool:
        if self.size > 1:
            return False
        if k is not None and self.item_count > k:
            return False
        return all(c <= types[v].multiplicity for v, c in self.counts)


EMPTY = Configuration((), Fraction(0), 0)


@dataclass(frozen=True)
class GeneralizedConfiguration:
    config: Configuration
    window: Window | None


class WindowUniverse:
    """The grid of window sizes for one rounded instance.

    ``degenerate`` is set when there is no nonzero small item. The grid then
    collapses to the single zero window t = 0, which only bounds item counts.
    """

    def __init__(self, epsilon: Fraction, problem: Problem, k: int | None, s_min: Fraction | None):
        self.epsilon = epsilon
        self.problem = Problem(problem)
        self.k = k if self.problem is Problem.BPCC else None
        self.s_min = s_min
        self.degenerate = s_min is None
        self._ratio = Fraction(inverse_epsilon(epsilon), inverse_epsilon(epsilon) + 1)
        if self.degenerate:
            self.t_min_prime = None
            self.t_max = 0
        else:
            # smallest t with (1+eps)^-t <= s_min
            t = max(0, int(math.floor(math.log(float(s_min)) / math.log(float(self._ratio)))) - 1)
            while self._ratio**t > s_min:
                t += 1
            while t > 0 and self._ratio ** (t - 1) <= s_min:
                t -= 1
            self.t_min_prime = t
            self.t_max = t + 1
        self._sizes = [self._ratio**t for t in range(self.t_max + 2)]
        self.sizes_f = [float(s) for s in self._sizes]

    @property
    def s_min_prime(self) -> Fraction | None:
        return None if self.degenerate else self._sizes[self.t_min_prime]

    @property
    def has_count(self) -> bool:
        return self.problem is Problem.BPCC

    def size(self, t: int) -> Fraction:
        return self._sizes[t]

    def window_size(self, w: Window) -> Fraction:
        return self._sizes[w.t]

    @property
    def top(self) -> Window:
        """The window (1, k) of the empty configuration."""
        return Window(0, self.k if self.has_count else None)

    def is_zero_window(self, w: Window) -> bool:
        return w.t == self.t_max

    def __contains__(self, w: Window) -> bool:
        if not (0 <= w.t <= self.t_max):
            return False
        if self.has_count:
            return w.count is not None and 0 <= w.count <= self.k
        return w.count is None

    def __len__(self) -> int:
        return (self.t_max + 1) * ((self.k + 1) if self.has_count else 1)

    def windows(self) -> Iterable[Window]:
        for t in range(self.t_max + 1):
            if self.has_count:
                for c in range(self.k + 1):
                    yield Window(t, c)
            else:
                yield Window(t)

    def pricing_capacity(self, t: int) -> tuple[Fraction, bool]:
        """Capacity for configurations priced against window size index ``t``.

        Returns ``(capacity, strict)``: total size must be < 1 - w/(1+eps), or
        at most 1 when the window is below s'_min.
        """
        if t == self.t_max:
            return Fraction(1), False
        return 1 - self._sizes[t + 1], True


def build_window_universe(small_items: Iterable[Item], k: int | None, epsilon: Fraction, problem: Problem) -> WindowUniverse:
    sizes = [it.size for it in small_items if it.size > 0]
    return WindowUniverse(epsilon, problem, k, min(sizes) if sizes else None)


def main_window(config: Configuration, universe: WindowUniverse, k: int | None = None) -> Window:
    """Largest grid window that still covers the free space 1 - s'(C)."""
    free = 1 - config.size
    if free <= 0 or universe.degenerate:
        t = universe.t_max
    else:
        # first estimate from logs, then fix up exactly
        t = int(math.floor(math.log(float(free)) / math.log(float(universe._ratio))))
        t = min(max(t, 0), universe.t_max)
        while t > 0 and universe.size(t) < free:
            t -= 1
        while t < universe.t_max and universe.size(t + 1) >= free:
            t += 1
    if universe.has_count:
        k = universe.k if k is None else k
        return Window(t, k - config.item_count)
    return Window(t)


def window_leq(a: Window, b: Window) -> bool:
    """Componentwise order: smaller size means larger ``t``."""
    if a.t < b.t:
        return False
    if a.count is None or b.count is None:
        return a.count is None and b.count is None
    return a.count <= b.count


def is_valid_generalized(config: Configuration, window: Window, universe: WindowUniverse, k: int | None = None) -> bool:
    main = main_window(config, universe, k)
    return window in universe and window_leq(window, main)
