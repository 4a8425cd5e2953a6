"""Knapsack FPTAS oracles used to price columns.

Both oracles share :class:`ProfitTable`, a profit-scaling dynamic program whose
states are (number of copies, scaled profit) and whose entries hold the least
total size reaching that state. Sizes are exact integers over a common
denominator, so strict capacities are honoured without tolerances. Bounded
multiplicities are expanded in binary groups.

One table answers every capacity up to the one it was built for, which lets the
window pricing run a single DP per round instead of one per window size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import Configuration

# profits below this are treated as zero (dividing by them underflows the scale)
MIN_PROFIT = 1e-250


@dataclass(frozen=True)
class PricingItem:
    type_index: int
    profit: float
    size: Fraction
    multiplicity: int


@dataclass(frozen=True)
class PricingProblem:
    items: tuple[PricingItem, ...]
    capacity: Fraction
    capacity_strict: bool = False
    cardinality_bound: int | None = None
    epsilon: Fraction = Fraction(1, 3)


@dataclass(frozen=True)
class PricingAnswer:
    config: Configuration
    value: float
    # rigorous upper bound on the optimum of the priced problem
    upper_bound: float

    def __iter__(self):
        # allows ``config, value = kcc_fptas(p)``
        yield self.config
        yield self.value


def capacity_units(capacity: Fraction, strict: bool, denom: int) -> int:
    """Largest integer ``s`` with ``s/denom`` below (or at) the capacity."""
    scaled = Fraction(capacity) * denom
    if strict:
        return math.ceil(scaled) - 1
    return math.floor(scaled)


@dataclass
class _Group:
    item: int  # index into the filtered item list
    copies: int
    profit: int
    size: int


class ProfitTable:
    """Profit-scaling DP for (cardinality-constrained) bounded knapsack."""

    def __init__(
        self,
        items: Sequence[PricingItem],
        capacity: Fraction,
        strict: bool = False,
        max_cardinality: int | None = None,
        epsilon: Fraction = Fraction(1, 3),
    ):
        self.capacity = Fraction(capacity)
        self.strict = strict
        self.bounded = max_cardinality is not None
        self.max_cardinality = max_cardinality
        self.epsilon = Fraction(epsilon)

        denom = 1
        for it in items:
            denom = math.lcm(denom, Fraction(it.size).denominator)
        self.denom = denom
        self.cap_units = capacity_units(self.capacity, strict, denom)

        usable: list[tuple[PricingItem, int, int]] = []  # (item, size units, copies that fit)
        if self.cap_units >= 0:
            for it in items:
                if it.profit <= MIN_PROFIT or it.multiplicity <= 0:
                    continue
                su = int(Fraction(it.size) * denom)
                if su > self.cap_units:
                    continue
                fit = it.multiplicity if su == 0 else min(it.multiplicity, self.cap_units // su)
                usable.append((it, su, fit))
        self.items = [u[0] for u in usable]
        self._units = [u[1] for u in usable]

        m = sum(u[2] for u in usable)
        self.expanded = m
        if m == 0:
            self.scale = 1.0
            self.max_copies = 0
            self._empty()
            return
        p_max = max(it.profit for it in self.items)
        self.scale = float(self.epsilon) * p_max / m

        # most copies any feasible multiset can hold
        sizes = sorted(su for (_, su, fit) in usable for _ in range(fit))
        used = count = 0
        for su in sizes:
            if used + su > self.cap_units:
                break
            used += su
            count += 1
        self.max_copies = count
        card_cap = count if not self.bounded else min(count, max_cardinality)

        groups: list[_Group] = []
        scaled = [int(math.floor(it.profit / self.scale)) for it in self.items]
        for idx, ((it, su, fit), sp) in enumerate(zip(usable, scaled)):
            if sp <= 0:
                continue
            left, q = fit, 1
            while left > 0:
                take = min(q, left)
                groups.append(_Group(idx, take, take * sp, take * su))
                left -= take
                q *= 2
        self.groups = groups

        top = max(scaled) if scaled else 0
        p_dim = min(sum(g.profit for g in groups), card_cap * top) + 1
        self._fill(card_cap + 1, p_dim)

    def _empty(self):
        self.groups = []
        self._best = np.zeros((1, 1), dtype=np.int64)
        self._masks = []
        self._suffix = self._best.copy()

    def _fill(self, c_dim: int, p_dim: int):
        big = self.cap_units + 1
        use_int = big < 2**40
        dtype = np.int64 if use_int else object
        best = np.full((c_dim, p_dim), big, dtype=dtype)
        best[0, 0] = 0
        masks = []
        for g in self.groups:
            dc = g.copies
            if dc >= c_dim or g.profit >= p_dim:
                masks.append(None)
                continue
            src = best[: c_dim - dc, : p_dim - g.profit]
            dst = best[dc:, g.profit :]
            cand = src + g.size
            mask = (cand < dst) & (cand <= self.cap_units)
            dst[mask] = cand[mask]
            masks.append(mask)
        self._best = best
        self._masks = masks
        # suffix minimum over profit makes "largest profit within capacity" a sorted search
        self._suffix = np.minimum.accumulate(best[:, ::-1], axis=1)[:, ::-1]

    # -- queries ---------------------------------------------------------

    def row_profits(self, capacity_units: int) -> np.ndarray:
        """Largest scaled profit reachable with exactly ``c`` copies, per row (-1 if none)."""
        rows = []
        for r in range(self._suffix.shape[0]):
            suffix = self._suffix[r]
            if suffix[0] > capacity_units:
                rows.append(-1)
                continue
            rows.append(int(np.searchsorted(suffix.astype(np.float64) if suffix.dtype == object else suffix, capacity_units, side="right")) - 1)
        return np.asarray(rows, dtype=np.int64)

    def _pick(self, rows: np.ndarray, limit: int) -> tuple[int, int]:
        best_state = (0, 0)
        best_key = None
        for r in range(min(limit, len(rows) - 1) + 1):
            p = int(rows[r])
            if p < 0:
                continue
            key = (-p, self._best[r, p], r)
            if best_key is None or key < best_key:
                best_key = key
                best_state = (r, p)
        return best_state

    def upper_bounds(self, rows: np.ndarray, cardinalities: np.ndarray) -> np.ndarray:
        """Rigorous bounds on the true optimum for each cardinality limit.

        An optimal multiset with c copies loses less than the scale per copy
        to flooring (copies whose scaled profit is 0 lose their whole profit,
        which is below the scale too), so its profit is below
        scale * (best scaled profit with at most c copies + c).
        """
        cardinalities = np.asarray(cardinalities, dtype=np.int64)
        if self.expanded == 0:
            return np.zeros(len(cardinalities))
        prefix = np.maximum.accumulate(np.maximum(rows, 0))
        idx = np.minimum(cardinalities, len(prefix) - 1)
        copies = np.minimum(cardinalities, self.max_copies)
        return self.scale * (prefix[idx] + copies) * (1 + 1e-12)

    def _upper(self, rows: np.ndarray, limit: int) -> float:
        return float(self.upper_bounds(rows, np.array([limit]))[0])

    def reconstruct(self, row: int, profit: int) -> dict[int, int]:
        counts: dict[int, int] = {}
        c, p = row, profit
        for g, mask in zip(reversed(self.groups), reversed(self._masks)):
            if mask is None:
                continue
            dc = g.copies
            if c >= dc and p >= g.profit and mask[c - dc, p - g.profit]:
                counts[g.item] = counts.get(g.item, 0) + g.copies
                c -= dc
                p -= g.profit
        assert c == 0 and p == 0, "DP reconstruction did not return to the origin"
        return counts

    def answer(self, capacity: Fraction | None = None, strict: bool | None = None, cardinality: int | None = None) -> PricingAnswer:
        """Best multiset for a capacity no larger than the table's own."""
        cap_units = self.cap_units if capacity is None else capacity_units(capacity, self.strict if strict is None else strict, self.denom)
        rows = self.row_profits(cap_units)
        limit = self._limit(cardinality)
        row, prof = self._pick(rows, limit)
        return self._answer(row, prof, self._upper(rows, limit))

    def sweep(self, max_cardinality: int, capacity: Fraction | None = None, strict: bool | None = None) -> list[PricingAnswer]:
        cap_units = self.cap_units if capacity is None else capacity_units(capacity, self.strict if strict is None else strict, self.denom)
        rows = self.row_profits(cap_units)
        out = []
        for c in range(max_cardinality + 1):
            limit = self._limit(c)
            row, prof = self._pick(rows, limit)
            out.append(self._answer(row, prof, self._upper(rows, limit)))
        return out

    @property
    def top_row(self) -> int:
        """Largest number of copies any feasible multiset can hold."""
        return self._best.shape[0] - 1

    def _limit(self, cardinality: int | None) -> int:
        return self.top_row if cardinality is None else cardinality

    def estimates(self, rows: np.ndarray, cardinalities: np.ndarray) -> np.ndarray:
        """``scale * best scaled profit`` for each cardinality limit (a lower bound on what reconstruct yields)."""
        cardinalities = np.asarray(cardinalities, dtype=np.int64)
        prefix = np.maximum.accumulate(np.maximum(rows, 0))
        return self.scale * prefix[np.minimum(cardinalities, len(prefix) - 1)]

    def _answer(self, row: int, prof: int, upper: float) -> PricingAnswer:
        counts = self.reconstruct(row, prof) if prof > 0 else {}
        pairs = tuple(sorted((self.items[i].type_index, c) for i, c in counts.items()))
        size = sum((Fraction(self.items[i].size) * c for i, c in counts.items()), Fraction(0))
        value = float(sum(self.items[i].profit * c for i, c in counts.items()))
        config = Configuration(pairs, size, sum(c for _, c in pairs))
        return PricingAnswer(config, value, max(upper, value))


def kcc_fptas(problem: PricingProblem) -> PricingAnswer:
    """(1-eps)-approximate knapsack with a cardinality bound over typed items."""
    if problem.cardinality_bound is None:
        raise ValueError("kcc_fptas needs a cardinality bound; use knapsack_fptas")
    table = ProfitTable(problem.items, problem.capacity, problem.capacity_strict, problem.cardinality_bound, problem.epsilon)
    return table.answer(cardinality=problem.cardinality_bound)


def knapsack_fptas(problem: PricingProblem) -> PricingAnswer:
    """(1-eps)-approximate bounded knapsack over typed items."""
    if problem.cardinality_bound is not None:
        return kcc_fptas(problem)
    table = ProfitTable(problem.items, problem.capacity, problem.capacity_strict, None, problem.epsilon)
    return table.answer()


def kcc_sweep(items, capacity, capacity_strict, max_cardinality, epsilon) -> list[PricingAnswer]:
    """Answers for every cardinality bound 0..max_cardinality from one DP."""
    table = ProfitTable(items, capacity, capacity_strict, max_cardinality, epsilon)
    return table.sweep(max_cardinality)
