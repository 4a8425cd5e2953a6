"""From a basic LP solution to an integral packing.

Stages:

* LARGE: migrate onto main windows, round x up, evict small items whose
  assignment is fractional, fill configuration slots with real items, one bin
  per set-aside item.
* INTER: deal small items round-robin into the bins of their window and take
  the largest one back out of every bin that got any.
* FINAL: greedy repack of each bin in non-decreasing size order; overflow and
  leftovers go to group bins.

All feasibility decisions use exact fractions. Large items are accounted with
their rounded sizes until the end, which only over-estimates the load.
"""

from __future__ import annotations

import enum
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .config import EMPTY, GeneralizedConfiguration, Window, WindowUniverse, main_window
from .core import Instance, Item, Problem, RoundedInstance, format_exact, inverse_epsilon, to_fraction
from .errors import InternalInvariantViolation
from .lp.master import FractionalSolution

ROUND_TOL = 1e-7


class Stage(str, enum.Enum):
    LARGE = "LARGE"
    INTER = "INTER"
    FINAL = "FINAL"


@dataclass(frozen=True)
class PackedBin:
    large: tuple[int, ...]
    small: tuple[int, ...] = ()

    @property
    def items(self) -> tuple[int, ...]:
        return self.large + self.small


@dataclass(frozen=True)
class Packing:
    bins: tuple[PackedBin, ...]
    rejected: tuple[int, ...]
    cost: Fraction

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def to_dict(self) -> dict:
        return {
            "bins": [list(b.items) for b in self.bins],
            "rejected": sorted(self.rejected),
            "cost": format_exact(self.cost),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Packing":
        bins = tuple(PackedBin(tuple(int(i) for i in b)) for b in data.get("bins", []))
        rejected = tuple(int(i) for i in data.get("rejected", []))
        return cls(bins, rejected, to_fraction(str(data.get("cost", "0"))))


def packing_cost(bins: Sequence[PackedBin], rejected: Sequence[int], instance: Instance) -> Fraction:
    by_id = instance.by_id
    pen = sum((by_id[i].penalty for i in rejected), Fraction(0))
    return len(bins) + pen


def make_packing(bins: Sequence[PackedBin], rejected: Sequence[int], instance: Instance) -> Packing:
    kept = tuple(b for b in bins if b.items)
    rej = tuple(sorted(rejected))
    return Packing(kept, rej, packing_cost(kept, rej, instance))


# ---------------------------------------------------------------------------
# staged state


@dataclass
class BinState:
    label: str  # "config" | "evicted" | "group" | "leftover" | "set_aside" | "zero"
    column: GeneralizedConfiguration | None = None
    copy: int = 0
    weight: float = 1.0
    large: list[int] = field(default_factory=list)
    small: list[int] = field(default_factory=list)

    @property
    def window(self) -> Window | None:
        return None if self.column is None else self.column.window


@dataclass
class Diagnostics:
    """Quantities behind the structural checks, recorded while assembling."""

    migration_x_error: float = 0.0
    migration_y_error: float = 0.0
    fractional_x: int = 0
    fractional_items: int = 0
    num_types: int = 0
    num_windows: int = 0
    rounding_overhead: float = 0.0
    evicted: int = 0
    # (window, bin small total after removal, bound) with exact fractions
    balance: list[tuple[Window, Fraction, Fraction]] = field(default_factory=list)
    # (window, leftover size, leftover count, size bound, count bound or None)
    leftovers: list[tuple[Window, Fraction, int, Fraction, Fraction | None]] = field(default_factory=list)
    zero_window_spill: int = 0
    # windows whose integral assignment broke an LP row by float noise
    row_violations: list[Window] = field(default_factory=list)
    count_axis: bool = True

    @property
    def support_bound(self) -> int:
        return self.num_types + (2 if self.count_axis else 1) * self.num_windows


@dataclass
class StagedSolution:
    stage: Stage
    bins: list[BinState]
    rejected: list[int]
    displaced: list[int]  # items waiting for a group bin, one at a time
    leftover_groups: list[list[int]]  # per-bin leftover sets, grouped together later
    diagnostics: Diagnostics
    costs: dict[str, Fraction] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# migration and rounding


def migrate_to_active_windows(sol: FractionalSolution, universe: WindowUniverse | None) -> FractionalSolution:
    """Move every column to its main window, carrying Y mass proportionally."""
    if universe is None:
        return sol
    by_window: dict[Window, list[tuple[GeneralizedConfiguration, float]]] = defaultdict(list)
    for gc, val in sol.x.items():
        by_window[gc.window].append((gc, val))
    new_x: dict[GeneralizedConfiguration, float] = defaultdict(float)
    for gc, val in sol.x.items():
        new_x[GeneralizedConfiguration(gc.config, main_window(gc.config, universe))] += val
    new_y: dict[tuple[int, Window], float] = defaultdict(float)
    for (iid, w), val in sol.y.items():
        cols = by_window.get(w)
        total = sum(v for _, v in cols) if cols else 0.0
        if not cols or total <= 0:
            new_y[(iid, w)] += val
            continue
        for gc, xv in cols:
            new_y[(iid, main_window(gc.config, universe))] += val * xv / total
    return FractionalSolution(dict(new_x), dict(new_y), dict(sol.z_type), dict(sol.z_item), sol.objective, False)


def check_migration(before: FractionalSolution, after: FractionalSolution, diag: Diagnostics):
    diag.migration_x_error = abs(before.total_x - after.total_x)
    per_config_b: dict = defaultdict(float)
    per_config_a: dict = defaultdict(float)
    for gc, v in before.x.items():
        per_config_b[gc.config] += v
    for gc, v in after.x.items():
        per_config_a[gc.config] += v
    err = max((abs(per_config_b[c] - per_config_a[c]) for c in per_config_b), default=0.0)
    diag.migration_x_error = max(diag.migration_x_error, err)
    yb: dict = defaultdict(float)
    ya: dict = defaultdict(float)
    for (i, _), v in before.y.items():
        yb[i] += v
    for (i, _), v in after.y.items():
        ya[i] += v
    diag.migration_y_error = max((abs(yb[i] - ya[i]) for i in set(yb) | set(ya)), default=0.0)


@dataclass
class RoundedSolution:
    xhat: dict[GeneralizedConfiguration, int]
    weights: dict[GeneralizedConfiguration, float]
    assignment: dict[int, Window]  # small item id -> window
    rejected_small: list[int]
    evicted: list[int]
    rejected_types: dict[int, float]


def round_up_and_evict(
    sol: FractionalSolution, rounded: RoundedInstance, diag: Diagnostics | None = None, tol: float = ROUND_TOL
) -> RoundedSolution:
    xhat, weights = {}, {}
    frac_x = 0
    for gc, val in sol.x.items():
        n = math.ceil(val - tol)
        if abs(val - round(val)) > tol:
            frac_x += 1
        if n > 0:
            xhat[gc] = n
            weights[gc] = val
    per_item: dict[int, list[tuple[Window, float]]] = defaultdict(list)
    for (iid, w), val in sol.y.items():
        if val > tol:
            per_item[iid].append((w, val))
    assignment, rejected, evicted = {}, [], []
    frac_items = 0
    for it in rounded.small_items:
        comps = list(per_item.get(it.id, ()))
        z = sol.z_item.get(it.id, 0.0)
        if z > tol:
            comps.append((None, z))
        if len(comps) >= 2:
            frac_items += 1
        whole = [(w, v) for w, v in comps if v >= 1 - tol]
        if whole:
            w = whole[0][0]
            if w is None:
                rejected.append(it.id)
            else:
                assignment[it.id] = w
        else:
            evicted.append(it.id)
    if diag is not None:
        diag.fractional_x = frac_x
        diag.fractional_items = frac_items
        diag.num_types = len(rounded.item_types)
        diag.num_windows = len({gc.window for gc in sol.x if gc.window is not None})
        diag.rounding_overhead = sum(xhat.values()) - sol.total_x
        diag.evicted = len(evicted)
    return RoundedSolution(xhat, weights, assignment, rejected, evicted, dict(sol.z_type))


def build_large_stage(rs: RoundedSolution, rounded: RoundedInstance, diag: Diagnostics) -> StagedSolution:
    """SOL_large: bins for each rounded-up column, filled with the real large items."""
    source = rounded.source
    bins: list[BinState] = []
    for gc in sorted(rs.xhat, key=_column_order):
        x = rs.weights[gc]
        for j in range(rs.xhat[gc]):
            bins.append(BinState("config", gc, j, min(1.0, max(0.0, x - j))))

    rejected: list[int] = list(rs.rejected_small)
    # slots per type, heavier copies first so that light copies are the ones left empty
    slots: dict[int, list[int]] = defaultdict(list)
    order = sorted(range(len(bins)), key=lambda b: (-bins[b].weight, b))
    for b in order:
        for v, c in bins[b].column.config.counts:
            slots[v].extend([b] * c)
    for v, t in enumerate(rounded.item_types):
        ids = list(t.item_ids)
        free = len(slots[v])
        if free < len(ids):
            if rounded.problem is not Problem.BPR:
                raise InternalInvariantViolation(f"type {v}: {len(ids)} items but {free} slots")
            # reject the cheapest items by original penalty
            ids.sort(key=lambda i: (source.by_id[i].penalty, i))
            rejected.extend(ids[: len(ids) - free])
            ids = ids[len(ids) - free :]
        ids.sort()
        for iid, b in zip(ids, slots[v]):
            bins[b].large.append(iid)

    if rounded.problem is Problem.BPR:
        # an item whose assignment stayed fractional costs at most one bin if rejected
        rejected.extend(rs.evicted)
    else:
        bins.extend(BinState("evicted", small=[iid]) for iid in rs.evicted)
    return StagedSolution(Stage.LARGE, bins, rejected, [], [], diag)


def _column_order(gc: GeneralizedConfiguration):
    w = gc.window
    return (w is None, w.t if w else 0, -(w.count or 0) if w else 0, gc.config.counts)


# ---------------------------------------------------------------------------
# small items


def round_robin(items: Sequence, bins: int) -> list[list]:
    """Deal items (already sorted by non-increasing size) to ``bins`` piles in turn."""
    piles: list[list] = [[] for _ in range(bins)]
    for j, it in enumerate(items):
        piles[j % bins].append(it)
    return piles


def greedy_refill(load: Fraction, count: int, sizes: Sequence[Fraction], k: int | None = None) -> int:
    """Number of leading ``sizes`` (non-decreasing) that fit next to ``load`` and ``count`` items."""
    taken = 0
    for s in sizes:
        if load + s > 1 or (k is not None and count + 1 > k):
            break
        load += s
        count += 1
        taken += 1
    return taken


def place_small_items(
    staged: StagedSolution, rs: RoundedSolution, rounded: RoundedInstance, universe: WindowUniverse
) -> StagedSolution:
    """Round-robin placement per window, then remove each bin's largest small item."""
    src = rounded.source.by_id
    eps = rounded.epsilon
    by_window: dict[Window, list[int]] = defaultdict(list)
    for b, st in enumerate(staged.bins):
        if st.label == "config":
            by_window[st.window].append(b)
    items_by_window: dict[Window, list[Item]] = defaultdict(list)
    for iid, w in rs.assignment.items():
        items_by_window[w].append(src[iid])

    displaced = list(staged.displaced)
    rejected = list(staged.rejected)
    for w in sorted(items_by_window):
        items = sorted(items_by_window[w], key=lambda it: (-it.size, it.id))
        bins = by_window.get(w, [])
        X = len(bins)
        total = sum((it.size for it in items), Fraction(0))
        w_s = universe.window_size(w)
        if X == 0 or total > w_s * X or (w.count is not None and len(items) > w.count * X):
            staged.diagnostics.row_violations.append(w)
            if X == 0:
                displaced.extend(it.id for it in items)
                continue
        for b, pile in zip(bins, round_robin(items, X)):
            staged.bins[b].small.extend(it.id for it in pile)
        if universe.is_zero_window(w):
            continue
        bound = total / X
        for b in bins:
            st = staged.bins[b]
            if not st.small:
                continue
            first = st.small.pop(0)
            it = src[first]
            if rounded.problem is Problem.BPR and it.penalty < eps:
                rejected.append(first)
            else:
                displaced.append(first)
            after = sum((src[i].size for i in st.small), Fraction(0))
            staged.diagnostics.balance.append((w, after, bound))
    return StagedSolution(Stage.INTER, staged.bins, rejected, displaced, [], staged.diagnostics, dict(staged.costs))


def repack_final(staged: StagedSolution, rounded: RoundedInstance, universe: WindowUniverse | None) -> StagedSolution:
    """Greedy non-decreasing refill of each bin; overflow and leftovers are displaced."""
    src = rounded.source.by_id
    rsize = rounded.rounded_size
    eps = rounded.epsilon
    k = rounded.k
    displaced = list(staged.displaced)
    rejected = list(staged.rejected)
    leftover_groups: list[list[int]] = []
    for st in staged.bins:
        if not st.small or st.label != "config":
            continue
        load = sum((rsize[i] for i in st.large), Fraction(0))
        count = len(st.large)
        queue = sorted(st.small, key=lambda i: (src[i].size, i))
        pos = greedy_refill(load, count, [src[i].size for i in queue], k)
        st.small = queue[:pos]
        if pos == len(queue):
            continue
        over = queue[pos]
        if rounded.problem is Problem.BPR and src[over].penalty < eps:
            rejected.append(over)
        else:
            displaced.append(over)
        rest = queue[pos + 1 :]
        w = st.window
        if universe is not None and w is not None:
            if universe.is_zero_window(w):
                staged.diagnostics.zero_window_spill += len(rest) + 1
            else:
                size = sum((src[i].size for i in rest), Fraction(0))
                w_s = universe.window_size(w)
                cnt_bound = eps * w.count if w.count is not None else None
                staged.diagnostics.leftovers.append((w, size, len(rest), eps * w_s / (1 + eps), cnt_bound))
        if rest:
            leftover_groups.append(rest)

    # group bins: displaced items 1/eps at a time, leftovers of 1/eps bins at a time
    per = inverse_epsilon(eps)
    bins = list(staged.bins)
    bins.extend(_group(displaced, per, src, k, "group"))
    merged: list[list[int]] = []
    for p in range(0, len(leftover_groups), per):
        merged.append([i for grp in leftover_groups[p : p + per] for i in grp])
    for grp in merged:
        bins.extend(_group(grp, None, src, k, "leftover"))
    return StagedSolution(Stage.FINAL, bins, rejected, [], [], staged.diagnostics, dict(staged.costs))


def _group(ids: Sequence[int], per: int | None, src, k: int | None, label: str) -> list[BinState]:
    """Pack items in order, ``per`` to a bin, never exceeding size 1 or k items."""
    out: list[BinState] = []
    cur: list[int] = []
    load = Fraction(0)
    for iid in ids:
        s = src[iid].size
        full = (per is not None and len(cur) >= per) or load + s > 1 or (k is not None and len(cur) >= k)
        if cur and full:
            out.append(BinState(label, small=cur))
            cur, load = [], Fraction(0)
        cur.append(iid)
        load += s
    if cur:
        out.append(BinState(label, small=cur))
    return out


def attach_set_aside(staged: StagedSolution, set_aside: Sequence[Item]) -> StagedSolution:
    bins = list(staged.bins) + [BinState("set_aside", large=[it.id]) for it in set_aside]
    return StagedSolution(staged.stage, bins, staged.rejected, staged.displaced, staged.leftover_groups, staged.diagnostics, dict(staged.costs))


def place_zero_items(staged: StagedSolution, zero_items: Sequence[Item]) -> StagedSolution:
    """BPR items of size 0 ride along in any bin; with no bin at all, the cheaper of one bin or rejection."""
    if not zero_items:
        return staged
    ids = [it.id for it in zero_items]
    bins = list(staged.bins)
    rejected = list(staged.rejected)
    target = next((b for b in bins if b.large or b.small), None)
    if target is not None:
        target.small.extend(ids)
    elif sum((it.penalty for it in zero_items), Fraction(0)) < 1:
        rejected.extend(ids)
    else:
        bins.append(BinState("zero", small=ids))
    return StagedSolution(staged.stage, bins, rejected, staged.displaced, staged.leftover_groups, staged.diagnostics, dict(staged.costs))


def stage_cost(staged: StagedSolution, instance: Instance) -> Fraction:
    nonempty = sum(1 for b in staged.bins if b.large or b.small)
    groups = len(staged.displaced)
    per = inverse_epsilon(instance.epsilon)
    pen = sum((instance.by_id[i].penalty for i in staged.rejected), Fraction(0))
    return nonempty + math.ceil(groups / per) + pen


def to_packing(staged: StagedSolution, instance: Instance) -> Packing:
    bins = [PackedBin(tuple(b.large), tuple(b.small)) for b in staged.bins]
    return make_packing(bins, staged.rejected, instance)


def assemble(
    sol: FractionalSolution,
    rounded: RoundedInstance,
    universe: WindowUniverse | None,
    diag: Diagnostics | None = None,
) -> tuple[Packing, StagedSolution]:
    """Run every rounding stage on a basic solution already supported on main windows."""
    diag = diag or Diagnostics()
    diag.count_axis = universe is not None and universe.has_count
    instance = rounded.source
    rs = round_up_and_evict(sol, rounded, diag)
    staged = build_large_stage(rs, rounded, diag)
    staged = attach_set_aside(staged, rounded.set_aside)
    costs = {Stage.LARGE.value: stage_cost(staged, instance)}
    if universe is not None:
        staged = place_small_items(staged, rs, rounded, universe)
        costs[Stage.INTER.value] = stage_cost(staged, instance)
    staged = repack_final(staged, rounded, universe)
    staged = place_zero_items(staged, rounded.zero_items)
    packing = to_packing(staged, instance)
    costs[Stage.FINAL.value] = packing.cost
    staged.costs = costs
    return packing, staged
