"""Exact checkers, exact solvers for tiny instances, and baselines.

Nothing here is used by the schemes themselves; these are the oracles the tests
and the ``compare`` command measure them against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .assembly import PackedBin, Packing, make_packing
from .core import Instance, Problem
from .errors import TooLarge
from .pricing import PricingProblem, capacity_units

EXACT_BPCC_LIMIT = 12
EXACT_BPR_LIMIT = 10
BRUTE_KNAPSACK_LIMIT = 20


def check(packing: Packing, instance: Instance) -> list[str]:
    """All violations of feasibility and cost, in exact arithmetic; empty means valid."""
    out: list[str] = []
    by_id = instance.by_id
    seen: dict[int, int] = {}
    for b, bin_ in enumerate(packing.bins):
        total = Fraction(0)
        for iid in bin_.items:
            if iid not in by_id:
                out.append(f"bin {b}: unknown item {iid}")
                continue
            seen[iid] = seen.get(iid, 0) + 1
            total += by_id[iid].size
        if total > 1:
            out.append(f"bin {b}: total size {total} exceeds 1")
        if instance.problem is Problem.BPCC and len(bin_.items) > instance.k:
            out.append(f"bin {b}: {len(bin_.items)} items exceed k={instance.k}")
    for iid in packing.rejected:
        if iid not in by_id:
            out.append(f"rejected unknown item {iid}")
            continue
        if instance.problem is Problem.BPCC:
            out.append(f"item {iid} rejected in a BPCC instance")
        seen[iid] = seen.get(iid, 0) + 1
    for iid, c in seen.items():
        if c > 1:
            out.append(f"item {iid} appears {c} times")
    missing = [it.id for it in instance.items if it.id not in seen]
    if missing:
        out.append(f"items never packed or rejected: {missing[:10]}")
    if not out:
        pen = sum((by_id[i].penalty for i in packing.rejected), Fraction(0))
        expected = len(packing.bins) + pen
        if packing.cost != expected:
            out.append(f"reported cost {packing.cost} but bins + penalties = {expected}")
    return out


@dataclass(frozen=True)
class ExactResult:
    opt_cost: Fraction
    witness: Packing
    nodes_explored: int


def _units(instance: Instance):
    den = 1
    for it in instance.items:
        den = math.lcm(den, it.size.denominator)
    return den, [int(it.size * den) for it in instance.items]


def exact_bpcc(instance: Instance) -> ExactResult:
    """Optimal BPCC packing by branch and bound (n <= 12)."""
    n = instance.n
    if n > EXACT_BPCC_LIMIT:
        raise TooLarge(f"exact BPCC oracle handles n <= {EXACT_BPCC_LIMIT}, got {n}")
    k = instance.k
    den, units = _units(instance)
    order = sorted(range(n), key=lambda i: (-units[i], i))
    sizes = [units[i] for i in order]
    suffix = [0] * (n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] + sizes[p]

    best_bins = ffd_baseline(instance).bins
    best = [len(best_bins), [list(b.items) for b in best_bins]]
    nodes = 0
    memo: dict = {}
    loads: list[int] = []
    counts: list[int] = []
    members: list[list[int]] = []

    def lower(p):
        free = sum(den - l for l in loads)
        slots = sum(k - c for c in counts)
        extra_size = max(0, -(-(suffix[p] - free) // den))
        extra_count = max(0, -(-((n - p) - slots) // k))
        return len(loads) + max(extra_size, extra_count)

    def dfs(p):
        nonlocal nodes
        nodes += 1
        if p == n:
            if len(loads) < best[0]:
                best[0] = len(loads)
                best[1] = [[instance.items[order[i]].id for i in m] for m in members]
            return
        if lower(p) >= best[0]:
            return
        key = (p, tuple(sorted(zip(loads, counts))))
        if key in memo:
            return
        memo[key] = True
        s = sizes[p]
        tried = set()
        for b in range(len(loads)):
            state = (loads[b], counts[b])
            if state in tried or loads[b] + s > den or counts[b] >= k:
                continue
            tried.add(state)
            loads[b] += s
            counts[b] += 1
            members[b].append(p)
            dfs(p + 1)
            members[b].pop()
            counts[b] -= 1
            loads[b] -= s
        if len(loads) + 1 < best[0]:
            loads.append(s)
            counts.append(1)
            members.append([p])
            dfs(p + 1)
            members.pop()
            counts.pop()
            loads.pop()

    dfs(0)
    witness = make_packing([PackedBin(tuple(b)) for b in best[1]], (), instance)
    return ExactResult(Fraction(best[0]), witness, nodes)


def exact_bpr(instance: Instance) -> ExactResult:
    """Optimal BPR solution by branch and bound over pack-or-reject (n <= 10)."""
    n = instance.n
    if n > EXACT_BPR_LIMIT:
        raise TooLarge(f"exact BPR oracle handles n <= {EXACT_BPR_LIMIT}, got {n}")
    den, units = _units(instance)
    order = sorted(range(n), key=lambda i: (-units[i], i))
    sizes = [units[i] for i in order]
    pens = [instance.items[i].penalty for i in order]
    # min(r, s) per remaining item bounds the cost of the rest from below
    tail = [Fraction(0)] * (n + 1)
    for p in range(n - 1, -1, -1):
        tail[p] = tail[p + 1] + min(pens[p], Fraction(sizes[p], den))

    ff = ffd_baseline(instance)
    best = [ff.cost, [list(b.items) for b in ff.bins], list(ff.rejected)]
    nodes = 0
    memo: dict = {}
    loads: list[int] = []
    members: list[list[int]] = []
    rejected: list[int] = []

    def dfs(p, pen):
        nonlocal nodes
        nodes += 1
        cost = len(loads) + pen
        if p == n:
            if cost < best[0]:
                ids = lambda idx: instance.items[order[idx]].id
                best[0] = cost
                best[1] = [[ids(i) for i in m] for m in members]
                best[2] = [ids(i) for i in rejected]
            return
        free = Fraction(sum(den - l for l in loads), den)
        if cost + max(Fraction(0), tail[p] - free) >= best[0]:
            return
        key = (p, tuple(sorted(loads)))
        prev = memo.get(key)
        if prev is not None and prev <= pen:
            return
        memo[key] = pen
        s = sizes[p]
        tried = set()
        for b in range(len(loads)):
            if loads[b] in tried or loads[b] + s > den:
                continue
            tried.add(loads[b])
            loads[b] += s
            members[b].append(p)
            dfs(p + 1, pen)
            members[b].pop()
            loads[b] -= s
        loads.append(s)
        members.append([p])
        dfs(p + 1, pen)
        members.pop()
        loads.pop()
        rejected.append(p)
        dfs(p + 1, pen + pens[p])
        rejected.pop()

    dfs(0, Fraction(0))
    witness = make_packing([PackedBin(tuple(b)) for b in best[1]], best[2], instance)
    return ExactResult(witness.cost, witness, nodes)


def exact_opt(instance: Instance) -> ExactResult:
    return exact_bpr(instance) if instance.problem is Problem.BPR else exact_bpcc(instance)


def ffd_baseline(instance: Instance) -> Packing:
    """First Fit Decreasing; BPR rejects an item whenever that is cheaper than opening a bin."""
    items = sorted(instance.items, key=lambda it: (-it.size, it.id))
    loads: list[Fraction] = []
    bins: list[list[int]] = []
    rejected: list[int] = []
    k = instance.k if instance.problem is Problem.BPCC else None
    for it in items:
        for b, load in enumerate(loads):
            if load + it.size <= 1 and (k is None or len(bins[b]) < k):
                loads[b] += it.size
                bins[b].append(it.id)
                break
        else:
            if instance.problem is Problem.BPR and it.penalty < 1:
                rejected.append(it.id)
            else:
                loads.append(it.size)
                bins.append([it.id])
    return make_packing([PackedBin(tuple(b)) for b in bins], rejected, instance)


def brute_knapsack(problem: PricingProblem) -> float:
    """Exact optimum of a (cardinality-constrained) bounded knapsack by enumeration."""
    items = [it for it in problem.items if it.multiplicity > 0]
    if sum(it.multiplicity for it in items) > BRUTE_KNAPSACK_LIMIT:
        raise TooLarge(f"brute force handles at most {BRUTE_KNAPSACK_LIMIT} copies")
    den = 1
    for it in items:
        den = math.lcm(den, Fraction(it.size).denominator)
    cap = capacity_units(problem.capacity, problem.capacity_strict, den)
    sizes = [int(Fraction(it.size) * den) for it in items]
    best = 0.0
    for combo in itertools.product(*(range(it.multiplicity + 1) for it in items)):
        if problem.cardinality_bound is not None and sum(combo) > problem.cardinality_bound:
            continue
        if sum(c * s for c, s in zip(combo, sizes)) > cap:
            continue
        best = max(best, sum(c * it.profit for c, it in zip(combo, items)))
    return best
