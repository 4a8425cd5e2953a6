from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afptas.assembly import PackedBin, Packing
from afptas.core import Instance, Item, Problem
from afptas.errors import TooLarge
from afptas.pricing import PricingItem, PricingProblem
from afptas.verify import brute_knapsack, check, exact_bpcc, exact_bpr, ffd_baseline

F = Fraction


def bpcc(sizes, k):
    return Instance(Problem.BPCC, tuple(Item(i, F(s)) for i, s in enumerate(sizes)), k, F(1, 3))


def bpr(pairs):
    return Instance(Problem.BPR, tuple(Item(i, F(s), F(r)) for i, (s, r) in enumerate(pairs)), None, F(1, 3))


def packing(bins, rejected=(), cost=None):
    bins = tuple(PackedBin(tuple(b)) for b in bins)
    return Packing(bins, tuple(rejected), F(len(bins)) if cost is None else cost)


def test_check_ok():
    assert check(packing([[0, 1]]), bpcc(["0.6", "0.4"], 2)) == []


def test_check_size_violation():
    out = check(packing([[0, 1]]), bpcc(["0.6", "0.6"], 2))
    assert any("exceeds 1" in o for o in out)


def test_check_cardinality_violation():
    out = check(packing([[0, 1, 2]]), bpcc(["0.1"] * 3, 2))
    assert any("k=2" in o for o in out)


def test_check_coverage_and_duplicates():
    inst = bpcc(["0.1"] * 3, 3)
    assert any("never packed" in o for o in check(packing([[0, 1]]), inst))
    assert any("appears 2 times" in o for o in check(packing([[0, 1], [1, 2]]), inst))


def test_check_cost_arithmetic():
    inst = bpr([("0.5", "0.25"), ("0.5", "1")])
    assert check(packing([[1]], [0], F(5, 4)), inst) == []
    assert check(packing([[1]], [0], F(1)), inst)


def test_exact_examples():
    assert exact_bpcc(bpcc(["0.5"] * 3, 2)).opt_cost == 2
    assert exact_bpcc(bpcc(["0.6"] * 3 + ["0.4"] * 3, 2)).opt_cost == 3
    assert exact_bpr(bpr([("0.5", "1")] * 2)).opt_cost == 1


def test_exact_limits():
    with pytest.raises(TooLarge):
        exact_bpcc(bpcc(["0.1"] * 13, 3))
    with pytest.raises(TooLarge):
        exact_bpr(bpr([("0.1", "0.5")] * 11))


def test_ffd_examples():
    assert ffd_baseline(bpcc(["0.6", "0.6", "0.4", "0.4"], 2)).num_bins == 2
    assert ffd_baseline(bpcc(["0.3"], 2)).num_bins == 1
    p = ffd_baseline(bpr([("0.9", "0.05")]))
    assert p.rejected == (0,) and p.cost == F(5, 100)


def test_brute_knapsack_examples():
    items = (PricingItem(0, 3.0, F(1, 2), 2), PricingItem(1, 2.0, F(3, 10), 3))
    assert brute_knapsack(PricingProblem(items, F(1), False, 2)) == 6.0
    with pytest.raises(TooLarge):
        brute_knapsack(PricingProblem((PricingItem(0, 1.0, F(1, 10), 21),), F(1)))


def _partitions(n):
    """All set partitions of range(n), as lists of blocks."""
    if n == 0:
        yield []
        return
    for part in _partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n - 1]] + part[i + 1 :]
        yield part + [[n - 1]]


def _classic_opt(sizes, k):
    # exhaustive over all set partitions; independent of the branch and bound
    return min(
        len(p) for p in _partitions(len(sizes)) if all(sum(sizes[i] for i in b) <= 1 and len(b) <= k for b in p)
    )


def _bpr_opt(sizes, pens):
    best = None
    n = len(sizes)
    for mask in itertools.product([False, True], repeat=n):
        kept = [i for i in range(n) if mask[i]]
        cost = sum(pens[i] for i in range(n) if not mask[i])
        cost += _classic_opt([sizes[i] for i in kept], n) if kept else 0
        best = cost if best is None else min(best, cost)
    return best


@settings(max_examples=120, deadline=None)
@given(st.lists(st.integers(1, 100), min_size=1, max_size=7), st.integers(1, 7))
def test_exact_bpcc_matches_partition_enumeration(raw, k):
    sizes = [F(v, 100) for v in raw]
    inst = bpcc(sizes, k)
    res = exact_bpcc(inst)
    assert res.opt_cost == _classic_opt(sizes, k)
    assert check(res.witness, inst) == []
    assert ffd_baseline(inst).cost >= res.opt_cost


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 100), st.integers(1, 100)), min_size=1, max_size=6))
def test_exact_bpr_matches_enumeration(raw):
    sizes = [F(s, 100) for s, _ in raw]
    pens = [F(r, 100) for _, r in raw]
    inst = bpr(list(zip(sizes, pens)))
    res = exact_bpr(inst)
    assert res.opt_cost == _bpr_opt(sizes, pens)
    assert check(res.witness, inst) == []
    assert ffd_baseline(inst).cost >= res.opt_cost
