from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afptas.core import (
    CaseTag,
    Instance,
    Item,
    Problem,
    case_of,
    format_exact,
    linear_grouping,
    round_instance,
    round_penalties,
    snap_epsilon,
    split_large_small,
    to_fraction,
    validate_and_normalize,
)
from afptas.errors import InvalidCardinality, InvalidEpsilon, InvalidItem

F = Fraction


def bpcc(sizes, k=2, eps=F(1, 3)):
    return Instance(Problem.BPCC, tuple(Item(i, F(s)) for i, s in enumerate(sizes)), k, eps)


def bpr(pairs, eps=F(1, 3)):
    return Instance(Problem.BPR, tuple(Item(i, F(s), F(r)) for i, (s, r) in enumerate(pairs)), None, eps)


# -- validation -------------------------------------------------------------


def test_penalty_above_one_is_clamped():
    inst = validate_and_normalize(bpr([("0.5", "3.2")]))
    assert inst.items[0].penalty == 1


def test_valid_bpcc_unchanged():
    raw = bpcc(["0.5", "0.25"], k=3, eps=F(1, 4))
    inst = validate_and_normalize(raw)
    assert inst.items == raw.items and inst.k == 3 and inst.epsilon == F(1, 4) and not inst.warnings


def test_epsilon_snaps_down_to_unit_fraction():
    inst = validate_and_normalize(bpcc(["0.5"], eps=F(3, 10)))
    assert inst.epsilon == F(1, 4)
    assert inst.warnings


def test_bpr_epsilon_is_capped_at_a_third():
    eps, note = snap_epsilon(F(1, 2), Problem.BPR)
    assert eps == F(1, 3) and note


@pytest.mark.parametrize("size", ["1.5", "-0.1"])
def test_size_out_of_range(size):
    with pytest.raises(InvalidItem):
        validate_and_normalize(bpcc([size]))


def test_bad_cardinality():
    with pytest.raises(InvalidCardinality):
        validate_and_normalize(bpcc(["0.5"], k=0))


def test_bad_epsilon():
    with pytest.raises(InvalidEpsilon):
        validate_and_normalize(bpcc(["0.5"], eps=F(0)))


def test_bpr_needs_positive_penalty():
    with pytest.raises(InvalidItem):
        validate_and_normalize(bpr([("0.5", "0")]))


def test_duplicate_ids_rejected():
    raw = Instance(Problem.BPCC, (Item(1, F(1, 2)), Item(1, F(1, 3))), 2, F(1, 3))
    with pytest.raises(InvalidItem):
        validate_and_normalize(raw)


def test_bpr_zero_items_are_separated():
    inst = validate_and_normalize(bpr([("0", "0.5"), ("0.5", "0.5")]))
    assert [it.id for it in inst.zero_items] == [0]
    assert round_instance(inst).zero_items == inst.zero_items


def test_fraction_parsing_and_printing():
    assert to_fraction("0.3") == F(3, 10)
    assert to_fraction("2/7") == F(2, 7)
    assert format_exact(F(1, 4)) == "0.25"


# -- penalty rounding -------------------------------------------------------


@pytest.mark.parametrize("r, expect", [(F(1, 2), F(4, 9)), (F(1, 3), F(1, 3))])
def test_round_penalties_examples(r, expect):
    assert round_penalties([Item(0, F(1, 2), r)], F(1, 3))[0].penalty == expect


def test_top_penalty_class():
    # independent enumeration of the class representatives eps + i eps^2
    eps = F(1, 3)
    reps = []
    i = 0
    while eps + i * eps * eps <= 1:
        reps.append(eps + i * eps * eps)
        i += 1
    assert len(reps) == 1 + int(1 / eps**2 - 1 / eps)
    assert reps[-1] == 1
    assert round_penalties([Item(0, F(1, 2), F(1))], eps)[0].penalty == reps[-1]


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6), st.fractions(0, 1))
def test_penalty_rounding_is_within_a_factor(m, frac):
    eps = F(1, m)
    r = eps + (1 - eps) * frac
    rp = round_penalties([Item(0, F(1, 2), r)], eps)[0].penalty
    assert rp <= r and (rp - eps) % (eps * eps) == 0
    assert r <= (1 + eps) * rp


# -- linear grouping --------------------------------------------------------


def _grouping_oracle(n, num_classes):
    # first n mod q classes get the ceiling count
    return [math.ceil(n / num_classes) if p < n % num_classes else n // num_classes for p in range(num_classes)]


def test_grouping_ten_into_eight():
    items = [Item(i, F(100 - i, 100)) for i in range(10)]
    g = linear_grouping(items, 8)
    sizes = tuple(len(c) for c in g.classes)
    assert sizes == (2, 2, 1, 1, 1, 1, 1, 1) == tuple(_grouping_oracle(10, 8))
    assert [it.id for it in g.set_aside] == [0, 1]


def test_grouping_fewer_items_than_classes():
    items = [Item(i, F(i + 1, 20)) for i in range(9)]
    g = linear_grouping(items, 27)
    assert len(g.classes) == 9 and not g.set_aside
    assert all(g.rounded_size[it.id] == it.size for it in items)


def test_grouping_equal_sizes_is_identity():
    items = [Item(i, F(2, 5)) for i in range(40)]
    g = linear_grouping(items, 8)
    assert all(s == F(2, 5) for s in g.rounded_size.values())


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 1000), min_size=1, max_size=80), st.sampled_from([1, 8, 27]))
def test_grouping_properties(raw, q):
    items = [Item(i, F(v, 1000)) for i, v in enumerate(raw)]
    g = linear_grouping(items, q)
    widths = [len(c) for c in g.classes]
    assert sum(widths) == len(items)
    assert widths == sorted(widths, reverse=True)
    if len(items) >= q:
        assert widths == _grouping_oracle(len(items), q)
        assert len(g.set_aside) == math.ceil(len(items) / q)
    # dominance: every rounded item is at least its original size
    by_id = {it.id: it for it in items}
    for iid, s in g.rounded_size.items():
        assert s >= by_id[iid].size
    # shifting: class p+1 rounded up is no larger than class p originally
    for prev, cur in zip(g.classes, g.classes[1:]):
        if prev and cur:
            assert g.rounded_size[cur[0].id] <= prev[-1].size


# -- splitting and dispatch -------------------------------------------------


def test_split_bpcc():
    large, small = split_large_small([Item(0, F(1, 2)), Item(1, F(1, 5))], F(1, 3), Problem.BPCC)
    assert [it.id for it in large] == [0] and [it.id for it in small] == [1]


def test_split_bpr_needs_both():
    items = [Item(0, F(1, 2), F(1, 10)), Item(1, F(1, 5), F(9, 10)), Item(2, F(1, 2), F(1, 2))]
    large, small = split_large_small(items, F(1, 3), Problem.BPR)
    assert [it.id for it in large] == [2] and [it.id for it in small] == [0, 1]


def test_case_dispatch():
    assert case_of(Problem.BPCC, 4, F(1, 2)) is CaseTag.BPCC_SMALL_K
    assert case_of(Problem.BPCC, 5, F(1, 2)) is CaseTag.BPCC_LARGE_K
    assert case_of(Problem.BPR, None, F(1, 3)) is CaseTag.BPR


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(0, 10_000), min_size=1, max_size=60),
    st.sampled_from([2, 3, 4]),
    st.integers(1, 30),
)
def test_rounded_instance_bounds(raw, m, k):
    eps = F(1, m)
    inst = bpcc([F(v, 10_000) for v in raw], k=k, eps=eps)
    r = round_instance(inst)
    # every item lands in exactly one place
    ids = [i for t in r.item_types for i in t.item_ids] + [it.id for it in r.small_items + r.set_aside]
    assert sorted(ids) == list(range(len(raw)))
    assert len(r.item_types) <= m**3
    large = sum(1 for v in raw if F(v, 10_000) >= eps) if r.case is CaseTag.BPCC_LARGE_K else len(raw)
    # set-aside is one class, at most ceil(|L| eps^3)
    assert len(r.set_aside) <= math.ceil(large / m**3)
    for iid, s in r.rounded_size.items():
        assert s >= inst.by_id[iid].size


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 10_000), st.integers(1, 10_000)), min_size=1, max_size=60), st.sampled_from([3, 4]))
def test_bpr_rounding_properties(raw, m):
    eps = F(1, m)
    inst = bpr([(F(s, 10_000), F(r, 10_000)) for s, r in raw], eps=eps)
    r = round_instance(inst)
    classes = {t.penalty for t in r.item_types}
    assert len(classes) <= 1 + int(1 / eps**2 - 1 / eps)
    for t in r.item_types:
        for iid in t.item_ids:
            orig = inst.by_id[iid]
            assert t.size >= orig.size and t.penalty <= orig.penalty
            assert orig.penalty <= (1 + eps) * t.penalty


def test_to_instance_drops_set_aside():
    inst = bpcc([F(90 - i, 100) for i in range(30)], k=2, eps=F(1, 2))
    r = round_instance(inst)
    reduced = r.to_instance()
    assert reduced.n == inst.n - len(r.set_aside)
    assert all(reduced.by_id[i].size == r.rounded_size[i] for i in reduced.by_id)
