"""Exact instance model and the rounding steps that build the grouped instance.

Sizes and penalties are held as :class:`fractions.Fraction` throughout. Floats
only appear later, inside the LP, and never decide feasibility.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import InvalidCardinality, InvalidEpsilon, InvalidItem


class Problem(str, enum.Enum):
    BPCC = "bpcc"
    BPR = "bpr"


class CaseTag(str, enum.Enum):
    BPCC_SMALL_K = "BPCC_SMALL_K"
    BPCC_LARGE_K = "BPCC_LARGE_K"
    BPR = "BPR"


# Upper end of the admissible epsilon range per problem.
MAX_EPSILON = {Problem.BPCC: Fraction(1, 2), Problem.BPR: Fraction(1, 3)}


def to_fraction(value) -> Fraction:
    """Parse a decimal string (or int / Fraction) exactly.

    Floats are accepted for convenience and go through their shortest repr,
    so ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact number")


def format_exact(value: Fraction) -> str:
    """Render a fraction as a terminating decimal when one exists, else ``p/q``."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    assert scaled.denominator == 1
    num = scaled.numerator
    sign = "-" if num < 0 else ""
    num = abs(num)
    if digits == 0:
        return f"{sign}{num}"
    text = str(num).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


@dataclass(frozen=True)
class Item:
    id: int
    size: Fraction
    penalty: Fraction | None = None


@dataclass(frozen=True)
class Instance:
    problem: Problem
    items: tuple[Item, ...]
    k: int | None = None
    epsilon: Fraction = Fraction(1, 3)
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.items)

    @cached_property
    def by_id(self) -> dict[int, Item]:
        return {it.id: it for it in self.items}

    @property
    def zero_items(self) -> tuple[Item, ...]:
        """Zero-size BPR items; they skip the scheme and share one bin."""
        if self.problem is not Problem.BPR:
            return ()
        return tuple(it for it in self.items if it.size == 0)

    def with_epsilon(self, epsilon) -> "Instance":
        return Instance(self.problem, self.items, self.k, to_fraction(epsilon), self.warnings)


def inverse_epsilon(epsilon: Fraction) -> int:
    """Return ``1/epsilon`` for a snapped epsilon."""
    if epsilon.numerator != 1:
        raise InvalidEpsilon(f"epsilon {epsilon} is not of the form 1/m")
    return epsilon.denominator


def snap_epsilon(epsilon, problem: Problem) -> tuple[Fraction, str | None]:
    """Round epsilon down to the nearest 1/m and clamp it into the admissible range."""
    eps = to_fraction(epsilon)
    if eps <= 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {eps}")
    m = math.ceil(1 / eps)
    snapped = Fraction(1, m)
    cap = MAX_EPSILON[Problem(problem)]
    if snapped > cap:
        snapped = cap
    if snapped != eps:
        return snapped, f"epsilon {format_exact(eps)} adjusted to {snapped}"
    return snapped, None


def validate_and_normalize(raw: Instance) -> Instance:
    """Check the raw instance and bring it into the form the schemes expect.

    BPR penalties above 1 are clamped to 1 (packing such an item alone is never
    worse than rejecting it) and epsilon is snapped to 1/m.
    """
    problem = Problem(raw.problem)
    seen: set[int] = set()
    items: list[Item] = []
    for it in raw.items:
        if it.id in seen:
            raise InvalidItem(f"duplicate item id {it.id}")
        seen.add(it.id)
        size = to_fraction(it.size)
        if size < 0 or size > 1:
            raise InvalidItem(f"item {it.id}: size {size} outside [0, 1]")
        penalty = None
        if problem is Problem.BPR:
            if it.penalty is None:
                raise InvalidItem(f"item {it.id}: BPR items need a rejection penalty")
            penalty = to_fraction(it.penalty)
            if penalty <= 0:
                raise InvalidItem(f"item {it.id}: penalty must be positive, got {penalty}")
            penalty = min(penalty, Fraction(1))
        items.append(Item(it.id, size, penalty))

    k = raw.k
    if problem is Problem.BPCC:
        if k is None or int(k) != k or k < 1:
            raise InvalidCardinality(f"cardinality bound must be a positive integer, got {k!r}")
        k = int(k)
    else:
        k = None

    eps, note = snap_epsilon(raw.epsilon, problem)
    warnings = tuple(raw.warnings) + ((note,) if note else ())
    return Instance(problem, tuple(items), k, eps, warnings)


# ---------------------------------------------------------------------------
# Rounding


@dataclass(frozen=True)
class ItemType:
    """One distinct rounded (size, penalty) pair and the items that carry it."""

    size: Fraction
    penalty: Fraction | None
    multiplicity: int
    item_ids: tuple[int, ...]


@dataclass(frozen=True)
class Grouping:
    classes: list[list[Item]]
    set_aside: list[Item]
    rounded_size: dict[int, Fraction]


def split_large_small(items: Iterable[Item], epsilon: Fraction, problem: Problem):
    large, small = [], []
    for it in items:
        if problem is Problem.BPR:
            is_large = it.size >= epsilon and it.penalty >= epsilon
        else:
            is_large = it.size >= epsilon
        (large if is_large else small).append(it)
    return large, small


def round_penalties(items: Sequence[Item], epsilon: Fraction) -> list[Item]:
    """Round each penalty down onto the grid eps + i*eps^2, i = 0..1/eps^2 - 1/eps."""
    step = epsilon * epsilon
    top = int(1 / step - 1 / epsilon)
    out = []
    for it in items:
        i = math.floor((it.penalty - epsilon) / step)
        i = min(max(i, 0), top)
        out.append(Item(it.id, it.size, epsilon + i * step))
    return out


def _size_order(items: Iterable[Item]) -> list[Item]:
    return sorted(items, key=lambda it: (-it.size, it.id))


def linear_grouping(items: Sequence[Item], num_classes: int) -> Grouping:
    """Partition by non-increasing size into ``num_classes`` classes.

    The first ``len(items) % num_classes`` classes receive the ceiling count.
    Class 1 is set aside; every other class is rounded up to its largest size.
    With fewer items than classes each item is its own class and nothing is
    rounded or set aside.
    """
    ordered = _size_order(items)
    n = len(ordered)
    if n < num_classes:
        return Grouping([[it] for it in ordered], [], {it.id: it.size for it in ordered})

    base, extra = divmod(n, num_classes)
    classes: list[list[Item]] = []
    pos = 0
    for p in range(num_classes):
        width = base + (1 if p < extra else 0)
        classes.append(ordered[pos : pos + width])
        pos += width

    rounded: dict[int, Fraction] = {}
    for cls in classes[1:]:
        if not cls:
            continue
        top = cls[0].size
        for it in cls:
            rounded[it.id] = top
    return Grouping(classes, list(classes[0]), rounded)


def case_of(problem: Problem, k: int | None, epsilon: Fraction) -> CaseTag:
    if Problem(problem) is Problem.BPR:
        return CaseTag.BPR
    if k <= inverse_epsilon(epsilon) ** 2:
        return CaseTag.BPCC_SMALL_K
    return CaseTag.BPCC_LARGE_K


@dataclass(frozen=True)
class RoundedInstance:
    """The grouped instance handed to the LP.

    ``item_types`` is the set of distinct rounded large sizes (with penalties
    for BPR). ``set_aside`` items are packed one per bin at the end.
    """

    problem: Problem
    case: CaseTag
    epsilon: Fraction
    k: int | None
    item_types: tuple[ItemType, ...]
    small_items: tuple[Item, ...]
    set_aside: tuple[Item, ...]
    zero_items: tuple[Item, ...]
    source: Instance = field(repr=False, compare=False)

    @cached_property
    def type_of(self) -> dict[int, int]:
        return {iid: v for v, t in enumerate(self.item_types) for iid in t.item_ids}

    @cached_property
    def rounded_size(self) -> dict[int, Fraction]:
        out = {iid: t.size for t in self.item_types for iid in t.item_ids}
        for it in self.small_items:
            out[it.id] = it.size
        for it in self.set_aside:
            out[it.id] = it.size
        return out

    @property
    def num_large(self) -> int:
        return sum(t.multiplicity for t in self.item_types) + len(self.set_aside)

    def to_instance(self) -> Instance:
        """The rounded instance itself, without the set-aside items."""
        items = []
        for t in self.item_types:
            for iid in t.item_ids:
                items.append(Item(iid, t.size, t.penalty))
        items.extend(self.small_items)
        items.extend(self.zero_items)
        items.sort(key=lambda it: it.id)
        return Instance(self.problem, tuple(items), self.k, self.epsilon)


def _make_types(items: Iterable[Item], rounded: dict[int, Fraction]) -> tuple[ItemType, ...]:
    groups: dict[tuple, list[int]] = {}
    for it in items:
        key = (rounded[it.id], it.penalty)
        groups.setdefault(key, []).append(it.id)
    keys = sorted(groups, key=lambda kp: (-kp[0], -(kp[1] or 0)))
    return tuple(
        ItemType(size, pen, len(groups[(size, pen)]), tuple(sorted(groups[(size, pen)])))
        for size, pen in keys
    )


def round_instance(instance: Instance) -> RoundedInstance:
    """Build the grouped instance for whichever case the instance falls in."""
    eps = instance.epsilon
    m = inverse_epsilon(eps)
    num_classes = m**3
    case = case_of(instance.problem, instance.k, eps)

    if case is CaseTag.BPCC_SMALL_K:
        g = linear_grouping(instance.items, num_classes)
        kept = [it for cls in g.classes[1:] for it in cls] if g.set_aside else list(instance.items)
        types = _make_types(kept, g.rounded_size)
        return RoundedInstance(instance.problem, case, eps, instance.k, types, (), tuple(g.set_aside), (), instance)

    if case is CaseTag.BPCC_LARGE_K:
        large, small = split_large_small(instance.items, eps, Problem.BPCC)
        g = linear_grouping(large, num_classes)
        aside = {it.id for it in g.set_aside}
        kept = [it for it in large if it.id not in aside]
        types = _make_types(kept, g.rounded_size)
        k = min(instance.k, instance.n)
        small = tuple(sorted(small, key=lambda it: it.id))
        return RoundedInstance(instance.problem, case, eps, k, types, small, tuple(g.set_aside), (), instance)

    zero = instance.zero_items
    zero_ids = {it.id for it in zero}
    positive = [it for it in instance.items if it.id not in zero_ids]
    large, small = split_large_small(positive, eps, Problem.BPR)
    large = round_penalties(large, eps)
    by_class: dict[Fraction, list[Item]] = {}
    for it in large:
        by_class.setdefault(it.penalty, []).append(it)
    rounded: dict[int, Fraction] = {}
    set_aside: list[Item] = []
    kept: list[Item] = []
    for pen in sorted(by_class, reverse=True):
        g = linear_grouping(by_class[pen], num_classes)
        rounded.update(g.rounded_size)
        aside = {it.id for it in g.set_aside}
        set_aside.extend(instance.by_id[it.id] for it in g.set_aside)
        kept.extend(it for it in by_class[pen] if it.id not in aside)
    types = _make_types(kept, rounded)
    small = tuple(sorted(small, key=lambda it: it.id))
    return RoundedInstance(
        instance.problem, case, eps, None, types, small, tuple(sorted(set_aside, key=lambda it: it.id)), zero, instance
    )


# ---------------------------------------------------------------------------
# Instance files


def instance_from_dict(data: dict, epsilon=None) -> Instance:
    try:
        problem = Problem(str(data["problem"]).lower())
    except (KeyError, ValueError) as exc:
        raise InvalidItem(f"bad or missing problem tag: {exc}") from None
    items = []
    for idx, raw in enumerate(data.get("items", [])):
        if "size" not in raw:
            raise InvalidItem(f"item {idx} has no size")
        pen = raw.get("penalty")
        items.append(Item(int(raw.get("id", idx)), to_fraction(raw["size"]), None if pen is None else to_fraction(pen)))
    eps = epsilon if epsilon is not None else data.get("epsilon", Fraction(1, 3))
    return Instance(problem, tuple(items), data.get("k"), to_fraction(eps))


def instance_to_dict(instance: Instance) -> dict:
    out: dict = {"problem": instance.problem.value}
    if instance.k is not None:
        out["k"] = instance.k
    rows = []
    keep_ids = any(it.id != idx for idx, it in enumerate(instance.items))
    for it in instance.items:
        row = {"id": it.id} if keep_ids else {}
        row["size"] = format_exact(it.size)
        if it.penalty is not None:
            row["penalty"] = format_exact(it.penalty)
        rows.append(row)
    out["items"] = rows
    return out


def load_instance(path, epsilon=None) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh), epsilon)
