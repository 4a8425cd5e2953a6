"""Seeded random instances on a 4-decimal grid."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import Instance, Item, Problem, to_fraction

GRID = 10_000
SIZE_DISTS = ("uniform", "clustered")
PENALTY_DISTS = ("uniform", "low", "high")


def _grid(values: np.ndarray) -> list[Fraction]:
    return [Fraction(int(v), GRID) for v in values]


def generate_instance(
    problem: str | Problem,
    n: int,
    k: int | None = None,
    size_dist: str = "uniform",
    penalty_dist: str = "uniform",
    seed: int = 0,
    epsilon=Fraction(1, 3),
) -> Instance:
    """Draw an instance; identical arguments always give identical items.

    ``clustered`` mixes small items below epsilon with large items in
    [0.5, 0.7], which exercises the window machinery. Penalties lie in (0, 1].
    """
    problem = Problem(problem)
    if n < 1:
        raise ValueError("n must be positive")
    if size_dist not in SIZE_DISTS:
        raise ValueError(f"unknown size distribution {size_dist!r}")
    if penalty_dist not in PENALTY_DISTS:
        raise ValueError(f"unknown penalty distribution {penalty_dist!r}")
    eps = to_fraction(epsilon)
    rng = np.random.default_rng(seed)
    if size_dist == "uniform":
        sizes = rng.integers(1, GRID + 1, size=n)
    else:
        cut = max(2, int(eps * GRID))
        small = rng.integers(1, cut, size=n)
        large = rng.integers(GRID // 2, int(0.7 * GRID) + 1, size=n)
        sizes = np.where(rng.random(n) < 0.6, small, large)
    pens = None
    if problem is Problem.BPR:
        lo, hi = {"uniform": (1, GRID), "low": (1, GRID // 5), "high": (GRID // 2, GRID)}[penalty_dist]
        pens = _grid(rng.integers(lo, hi + 1, size=n))
    items = tuple(Item(i, s, None if pens is None else pens[i]) for i, s in enumerate(_grid(sizes)))
    return Instance(problem, items, k if problem is Problem.BPCC else None, eps)
