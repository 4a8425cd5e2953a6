"""Exact two-phase tableau simplex over fractions.

Solves ``min c.x  s.t.  A x >= b, x >= 0``. It is slow and only meant for small
LPs: it is the independent oracle the HiGHS-backed master is tested against.
Dantzig pricing is used until 50 consecutive pivots fail to improve the
objective, after which Bland's rule takes over and guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

STALL_LIMIT = 50


@dataclass
class DenseResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction]
    duals: list[Fraction]  # one per row, >= 0 at optimality
    objective: Fraction | None
    pivots: int


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows  # last entry of each row is the rhs
        self.basis = basis

    def pivot(self, r: int, j: int, cost: list[Fraction]):
        row = self.rows[r]
        p = row[j]
        row[:] = [v / p for v in row]
        for i, other in enumerate(self.rows):
            if i != r and other[j] != 0:
                f = other[j]
                other[:] = [a - f * b for a, b in zip(other, row)]
        if cost[j] != 0:
            f = cost[j]
            cost[:] = [a - f * b for a, b in zip(cost, row)]
        self.basis[r] = j


def _run(tab: _Tableau, cost: list[Fraction], allowed: Sequence[bool]) -> tuple[str, int]:
    """Minimise the reduced-cost row ``cost`` (last entry is -objective)."""
    pivots = stall = 0
    bland = False
    last_obj = -cost[-1]
    ncols = len(cost) - 1
    while True:
        enter = -1
        if bland:
            for j in range(ncols):
                if allowed[j] and cost[j] < 0:
                    enter = j
                    break
        else:
            best = Fraction(0)
            for j in range(ncols):
                if allowed[j] and cost[j] < best:
                    best, enter = cost[j], j
        if enter < 0:
            return "optimal", pivots
        leave, ratio = -1, None
        for i, row in enumerate(tab.rows):
            a = row[enter]
            if a > 0:
                q = row[-1] / a
                if ratio is None or q < ratio or (q == ratio and tab.basis[i] < tab.basis[leave]):
                    leave, ratio = i, q
        if leave < 0:
            return "unbounded", pivots
        tab.pivot(leave, enter, cost)
        pivots += 1
        obj = -cost[-1]
        if obj < last_obj:
            last_obj, stall = obj, 0
        else:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True


def solve_dense(c: Sequence, A: Sequence[Sequence], b: Sequence) -> DenseResult:
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    m, n = len(A), len(c)
    # columns: n structural, m surplus, m artificial, rhs
    sign = [1 if bi >= 0 else -1 for bi in b]
    rows = []
    for i in range(m):
        s = sign[i]
        row = [s * v for v in A[i]]
        row += [Fraction(-s if j == i else 0) for j in range(m)]
        row += [Fraction(1 if j == i else 0) for j in range(m)]
        row.append(s * b[i])
        rows.append(row)
    basis = [n + m + i for i in range(m)]
    tab = _Tableau(rows, basis)
    width = n + 2 * m

    # phase 1: minimise the sum of artificials
    cost = [Fraction(0)] * (n + m) + [Fraction(1)] * m + [Fraction(0)]
    for row in rows:
        cost = [a - b_ for a, b_ in zip(cost, row)]
    allowed = [True] * width
    _, p1 = _run(tab, cost, allowed)
    if -cost[-1] > 0:
        return DenseResult("infeasible", [], [], None, p1)

    # drive zero-level artificials out of the basis where possible
    for r, j in enumerate(list(tab.basis)):
        if j >= n + m:
            for jj in range(n + m):
                if tab.rows[r][jj] != 0:
                    tab.pivot(r, jj, cost)
                    break

    # phase 2, artificials may not re-enter but stay in the tableau for the duals
    cost = [Fraction(0)] * (width + 1)
    for j in range(n):
        cost[j] = c[j]
    for r, j in enumerate(tab.basis):
        if cost[j] != 0:
            f = cost[j]
            cost = [a - f * b_ for a, b_ in zip(cost, tab.rows[r])]
    allowed = [j < n + m for j in range(width)]
    status, p2 = _run(tab, cost, allowed)
    if status != "optimal":
        return DenseResult(status, [], [], None, p1 + p2)

    x = [Fraction(0)] * n
    for r, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.rows[r][-1]
    # reduced cost of artificial i is -y_i (in the sign-adjusted row space)
    duals = [-cost[n + m + i] * sign[i] for i in range(m)]
    objective = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return DenseResult("optimal", x, duals, objective, p1 + p2)
