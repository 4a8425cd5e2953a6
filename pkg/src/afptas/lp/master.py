"""The restricted master LP.

Rows, all of the form ``a.x >= b``:

* one coverage row per item type (rhs n(v)),
* one row per small item (rhs 1),
* per window in the pool a size row ``w_s * X(W) - sum s_i Y_iW >= 0`` and,
  for BPCC, a count row ``w_n * X(W) - sum Y_iW >= 0``.

Columns are generalized configurations (cost 1), the Y assignment variables
(cost 0) and, for BPR, one rejection variable per type and per small item.
Windows enter lazily; adding one adds its rows and the Y columns of every small
item against it. The model lives in a HiGHS instance so re-solves warm start.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import highspy
import numpy as np

from ..config import EMPTY, Configuration, GeneralizedConfiguration, Window, WindowUniverse, main_window
from ..core import Problem, RoundedInstance
from ..errors import NumericalInstability
from .simplex import solve_dense

log = logging.getLogger(__name__)

INF = highspy.kHighsInf


@dataclass
class DualPrices:
    alpha: np.ndarray  # per item type
    beta: np.ndarray  # per small item (position in rounded.small_items)
    gamma: dict[Window, float] = field(default_factory=dict)
    delta: dict[Window, float] = field(default_factory=dict)

    def window_gamma(self, w: Window) -> float:
        return self.gamma.get(w, 0.0)

    def window_delta(self, w: Window) -> float:
        return self.delta.get(w, 0.0)


@dataclass
class FractionalSolution:
    x: dict[GeneralizedConfiguration, float]
    y: dict[tuple[int, Window], float]  # (small item id, window) -> value
    z_type: dict[int, float]
    z_item: dict[int, float]  # small item id -> value
    objective: float
    is_basic: bool = False

    @property
    def total_x(self) -> float:
        return float(sum(self.x.values()))


@dataclass
class _Column:
    kind: str  # "x" | "Y" | "Z" | "z"
    key: object
    cost: Fraction
    entries: list[tuple[int, Fraction]]


class MasterLP:
    def __init__(self, rounded: RoundedInstance, universe: WindowUniverse | None, dual_tolerance: float = 1e-10):
        self.rounded = rounded
        self.universe = universe
        self.types = rounded.item_types
        self.small = rounded.small_items
        self.bpr = rounded.problem is Problem.BPR
        self.k = rounded.k

        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("dual_feasibility_tolerance", dual_tolerance)
        h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        h.setOptionValue("random_seed", 0)
        self.h = h

        self.row_lb: list[Fraction] = []
        self.columns: list[_Column] = []
        self.x_index: dict[GeneralizedConfiguration, int] = {}
        self.y_index: dict[tuple[int, Window], int] = {}
        self.windows: dict[Window, tuple[int, int | None]] = {}

        self.cov_row = self._add_rows([Fraction(t.multiplicity) for t in self.types])
        self.small_row = self._add_rows([Fraction(1)] * len(self.small))
        self._small_sizes = [it.size for it in self.small]

        if self.bpr:
            for v, t in enumerate(self.types):
                self._add_cols([_Column("Z", v, t.penalty, [(self.cov_row[v], Fraction(1))])])
            self._add_cols(
                [_Column("z", p, it.penalty, [(self.small_row[p], Fraction(1))]) for p, it in enumerate(self.small)]
            )

    # -- model building --------------------------------------------------

    def _add_rows(self, lbs: list[Fraction]) -> list[int]:
        start = len(self.row_lb)
        if not lbs:
            return []
        self.row_lb.extend(lbs)
        n = len(lbs)
        self.h.addRows(
            n,
            np.array([float(b) for b in lbs]),
            np.full(n, INF),
            0,
            np.zeros(n, dtype=np.int32),
            np.zeros(0, dtype=np.int32),
            np.zeros(0),
        )
        return list(range(start, start + n))

    def _add_cols(self, cols: list[_Column]):
        if not cols:
            return
        starts, idx, vals = [], [], []
        for c in cols:
            starts.append(len(idx))
            for r, a in c.entries:
                idx.append(r)
                vals.append(float(a))
        n = len(cols)
        self.h.addCols(
            n,
            np.array([float(c.cost) for c in cols]),
            np.zeros(n),
            np.full(n, INF),
            len(idx),
            np.array(starts, dtype=np.int32),
            np.array(idx, dtype=np.int32),
            np.array(vals, dtype=np.float64),
        )
        base = len(self.columns)
        for off, c in enumerate(cols):
            if c.kind == "x":
                self.x_index[c.key] = base + off
            elif c.kind == "Y":
                self.y_index[c.key] = base + off
        self.columns.extend(cols)

    def add_window(self, w: Window) -> bool:
        if w in self.windows:
            return False
        has_count = self.universe.has_count
        rows = self._add_rows([Fraction(0)] * (2 if has_count else 1))
        size_row = rows[0]
        count_row = rows[1] if has_count else None
        self.windows[w] = (size_row, count_row)
        cols = []
        for p, s in enumerate(self._small_sizes):
            entries = [(self.small_row[p], Fraction(1))]
            if s:
                entries.append((size_row, -s))
            if count_row is not None:
                entries.append((count_row, Fraction(-1)))
            cols.append(_Column("Y", (p, w), Fraction(0), entries))
        self._add_cols(cols)
        return True

    def add_column(self, gc: GeneralizedConfiguration) -> bool:
        """Add an x column; returns False if it is already pooled."""
        if gc in self.x_index:
            return False
        entries = [(self.cov_row[v], Fraction(c)) for v, c in gc.config.counts]
        w = gc.window
        if w is not None:
            self.add_window(w)
            size_row, count_row = self.windows[w]
            entries.append((size_row, self.universe.window_size(w)))
            if count_row is not None and w.count:
                entries.append((count_row, Fraction(w.count)))
        self._add_cols([_Column("x", gc, Fraction(1), entries)])
        return True

    def configurations(self) -> Iterable[GeneralizedConfiguration]:
        return self.x_index.keys()

    @property
    def num_rows(self) -> int:
        return len(self.row_lb)

    # -- solving -----------------------------------------------------------

    def solve(self, backend: str = "highs") -> tuple[FractionalSolution, DualPrices]:
        if backend == "dense":
            return self._solve_dense()
        h = self.h
        h.run()
        status = h.getModelStatus()
        if status != highspy.HighsModelStatus.kOptimal:
            raise NumericalInstability(
                f"master LP not optimal: {h.modelStatusToString(status)}",
                {"rows": self.num_rows, "cols": len(self.columns), "status": h.modelStatusToString(status)},
            )
        sol = h.getSolution()
        basis = h.getBasis()
        values = np.asarray(sol.col_value)
        duals = np.asarray(sol.row_dual)
        obj = h.getInfo().objective_function_value
        return self._package(values, duals, float(obj), bool(basis.valid))

    def _solve_dense(self):
        n = len(self.columns)
        A = [[Fraction(0)] * n for _ in range(self.num_rows)]
        for j, c in enumerate(self.columns):
            for r, a in c.entries:
                A[r][j] += a
        res = solve_dense([c.cost for c in self.columns], A, self.row_lb)
        if res.status != "optimal":
            raise NumericalInstability(f"dense master LP {res.status}", {"rows": self.num_rows, "cols": n})
        values = np.array([float(v) for v in res.x])
        duals = np.array([float(v) for v in res.duals])
        return self._package(values, duals, float(res.objective), True)

    def _package(self, values, duals, objective, basic) -> tuple[FractionalSolution, DualPrices]:
        x, y, zt, zi = {}, {}, {}, {}
        for j, c in enumerate(self.columns):
            val = float(values[j])
            if val <= 1e-12:
                continue
            if c.kind == "x":
                x[c.key] = val
            elif c.kind == "Y":
                p, w = c.key
                y[(self.small[p].id, w)] = val
            elif c.kind == "Z":
                zt[c.key] = val
            else:
                zi[self.small[c.key].id] = val
        frac = FractionalSolution(x, y, zt, zi, objective, basic)
        prices = DualPrices(
            alpha=np.array([duals[r] for r in self.cov_row], dtype=float),
            beta=np.array([duals[r] for r in self.small_row], dtype=float),
        )
        for w, (sr, cr) in self.windows.items():
            prices.gamma[w] = float(duals[sr])
            if cr is not None:
                prices.delta[w] = float(duals[cr])
        return frac, prices

    def write_lp(self, path: str):
        """Dump the current restricted LP in CPLEX LP format."""
        self.h.writeModel(str(path))


def singleton_columns(rounded: RoundedInstance, universe: WindowUniverse | None) -> list[GeneralizedConfiguration]:
    cols = []
    for v, t in enumerate(rounded.item_types):
        config = Configuration(((v, 1),), t.size, 1)
        cols.append(GeneralizedConfiguration(config, None if universe is None else main_window(config, universe)))
    return cols


def seed_master(rounded: RoundedInstance, universe: WindowUniverse | None) -> MasterLP:
    """Master with one singleton column per type plus the empty configuration."""
    master = MasterLP(rounded, universe)
    for gc in singleton_columns(rounded, universe):
        master.add_column(gc)
    if universe is not None:
        master.add_column(GeneralizedConfiguration(EMPTY, universe.top))
    return master


def solve_master(master: MasterLP, backend: str = "highs") -> tuple[FractionalSolution, DualPrices]:
    return master.solve(backend)
