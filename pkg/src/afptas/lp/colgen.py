"""Column generation on the restricted master.

Each round prices every window size of the grid against one dual snapshot.
Windows that are not yet in the master have no dual values of their own; for
them the cheapest (gamma, delta) that keeps all of their Y columns dual
feasible is used. That extension is exactly what the full LP would require, so
"no violated column" really certifies the full LP and not just the pool.

Termination produces a scaling factor ``theta`` such that the repaired duals
divided by ``theta`` are feasible for the full dual. ``dual objective / theta``
is therefore a certified lower bound on the LP optimum, and ``theta`` stays
below 1 + eps whenever the knapsack oracles behave as their ratio promises.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..config import GeneralizedConfiguration, Window, WindowUniverse, main_window
from ..core import CaseTag, ItemType, Problem, RoundedInstance
from ..errors import ConvergenceFailure
from ..pricing import PricingItem, ProfitTable, capacity_units
from .master import DualPrices, FractionalSolution, MasterLP, seed_master

log = logging.getLogger(__name__)

VIOLATION_MARGIN = 1e-9


def pricing_epsilon(epsilon: Fraction) -> Fraction:
    """Oracle accuracy so that a (1 - e') answer is within a factor 1 + eps."""
    return epsilon / (1 + epsilon)


# ---------------------------------------------------------------------------
# dual repair and window extension


def repair_duals(duals: DualPrices, master: MasterLP) -> DualPrices:
    """Clip and tighten duals so that every pooled non-x column is dual feasible."""
    alpha = np.maximum(duals.alpha, 0.0)
    beta = np.maximum(duals.beta, 0.0)
    gamma = {w: max(g, 0.0) for w, g in duals.gamma.items()}
    delta = {w: max(d, 0.0) for w, d in duals.delta.items()}
    sizes = np.array([float(it.size) for it in master.small])
    for w in master.windows:
        cap = sizes * gamma.get(w, 0.0) + delta.get(w, 0.0)
        beta = np.minimum(beta, cap)
    if master.bpr:
        alpha = np.minimum(alpha, [float(t.penalty) for t in master.types])
        if len(beta):
            beta = np.minimum(beta, [float(it.penalty) for it in master.small])
    return DualPrices(alpha, beta, gamma, delta)


def envelope(beta: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints of h(g) = max(0, max_i beta_i - s_i g) over g >= 0.

    Returns the breakpoint abscissas and h there. h is convex and
    non-increasing, so min_g (a g + b h(g)) is attained at one of them.
    """
    slopes = np.concatenate([sizes, [0.0]])
    heights = np.concatenate([beta, [0.0]])
    gs, hs = [0.0], []
    g = 0.0
    # active line at g = 0+: highest intercept, then the flattest slope
    order = np.lexsort((slopes, -heights))
    cur = order[0]
    hs.append(float(heights[cur]))
    while slopes[cur] > 0:
        flatter = slopes < slopes[cur]
        cross = np.full(len(slopes), np.inf)
        cross[flatter] = (heights[cur] - heights[flatter]) / (slopes[cur] - slopes[flatter])
        cross[cross < g] = g
        nxt_g = cross.min()
        cand = np.flatnonzero(cross == nxt_g)
        nxt = cand[np.argmin(slopes[cand])]
        g = float(nxt_g)
        cur = nxt
        gs.append(g)
        hs.append(float(heights[cur] - slopes[cur] * g))
    return np.array(gs), np.maximum(np.array(hs), 0.0)


def extension_costs(w_s: float, counts: np.ndarray, breaks: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """min over (gamma, delta) of w_s*gamma + w_n*delta for each w_n in ``counts``."""
    gs, hs = breaks
    return np.min(w_s * gs[:, None] + hs[:, None] * counts[None, :], axis=0)


# ---------------------------------------------------------------------------
# pricing


@dataclass
class PricingOutcome:
    columns: list[GeneralizedConfiguration]
    theta: float
    dual_objective: float
    best_value: float  # largest priced left-hand side seen this round

    @property
    def column(self) -> GeneralizedConfiguration | None:
        return self.columns[0] if self.columns else None


def _pricing_items(types: Sequence[ItemType], alpha: np.ndarray) -> list[PricingItem]:
    return [
        PricingItem(v, float(alpha[v]), t.size, t.multiplicity) for v, t in enumerate(types) if alpha[v] > 0
    ]


def price_all_windows(
    duals: DualPrices,
    universe: WindowUniverse | None,
    types: Sequence[ItemType],
    epsilon: Fraction,
    *,
    k: int | None,
    small_sizes: Sequence[Fraction] = (),
    margin: float = VIOLATION_MARGIN,
    max_columns_per_t: int = 1,
) -> PricingOutcome:
    """Look for generalized configurations whose dual constraint is violated.

    ``duals`` should already be repaired. ``universe`` is None for the
    small-k BPCC LP, which has plain configurations only.
    """
    eps_dp = pricing_epsilon(epsilon)
    items = _pricing_items(types, duals.alpha)
    dual_obj = float(np.dot([t.multiplicity for t in types], duals.alpha) + duals.beta.sum())

    if universe is None:
        table = ProfitTable(items, Fraction(1), False, k, eps_dp)
        ans = table.answer(cardinality=k)
        cols = []
        if ans.value > 1 + margin:
            cols.append(GeneralizedConfiguration(ans.config, None))
        return PricingOutcome(cols, max(1.0, ans.upper_bound), dual_obj, ans.value)

    sizes_f = np.array([float(s) for s in small_sizes])
    has_count = universe.has_count
    counts = np.arange(k + 1, dtype=np.int64) if has_count else np.zeros(1, dtype=np.int64)
    if has_count:
        breaks = envelope(duals.beta, sizes_f) if len(sizes_f) else (np.zeros(1), np.zeros(1))
    else:
        pos = sizes_f > 0
        ratio = float(np.max(duals.beta[pos] / sizes_f[pos])) if pos.any() else 0.0

    # windows with duals of their own, grouped by t
    present: dict[int, list[Window]] = {}
    for w in duals.gamma:
        present.setdefault(w.t, []).append(w)

    # one DP table per run of t values that admit the same item types
    caps = [universe.pricing_capacity(t) for t in range(universe.t_max + 1)]
    runs: list[tuple[int, int]] = []
    fit_prev = None
    for t, (cap, strict) in enumerate(caps):
        fit = tuple(it.type_index for it in items if (it.size < cap if strict else it.size <= cap))
        if fit != fit_prev:
            runs.append((t, t))
            fit_prev = fit
        else:
            runs[-1] = (runs[-1][0], t)

    columns: list[GeneralizedConfiguration] = []
    theta = 1.0
    best_value = 0.0
    for lo, hi in runs:
        cap_hi, strict_hi = caps[hi]
        table = ProfitTable(items, cap_hi, strict_hi, k if has_count else None, eps_dp)
        for t in range(lo, hi + 1):
            cap, strict = caps[t]
            w_s = universe.sizes_f[t]
            rows = table.row_profits(capacity_units(cap, strict, table.denom))
            if has_count:
                g = extension_costs(w_s, counts.astype(float), breaks)
                for w in present.get(t, ()):
                    g[w.count] = w_s * duals.gamma[w] + w.count * duals.delta.get(w, 0.0)
                limits = k - counts
            else:
                g = np.array([w_s * ratio])
                for w in present.get(t, ()):
                    g[0] = w_s * duals.gamma[w]
                limits = np.array([table.top_row], dtype=np.int64)
            est = table.estimates(rows, limits) + g
            upper = table.upper_bounds(rows, limits) + g
            theta = max(theta, float(upper.max()))
            best_value = max(best_value, float(est.max()))
            if est.max() <= 1 + margin:
                continue
            # most violated first, larger counts win ties
            order = np.lexsort((-np.arange(len(est)), -est))
            taken = 0
            for j in order:
                if est[j] <= 1 + margin or taken >= max_columns_per_t:
                    break
                ans = table.answer(cap, strict, int(limits[j]))
                if ans.value + g[j] <= 1 + margin:
                    continue
                window = Window(t, int(counts[j])) if has_count else Window(t)
                columns.append(GeneralizedConfiguration(ans.config, window))
                taken += 1
    return PricingOutcome(columns, theta, dual_obj, best_value)


# ---------------------------------------------------------------------------
# driver


@dataclass
class ColumnGenerationResult:
    master: MasterLP
    solution: FractionalSolution
    duals: DualPrices
    lp_value: float  # certified lower bound on the LP optimum
    theta: float
    iterations: int
    history: list[float] = field(default_factory=list)
    seconds: float = 0.0


def default_iteration_cap(rounded: RoundedInstance, master: MasterLP) -> int:
    return 10 * (len(rounded.item_types) + len(master.windows) + len(rounded.small_items))


def column_generation(
    rounded: RoundedInstance,
    universe: WindowUniverse | None,
    epsilon: Fraction | None = None,
    *,
    max_iterations: int | None = None,
    margin: float = VIOLATION_MARGIN,
    backend: str = "highs",
    dump_lp: str | None = None,
) -> ColumnGenerationResult:
    epsilon = rounded.epsilon if epsilon is None else epsilon
    start = time.perf_counter()
    master = seed_master(rounded, universe)
    small_sizes = [it.size for it in rounded.small_items]
    history: list[float] = []
    iterations = 0
    while True:
        sol, raw = master.solve(backend)
        history.append(sol.objective)
        duals = repair_duals(raw, master)
        outcome = price_all_windows(
            duals, universe, rounded.item_types, epsilon, k=rounded.k, small_sizes=small_sizes, margin=margin
        )
        log.debug(
            "colgen iter %d: objective %.9f, best priced %.6f, %d new columns",
            iterations, sol.objective, outcome.best_value, len(outcome.columns),
        )
        added = sum(master.add_column(gc) for gc in outcome.columns)
        if added == 0:
            break
        iterations += 1
        cap = max_iterations if max_iterations is not None else default_iteration_cap(rounded, master)
        if iterations > cap:
            raise ConvergenceFailure(f"column generation exceeded {cap} iterations", best=sol, iterations=iterations)
    if dump_lp:
        master.write_lp(dump_lp)
    lp_value = outcome.dual_objective / outcome.theta
    return ColumnGenerationResult(
        master, sol, duals, lp_value, outcome.theta, iterations, history, time.perf_counter() - start
    )


def resolve_on_windows(
    rounded: RoundedInstance, universe: WindowUniverse, pool: Sequence[GeneralizedConfiguration], active: set[Window]
) -> tuple[MasterLP, FractionalSolution]:
    """Basic solution of the LP restricted to ``active`` windows.

    Every pooled configuration whose main window is active enters with that
    main window, so any solution supported on main windows stays feasible.
    """
    master = MasterLP(rounded, universe)
    for w in sorted(active):
        master.add_window(w)
    seen = set()
    for gc in pool:
        mw = main_window(gc.config, universe)
        if mw in active and gc.config not in seen:
            seen.add(gc.config)
            master.add_column(GeneralizedConfiguration(gc.config, mw))
    sol, _ = master.solve()
    return master, sol
