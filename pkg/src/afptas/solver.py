"""Case dispatch and the end-to-end pipeline."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .assembly import Diagnostics, Packing, assemble, check_migration, migrate_to_active_windows
from .config import WindowUniverse, build_window_universe
from .core import CaseTag, Instance, Problem, RoundedInstance, case_of, format_exact, inverse_epsilon, round_instance, validate_and_normalize
from .errors import InternalInvariantViolation
from .lp.colgen import ColumnGenerationResult, column_generation, resolve_on_windows
from .lp.master import FractionalSolution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Guarantee:
    multiplicative: Fraction
    additive: Fraction
    case_tag: CaseTag

    def bound(self, opt) -> Fraction:
        return self.multiplicative * Fraction(opt) + self.additive


def guarantee_of(epsilon, case_tag: CaseTag, fold_penalty_rounding: bool = False) -> Guarantee:
    """Closed-form approximation guarantee for a case.

    With ``fold_penalty_rounding`` the BPR bound is multiplied by (1 + eps),
    which states it against the original rather than the rounded penalties.
    """
    eps = Fraction(epsilon)
    m = inverse_epsilon(eps)
    case_tag = CaseTag(case_tag)
    if case_tag is CaseTag.BPCC_SMALL_K:
        mult, add = 1 + 2 * eps, Fraction(m**3 + 1)
    elif case_tag is CaseTag.BPCC_LARGE_K:
        mult, add = 1 + 10 * eps, Fraction(5 * (m**3 + (m**3 + 1) ** m) + 2)
    else:
        mult, add = 1 + 10 * eps, Fraction(4 * m**5 + 4 * (m**5 + 1) ** m + 1)
        if fold_penalty_rounding:
            mult, add = mult * (1 + eps), add * (1 + eps)
    return Guarantee(mult, add, case_tag)


@dataclass
class SolveReport:
    packing: Packing
    lp_value: float  # certified lower bound on the LP optimum of the rounded instance
    lp_objective: float  # restricted master objective at termination
    guarantee: Guarantee
    case: CaseTag
    epsilon: Fraction
    stage_costs: dict[str, Fraction]
    timings: dict[str, float]
    iterations: int
    theta: float
    warnings: tuple[str, ...] = ()
    diagnostics: Diagnostics | None = None
    rounded: RoundedInstance | None = field(default=None, repr=False)
    universe: WindowUniverse | None = field(default=None, repr=False)
    colgen: ColumnGenerationResult | None = field(default=None, repr=False)
    migrated: FractionalSolution | None = field(default=None, repr=False)
    basic: FractionalSolution | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case": self.case.value,
            "epsilon": str(self.epsilon),
            "packing": self.packing.to_dict(),
            "cost": format_exact(self.packing.cost),
            "bins": self.packing.num_bins,
            "lp_value": self.lp_value,
            "lp_objective": self.lp_objective,
            "guarantee": {
                "multiplicative": str(self.guarantee.multiplicative),
                "additive": str(self.guarantee.additive),
            },
            "stage_costs": {k: format_exact(v) for k, v in self.stage_costs.items()},
            "iterations": self.iterations,
            "theta": self.theta,
            "timings": self.timings,
            "warnings": list(self.warnings),
        }


def solve(
    instance: Instance,
    *,
    backend: str = "highs",
    max_iterations: int | None = None,
    dump_lp: str | None = None,
    check: bool = True,
) -> SolveReport:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    inst = validate_and_normalize(instance)
    rounded = round_instance(inst)
    case = rounded.case
    eps = inst.epsilon
    universe = None
    if case is not CaseTag.BPCC_SMALL_K:
        universe = build_window_universe(rounded.small_items, rounded.k, eps, inst.problem)
    timings["rounding"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    cg = column_generation(rounded, universe, eps, max_iterations=max_iterations, backend=backend, dump_lp=dump_lp)
    timings["column_generation"] = time.perf_counter() - t1
    log.info("case %s: %d iterations, LP objective %.6f, certified bound %.6f", case.value, cg.iterations, cg.solution.objective, cg.lp_value)

    t2 = time.perf_counter()
    diag = Diagnostics()
    migrated = basic = cg.solution
    active: set = set()
    if universe is not None:
        migrated = migrate_to_active_windows(cg.solution, universe)
        check_migration(cg.solution, migrated, diag)
        active = {gc.window for gc, v in migrated.x.items() if v > 1e-9}
        _, basic = resolve_on_windows(rounded, universe, list(cg.master.configurations()), active)
    packing, staged = assemble(basic, rounded, universe, diag)
    if universe is not None:
        diag.num_windows = len(active)
    timings["assembly"] = time.perf_counter() - t2

    if check:
        from .verify import check as check_packing

        problems = check_packing(packing, inst)
        if problems:
            raise InternalInvariantViolation("infeasible packing: " + "; ".join(problems[:5]))
    timings["total"] = time.perf_counter() - t0

    guarantee = guarantee_of(eps, case, fold_penalty_rounding=inst.problem is Problem.BPR)
    return SolveReport(
        packing=packing,
        lp_value=cg.lp_value,
        lp_objective=cg.solution.objective,
        guarantee=guarantee,
        case=case,
        epsilon=eps,
        stage_costs=staged.costs,
        timings=timings,
        iterations=cg.iterations,
        theta=cg.theta,
        warnings=inst.warnings,
        diagnostics=diag,
        rounded=rounded,
        universe=universe,
        colgen=cg,
        migrated=migrated,
        basic=basic,
    )


def dispatch(problem, k, epsilon) -> CaseTag:
    return case_of(Problem(problem), k, Fraction(epsilon))
