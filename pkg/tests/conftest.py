"""Shared fixtures: solved corpora reused by several acceptance criteria, and
the PASS/FAIL summary printed at the end of the run."""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _corpus import corpus  # noqa: E402

from afptas.core import Problem  # noqa: E402
from afptas.solver import solve  # noqa: E402
from afptas.verify import exact_opt  # noqa: E402

FUZZ_COUNT = 1000
FUZZ_N_MAX = 200
SMALL_COUNT = 200
SMALL_N_MAX = {Problem.BPCC: 12, Problem.BPR: 10}
SEEDS = {"fuzz": {Problem.BPCC: 10_000, Problem.BPR: 20_000}, "small": {Problem.BPCC: 30_000, Problem.BPR: 40_000}}

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str):
    """Register the outcome of one acceptance criterion (last write wins)."""
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[c]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {c}: {detail}")


@dataclass
class SolvedRun:
    instance: object
    report: object | None
    error: Exception | None
    seconds: float


@dataclass
class SmallRun:
    instance: object
    report: object | None
    error: Exception | None
    opt: object
    rounded_opt: object | None = None


@dataclass
class Corpora:
    fuzz: dict = field(default_factory=dict)
    small: dict = field(default_factory=dict)


def _solve_all(instances) -> list[SolvedRun]:
    out = []
    for inst in instances:
        t = time.perf_counter()
        try:
            rep, err = solve(inst), None
        except Exception as exc:  # collected and reported by the criteria
            rep, err = None, exc
        out.append(SolvedRun(inst, rep, err, time.perf_counter() - t))
    return out


@pytest.fixture(scope="session")
def fuzz_runs() -> dict:
    """Criterion 1 corpus: 1000 instances per problem with n <= 200, solved once."""
    runs = {}
    for prob in Problem:
        t = time.perf_counter()
        runs[prob] = _solve_all(corpus(prob, FUZZ_COUNT, FUZZ_N_MAX, SEEDS["fuzz"][prob]))
        runs[(prob, "seconds")] = time.perf_counter() - t
    return runs


@pytest.fixture(scope="session")
def small_runs() -> dict:
    """Criteria 2-4 and 8 corpus: 200 instances per problem small enough for exact OPT."""
    runs = {}
    for prob in Problem:
        out = []
        for inst in corpus(prob, SMALL_COUNT, SMALL_N_MAX[prob], SEEDS["small"][prob]):
            try:
                rep, err = solve(inst), None
            except Exception as exc:
                rep, err = None, exc
            out.append(SmallRun(inst, rep, err, exact_opt(inst).opt_cost))
        runs[prob] = out
    return runs
