from __future__ import annotations

import json
from fractions import Fraction

import pytest

from afptas.core import CaseTag, Instance, Item, Problem
from afptas.solver import dispatch, guarantee_of, solve
from afptas.verify import check, exact_opt

F = Fraction

TINY_BPCC = Instance(Problem.BPCC, tuple(Item(i, F(s)) for i, s in enumerate(["0.6"] * 3 + ["0.4"] * 3)), 2, F(1, 2))
TINY_BPR = Instance(Problem.BPR, tuple(Item(i, F(3, 5), F(1, 10)) for i in range(3)), None, F(1, 3))


def test_guarantee_small_k():
    g = guarantee_of(F(1, 2), CaseTag.BPCC_SMALL_K)
    assert (g.multiplicative, g.additive) == (2, 9)


def test_guarantee_large_k():
    g = guarantee_of(F(1, 2), CaseTag.BPCC_LARGE_K)
    assert (g.multiplicative, g.additive) == (6, 447)


def test_guarantee_bpr():
    g = guarantee_of(F(1, 3), CaseTag.BPR)
    assert g.multiplicative == 1 + F(10, 3)
    assert g.additive == 4 * 243 + 4 * 244**3 + 1


def test_folded_bpr_guarantee_scales_both_terms():
    plain = guarantee_of(F(1, 3), CaseTag.BPR)
    folded = guarantee_of(F(1, 3), CaseTag.BPR, fold_penalty_rounding=True)
    assert folded.multiplicative == plain.multiplicative * F(4, 3)
    assert folded.additive == plain.additive * F(4, 3)


def test_dispatch():
    assert dispatch(Problem.BPCC, 4, F(1, 2)) is CaseTag.BPCC_SMALL_K
    assert dispatch(Problem.BPCC, 5, F(1, 2)) is CaseTag.BPCC_LARGE_K
    assert dispatch(Problem.BPR, None, F(1, 3)) is CaseTag.BPR


def test_tiny_bpcc():
    rep = solve(TINY_BPCC)
    assert rep.case is CaseTag.BPCC_SMALL_K
    assert check(rep.packing, TINY_BPCC) == []
    opt = exact_opt(TINY_BPCC).opt_cost
    assert opt == 3
    assert rep.packing.cost <= rep.guarantee.bound(opt)
    assert rep.lp_value <= opt + 1e-9


def test_tiny_bpr():
    rep = solve(TINY_BPR)
    assert check(rep.packing, TINY_BPR) == []
    assert exact_opt(TINY_BPR).opt_cost == F(3, 10)
    assert rep.packing.cost <= rep.guarantee.bound(F(3, 10))


def test_k_one_gives_one_item_per_bin():
    inst = Instance(Problem.BPCC, tuple(Item(i, F(1, 10)) for i in range(7)), 1, F(1, 3))
    rep = solve(inst)
    assert check(rep.packing, inst) == []
    assert all(len(b.items) == 1 for b in rep.packing.bins)
    assert rep.packing.cost == 7


def test_large_k_uses_window_path():
    inst = Instance(Problem.BPCC, tuple(Item(i, F(i % 7 + 1, 20)) for i in range(30)), 100, F(1, 3))
    rep = solve(inst)
    assert rep.case is CaseTag.BPCC_LARGE_K
    assert rep.rounded.k == 30  # k beyond n acts as n
    assert check(rep.packing, inst) == []


def test_report_serializes():
    rep = solve(TINY_BPCC)
    data = json.loads(json.dumps(rep.to_dict()))
    assert data["case"] == "BPCC_SMALL_K"
    assert "packing" in data and "lp_value" in data


def test_stage_costs_recorded():
    inst = Instance(Problem.BPCC, tuple(Item(i, F(i % 9 + 1, 30)) for i in range(40)), 12, F(1, 3))
    rep = solve(inst)
    assert set(rep.stage_costs) >= {"LARGE", "FINAL"}
    assert rep.stage_costs["FINAL"] == rep.packing.cost


def test_solve_is_deterministic():
    inst = Instance(Problem.BPR, tuple(Item(i, F(i % 9 + 1, 10), F(i % 5 + 1, 5)) for i in range(25)), None, F(1, 3))
    a, b = solve(inst), solve(inst)
    assert a.packing == b.packing


def test_dense_backend_agrees_on_tiny():
    a = solve(TINY_BPCC, backend="dense")
    assert check(a.packing, TINY_BPCC) == []
    assert a.lp_value == pytest.approx(solve(TINY_BPCC).lp_value, abs=1e-6)
