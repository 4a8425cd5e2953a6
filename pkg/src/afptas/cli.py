"""Command line: generate, solve, compare, verify.

Exit codes: 0 success, 1 infeasible packing or broken guarantee, 2 usage or
input error, 3 solver failure. Set AFPTAS_LOG (e.g. INFO, DEBUG) for stage logs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from .assembly import Packing
from .core import Problem, format_exact, instance_to_dict, load_instance, validate_and_normalize
from .errors import AfptasError, ConvergenceFailure, InternalInvariantViolation, NumericalInstability
from .generate import PENALTY_DISTS, SIZE_DISTS, generate_instance
from .solver import solve
from .verify import EXACT_BPCC_LIMIT, EXACT_BPR_LIMIT, check, exact_opt, ffd_baseline

RUN_FIELDS = [
    "instance_id", "n", "k", "epsilon", "algorithm", "cost", "bins", "rejected_cost",
    "lp_value", "opt_exact", "guarantee_mult", "guarantee_add", "runtime_ms",
]

SOLVER_ERRORS = (ConvergenceFailure, NumericalInstability, InternalInvariantViolation)


def _fmt_float(x) -> str:
    return "" if x is None else f"{x:.9f}"


def _load(path, epsilon):
    inst = load_instance(path, epsilon)
    inst = validate_and_normalize(inst)
    for w in inst.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return inst


def _rejected_cost(packing: Packing, inst) -> Fraction:
    return sum((inst.by_id[i].penalty for i in packing.rejected), Fraction(0))


def _record(instance_id, inst, algorithm, packing, lp_value, opt, guarantee, ms) -> dict:
    return {
        "instance_id": instance_id,
        "n": inst.n,
        "k": "" if inst.k is None else inst.k,
        "epsilon": str(inst.epsilon),
        "algorithm": algorithm,
        "cost": format_exact(packing.cost),
        "bins": packing.num_bins,
        "rejected_cost": format_exact(_rejected_cost(packing, inst)),
        "lp_value": _fmt_float(lp_value),
        "opt_exact": "" if opt is None else format_exact(opt),
        "guarantee_mult": "" if guarantee is None else format_exact(guarantee.multiplicative),
        "guarantee_add": "" if guarantee is None else format_exact(guarantee.additive),
        "runtime_ms": f"{ms:.3f}",
    }


def _write_csv(rows, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=RUN_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def cmd_generate(args) -> int:
    if args.n < 1:
        print("error: --n must be positive", file=sys.stderr)
        return 2
    if args.problem == "bpcc" and (args.k is None or args.k < 1):
        print("error: bpcc needs --k >= 1", file=sys.stderr)
        return 2
    inst = generate_instance(args.problem, args.n, args.k, args.size_dist, args.penalty_dist, args.seed, args.epsilon)
    text = json.dumps(instance_to_dict(inst), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    inst = _load(args.input, args.epsilon)
    t = time.perf_counter()
    report = solve(inst, dump_lp=args.dump_lp)
    ms = 1000 * (time.perf_counter() - t)
    if args.format == "csv":
        row = _record(Path(args.input).stem, inst, "afptas", report.packing, report.lp_value, None, report.guarantee, ms)
        _write_csv([row], args.out)
        return 0
    text = json.dumps(report.to_dict(), indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    algos = {a.strip() for a in args.with_.split(",") if a.strip()}
    unknown = algos - {"exact", "ffd"}
    if unknown:
        print(f"error: unknown algorithms {sorted(unknown)}", file=sys.stderr)
        return 2
    paths = []
    for p in args.input:
        p = Path(p)
        paths.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    rows, broken = [], []
    for path in sorted(paths, key=lambda p: p.stem):
        inst = _load(path, args.epsilon)
        iid = path.stem
        t = time.perf_counter()
        report = solve(inst)
        ms = 1000 * (time.perf_counter() - t)
        opt = None
        exact_rows = []
        limit = EXACT_BPR_LIMIT if inst.problem is Problem.BPR else EXACT_BPCC_LIMIT
        if "exact" in algos and inst.n <= limit:
            t = time.perf_counter()
            ex = exact_opt(inst)
            opt = ex.opt_cost
            exact_rows.append(_record(iid, inst, "exact", ex.witness, None, opt, None, 1000 * (time.perf_counter() - t)))
        rows.append(_record(iid, inst, "afptas", report.packing, report.lp_value, opt, report.guarantee, ms))
        rows.extend(exact_rows)
        if "ffd" in algos:
            t = time.perf_counter()
            ff = ffd_baseline(inst)
            rows.append(_record(iid, inst, "ffd", ff, None, opt, None, 1000 * (time.perf_counter() - t)))
        if opt is not None and report.packing.cost > report.guarantee.bound(opt):
            broken.append(iid)
    _write_csv(rows, args.out)
    if broken:
        print(f"guarantee violated on: {', '.join(broken)}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    inst = _load(args.input, None)
    with open(args.packing) as fh:
        data = json.load(fh)
    if "packing" in data:  # a full solve report
        data = data["packing"]
    problems = check(Packing.from_dict(data), inst)
    if problems:
        for p in problems:
            print(p)
        return 1
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="afptas", description="Approximation schemes for BPCC and BPR.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--problem", choices=["bpcc", "bpr"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--size-dist", choices=SIZE_DISTS, default="uniform")
    g.add_argument("--penalty-dist", choices=PENALTY_DISTS, default="uniform")
    g.add_argument("--epsilon", default="1/3", help="only shapes the clustered size mix")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--epsilon")
    s.add_argument("--out")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--dump-lp", help="write the final restricted LP in LP-file format")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="solve and compare against exact and FFD")
    c.add_argument("--in", dest="input", nargs="+", required=True, help="instance files or directories")
    c.add_argument("--epsilon")
    c.add_argument("--with", dest="with_", default="exact,ffd")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify", help="check a packing against an instance")
    v.add_argument("--packing", required=True)
    v.add_argument("--in", dest="input", required=True)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("AFPTAS_LOG")
    if level:
        logging.basicConfig(level=level.upper(), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (AfptasError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
