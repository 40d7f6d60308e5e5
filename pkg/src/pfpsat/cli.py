"""Command-line interface: ``pfpsat {solve,compare,dist-verify,analytic}``.

Exit codes: 0 solved / verified, 1 usage or input error, 2 exhausted or
deviation above threshold. All outputs are deterministic for a fixed
configuration and seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import Counter

import numpy as np

from . import analytic, distnet
from .cnf import CnfError, CnfFormula, format_assignment, load_dimacs, truth_table
from .schedule import PhiSchedule, grover_angle
from .search import pfp_run, pfp_trajectories, grover_run

EXIT_OK, EXIT_ERROR, EXIT_EXHAUSTED = 0, 1, 2
SCHEMA = 1
DEVIATION_LIMIT = 1e-9


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> CnfFormula:
    try:
        return load_dimacs(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def count_solutions(formula: CnfFormula) -> int:
    try:
        return int(truth_table(formula).sum())
    except ValueError as exc:
        raise UsageError(f"{exc}; pass --solutions") from None


def parse_schedule(text: str, formula: CnfFormula | None = None,
                   solutions: int | None = None) -> PhiSchedule:
    """``unknown``, ``critical`` (M from --solutions or brute force) or ``fixed:<phi>``."""
    kind, _, arg = text.partition(":")
    if kind == "unknown" and not arg:
        return PhiSchedule.unknown()
    if kind == "fixed":
        try:
            return PhiSchedule.fixed(float(arg))
        except ValueError as exc:
            raise UsageError(f"bad fixed schedule {text!r}: {exc}") from None
    if kind == "critical" and not arg:
        if formula is None:
            raise UsageError("critical schedule needs a formula")
        m = solutions if solutions is not None else count_solutions(formula)
        if m < 1:
            raise UsageError("critical schedule needs at least one solution")
        return PhiSchedule.critical_for(m, 1 << formula.num_vars)
    raise UsageError(f"unknown schedule {text!r} (unknown | critical | fixed:<phi>)")


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ solve

def cmd_solve(args) -> int:
    formula = _load(args.input)
    schedule = parse_schedule(args.schedule, formula, args.solutions)
    mode = "trajectory" if args.mode.startswith("traj") else "exact"
    if mode == "trajectory" and args.seed is None:
        raise UsageError("trajectory mode requires --seed")
    partition = None
    if args.partition:
        try:
            partition = distnet.load_partition(args.partition)
            partition.check(formula)
        except OSError as exc:
            raise UsageError(f"cannot read {args.partition}: {exc.strerror}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    doc = {"schema": SCHEMA, "mode": mode, "schedule": schedule.describe(), "seed": args.seed,
           "num_vars": formula.num_vars, "num_clauses": formula.num_clauses}
    if mode == "exact":
        if partition is not None:
            report, trace = distnet.distributed_pfp_run(formula, partition, schedule, "exact",
                                                         seed=args.seed or 0,
                                                         max_iters=args.max_iters)
            doc["classical_bits"] = trace.classical_bits
        else:
            report = pfp_run(formula, schedule, "exact", args.max_iters)
        solved = report.solved
        doc.update(
            status=report.status, iterations=report.iterations,
            assignment=format_assignment(report.assignment) if solved else None,
            success_probability_curve=report.success_curve,
            halting_distribution={format_assignment(_bits(k, formula.num_vars)): v
                                  for k, v in sorted(report.distribution.items())})
    else:
        if args.runs < 1:
            raise UsageError("--runs must be >= 1")
        if partition is not None:
            children = np.random.SeedSequence(args.seed).spawn(args.runs)
            reports = []
            for child in children:
                rep, _ = distnet.distributed_pfp_run(
                    formula, partition, schedule, "trajectory",
                    seed=int(child.generate_state(1)[0]), max_iters=args.max_iters)
                reports.append(rep)
        else:
            reports = pfp_trajectories(formula, schedule, args.runs, args.seed,
                                       args.max_iters, jobs=args.jobs)
        solved_reports = [r for r in reports if r.solved]
        solved = bool(solved_reports)
        horizon = max(r.iterations for r in reports)
        # empirical fraction of runs halted by step t
        curve = [sum(r.solved and r.iterations <= t for r in reports) / len(reports)
                 for t in range(1, horizon + 1)]
        outcomes = Counter(format_assignment(r.assignment) for r in solved_reports)
        doc.update(
            status="solved" if solved else "exhausted",
            iterations=reports[0].iterations if args.runs == 1 else horizon,
            assignment=format_assignment(solved_reports[0].assignment) if solved else None,
            success_probability_curve=curve,
            runs=args.runs,
            outcomes=dict(sorted(outcomes.items())))
        if args.runs > 1:
            doc["iterations_per_run"] = [r.iterations for r in reports]
    if solved:
        doc["message"] = "solution found"
    else:
        doc["message"] = "no control flip observed - instance likely unsatisfiable"
    _emit(_dump_json(doc), args.out)
    return EXIT_OK if solved else EXIT_EXHAUSTED


def _bits(k: int, n: int) -> tuple[int, ...]:
    return tuple((k >> i) & 1 for i in range(n))


# ---------------------------------------------------------------- compare

def compare_rows(formula: CnfFormula, steps: int) -> list[list]:
    """Exact success per step for Grover and both fixed-point schedules.

    A fixed-point run whose halting mass is exhausted early keeps its final
    value on later rows. The critical column is empty for unsatisfiable input.
    """
    grover = grover_run(formula, steps)
    m = count_solutions(formula)
    pfp_u = _pfp_column(formula, PhiSchedule.unknown(), steps)
    pfp_c = (_pfp_column(formula, PhiSchedule.critical_for(m, 1 << formula.num_vars), steps)
             if m else [None] * (steps + 1))
    return [[t, grover[t], pfp_u[t], pfp_c[t]] for t in range(steps + 1)]


def _pfp_column(formula, schedule, steps):
    curve = [0.0]
    if steps:
        curve += pfp_run(formula, schedule, "exact", steps, success_target=None).success_curve
    while len(curve) < steps + 1:
        curve.append(curve[-1])
    return curve


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, int) else ("" if c is None else analytic.fmt(c))
                    for c in row])
    return buf.getvalue()


def cmd_compare(args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    formula = _load(args.input)
    rows = compare_rows(formula, args.steps)
    _emit(_csv(["t", "grover_success", "pfp_unknown_success", "pfp_critical_success"], rows),
          args.out)
    return EXIT_OK


# ------------------------------------------------------------ dist-verify

def cmd_dist_verify(args) -> int:
    if args.input:
        formula = _load(args.input)
        if args.partition:
            try:
                partition = distnet.load_partition(args.partition)
                partition.check(formula)
            except OSError as exc:
                raise UsageError(f"cannot read {args.partition}: {exc.strerror}") from None
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        else:
            partition = distnet.Partition.one_clause_per_node(formula)
        schedule = PhiSchedule.unknown()
        comps = distnet.compare_with_monolithic(
            formula, partition, [schedule(t) for t in range(1, args.steps + 1)], seed=args.seed)
        worst = max(c.deviation for c in comps)
        doc = {"schema": SCHEMA, "kind": "pfp", "partition": json.loads(partition.to_json()),
               "seed": args.seed, "iterations": len(comps),
               "max_deviation": worst,
               "max_comm_leakage": max(c.comm_leakage for c in comps),
               "classical_bits_per_iteration": [c.classical_bits for c in comps],
               "violations": comps[-1].violations}
        bad = worst > DEVIATION_LIMIT or doc["violations"]
    else:
        if not 1 <= args.m <= 4:
            raise UsageError("--m must lie in 1..4")
        try:
            distnet.parse_unitary(args.unitary, np.random.default_rng(0))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = distnet.verify_distributed_gate(args.m, args.unitary, args.inputs, args.seed,
                                                 corrupt=args.corrupt_correction)
        doc = {"schema": SCHEMA, "kind": "gate", **report}
        bad = report["max_deviation"] > DEVIATION_LIMIT or report["violations"]
    doc["verified"] = not bad
    _emit(_dump_json(doc), args.out)
    return EXIT_EXHAUSTED if bad else EXIT_OK


# --------------------------------------------------------------- analytic

def cmd_analytic(args) -> int:
    if args.theta is not None:
        if args.M is not None or args.N is not None:
            raise UsageError("give either --theta or --M/--N")
        theta = args.theta
        if args.schedule == "critical":
            schedule = PhiSchedule.critical(theta)
        else:
            schedule = parse_schedule(args.schedule)
    else:
        if args.M is None or args.N is None:
            raise UsageError("give --theta or both --M and --N")
        try:
            theta = grover_angle(args.M, args.N)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        schedule = (PhiSchedule.critical(theta) if args.schedule == "critical"
                    else parse_schedule(args.schedule))
    if not 0 <= theta <= math.pi:
        raise UsageError(f"theta must lie in [0, pi], got {theta}")
    _emit(analytic.curve_csv(theta, schedule, args.steps), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfpsat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="search for a satisfying assignment")
    s.add_argument("input", help="DIMACS CNF file")
    s.add_argument("--mode", default="exact", choices=["exact", "trajectory", "trajectories"])
    s.add_argument("--schedule", default="unknown", help="unknown | critical | fixed:<phi>")
    s.add_argument("--solutions", type=int, help="known solution count for --schedule critical")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--runs", type=int, default=1, help="independent trajectories")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for trajectories")
    s.add_argument("--partition", help="JSON clause-to-node map; runs distributed")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="Grover vs fixed-point success per iteration (CSV)")
    c.add_argument("input")
    c.add_argument("--steps", type=int, default=8)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    d = sub.add_parser("dist-verify", help="check the distributed controlled-U protocol")
    d.add_argument("input", nargs="?", help="optional DIMACS file: verify a distributed search")
    d.add_argument("--m", type=int, default=2, help="number of controls (1..4)")
    d.add_argument("--unitary", default="X", help="X | Y | Z | H | RY:<angle> | random")
    d.add_argument("--inputs", type=int, default=20, help="random input states")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--steps", type=int, default=3, help="search iterations when INPUT is given")
    d.add_argument("--partition")
    d.add_argument("--out")
    d.add_argument("--corrupt-correction", action="store_true", help=argparse.SUPPRESS)
    d.set_defaults(func=cmd_dist_verify)

    a = sub.add_parser("analytic", help="transfer-matrix success curve (CSV)")
    a.add_argument("--M", type=int)
    a.add_argument("--N", type=int)
    a.add_argument("--theta", type=float)
    a.add_argument("--schedule", default="unknown", help="unknown | critical | fixed:<phi>")
    a.add_argument("--steps", type=int, default=20)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analytic)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CnfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
