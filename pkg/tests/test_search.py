import math
from collections import Counter

import numpy as np
import pytest

from conftest import small_formulas
from pfpsat.analytic import evolve
from pfpsat.cnf import CnfFormula, evaluate, format_assignment, truth_table
from pfpsat.schedule import PhiSchedule, critical_phi, grover_angle, phi_critical, phi_unknown
from pfpsat.search import (LocalExecutor, circuit_operator_equivalence, default_max_iters,
                           grover_run, pfp_run, pfp_trajectories)


def test_phi_unknown_examples():
    assert phi_unknown(1) == pytest.approx(math.pi / 2, abs=1e-15)
    assert math.cos(phi_unknown(2)) == pytest.approx(0.171573, abs=1e-6)
    assert phi_unknown(2) == pytest.approx(1.39840, abs=1e-4)
    values = [phi_unknown(t) for t in range(1, 2000)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 0.06
    with pytest.raises(ValueError):
        phi_unknown(0)


def test_critical_phi_examples():
    assert math.cos(critical_phi(math.asin(math.sqrt(1 / 8)))) == pytest.approx(0.477593, abs=1e-6)
    assert critical_phi(math.pi / 2) == pytest.approx(math.pi / 2)
    assert phi_critical(8, 8) == pytest.approx(math.pi / 2)
    assert phi_critical(1, 8) == pytest.approx(critical_phi(grover_angle(1, 8)))
    for bad in ((0, 8), (9, 8)):
        with pytest.raises(ValueError):
            phi_critical(*bad)


def test_schedule_objects():
    assert PhiSchedule.unknown()(3) == phi_unknown(3)
    sched = PhiSchedule.critical_for(1, 8)
    assert sched(1) == sched(7) == phi_critical(1, 8)
    assert PhiSchedule.fixed(0.25)(9) == 0.25
    assert PhiSchedule.critical_for(4, 4).kind == "fixed"
    assert PhiSchedule.fixed(0.25).describe() == "fixed:0.25"
    with pytest.raises(ValueError):
        PhiSchedule("other")
    with pytest.raises(ValueError):
        PhiSchedule.fixed(4.0)
    with pytest.raises(ValueError):
        PhiSchedule("critical")


def test_default_cap():
    assert default_max_iters(8) == math.ceil(3 * math.pi / 4 * math.sqrt(8)) + 10


def _schedules(f):
    m = int(truth_table(f).sum())
    return [PhiSchedule.unknown(), PhiSchedule.critical_for(m, 1 << f.num_vars)]


def test_exact_mode_monotone_and_valid():
    for f in small_formulas():
        for sched in _schedules(f):
            rep = pfp_run(f, sched, "exact", max_iters=40, success_target=None)
            curve = rep.success_curve
            assert all(b >= a - 1e-12 for a, b in zip(curve, curve[1:]))
            weights = [r.branch_weight for r in rep.records]
            assert all(b <= a + 1e-12 for a, b in zip(weights, weights[1:]))
            assert curve[-1] >= 0.99
            assert rep.solved and evaluate(f, rep.assignment)
            assert all(truth_table(f)[k] for k in rep.distribution)


def test_units3_exact_solves_to_111(units3):
    rep = pfp_run(units3, PhiSchedule.unknown(), "exact")
    assert rep.solved and format_assignment(rep.assignment) == "111"
    assert rep.success_curve[-1] >= 0.99


def test_showcase_formula_halting_distribution_is_uniform_over_solutions(showcase):
    rep = pfp_run(showcase, PhiSchedule.unknown(), "exact")
    assert rep.solved and evaluate(showcase, rep.assignment)
    assert set(rep.distribution) == {1, 3, 5, 7}
    values = list(rep.distribution.values())
    assert max(values) - min(values) < 1e-12


def test_unsat_never_flips(contradiction):
    rep = pfp_run(contradiction, PhiSchedule.unknown(), "exact")
    assert not rep.solved and rep.assignment is None
    assert rep.iterations == default_max_iters(2)
    assert all(r.flip_probability < 1e-12 for r in rep.records)
    assert rep.status == "exhausted" and "unsatisfiable" in rep.message()
    tr = pfp_run(contradiction, mode="trajectory", seed=1, max_iters=20)
    assert not tr.solved and all(r.outcome == 1 for r in tr.records)


def test_trajectory_requires_seed(showcase):
    with pytest.raises(ValueError):
        pfp_run(showcase, mode="trajectory")
    with pytest.raises(ValueError):
        pfp_run(showcase, mode="fast")
    with pytest.raises(ValueError):
        pfp_run(showcase, max_iters=-1)


def test_trajectory_is_reproducible_and_valid():
    for f in small_formulas():
        a = pfp_run(f, mode="trajectory", seed=7)
        b = pfp_run(f, mode="trajectory", seed=7)
        assert a.to_dict() == b.to_dict()
        assert a.solved and evaluate(f, a.assignment)


def test_trajectories_independent_of_jobs(or2):
    serial = pfp_trajectories(or2, runs=12, seed=5)
    parallel = pfp_trajectories(or2, runs=12, seed=5, jobs=3)
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in parallel]


def test_trajectory_halting_times_match_exact(or2):
    runs = 10_000
    reports = pfp_trajectories(or2, runs=runs, seed=99)
    exact = pfp_run(or2, mode="exact", success_target=None, max_iters=default_max_iters(4))
    counts = Counter(r.iterations for r in reports if r.solved)
    for rec in exact.records:
        p = rec.halt_probability
        sigma = math.sqrt(runs * p * (1 - p)) if 0 < p < 1 else 0
        assert abs(counts.get(rec.t, 0) - runs * p) <= 5 * sigma + 1e-9


def test_hygiene_on_all_small_formulas():
    for f in small_formulas():
        for sched in _schedules(f):
            rep = pfp_run(f, sched, "exact", max_iters=12, success_target=None)
            assert max(r.ancilla_leakage for r in rep.records) < 1e-12
            assert max(r.group_leakage for r in rep.records) < 1e-12


def test_grover_run_examples(units3):
    curve = grover_run(units3, 8)
    assert curve[0] == pytest.approx(1 / 8)
    best = int(np.argmax(curve))
    assert any(curve[t] < curve[best] - 0.1 for t in range(best + 1, 9))
    with pytest.raises(ValueError):
        grover_run(units3, -1)


def test_operator_equivalence(showcase, units3):
    for f in (showcase, units3):
        for phi in (0.0, math.pi / 2, 1.0, 2.5):
            assert circuit_operator_equivalence(f, phi) < 1e-10
    # no marked states: reduces to controlled G
    assert circuit_operator_equivalence(CnfFormula.from_lists(1, [[1], [-1]]), 0.7) < 1e-10
    # the sign correction on the control is needed
    assert circuit_operator_equivalence(showcase, 0.0, control_sign=False) > 0.5
    with pytest.raises(ValueError):
        circuit_operator_equivalence(CnfFormula.from_lists(5, [[5]]), 0.0)


def test_traces_follow_recursion():
    for f in small_formulas():
        n = f.num_vars
        m = int(truth_table(f).sum())
        theta = grover_angle(m, 1 << n)
        for sched in _schedules(f):
            rep = pfp_run(f, sched, "exact", max_iters=10, success_target=None)
            model = evolve(theta, sched, len(rep.records))
            for rec, st in zip(rep.records, model[1:]):
                assert np.allclose(rec.traces, (st.a, st.o, st.p), atol=1e-9)


def test_executor_reads_member_zero(showcase):
    ex = LocalExecutor(showcase)
    s = ex.initial_state()
    bits = ex.read_assignment(s, np.random.default_rng(0))
    assert len(bits) == 3
