import itertools
import math

import numpy as np
import pytest

from conftest import small_formulas
from pfpsat.builders import (build_clause_circuit, build_controlled_diffuser,
                             build_controlled_oracle, build_formula_conjunction,
                             build_grover_baseline, build_layout, build_sequential_layout,
                             build_sequential_oracle, diffusion_matrix, initial_state,
                             oracle_diagonal)
from pfpsat.circuit import GateKind
from pfpsat.cnf import Clause, CnfFormula, assignment_to_int, enumerate_solutions, evaluate
from pfpsat.search import grover_run
from pfpsat.sim import (StateVector, apply, circuit_unitary, group_disagreement,
                        init_state, qubits_excited)


def _basis(layout, values, control=1, clause_bits=None):
    """Basis index with every member of group j holding values[j]."""
    idx = 0
    for v, group in zip(values, layout.group_members):
        if v:
            for q in group:
                idx |= 1 << q
    for q, b in zip(layout.clause_qubits, clause_bits or ()):
        idx |= b << q
    if control and layout.control_qubit is not None:
        idx |= 1 << layout.control_qubit
    return idx


def test_layout_showcase(showcase):
    lay = build_layout(showcase)
    assert lay.group_members == ((0, 1, 2), (3,), (4,))
    assert lay.clause_qubits == (5, 6, 7)
    assert (lay.formula_qubit, lay.control_qubit, lay.total_width) == (8, 9, 10)
    assert lay.occurrence == {(0, 0): 0, (1, 0): 1, (1, 1): 3, (2, 0): 2, (2, 1): 4}
    assert lay.representatives == (0, 3, 4)


def test_layout_minimal_and_free_variable():
    assert build_layout(CnfFormula.from_lists(1, [[1]])).total_width == 4
    lay = build_layout(CnfFormula.from_lists(3, [[1, -3], [3]]))
    assert lay.group_members == ((0,), (1,), (2, 3))
    assert 1 not in lay.occurrence.values()
    assert lay.total_width == 4 + 2 + 2


def test_layout_occurrence_is_bijection():
    for f in small_formulas():
        lay = build_layout(f)
        used = list(lay.occurrence.values())
        assert len(used) == len(set(used)) == sum(len(c) for c in f.clauses)
        all_idx = list(lay.variable_qubits) + list(lay.ancillas) + [lay.control_qubit]
        assert sorted(all_idx) == list(range(lay.total_width))


def test_initial_state_showcase(showcase):
    lay = build_layout(showcase)
    s = initial_state(lay)
    expected = init_state(3, ghz=[(0, 1, 2)])
    plus = np.array([1, 1]) / math.sqrt(2)
    vec = np.kron(np.array([0, 1]), np.kron(np.array([1, 0]), np.kron(
        np.eye(8)[0], np.kron(plus, np.kron(plus, expected.amplitudes)))))
    assert np.allclose(s.amplitudes, vec)


def _clause_output(clause, bits):
    f = CnfFormula(max(clause.variables()), (clause,))
    lay = build_layout(f, with_control=False)
    circ = build_clause_circuit(clause, lay, 0)
    idx = 0
    for slot, b in enumerate(bits):
        idx |= b << lay.occurrence[(0, slot)]
    out = apply(StateVector.basis(lay.total_width, idx), circ)
    k = int(np.flatnonzero(np.abs(out.amplitudes) > 0.5)[0])
    return (k >> lay.clause_qubits[0]) & 1


def test_clause_circuit_examples():
    c = Clause.of(1, 2)
    assert _clause_output(c, (0, 0)) == 0
    assert _clause_output(c, (1, 0)) == 1


def test_clause_circuit_exhaustive_up_to_width_4():
    for width in range(1, 5):
        for signs in itertools.product((1, -1), repeat=width):
            clause = Clause.of(*(s * (v + 1) for v, s in enumerate(signs)))
            for bits in itertools.product((0, 1), repeat=width):
                assign = [0] * width
                for lit, b in zip(clause, bits):
                    assign[lit.variable - 1] = b
                assert _clause_output(clause, bits) == clause.satisfied_by(assign)


def test_clause_circuit_restore_flag():
    lay = build_sequential_layout(CnfFormula.from_lists(2, [[1, 2]]))
    kept = build_clause_circuit(Clause.of(1, 2), lay, 0)
    restored = build_clause_circuit(Clause.of(1, 2), lay, 0, restore=True)
    assert restored.count("X") == kept.count("X") + 2


def test_formula_conjunction(showcase):
    lay = build_layout(showcase, with_control=False)
    conj = build_formula_conjunction(lay)
    assert len(conj) == 1 and conj.gates[0].kind is GateKind.MCX
    assert conj.gates[0].controls == lay.clause_qubits
    for bits, fired in (((1, 1, 1), 1), ((1, 1, 0), 0)):
        idx = sum(b << q for b, q in zip(bits, lay.clause_qubits))
        out = apply(StateVector.basis(lay.total_width, idx), conj)
        assert out.qubit_probability(lay.formula_qubit) == fired


def test_formula_value_matches_evaluate(showcase):
    lay = build_layout(showcase)
    omega = build_controlled_oracle(lay, showcase, 0.0).select("omega")
    for k in range(8):
        values = [(k >> j) & 1 for j in range(3)]
        out = apply(StateVector.basis(lay.total_width, _basis(lay, values)), omega)
        assert out.qubit_probability(lay.formula_qubit) == evaluate(showcase, values)


def test_oracle_stage_labels(showcase):
    oracle = build_controlled_oracle(build_layout(showcase), showcase, 0.3)
    assert oracle.stages() == ["omega/clauses", "omega/rotation", "omega/conjunction", "phase",
                               "omega_inv/conjunction", "omega_inv/rotation", "omega_inv/clauses"]
    strip = lambda c: [(g.kind, g.target, g.controls, g.angle) for g in c]
    assert strip(oracle.select("omega_inv")) == strip(oracle.select("omega").inverse())
    assert oracle.select("phase").gates[0].kind is GateKind.CZ


def test_oracle_phase_flip_at_phi_zero():
    for f in small_formulas():
        lay = build_layout(f)
        oracle = build_controlled_oracle(lay, f, 0.0)
        sols = {assignment_to_int(a) for a in enumerate_solutions(f)}
        for k in range(1 << f.num_vars):
            values = [(k >> j) & 1 for j in range(f.num_vars)]
            idx = _basis(lay, values)
            out = apply(StateVector.basis(lay.total_width, idx), oracle)
            expected = -1 if k in sols else 1
            assert abs(out.amplitudes[idx] - expected) < 1e-12
            assert qubits_excited(out, lay.ancillas) < 1e-12


def test_oracle_restores_ancillas_on_random_inputs():
    rng = np.random.default_rng(4)
    for f in small_formulas():
        lay = build_layout(f)
        oracle = build_controlled_oracle(lay, f, rng.uniform(0, math.pi))
        for k in range(1 << f.num_vars):
            values = [(k >> j) & 1 for j in range(f.num_vars)]
            for control in (0, 1):
                out = apply(StateVector.basis(lay.total_width, _basis(lay, values, control)), oracle)
                assert qubits_excited(out, lay.ancillas) < 1e-12


def test_oracle_clause_depth_constant_in_m():
    def clause_depth(m):
        clauses = [[3 * i + 1, -(3 * i + 2), 3 * i + 3] for i in range(m)]
        f = CnfFormula.from_lists(3 * m, clauses)
        return build_controlled_oracle(build_layout(f), f, 0.5).staged_depth("omega/clauses")
    assert clause_depth(1) == clause_depth(50) == 2


def test_sequential_oracle_depth_grows_with_m():
    def depth(m):
        clauses = [[1 + i % 3, -(1 + (i + 1) % 3), 1 + (i + 2) % 3] for i in range(m)]
        f = CnfFormula.from_lists(3, clauses)
        return build_sequential_oracle(f).staged_depth("clauses")
    d1, d50 = depth(1), depth(50)
    assert d50 >= 50 * d1 / 2
    assert [depth(m) for m in (1, 2, 4, 8)] == sorted(depth(m) for m in (1, 2, 4, 8))


def test_sequential_oracle_phase_flip(showcase):
    lay = build_sequential_layout(showcase)
    u = circuit_unitary(build_sequential_oracle(showcase, lay))
    diag = oracle_diagonal([assignment_to_int(a) for a in enumerate_solutions(showcase)], 3)
    for k in range(8):
        assert abs(u[k, k] - diag[k]) < 1e-12


def test_diffuser_control_zero_is_identity(showcase):
    lay = build_layout(showcase)
    diff = build_controlled_diffuser(lay)
    assert diff.stages() == ["disentangle", "reflect", "reentangle"]
    rng = np.random.default_rng(0)
    psi = StateVector.random(lay.total_width, rng)
    amps = psi.amplitudes.copy()
    amps[_mask_idx(lay.total_width, lay.control_qubit)] = 0
    psi = StateVector(amps / np.linalg.norm(amps))
    out = apply(psi.copy(), diff)
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


def _mask_idx(width, q):
    return ((np.arange(1 << width) >> q) & 1).astype(bool)


def test_diffuser_control_one_is_minus_grover_reflection():
    f = CnfFormula.from_lists(3, [[1], [2], [3]])
    lay = build_layout(f)
    assert all(len(g) == 1 for g in lay.group_members)
    u = circuit_unitary(build_controlled_diffuser(lay))
    reps = list(lay.representatives)
    base = 1 << lay.control_qubit
    idx = [base | sum(((k >> j) & 1) << q for j, q in enumerate(reps)) for k in range(8)]
    block = u[np.ix_(idx, idx)]
    g = diffusion_matrix(3)
    # equal to -G up to global phase
    assert np.allclose(block, -g, atol=1e-12)


def test_diffuser_preserves_group_agreement(showcase):
    lay = build_layout(showcase)
    s = initial_state(lay)
    apply(s, build_controlled_diffuser(lay))
    assert group_disagreement(s, lay.group_members) < 1e-12


def test_grover_baseline_shape(showcase):
    oracle, diffuser, lay = build_grover_baseline(showcase)
    assert lay.control_qubit is None and lay.total_width == 3 + 3 + 1
    assert diffuser.count("MCZ") == 1


def test_grover_tautology_keeps_success():
    curve = grover_run(CnfFormula.from_lists(2, [[1, -1]]), 1)
    assert curve == pytest.approx([1.0, 1.0], abs=1e-12)
    lay = build_sequential_layout(CnfFormula.from_lists(1, [[1, -1]]))
    clause = build_clause_circuit(Clause.of(1, -1), lay, 0, restore=True)
    assert [g.kind for g in clause] == [GateKind.X]


def test_grover_units3_checkpoints(units3):
    curve = grover_run(units3, 6)
    assert curve[0] == pytest.approx(1 / 8)
    assert curve[2] == pytest.approx(0.9453125, abs=1e-12)
    assert curve[6] >= 0.999


def test_grover_showcase_formula_has_four_solutions(showcase):
    # M = 4 of N = 8: one Grover step rotates by pi/2 and success stays at 1/2
    assert grover_run(showcase, 6) == pytest.approx([0.5] * 7, abs=1e-12)
