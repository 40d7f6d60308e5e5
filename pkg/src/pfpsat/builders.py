"""Circuit construction for parallel fixed-point search and the Grover baseline.

Layout of the parallel register (see :func:`build_layout`)::

    [x_1 group][x_2 group]...[x_n group][clause 1..m][formula][control]

Variable ``x_j`` occurring ``r_j`` times gets ``r_j`` qubits (one per
occurrence, GHZ-initialised); a variable with no occurrence gets a single
|+> qubit. Every clause therefore reads its own private qubits, which is what
lets all clause circuits run in the same layers.

Stage labels used on the controlled oracle::

    omega/clauses  omega/rotation  omega/conjunction  phase
    omega_inv/conjunction  omega_inv/rotation  omega_inv/clauses
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .circuit import CNOT, CZ, H, MCX, MCZ, RY, Circuit, X, Z
from .cnf import Clause, CnfFormula, occurrence_counts
from .sim import Register, StateVector, init_state


@dataclass(frozen=True)
class QubitLayout:
    num_vars: int
    group_members: tuple[tuple[int, ...], ...]   # index j-1 -> qubits of x_j
    occurrence: Mapping[tuple[int, int], int]    # (clause index, literal slot) -> qubit
    clause_qubits: tuple[int, ...]
    formula_qubit: int
    control_qubit: int | None
    total_width: int

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(g[0] for g in self.group_members)

    @property
    def variable_qubits(self) -> tuple[int, ...]:
        return tuple(q for g in self.group_members for q in g)

    @property
    def ancillas(self) -> tuple[int, ...]:
        return self.clause_qubits + (self.formula_qubit,)

    def register(self, extra_zeros=()) -> Register:
        """Logical variable register with ancillas at 0 and the control at 1."""
        fixed = {q: 0 for q in self.ancillas}
        fixed.update({q: 0 for q in extra_zeros})
        if self.control_qubit is not None:
            fixed[self.control_qubit] = 1
        return Register(self.group_members, fixed)


def build_layout(formula: CnfFormula, with_control: bool = True) -> QubitLayout:
    """Deterministic layout; the c-th occurrence of x_j uses member c of its group."""
    counts = occurrence_counts(formula)
    groups: list[tuple[int, ...]] = []
    nxt = 0
    for j in range(1, formula.num_vars + 1):
        size = max(counts[j], 1)
        groups.append(tuple(range(nxt, nxt + size)))
        nxt += size
    used = [0] * formula.num_vars
    occurrence: dict[tuple[int, int], int] = {}
    for i, clause in enumerate(formula.clauses):
        for slot, lit in enumerate(clause):
            j = lit.variable - 1
            occurrence[(i, slot)] = groups[j][used[j]]
            used[j] += 1
    clause_qubits = tuple(range(nxt, nxt + formula.num_clauses))
    nxt += formula.num_clauses
    formula_qubit = nxt
    control = nxt + 1 if with_control else None
    return QubitLayout(formula.num_vars, tuple(groups), occurrence, clause_qubits,
                       formula_qubit, control, nxt + (2 if with_control else 1))


def build_sequential_layout(formula: CnfFormula) -> QubitLayout:
    """One qubit per variable shared by all clauses; no control qubit."""
    n, m = formula.num_vars, formula.num_clauses
    occurrence = {(i, slot): lit.variable - 1
                  for i, clause in enumerate(formula.clauses) for slot, lit in enumerate(clause)}
    return QubitLayout(n, tuple((j,) for j in range(n)), occurrence,
                       tuple(range(n, n + m)), n + m, None, n + m + 1)


def initial_state(layout: QubitLayout) -> StateVector:
    """GHZ variable groups (size-1 groups are |+>), ancillas |0>, control |1>."""
    ones = [layout.control_qubit] if layout.control_qubit is not None else []
    return init_state(layout.total_width, ghz=layout.group_members,
                      zeros=list(layout.ancillas), ones=ones)


def build_clause_circuit(clause: Clause, layout: QubitLayout, index: int,
                         restore: bool = False, stage: str = "clause") -> Circuit:
    """Clause qubit ends in |1> iff the clause holds on its member qubits.

    X on every positive literal (identity on negated ones) and X on the clause
    qubit, then an MCX from the members. The literal X gates are left in place
    unless ``restore`` is set (needed when clauses share variable qubits).
    """
    target = layout.clause_qubits[index]
    members = [layout.occurrence[(index, slot)] for slot in range(len(clause))]
    circ = Circuit(layout.total_width)
    if len(set(members)) < len(members):
        # x and ~x read the same shared qubit: the clause always holds
        return circ.append(X(target, stage))
    flips = [q for q, lit in zip(members, clause) if not lit.negated]
    circ.extend(X(q, stage) for q in flips)
    circ.append(X(target, stage))
    circ.append(MCX(members, target, stage))
    if restore:
        circ.extend(X(q, stage) for q in flips)
    return circ


def build_formula_conjunction(layout: QubitLayout, stage: str = "conjunction") -> Circuit:
    return Circuit(layout.total_width, [MCX(layout.clause_qubits, layout.formula_qubit, stage)])


def build_omega(layout: QubitLayout, formula: CnfFormula, phi: float) -> Circuit:
    circ = Circuit(layout.total_width)
    for i, clause in enumerate(formula.clauses):
        circ.extend(build_clause_circuit(clause, layout, i, stage="omega/clauses"))
    circ.append(RY(layout.control_qubit, phi, "omega/rotation"))
    circ.extend(build_formula_conjunction(layout, "omega/conjunction"))
    return circ


def build_controlled_oracle(layout: QubitLayout, formula: CnfFormula, phi: float) -> Circuit:
    """Omega, then CZ(formula, control), then Omega inverted."""
    if layout.control_qubit is None:
        raise ValueError("layout has no control qubit")
    omega = build_omega(layout, formula, phi)
    circ = Circuit(layout.total_width).extend(omega)
    circ.append(CZ(layout.formula_qubit, layout.control_qubit, "phase"))
    circ.extend(replace(g, stage=g.stage.replace("omega/", "omega_inv/", 1))
                for g in omega.inverse())
    return circ


def _entangling_cnots(layout: QubitLayout, stage: str) -> list:
    return [CNOT(g[0], q, stage) for g in layout.group_members for q in g[1:]]


def build_controlled_diffuser(layout: QubitLayout) -> Circuit:
    """Disentangle groups, controlled reflection on representatives, re-entangle.

    The MCZ puts Z on the last representative, controlled by the other
    representatives and the control qubit. On the control=1 branch this
    applies ``I - 2|psi0><psi0|`` to the representatives.
    """
    if layout.control_qubit is None:
        raise ValueError("layout has no control qubit")
    reps = layout.representatives
    circ = Circuit(layout.total_width)
    circ.extend(_entangling_cnots(layout, "disentangle"))
    circ.extend(H(q, "reflect") for q in reps)
    circ.extend(X(q, "reflect") for q in reps)
    circ.append(MCZ(reps[:-1] + (layout.control_qubit,), reps[-1], "reflect"))
    circ.extend(X(q, "reflect") for q in reps)
    circ.extend(H(q, "reflect") for q in reps)
    circ.extend(reversed(_entangling_cnots(layout, "reentangle")))
    return circ


def build_sequential_oracle(formula: CnfFormula, layout: QubitLayout | None = None) -> Circuit:
    """Conventional phase oracle: clauses computed one after another on shared qubits."""
    layout = layout or build_sequential_layout(formula)
    compute = Circuit(layout.total_width)
    for i, clause in enumerate(formula.clauses):
        compute.extend(build_clause_circuit(clause, layout, i, restore=True, stage="clauses"))
    compute.extend(build_formula_conjunction(layout))
    circ = Circuit(layout.total_width).extend(compute)
    circ.append(Z(layout.formula_qubit, "phase"))
    circ.extend(compute.inverse().relabel("uncompute"))
    return circ


def build_grover_diffuser(layout: QubitLayout) -> Circuit:
    reps = layout.representatives
    circ = Circuit(layout.total_width)
    circ.extend(H(q) for q in reps)
    circ.extend(X(q) for q in reps)
    if len(reps) == 1:
        circ.append(Z(reps[0]))
    else:
        circ.append(MCZ(reps[:-1], reps[-1]))
    circ.extend(X(q) for q in reps)
    circ.extend(H(q) for q in reps)
    return circ


def build_grover_baseline(formula: CnfFormula) -> tuple[Circuit, Circuit, QubitLayout]:
    """(oracle, diffuser, layout) for plain Grover search on one qubit per variable."""
    layout = build_sequential_layout(formula)
    return build_sequential_oracle(formula, layout), build_grover_diffuser(layout), layout


def grover_initial_state(layout: QubitLayout) -> StateVector:
    return init_state(layout.total_width, plus=layout.variable_qubits, zeros=list(layout.ancillas))


def oracle_diagonal(solutions, num_vars: int) -> np.ndarray:
    """Diagonal of I - 2Q over packed assignments."""
    d = np.ones(1 << num_vars)
    d[list(solutions)] = -1
    return d


def diffusion_matrix(num_vars: int) -> np.ndarray:
    """G = 2|psi0><psi0| - I on ``num_vars`` qubits."""
    dim = 1 << num_vars
    return np.full((dim, dim), 2.0 / dim) - np.eye(dim)
