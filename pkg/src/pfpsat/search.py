"""Parallel fixed-point search loop, Grover baseline and operator checks.

``pfp_run`` repeats: controlled oracle at angle phi_t, controlled diffuser,
Z-measurement of the control qubit. Outcome 0 halts the search.

* ``mode="exact"`` never samples. Each step records the probability that the
  control flips to 0, accumulates the halting distribution over assignments,
  and conditions on outcome 1 to continue; ``1 - branch_weight`` is the
  cumulative success probability.
* ``mode="trajectory"`` samples every measurement with a seeded generator and
  on halting measures one qubit per variable group to read an assignment.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import builders
from .cnf import CnfFormula, enumerate_solutions, assignment_to_int, int_to_assignment, truth_table
from .schedule import PhiSchedule, critical_phi, grover_angle, phi_critical, phi_unknown
from .sim import (ZERO_TOL, Observable, Register, StateVector, apply, code_space_leakage,
                  expectation, group_disagreement, logical_amplitudes, measure, qubits_excited)

__all__ = [
    "PhiSchedule", "phi_unknown", "phi_critical", "critical_phi", "grover_angle",
    "IterationRecord", "PfpRunReport", "LocalExecutor", "pfp_run", "pfp_trajectories",
    "grover_run", "circuit_operator_equivalence", "default_max_iters",
]


def default_max_iters(space_size: int) -> int:
    return math.ceil(3 * math.pi / 4 * math.sqrt(space_size)) + 10


@dataclass
class IterationRecord:
    t: int
    phi: float
    flip_probability: float          # P(control = 0) given the search is still running
    halt_probability: float | None   # unconditional mass halting at this step (exact mode)
    success: float | None            # cumulative success probability (exact mode)
    branch_weight: float | None      # retained control=1 mass (exact mode)
    traces: tuple[float, float, float] | None = None   # (Tr rho A, Tr rho O, Tr rho)
    ancilla_leakage: float = 0.0
    group_leakage: float = 0.0
    outcome: int | None = None       # sampled control outcome (trajectory mode)


@dataclass
class PfpRunReport:
    mode: str
    schedule: str
    iterations: int
    records: list[IterationRecord]
    solved: bool
    assignment: tuple[int, ...] | None
    seed: int | None = None
    distribution: dict[int, float] = field(default_factory=dict)   # exact mode halting mass

    @property
    def status(self) -> str:
        return "solved" if self.solved else "exhausted"

    @property
    def success_curve(self) -> list[float]:
        return [r.success for r in self.records if r.success is not None]

    def message(self) -> str:
        if self.solved:
            return "solution found"
        return "no control flip observed - instance likely unsatisfiable"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        d["distribution"] = {str(k): v for k, v in sorted(self.distribution.items())}
        return d


class LocalExecutor:
    """Runs the search circuits on one monolithic statevector."""

    def __init__(self, formula: CnfFormula):
        self.formula = formula
        self.layout = builders.build_layout(formula)
        self.register = self.layout.register()
        self.halted_register = Register(self.register.groups,
                                        {**self.register.fixed, self.layout.control_qubit: 0})
        self._oracles: dict[float, object] = {}
        self._diffuser = builders.build_controlled_diffuser(self.layout)

    @property
    def control_qubit(self) -> int:
        return self.layout.control_qubit

    def initial_state(self) -> StateVector:
        return builders.initial_state(self.layout)

    def oracle(self, phi: float):
        if phi not in self._oracles:
            self._oracles[phi] = builders.build_controlled_oracle(self.layout, self.formula, phi)
        return self._oracles[phi]

    def iterate(self, state: StateVector, phi: float, t: int = 0) -> StateVector:
        apply(state, self.oracle(phi))
        return apply(state, self._diffuser)

    def measure_control(self, state, **kw):
        return measure(state, self.control_qubit, "Z", **kw)

    def read_assignment(self, state: StateVector, rng: np.random.Generator) -> tuple[int, ...]:
        bits = []
        for rep in self.layout.representatives:
            rec, _ = measure(state, rep, "Z", rng=rng)
            bits.append(rec.outcome)
        return tuple(bits)

    def hygiene(self, state: StateVector) -> tuple[float, float]:
        """(ancilla excitation, group disagreement) at an iteration boundary."""
        return (qubits_excited(state, self.layout.ancillas),
                group_disagreement(state, self.layout.group_members))


def _observables(formula: CnfFormula) -> tuple[Observable, Observable]:
    sols = frozenset(np.flatnonzero(truth_table(formula)).tolist())
    n = formula.num_vars
    return Observable("A", sols, n), Observable("O", sols, n)


def pfp_run(formula: CnfFormula, schedule: PhiSchedule | None = None, mode: str = "exact",
            max_iters: int | None = None, seed: int | None = None,
            rng: np.random.Generator | None = None, success_target: float | None = 0.99,
            executor=None, track_traces: bool = True) -> PfpRunReport:
    """Run the fixed-point search loop.

    In exact mode the loop stops once cumulative success reaches
    ``success_target`` (``None`` runs the full ``max_iters``); the reported
    assignment is the most likely halting assignment. Hitting the cap yields an
    unsolved report, not an error.
    """
    schedule = schedule or PhiSchedule.unknown()
    if mode not in ("exact", "trajectory"):
        raise ValueError(f"mode must be 'exact' or 'trajectory', got {mode!r}")
    max_iters = max_iters or default_max_iters(1 << formula.num_vars)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    ex = executor or LocalExecutor(formula)
    state = ex.initial_state()
    records: list[IterationRecord] = []

    if mode == "trajectory":
        if rng is None:
            if seed is None:
                raise ValueError("trajectory mode needs a seed or a generator")
            rng = np.random.default_rng(seed)
        for t in range(1, max_iters + 1):
            phi = schedule(t)
            ex.iterate(state, phi, t)
            flip = state.qubit_probability(ex.control_qubit, 0) / state.norm2()
            rec, _ = ex.measure_control(state, rng=rng)
            anc, grp = ex.hygiene(state) if rec.outcome else (0.0, 0.0)
            records.append(IterationRecord(t, phi, flip, None, None, None,
                                           ancilla_leakage=anc, group_leakage=grp,
                                           outcome=rec.outcome))
            if rec.outcome == 0:
                return PfpRunReport(mode, schedule.describe(), t, records, True,
                                    ex.read_assignment(state, rng), seed)
        return PfpRunReport(mode, schedule.describe(), max_iters, records, False, None, seed)

    obs_a, obs_o = _observables(formula)
    distribution = np.zeros(1 << formula.num_vars)
    weight = 1.0
    t = 0
    for t in range(1, max_iters + 1):
        phi = schedule(t)
        ex.iterate(state, phi, t)
        flip = state.qubit_probability(ex.control_qubit, 0) / state.norm2()
        if flip > ZERO_TOL:
            halted = state.copy()
            ex.measure_control(halted, outcome=0)
            amps = logical_amplitudes(halted, ex.halted_register)
            distribution += weight * flip * np.abs(amps) ** 2
        halt_mass = weight * flip
        if 1 - flip <= ZERO_TOL:
            weight = 0.0
            records.append(IterationRecord(t, phi, flip, halt_mass, 1.0, 0.0,
                                           (0.0, 0.0, 0.0) if track_traces else None))
            break
        ex.measure_control(state, outcome=1)
        weight = state.branch_weight
        traces = None
        if track_traces:
            traces = (expectation(state, obs_a, ex.register), expectation(state, obs_o, ex.register),
                      weight * (1 - code_space_leakage(state, ex.register)))
        anc, grp = ex.hygiene(state)
        records.append(IterationRecord(t, phi, flip, halt_mass, 1 - weight, weight, traces,
                                       anc, grp))
        if success_target is not None and 1 - weight >= success_target:
            break
    success = 1 - weight
    solved = success > 0 and (success_target is None or success >= success_target)
    best = int(np.argmax(distribution)) if distribution.any() else None
    dist = {k: float(v) for k, v in enumerate(distribution) if v > ZERO_TOL}
    return PfpRunReport(mode, schedule.describe(), t, records, solved,
                        int_to_assignment(best, formula.num_vars) if solved else None,
                        seed, dist)


def _trajectory_chunk(args):
    formula, schedule, max_iters, seed, indices = args
    ex = LocalExecutor(formula)
    children = np.random.SeedSequence(seed).spawn(max(indices) + 1)
    out = []
    for i in indices:
        rep = pfp_run(formula, schedule, "trajectory", max_iters,
                      rng=np.random.default_rng(children[i]), executor=ex, success_target=None)
        rep.seed = seed
        out.append(rep)
    return out


def pfp_trajectories(formula: CnfFormula, schedule: PhiSchedule | None = None, runs: int = 1,
                     seed: int = 0, max_iters: int | None = None,
                     jobs: int = 1) -> list[PfpRunReport]:
    """Independent seeded trajectories; run ``i`` uses child ``i`` of ``SeedSequence(seed)``.

    Results are ordered by run index, so output does not depend on ``jobs``.
    """
    schedule = schedule or PhiSchedule.unknown()
    indices = list(range(runs))
    if jobs <= 1 or runs < 2:
        return _trajectory_chunk((formula, schedule, max_iters, seed, indices))
    chunks = [indices[k::jobs] for k in range(jobs) if indices[k::jobs]]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_trajectory_chunk,
                              [(formula, schedule, max_iters, seed, c) for c in chunks]))
    by_index: dict[int, PfpRunReport] = {}
    for chunk, reports in zip(chunks, parts):
        by_index.update(zip(chunk, reports))
    return [by_index[i] for i in indices]


def grover_run(formula: CnfFormula, iterations: int) -> list[float]:
    """Exact success probability after 0..iterations Grover steps."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    oracle, diffuser, layout = builders.build_grover_baseline(formula)
    register = layout.register()
    marked = truth_table(formula)
    state = builders.grover_initial_state(layout)

    def success():
        return float(np.sum(np.abs(logical_amplitudes(state, register)[marked]) ** 2))

    curve = [success()]
    for _ in range(iterations):
        apply(state, oracle)
        apply(state, diffuser)
        curve.append(success())
    return curve


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def reference_operator(formula: CnfFormula, phi: float) -> np.ndarray:
    """(G P1 + P0) e^{i phi Sy/2} (O P1 + P0) e^{-i phi Sy/2} as a dense matrix.

    Index = assignment + 2^n * control, i.e. the control is the most
    significant factor.
    """
    n = formula.num_vars
    dim = 1 << n
    sols = [assignment_to_int(a) for a in enumerate_solutions(formula)]
    o = np.diag(builders.oracle_diagonal(sols, n))
    g = builders.diffusion_matrix(n)
    p0, p1, eye = np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.eye(dim)
    ctrl_g = np.kron(p0, eye) + np.kron(p1, g)
    ctrl_o = np.kron(p0, eye) + np.kron(p1, o)
    return ctrl_g @ np.kron(_ry(-phi), eye) @ ctrl_o @ np.kron(_ry(phi), eye)


def circuit_operator(formula: CnfFormula, phi: float) -> tuple[np.ndarray, float]:
    """Controlled oracle + controlled diffuser restricted to (variables, control).

    Returns the matrix (same indexing as :func:`reference_operator`) and the
    largest probability any input leaves outside the code space.
    """
    if formula.num_vars > 4:
        raise ValueError("operator comparison is limited to n <= 4")
    layout = builders.build_layout(formula)
    circ = builders.build_controlled_oracle(layout, formula, phi) + \
        builders.build_controlled_diffuser(layout)
    n = formula.num_vars
    dim = 1 << n
    regs = [Register(layout.group_members, {**{q: 0 for q in layout.ancillas},
                                            layout.control_qubit: s}) for s in (0, 1)]
    out = np.zeros((2 * dim, 2 * dim), dtype=complex)
    leak = 0.0
    for s in (0, 1):
        entry = regs[s].basis_indices()
        for x in range(dim):
            state = apply(StateVector.basis(layout.total_width, int(entry[x])), circ)
            col = x + s * dim
            for s_out in (0, 1):
                out[s_out * dim:(s_out + 1) * dim, col] = logical_amplitudes(state, regs[s_out])
            leak = max(leak, 1 - float(np.sum(np.abs(out[:, col]) ** 2)))
    return out, leak


def circuit_operator_equivalence(formula: CnfFormula, phi: float,
                                 control_sign: bool = True) -> float:
    """Max element deviation between circuit and reference operator, up to global phase.

    The diffuser's H-X-MCZ-X-H block reflects with the opposite sign to
    G = 2|psi0><psi0| - I, so on the control=1 branch the circuit applies -G.
    With ``control_sign`` the reference is multiplied by Z on the control to
    account for this; that relative phase is invisible to the Z measurement
    of the control that follows every iteration.
    """
    circ, leak = circuit_operator(formula, phi)
    ref = reference_operator(formula, phi)
    if control_sign:
        dim = 1 << formula.num_vars
        ref = np.kron(np.diag([1.0, -1.0]), np.eye(dim)) @ ref
    overlap = np.vdot(ref, circ)
    phase = overlap / abs(overlap) if abs(overlap) > ZERO_TOL else 1.0
    return max(float(np.max(np.abs(circ - phase * ref))), leak)
