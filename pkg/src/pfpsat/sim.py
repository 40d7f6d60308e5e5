"""Dense statevector simulator with mid-circuit measurement.

Qubit ``k`` is bit ``k`` of the basis-state index (qubit 0 is the least
significant bit). Measurements run in one of two modes:

* trajectory: the outcome is sampled from the Born rule with a seeded
  ``numpy.random.Generator`` and the state collapses;
* conditioned: the caller names the outcome, the state is projected and
  renormalised, and ``branch_weight`` is multiplied by that outcome's
  probability, so unnormalised (mixed-state) traces remain available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, Gate, GateKind

ZERO_TOL = 1e-12

_SQRT1_2 = 1 / math.sqrt(2)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
Y_MATRIX = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


class SimulationError(RuntimeError):
    pass


class StateVector:
    """Amplitudes over ``2**width`` basis states plus retained branch mass."""

    def __init__(self, amplitudes, branch_weight: float = 1.0):
        amps = np.asarray(amplitudes, dtype=complex).ravel().copy()
        width = int(round(math.log2(len(amps)))) if len(amps) else -1
        if width < 0 or 1 << width != len(amps):
            raise ValueError(f"amplitude count {len(amps)} is not a power of two")
        self.width = width
        self.amplitudes = amps
        self.branch_weight = float(branch_weight)

    @classmethod
    def zeros(cls, width: int) -> StateVector:
        amps = np.zeros(1 << width, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, width: int, index: int) -> StateVector:
        amps = np.zeros(1 << width, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def random(cls, width: int, rng: np.random.Generator) -> StateVector:
        amps = rng.normal(size=1 << width) + 1j * rng.normal(size=1 << width)
        return cls(amps / np.linalg.norm(amps))

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes, self.branch_weight)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def qubit_probability(self, qubit: int, value: int = 1) -> float:
        mask = _bit_mask(self.width, qubit)
        sel = mask if value else ~mask
        return float(np.sum(np.abs(self.amplitudes[sel]) ** 2))

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"StateVector(width={self.width}, branch_weight={self.branch_weight:.6g})"


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: int
    basis: str
    outcome: int
    probability: float

    def __post_init__(self):
        if not -ZERO_TOL <= self.probability <= 1 + ZERO_TOL:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@lru_cache(maxsize=None)
def _basis_indices(width: int) -> np.ndarray:
    return np.arange(1 << width, dtype=np.int64)


@lru_cache(maxsize=4096)
def _bit_mask(width: int, qubit: int) -> np.ndarray:
    return ((_basis_indices(width) >> qubit) & 1).astype(bool)


@lru_cache(maxsize=4096)
def _all_set(width: int, mask: int) -> np.ndarray:
    """Indices whose bits in ``mask`` are all 1."""
    idx = _basis_indices(width)
    return idx[(idx & mask) == mask]


@lru_cache(maxsize=4096)
def _flip_pairs(width: int, control_mask: int, target: int) -> np.ndarray:
    """Indices with every control bit set and the target bit clear."""
    idx = _basis_indices(width)
    tbit = 1 << target
    return idx[((idx & control_mask) == control_mask) & ((idx & tbit) == 0)]


def _mask(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _check_qubits(state: StateVector, qubits: Iterable[int]):
    for q in qubits:
        if not 0 <= q < state.width:
            raise IndexError(f"qubit {q} outside state of width {state.width}")


def apply_matrix(state: StateVector, matrix: np.ndarray, target: int,
                 controls: Sequence[int] = ()) -> StateVector:
    """Apply a 2x2 unitary on ``target``, conditioned on all ``controls`` being 1."""
    _check_qubits(state, (*controls, target))
    amps = state.amplitudes
    if controls:
        lo = _flip_pairs(state.width, _mask(controls), target)
        hi = lo | (1 << target)
        a0, a1 = amps[lo], amps[hi]
        amps[lo] = matrix[0, 0] * a0 + matrix[0, 1] * a1
        amps[hi] = matrix[1, 0] * a0 + matrix[1, 1] * a1
        return state
    view = amps.reshape(-1, 2, 1 << target)
    view[:] = np.einsum("ij,ajb->aib", matrix, view)
    return state


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    kind = gate.kind
    _check_qubits(state, gate.qubits)
    amps = state.amplitudes
    if kind in (GateKind.X, GateKind.CNOT, GateKind.MCX):
        lo = _flip_pairs(state.width, _mask(gate.controls), gate.target)
        hi = lo | (1 << gate.target)
        amps[lo], amps[hi] = amps[hi], amps[lo].copy()
    elif kind in (GateKind.Z, GateKind.CZ, GateKind.MCZ):
        amps[_all_set(state.width, _mask(gate.qubits))] *= -1
    elif kind is GateKind.H:
        apply_matrix(state, H_MATRIX, gate.target)
    elif kind is GateKind.RY:
        apply_matrix(state, ry_matrix(gate.angle), gate.target)
    else:  # pragma: no cover - GateKind is closed
        raise SimulationError(f"unsupported gate {kind}")
    return state


def apply(state: StateVector, circuit: Circuit) -> StateVector:
    """Run ``circuit`` on ``state`` in place and return it."""
    if circuit.width != state.width:
        raise ValueError(f"circuit width {circuit.width} != state width {state.width}")
    for gate in circuit:
        apply_gate(state, gate)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a small circuit (column k = image of basis state k)."""
    dim = 1 << circuit.width
    out = np.empty((dim, dim), dtype=complex)
    for k in range(dim):
        out[:, k] = apply(StateVector.basis(circuit.width, k), circuit).amplitudes
    return out


def init_state(width: int, ghz: Sequence[Sequence[int]] = (), plus: Sequence[int] = (),
               zeros: Sequence[int] = (), ones: Sequence[int] = ()) -> StateVector:
    """Product of GHZ groups, |+> singles, |0> ancillas and |1> qubits.

    The four directive lists must partition ``range(width)``. A GHZ group of
    one qubit is |+>.
    """
    claimed: list[int] = [q for g in ghz for q in g] + list(plus) + list(zeros) + list(ones)
    if len(set(claimed)) != len(claimed):
        raise ValueError("initialisation directives overlap")
    if sorted(claimed) != list(range(width)):
        missing = sorted(set(range(width)) - set(claimed))
        extra = sorted(set(claimed) - set(range(width)))
        raise ValueError(f"directives do not partition the register (missing {missing}, "
                         f"out of range {extra})")
    groups = [tuple(g) for g in ghz if len(g)] + [(q,) for q in plus]
    base = _mask(ones)
    amps = np.zeros(1 << width, dtype=complex)
    amp = 1.0 / math.sqrt(2) ** len(groups)
    masks = [_mask(g) for g in groups]
    for choice in range(1 << len(groups)):
        index = base
        for i, m in enumerate(masks):
            if (choice >> i) & 1:
                index |= m
        amps[index] = amp
    return StateVector(amps)


def _sample(rng: np.random.Generator, p1: float) -> int:
    return int(rng.random() < p1)


def measure(state: StateVector, qubit: int, basis: str = "Z", *,
            rng: np.random.Generator | None = None,
            outcome: int | None = None) -> tuple[MeasurementRecord, StateVector]:
    """Measure one qubit in the Z or X basis, in place.

    Pass ``rng`` to sample (trajectory mode) or ``outcome`` to condition on a
    chosen result. For X, outcome 0 is |+> and 1 is |->.
    """
    basis = basis.upper()
    if basis not in ("Z", "X"):
        raise ValueError(f"unknown basis {basis!r}")
    if (rng is None) == (outcome is None):
        raise ValueError("pass exactly one of rng (trajectory) or outcome (conditioning)")
    _check_qubits(state, (qubit,))
    if basis == "X":
        apply_matrix(state, H_MATRIX, qubit)
    mask = _bit_mask(state.width, qubit)
    amps = state.amplitudes
    norm2 = state.norm2()
    p1 = float(np.sum(np.abs(amps[mask]) ** 2)) / norm2
    p1 = min(max(p1, 0.0), 1.0)
    if outcome is None:
        outcome = _sample(rng, p1)
    elif outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    prob = p1 if outcome else 1.0 - p1
    if prob <= ZERO_TOL:
        if basis == "X":
            apply_matrix(state, H_MATRIX, qubit)
        raise SimulationError(
            f"conditioning qubit {qubit} on {basis}={outcome} with probability {prob:.3g}")
    amps[~mask if outcome else mask] = 0.0
    amps /= math.sqrt(prob * norm2)
    if rng is None:
        state.branch_weight *= prob
    if basis == "X":
        apply_matrix(state, H_MATRIX, qubit)
    return MeasurementRecord(qubit, basis, outcome, prob), state


def reset(state: StateVector, qubit: int, record: MeasurementRecord) -> StateVector:
    """Return a just-measured qubit to |0> using its recorded outcome."""
    if record.basis == "X":
        apply_matrix(state, H_MATRIX, qubit)
    if record.outcome:
        apply_matrix(state, X_MATRIX, qubit)
    return state


# --------------------------------------------------------------------------
# logical registers and observables

@dataclass(frozen=True)
class Register:
    """A logical register encoded by repetition groups inside a larger state.

    Logical bit ``j`` is carried by every qubit in ``groups[j]`` (they must
    agree); every qubit in ``fixed`` is expected to hold the given value.
    Qubits in neither set are traced over.
    """
    groups: tuple[tuple[int, ...], ...]
    fixed: Mapping[int, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.groups)

    def basis_indices(self) -> np.ndarray:
        """Full-state index of each logical basis state (logical LSB = group 0)."""
        base = sum(1 << q for q, v in self.fixed.items() if v)
        masks = np.array([_mask(g) for g in self.groups], dtype=np.int64)
        k = np.arange(1 << self.size, dtype=np.int64)
        idx = np.full(1 << self.size, base, dtype=np.int64)
        for j, m in enumerate(masks):
            idx |= np.where((k >> j) & 1, m, 0)
        return idx


def logical_amplitudes(state: StateVector, register: Register) -> np.ndarray:
    """Normalised-state amplitudes on the register's code space."""
    if any(q >= state.width for g in register.groups for q in g) or \
            any(q >= state.width for q in register.fixed):
        raise IndexError("register references qubits outside the state")
    return state.amplitudes[register.basis_indices()]


def code_space_leakage(state: StateVector, register: Register) -> float:
    """Probability (of the normalised state) outside the register's code space.

    Only meaningful when every qubit belongs to a group or to ``fixed``.
    """
    inside = float(np.sum(np.abs(logical_amplitudes(state, register)) ** 2))
    return max(0.0, state.norm2() - inside)


def group_disagreement(state: StateVector, groups: Sequence[Sequence[int]]) -> float:
    """Probability mass on basis states where some group's members differ."""
    idx = _basis_indices(state.width)
    bad = np.zeros(1 << state.width, dtype=bool)
    for g in groups:
        if len(g) < 2:
            continue
        m = _mask(g)
        bits = idx & m
        bad |= (bits != 0) & (bits != m)
    return float(np.sum(np.abs(state.amplitudes[bad]) ** 2))


def qubits_excited(state: StateVector, qubits: Sequence[int], expected: Mapping[int, int] | None = None) -> float:
    """Probability that any listed qubit differs from its expected value (default 0)."""
    expected = expected or {}
    idx = _basis_indices(state.width)
    bad = np.zeros(1 << state.width, dtype=bool)
    for q in qubits:
        bad |= ((idx >> q) & 1) != expected.get(q, 0)
    return float(np.sum(np.abs(state.amplitudes[bad]) ** 2))


@dataclass(frozen=True)
class Observable:
    """Observable on a logical register, defined by a solution set.

    ``kind`` is ``"Q"`` (projector onto solutions), ``"O"`` (the phase oracle
    I - 2Q) or ``"A"`` (|s><u| + |u><s| with |s> the uniform superposition of
    solutions and |u> that of non-solutions).
    """
    kind: str
    solutions: frozenset[int]
    size: int

    def __post_init__(self):
        if self.kind not in ("Q", "O", "A"):
            raise ValueError(f"unknown observable {self.kind!r}")
        if any(not 0 <= k < (1 << self.size) for k in self.solutions):
            raise ValueError("solution index outside register")

    def evaluate(self, amps: np.ndarray) -> float:
        marked = np.zeros(1 << self.size, dtype=bool)
        marked[list(self.solutions)] = True
        if self.kind == "Q":
            return float(np.sum(np.abs(amps[marked]) ** 2))
        if self.kind == "O":
            return float(np.sum(np.abs(amps[~marked]) ** 2) - np.sum(np.abs(amps[marked]) ** 2))
        m, u = int(marked.sum()), int((~marked).sum())
        if m == 0 or u == 0:
            return 0.0
        s_amp = amps[marked].sum() / math.sqrt(m)   # <s|psi>
        u_amp = amps[~marked].sum() / math.sqrt(u)  # <u|psi>
        return float(2 * (np.conj(s_amp) * u_amp).real)


def expectation(state: StateVector, observable: Observable, register: Register,
                unnormalized: bool = True) -> float:
    """<psi|Obs|psi> on the register's code space.

    With ``unnormalized`` the value is scaled by ``branch_weight``, giving the
    trace against the retained (unnormalised) branch state.
    """
    if observable.size != register.size:
        raise ValueError("observable and register sizes differ")
    value = observable.evaluate(logical_amplitudes(state, register))
    return value * state.branch_weight if unnormalized else value
