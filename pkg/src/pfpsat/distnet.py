"""Teleportation-based distributed multi-controlled gates over simulated nodes.

All nodes share one global statevector; locality is enforced by ownership:
every quantum operation is issued by a node and may only touch qubits that
node owns. The only cross-node quantum operation is Bell-pair creation by
the entanglement source. Classical bits move through node inboxes in
synchronous rounds.

Protocol for a control ``p`` owned by a node other than the target's owner,
using a Bell pair ``(e, f)`` with ``e`` at the control's node and ``f`` at
the target's node:

1. control node: CNOT(p -> e), Z-measure e, send the bit; target node
   applies X to f if the bit is 1.
2. target node: U on the target controlled by every f (and local controls).
3. target node: X-measure each f, send the bit back; control node applies
   Z to p if the outcome was |->.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import builders
from .circuit import CNOT, Gate, GateKind, X
from .cnf import CnfFormula
from .schedule import PhiSchedule
from .search import LocalExecutor, PfpRunReport, pfp_run
from .sim import (H_MATRIX, X_MATRIX, Y_MATRIX, Z_MATRIX, Register, StateVector, apply_gate,
                  apply_matrix, group_disagreement, logical_amplitudes, measure, qubits_excited,
                  ry_matrix)

MASTER = 0
SOURCE = -1   # entanglement source; owns idle communication qubits


class LocalityViolation(RuntimeError):
    """A node tried to act on a qubit it does not own."""


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    kind: str                    # bell | gate | measure | send | receive | correction | reset
    node: int
    qubits: tuple[int, ...] = ()
    detail: Mapping = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "node": self.node, "qubits": list(self.qubits),
                           **self.detail}, sort_keys=True)


@dataclass
class ProtocolTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, kind, node, qubits=(), **detail):
        self.events.append(TraceEvent(kind, node, tuple(qubits), detail))

    def count(self, kind: str) -> int:
        return sum(e.kind == kind for e in self.events)

    @property
    def classical_bits(self) -> int:
        return self.count("send")

    def validate(self):
        """Every correction follows the receipt of the message it depends on."""
        received = set()
        for e in self.events:
            if e.kind == "receive":
                received.add(e.detail["msg"])
            elif e.kind == "correction" and e.detail["msg"] not in received:
                raise ProtocolError(f"correction before receiving message {e.detail['msg']}")

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)


@dataclass
class Message:
    msg_id: int
    round: int
    src: int
    dst: int
    bit: int


@dataclass
class Node:
    node_id: int
    qubits: set[int] = field(default_factory=set)
    inbox: list[Message] = field(default_factory=list)
    outbox: list[Message] = field(default_factory=list)


class Network:
    """Nodes over a shared substrate state, with an ownership checker.

    Measurement outcomes come from ``forced`` (branch mode) while it lasts,
    otherwise they are sampled from ``rng`` (trajectory mode).
    """

    def __init__(self, state: StateVector, owners: Mapping[int, Iterable[int]],
                 rng: np.random.Generator | None = None, forced: Iterable[int] | None = None,
                 strict: bool = True):
        self.state = state
        self.nodes: dict[int, Node] = {}
        self._owner: dict[int, int] = {}
        for node_id, qubits in owners.items():
            node = self.nodes.setdefault(node_id, Node(node_id))
            for q in qubits:
                if q in self._owner:
                    raise ValueError(f"qubit {q} assigned to nodes {self._owner[q]} and {node_id}")
                self._owner[q] = node_id
                node.qubits.add(q)
        self.nodes.setdefault(SOURCE, Node(SOURCE))
        self.rng = rng
        self._forced: Iterator[int] | None = iter(forced) if forced is not None else None
        self.strict = strict
        self.violations: list[str] = []
        self.trace = ProtocolTrace()
        self._msg_ids = itertools.count()
        self._round = 0

    # ownership ------------------------------------------------------------
    def owner(self, qubit: int) -> int:
        return self._owner[qubit]

    def transfer(self, qubit: int, node_id: int):
        self.nodes[self._owner[qubit]].qubits.discard(qubit)
        self._owner[qubit] = node_id
        self.nodes.setdefault(node_id, Node(node_id)).qubits.add(qubit)

    def _check(self, node_id: int, qubits: Iterable[int]):
        foreign = [q for q in qubits if self._owner.get(q) != node_id]
        if foreign:
            msg = f"node {node_id} touched qubits {foreign} owned by " \
                  f"{[self._owner.get(q) for q in foreign]}"
            self.violations.append(msg)
            if self.strict:
                raise LocalityViolation(msg)

    # quantum operations ---------------------------------------------------
    def gate(self, node_id: int, gate: Gate, kind: str = "gate", **detail):
        self._check(node_id, gate.qubits)
        apply_gate(self.state, gate)
        self.trace.add(kind, node_id, gate.qubits, gate=gate.dump(), **detail)

    def unitary(self, node_id: int, matrix: np.ndarray, target: int, controls: Sequence[int] = (),
                label: str = "U"):
        self._check(node_id, (*controls, target))
        apply_matrix(self.state, matrix, target, controls)
        self.trace.add("gate", node_id, (*controls, target), gate=label)

    def measure(self, node_id: int, qubit: int, basis: str = "Z", *,
                rng: np.random.Generator | None = None, outcome: int | None = None,
                weighted: bool = True):
        """``weighted=False`` keeps the branch weight (for outcomes corrected away later)."""
        self._check(node_id, (qubit,))
        weight = self.state.branch_weight
        if rng is None and outcome is None:
            forced = next(self._forced, None) if self._forced is not None else None
            if forced is not None:
                outcome = forced
            elif self.rng is not None:
                rng = self.rng
            else:
                raise ProtocolError("no measurement outcome source")
        record, _ = measure(self.state, qubit, basis, rng=rng, outcome=outcome)
        if not weighted:
            self.state.branch_weight = weight
        self.trace.add("measure", node_id, (qubit,), basis=basis, outcome=record.outcome,
                       probability=round(record.probability, 12))
        return record

    def reset(self, node_id: int, qubit: int, record):
        """Return a measured qubit to |0> with local gates."""
        self._check(node_id, (qubit,))
        if record.basis == "X":
            apply_matrix(self.state, H_MATRIX, qubit)
        if record.outcome:
            apply_matrix(self.state, X_MATRIX, qubit)
        self.trace.add("reset", node_id, (qubit,))

    def create_bell_pair(self, e: int, f: int, e_node: int, f_node: int):
        """Entanglement source prepares (|00>+|11>)/sqrt2 on fresh |0> qubits and ships them."""
        for q in (e, f):
            if self._owner.get(q) != SOURCE:
                raise ProtocolError(f"qubit {q} is not an idle source qubit")
        apply_matrix(self.state, H_MATRIX, e)
        apply_matrix(self.state, X_MATRIX, f, (e,))
        self.transfer(e, e_node)
        self.transfer(f, f_node)
        self.trace.add("bell", SOURCE, (e, f), to=[e_node, f_node])

    def release(self, qubit: int):
        self.transfer(qubit, SOURCE)

    # classical channel ----------------------------------------------------
    def next_round(self) -> int:
        self._round += 1
        return self._round

    def send(self, src: int, dst: int, bit: int, rnd: int) -> Message:
        msg = Message(next(self._msg_ids), rnd, src, dst, int(bit))
        self.nodes[src].outbox.append(msg)
        self.nodes[dst].inbox.append(msg)
        self.trace.add("send", src, msg=msg.msg_id, round=rnd, dst=dst, bit=msg.bit)
        return msg

    def receive(self, node_id: int, msg: Message) -> int:
        inbox = self.nodes[node_id].inbox
        if msg not in inbox:
            raise ProtocolError(f"message {msg.msg_id} not delivered to node {node_id}")
        inbox.remove(msg)
        self.trace.add("receive", node_id, msg=msg.msg_id, round=msg.round, src=msg.src,
                       bit=msg.bit)
        return msg.bit

    def correction(self, node_id: int, gate: Gate, msg: Message):
        self.gate(node_id, gate, kind="correction", msg=msg.msg_id)



# --------------------------------------------------------------------------
# the distributed controlled-U protocol

def teleported_controlled_unitary(net: Network, controls: Sequence[int], target: int,
                                  matrix: np.ndarray, pairs: Sequence[tuple[int, int]],
                                  label: str = "U", corrupt: bool = False):
    """Apply U on ``target`` controlled by ``controls`` across nodes.

    Controls owned by the target's node act directly; each remote control
    consumes one Bell pair from ``pairs`` (idle source qubits). Every used
    communication qubit is reset and returned to the source afterwards.
    ``corrupt`` applies the final Z correction on the wrong outcome (test hook).
    """
    host = net.owner(target)
    local = [c for c in controls if net.owner(c) == host]
    remote = [c for c in controls if net.owner(c) != host]
    if len(pairs) < len(remote):
        raise ProtocolError(f"{len(remote)} remote controls but only {len(pairs)} Bell pairs")
    links = []
    for p, (e, f) in zip(remote, pairs):
        net.create_bell_pair(e, f, net.owner(p), host)
        links.append((p, e, f))

    rnd = net.next_round()
    sent = []
    for p, e, f in links:
        node = net.owner(p)
        net.gate(node, CNOT(p, e))
        rec = net.measure(node, e, "Z", weighted=False)
        sent.append((net.send(node, host, rec.outcome, rnd), rec))
    for (p, e, f), (msg, rec) in zip(links, sent):
        if net.receive(host, msg):
            net.correction(host, X(f), msg)
        net.reset(net.owner(p), e, rec)
        net.release(e)

    net.unitary(host, matrix, target, [f for _, _, f in links] + local, label)

    rnd = net.next_round()
    back = []
    for p, e, f in links:
        rec = net.measure(host, f, "X", weighted=False)
        back.append((net.send(host, net.owner(p), rec.outcome, rnd), rec))
    for (p, e, f), (msg, rec) in zip(links, back):
        if net.receive(net.owner(p), msg) != int(corrupt):
            net.correction(net.owner(p), Gate(GateKind.Z, p), msg)
        net.reset(host, f, rec)
        net.release(f)


UNITARIES = {"X": X_MATRIX, "Y": Y_MATRIX, "Z": Z_MATRIX, "H": H_MATRIX}


def parse_unitary(desc: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """``X``, ``Y``, ``Z``, ``H``, ``RY:<angle>`` or ``random`` (Haar, needs ``rng``)."""
    key = desc.strip().upper()
    if key in UNITARIES:
        return UNITARIES[key]
    if key.startswith("RY:"):
        return ry_matrix(float(key[3:]))
    if key == "RANDOM":
        if rng is None:
            raise ValueError("random unitary needs a generator")
        z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / math.sqrt(2)
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))
    raise ValueError(f"unknown unitary {desc!r}")


@dataclass
class GateNetwork:
    """A network set up for one m-controlled-U execution."""
    net: Network
    controls: tuple[int, ...]
    target: int
    pairs: tuple[tuple[int, int], ...]
    matrix: np.ndarray
    label: str

    @property
    def m(self) -> int:
        return len(self.controls)


def setup(m: int, unitary: str | np.ndarray = "X", inputs: StateVector | None = None,
          rng: np.random.Generator | None = None,
          forced: Iterable[int] | None = None) -> GateNetwork:
    """Master node 0 holds the target and one half of each pair; node i holds p_i and e_i.

    Qubits: p_i = i - 1 (i = 1..m), target = m, then (e_i, f_i) = (m+2i-1, m+2i).
    ``inputs`` is the (m+1)-qubit state of (p_1..p_m, target); default |0...0>.
    """
    if m < 1:
        raise ValueError("need at least one control")
    matrix = parse_unitary(unitary, rng) if isinstance(unitary, str) else np.asarray(unitary)
    label = unitary if isinstance(unitary, str) else "U"
    inputs = inputs if inputs is not None else StateVector.zeros(m + 1)
    if inputs.width != m + 1:
        raise ValueError(f"inputs must span {m + 1} qubits")
    width = 3 * m + 1
    amps = np.zeros(1 << width, dtype=complex)
    amps[:1 << (m + 1)] = inputs.amplitudes
    state = StateVector(amps)
    pairs = tuple((m + 1 + 2 * i, m + 2 + 2 * i) for i in range(m))
    owners = {MASTER: [m]}
    for i in range(m):
        owners[i + 1] = [i]
    owners[SOURCE] = [q for pair in pairs for q in pair]
    net = Network(state, owners, rng=rng, forced=forced)
    # pairs are prepared and distributed up front
    controls = tuple(range(m))
    for i, (e, f) in enumerate(pairs):
        net.create_bell_pair(e, f, i + 1, MASTER)
    return GateNetwork(net, controls, m, pairs, matrix, label)


def _run_prepared(g: GateNetwork, corrupt: bool):
    """Protocol body when the pairs were already distributed by :func:`setup`."""
    net, host = g.net, MASTER
    links = list(zip(g.controls, g.pairs))
    rnd = net.next_round()
    sent = []
    for p, (e, f) in links:
        node = net.owner(p)
        net.gate(node, CNOT(p, e))
        rec = net.measure(node, e, "Z", weighted=False)
        sent.append((net.send(node, host, rec.outcome, rnd), rec))
    for (p, (e, f)), (msg, rec) in zip(links, sent):
        if net.receive(host, msg):
            net.correction(host, X(f), msg)
    net.unitary(host, g.matrix, g.target, [f for _, (e, f) in links], g.label)
    rnd = net.next_round()
    back = []
    for p, (e, f) in links:
        rec = net.measure(host, f, "X", weighted=False)
        back.append((net.send(host, net.owner(p), rec.outcome, rnd), rec))
    for (p, (e, f)), (msg, rec) in zip(links, back):
        if net.receive(net.owner(p), msg) != int(corrupt):
            net.correction(net.owner(p), Gate(GateKind.Z, p), msg)
    for (p, (e, f)), (_, rec_e), (_, rec_f) in zip(links, sent, back):
        net.reset(net.owner(p), e, rec_e)
        net.reset(host, f, rec_f)


def run_protocol(g: GateNetwork, corrupt: bool = False) -> tuple[StateVector, ProtocolTrace]:
    """Execute the three protocol steps; return the (p_1..p_m, target) state and the trace.

    The communication qubits end in |0>, so the returned state is read off the
    subspace where they are all 0.
    """
    _run_prepared(g, corrupt)
    g.net.trace.validate()
    register = Register(tuple((q,) for q in (*g.controls, g.target)),
                        {q: 0 for pair in g.pairs for q in pair})
    amps = logical_amplitudes(g.net.state, register)
    return StateVector(amps / np.linalg.norm(amps)), g.net.trace


def direct_controlled_unitary(inputs: StateVector, matrix: np.ndarray) -> StateVector:
    m = inputs.width - 1
    return apply_matrix(inputs.copy(), matrix, m, tuple(range(m)))


def verify_distributed_gate(m: int, unitary: str = "X", inputs: int = 20, seed: int = 0,
                            corrupt: bool = False) -> dict:
    """Branch-exhaustive comparison with the direct gate over random input states.

    Reports the worst ``1 - |<direct|distributed>|`` over all 4^m outcome
    branches, the classical bits per execution, Bell pairs used and
    ownership violations.
    """
    rng = np.random.default_rng(seed)
    matrix = parse_unitary(unitary, rng)
    worst, bits, pairs, violations, branches = 0.0, set(), set(), 0, 0
    for _ in range(inputs):
        psi = StateVector.random(m + 1, rng)
        expected = direct_controlled_unitary(psi, matrix)
        for outcomes in itertools.product((0, 1), repeat=2 * m):
            g = setup(m, matrix, psi, forced=outcomes)
            final, trace = run_protocol(g, corrupt=corrupt)
            worst = max(worst, 1 - abs(expected.overlap(final)))
            bits.add(trace.classical_bits)
            pairs.add(trace.count("bell"))
            violations += len(g.net.violations)
            branches += 1
    return {"m": m, "unitary": unitary, "seed": seed, "inputs": inputs, "branches": branches,
            "max_deviation": worst, "classical_bits": sorted(bits), "bell_pairs": sorted(pairs),
            "violations": violations}


# --------------------------------------------------------------------------
# distributed parallel fixed-point search

@dataclass(frozen=True)
class Partition:
    """Clause-to-node map. Node 0 is the master (formula and control qubits)."""
    num_nodes: int
    clause_nodes: tuple[int, ...]

    def __post_init__(self):
        if self.num_nodes < 0:
            raise ValueError("node count must be non-negative")
        for i, node in enumerate(self.clause_nodes):
            if not 0 <= node <= self.num_nodes:
                raise ValueError(f"clause {i + 1} mapped to unknown node {node}")

    def check(self, formula: CnfFormula):
        if len(self.clause_nodes) != formula.num_clauses:
            raise ValueError(f"partition covers {len(self.clause_nodes)} clauses, "
                             f"formula has {formula.num_clauses}")

    @classmethod
    def one_clause_per_node(cls, formula: CnfFormula) -> Partition:
        m = formula.num_clauses
        return cls(m, tuple(range(1, m + 1)))

    @classmethod
    def single_node(cls, formula: CnfFormula) -> Partition:
        return cls(0, (MASTER,) * formula.num_clauses)

    def to_json(self) -> str:
        return json.dumps({"nodes": self.num_nodes, "clause_nodes": list(self.clause_nodes)})


def parse_partition(text: str) -> Partition:
    """JSON document ``{"nodes": k, "clause_nodes": [node of clause 1, ...]}``."""
    try:
        doc = json.loads(text)
        return Partition(int(doc["nodes"]), tuple(int(n) for n in doc["clause_nodes"]))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"bad partition document: {exc}") from None


def load_partition(path) -> Partition:
    with open(path, encoding="utf-8") as fh:
        return parse_partition(fh.read())


_DISTRIBUTED_U = {GateKind.CNOT: X_MATRIX, GateKind.MCX: X_MATRIX,
                  GateKind.CZ: Z_MATRIX, GateKind.MCZ: Z_MATRIX}


class DistributedExecutor(LocalExecutor):
    """Runs each search iteration over a network of nodes.

    Variable-group members live on the node of the clause that reads them
    (unused variables on the master); clause qubits on their clause's node;
    formula and control qubits on the master. Gates whose qubits span nodes
    run through :func:`teleported_controlled_unitary`; everything else is a
    local gate. Communication qubits are appended above the layout and idle
    at |0> between gates.
    """

    def __init__(self, formula: CnfFormula, partition: Partition,
                 rng: np.random.Generator | None = None, forced: Iterable[int] | None = None):
        super().__init__(formula)
        partition.check(formula)
        self.partition = partition
        lay = self.layout
        owner: dict[int, int] = {}
        for (i, _slot), q in lay.occurrence.items():
            owner[q] = partition.clause_nodes[i]
        for q in lay.variable_qubits:
            owner.setdefault(q, MASTER)
        for i, q in enumerate(lay.clause_qubits):
            owner[q] = partition.clause_nodes[i]
        owner[lay.formula_qubit] = MASTER
        owner[lay.control_qubit] = MASTER
        self.qubit_owner = owner
        self.circuit_gates = list(self.oracle(0.0)) + list(self._diffuser)
        n_pairs = max((self._remote_controls(g) for g in self.circuit_gates), default=0)
        base = lay.total_width
        self.pairs = tuple((base + 2 * k, base + 2 * k + 1) for k in range(n_pairs))
        self.comm_qubits = tuple(q for p in self.pairs for q in p)
        self.width = base + len(self.comm_qubits)
        self.register = lay.register(extra_zeros=self.comm_qubits)
        self.halted_register = Register(self.register.groups,
                                        {**self.register.fixed, lay.control_qubit: 0})
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._forced = forced
        self.net: Network | None = None

    def _remote_controls(self, gate: Gate) -> int:
        host = self.qubit_owner[gate.target]
        return sum(self.qubit_owner[c] != host for c in gate.controls)

    def _owners(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {SOURCE: list(self.comm_qubits)}
        for q, node in self.qubit_owner.items():
            out.setdefault(node, []).append(q)
        return out

    def initial_state(self) -> StateVector:
        base = builders.initial_state(self.layout)
        amps = np.zeros(1 << self.width, dtype=complex)
        amps[:len(base.amplitudes)] = base.amplitudes
        state = StateVector(amps)
        self.net = Network(state, self._owners(), rng=self.rng, forced=self._forced)
        return state

    def _network(self, state: StateVector) -> Network:
        if self.net is None or self.net.state is not state:
            self.net = Network(state, self._owners(), rng=self.rng, forced=self._forced)
        return self.net

    def execute(self, net: Network, gate: Gate):
        host = net.owner(gate.target)
        if all(net.owner(q) == host for q in gate.qubits):
            net.gate(host, gate)
            return
        teleported_controlled_unitary(net, gate.controls, gate.target, _DISTRIBUTED_U[gate.kind],
                                      self.pairs, gate.kind.value)

    def iterate(self, state: StateVector, phi: float, t: int = 0) -> StateVector:
        net = self._network(state)
        for gate in list(self.oracle(phi)) + list(self._diffuser):
            self.execute(net, gate)
        return state

    def measure_control(self, state, **kw):
        if self.net is None or self.net.state is not state:
            # scratch copies taken by the exact-mode bookkeeping
            return super().measure_control(state, **kw)
        return self.net.measure(MASTER, self.control_qubit, "Z", **kw), state

    def read_assignment(self, state: StateVector, rng: np.random.Generator) -> tuple[int, ...]:
        net = self._network(state)
        return tuple(net.measure(net.owner(rep), rep, "Z", rng=rng).outcome
                     for rep in self.layout.representatives)

    def hygiene(self, state: StateVector) -> tuple[float, float]:
        return (qubits_excited(state, self.layout.ancillas + self.comm_qubits),
                group_disagreement(state, self.layout.group_members))

    def monolithic_view(self, state: StateVector) -> StateVector:
        """The layout qubits' state, read where every communication qubit is |0>."""
        amps = state.amplitudes[:1 << self.layout.total_width]
        return StateVector(amps / np.linalg.norm(amps), state.branch_weight)


@dataclass
class IterationComparison:
    t: int
    phi: float
    deviation: float              # 1 - |<monolithic|distributed>|
    flip_probability: float
    comm_leakage: float           # probability of any communication qubit not in |0>
    classical_bits: int
    bell_pairs: int
    violations: int


def run_distributed_pfp_iteration(formula: CnfFormula, partition: Partition, phi: float,
                                  seed: int = 0, forced: Iterable[int] | None = None,
                                  ) -> IterationComparison:
    """One oracle + diffuser step from the initial state, distributed vs monolithic."""
    return compare_with_monolithic(formula, partition, [phi], seed=seed, forced=forced)[0]


def compare_with_monolithic(formula: CnfFormula, partition: Partition, phis: Sequence[float],
                            seed: int = 0, forced: Iterable[int] | None = None,
                            ) -> list[IterationComparison]:
    """Step both executors in lockstep, conditioning the control on 1 between steps.

    The distributed run samples its teleportation measurements (or takes them
    from ``forced``); every branch must land on the monolithic state.
    """
    mono = LocalExecutor(formula)
    dist = DistributedExecutor(formula, partition, np.random.default_rng(seed), forced)
    s_mono, s_dist = mono.initial_state(), dist.initial_state()
    out = []
    for t, phi in enumerate(phis, start=1):
        before_bits = dist.net.trace.classical_bits
        before_pairs = dist.net.trace.count("bell")
        mono.iterate(s_mono, phi, t)
        dist.iterate(s_dist, phi, t)
        leak = qubits_excited(s_dist, dist.comm_qubits)
        view = dist.monolithic_view(s_dist)
        dev = 1 - abs(s_mono.overlap(view))
        flip = s_mono.qubit_probability(mono.control_qubit, 0)
        out.append(IterationComparison(t, phi, dev, flip, leak,
                                       dist.net.trace.classical_bits - before_bits,
                                       dist.net.trace.count("bell") - before_pairs,
                                       len(dist.net.violations)))
        if 1 - flip <= 1e-12:
            break
        mono.measure_control(s_mono, outcome=1)
        dist.measure_control(s_dist, outcome=1)
    return out


def distributed_pfp_run(formula: CnfFormula, partition: Partition,
                        schedule: PhiSchedule | None = None, mode: str = "trajectory",
                        seed: int = 0, max_iters: int | None = None,
                        success_target: float | None = 0.99) -> tuple[PfpRunReport, ProtocolTrace]:
    """Full search with every cross-node gate teleported; returns the report and trace."""
    rng = np.random.default_rng(seed)
    ex = DistributedExecutor(formula, partition, rng)
    report = pfp_run(formula, schedule, mode, max_iters, seed=seed,
                     rng=rng if mode == "trajectory" else None,
                     success_target=success_target, executor=ex)
    return report, ex.net.trace
