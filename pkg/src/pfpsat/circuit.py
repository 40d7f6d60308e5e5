"""Gate-level circuit IR with inversion and layered depth accounting.

Multi-controlled gates count as one gate occupying one layer slot on every
qubit they touch; nothing is decomposed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence


class GateKind(str, Enum):
    H = "H"
    X = "X"
    Z = "Z"
    RY = "RY"
    CNOT = "CNOT"
    CZ = "CZ"
    MCX = "MCX"
    MCZ = "MCZ"


_ARITY = {GateKind.H: 0, GateKind.X: 0, GateKind.Z: 0, GateKind.RY: 0,
          GateKind.CNOT: 1, GateKind.CZ: 1}


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    target: int
    controls: tuple[int, ...] = ()
    angle: float | None = None
    stage: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.target in self.controls:
            raise ValueError(f"{self.kind.value}: target {self.target} is also a control")
        if len(set(self.controls)) != len(self.controls):
            raise ValueError(f"{self.kind.value}: repeated control qubit")
        arity = _ARITY.get(self.kind)
        if arity is not None and len(self.controls) != arity:
            raise ValueError(f"{self.kind.value} takes {arity} control(s), got {len(self.controls)}")
        if self.kind is GateKind.RY:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError("RY needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind.value} takes no angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + (self.target,)

    def inverse(self) -> Gate:
        if self.kind is GateKind.RY:
            return replace(self, angle=-self.angle)
        return self

    def dump(self) -> str:
        controls = ",".join(map(str, self.controls)) or "-"
        line = f"{self.kind.value} {controls} {self.target}"
        if self.angle is not None:
            line += f" {self.angle:.12g}"
        return line


# constructors, so builders read like circuit diagrams
def H(q, stage=""): return Gate(GateKind.H, q, stage=stage)
def X(q, stage=""): return Gate(GateKind.X, q, stage=stage)
def Z(q, stage=""): return Gate(GateKind.Z, q, stage=stage)
def RY(q, angle, stage=""): return Gate(GateKind.RY, q, angle=float(angle), stage=stage)
def CNOT(c, t, stage=""): return Gate(GateKind.CNOT, t, (c,), stage=stage)
def CZ(c, t, stage=""): return Gate(GateKind.CZ, t, (c,), stage=stage)
def MCX(controls, t, stage=""): return Gate(GateKind.MCX, t, tuple(controls), stage=stage)
def MCZ(controls, t, stage=""): return Gate(GateKind.MCZ, t, tuple(controls), stage=stage)


class Circuit:
    """Ordered gate list over ``width`` qubits.

    Gates are scheduled as soon as possible: a gate lands in the layer after
    the latest layer touching any of its qubits, so layers never reorder
    dependent gates. Builders append while constructing; afterwards circuits
    are treated as values (``inverse``/``+`` return new circuits).
    """

    def __init__(self, width: int, gates: Iterable[Gate] = ()):
        if width < 0:
            raise ValueError("width must be non-negative")
        self.width = width
        self._gates: list[Gate] = []
        self._layer_of: list[int] = []
        self._front = [0] * width  # next free layer per qubit
        for g in gates:
            self.append(g)

    def append(self, gate: Gate) -> Circuit:
        for q in gate.qubits:
            if not 0 <= q < self.width:
                raise IndexError(f"{gate.dump()}: qubit {q} outside width {self.width}")
        layer = max(self._front[q] for q in gate.qubits)
        for q in gate.qubits:
            self._front[q] = layer + 1
        self._gates.append(gate)
        self._layer_of.append(layer)
        return self

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(self._gates)

    def __len__(self):
        return len(self._gates)

    def __iter__(self):
        return iter(self._gates)

    def __eq__(self, other):
        return isinstance(other, Circuit) and self.width == other.width and self._gates == other._gates

    def __add__(self, other: Circuit) -> Circuit:
        if other.width != self.width:
            raise ValueError("cannot compose circuits of different width")
        return Circuit(self.width, self._gates + other._gates)

    def inverse(self) -> Circuit:
        return Circuit(self.width, (g.inverse() for g in reversed(self._gates)))

    def relabel(self, stage: str) -> Circuit:
        return Circuit(self.width, (replace(g, stage=stage) for g in self._gates))

    def prefixed(self, prefix: str) -> Circuit:
        """Prepend ``prefix/`` to every gate's stage label."""
        return Circuit(self.width, (replace(g, stage=f"{prefix}/{g.stage}" if g.stage else prefix)
                                    for g in self._gates))

    def layers(self) -> list[list[Gate]]:
        out: list[list[Gate]] = [[] for _ in range(self.depth())]
        for g, layer in zip(self._gates, self._layer_of):
            out[layer].append(g)
        return out

    def depth(self) -> int:
        return max(self._front, default=0)

    def stages(self) -> list[str]:
        seen: dict[str, None] = {}
        for g in self._gates:
            seen.setdefault(g.stage, None)
        return list(seen)

    def select(self, stage: str) -> Circuit:
        """Sub-circuit of gates whose label equals ``stage`` or lies under ``stage/``."""
        picked = [g for g in self._gates if g.stage == stage or g.stage.startswith(stage + "/")]
        if not picked:
            raise KeyError(f"unknown stage label {stage!r}")
        return Circuit(self.width, picked)

    def staged_depth(self, stages: Sequence[str] | str) -> dict[str, int] | int:
        if isinstance(stages, str):
            return self.select(stages).depth()
        return {s: self.select(s).depth() for s in stages}

    def count(self, kind: GateKind | str | None = None) -> int:
        if kind is None:
            return len(self._gates)
        kind = GateKind(kind)
        return sum(g.kind is kind for g in self._gates)

    def dumps(self) -> str:
        return "".join(g.dump() + "\n" for g in self._gates)

    def __repr__(self):
        return f"Circuit(width={self.width}, gates={len(self)}, depth={self.depth()})"


def parse_dump(text: str, width: int) -> Circuit:
    circuit = Circuit(width)
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'KIND controls target [angle]'")
        controls = () if fields[1] == "-" else tuple(int(c) for c in fields[1].split(","))
        angle = float(fields[3]) if len(fields) == 4 else None
        circuit.append(Gate(GateKind(fields[0]), int(fields[2]), controls, angle))
    return circuit
