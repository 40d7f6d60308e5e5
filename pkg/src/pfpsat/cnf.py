"""CNF formulas: DIMACS parsing/serialization, evaluation and brute-force oracles.

Assignments are sequences of bits indexed by variable (``assignment[j - 1]``
is the value of ``x_j``), with bit 1 meaning *true*. When an assignment is
packed into an integer, ``x_1`` is the least significant bit, matching the
qubit-0-is-LSB convention of the simulator.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

DEFAULT_ENUMERATION_LIMIT = 20


class CnfError(ValueError):
    """Malformed or invalid CNF input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, order=True)
class Literal:
    variable: int
    negated: bool = False

    def __post_init__(self):
        if self.variable < 1:
            raise CnfError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_int(cls, value: int) -> Literal:
        if value == 0:
            raise CnfError("literal 0 is the clause terminator, not a variable")
        return cls(abs(value), value < 0)

    def to_int(self) -> int:
        return -self.variable if self.negated else self.variable

    def value(self, assignment: Sequence[int]) -> bool:
        bit = bool(assignment[self.variable - 1])
        return not bit if self.negated else bit

    def __str__(self):
        return f"~x{self.variable}" if self.negated else f"x{self.variable}"


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    def __post_init__(self):
        lits = tuple(self.literals)
        object.__setattr__(self, "literals", lits)
        if not lits:
            raise CnfError("empty clause")
        if len(set(lits)) != len(lits):
            raise CnfError(f"duplicate literal in clause {self}")

    @classmethod
    def of(cls, *values: int) -> Clause:
        return cls(tuple(Literal.from_int(v) for v in values))

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def variables(self) -> tuple[int, ...]:
        return tuple(lit.variable for lit in self.literals)

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return any(lit.value(assignment) for lit in self.literals)

    def __str__(self):
        return "(" + " | ".join(str(lit) for lit in self.literals) + ")"


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        clauses = tuple(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 1:
            raise CnfError(f"formula needs at least one variable, got {self.num_vars}")
        if not clauses:
            raise CnfError("formula needs at least one clause")
        for clause in clauses:
            for lit in clause:
                if lit.variable > self.num_vars:
                    raise CnfError(
                        f"variable {lit.variable} exceeds declared count {self.num_vars}")

    @classmethod
    def from_lists(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> CnfFormula:
        return cls(num_vars, tuple(Clause.of(*c) for c in clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def __str__(self):
        return " & ".join(str(c) for c in self.clauses)


def _read_text(source: str | TextIO) -> str:
    return source if isinstance(source, str) else source.read()


def parse_dimacs(source: str | TextIO) -> CnfFormula:
    """Parse DIMACS CNF text (or a readable stream).

    Clauses may span lines; each is terminated by ``0``. Errors carry the
    offending line number.
    """
    header: tuple[int, int] | None = None
    header_line = 0
    clauses: list[Clause] = []
    current: list[int] = []
    current_start = 0
    lineno = 0
    for lineno, raw in enumerate(io.StringIO(_read_text(source)), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):  # SATLIB trailer
            break
        if line.startswith("p"):
            if header is not None:
                raise CnfError(f"duplicate header (first on line {header_line})", lineno)
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise CnfError(f"bad header {line!r}, expected 'p cnf <vars> <clauses>'", lineno)
            try:
                header = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise CnfError(f"bad header counts in {line!r}", lineno) from None
            if header[0] < 1 or header[1] < 1:
                raise CnfError("header counts must be positive", lineno)
            header_line = lineno
            continue
        if header is None:
            raise CnfError("clause data before 'p cnf' header", lineno)
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise CnfError(f"non-integer token {token!r}", lineno) from None
            if value == 0:
                if not current:
                    raise CnfError("empty clause", lineno)
                try:
                    clauses.append(Clause.of(*current))
                except CnfError as exc:
                    raise CnfError(str(exc), current_start) from None
                current = []
                continue
            if abs(value) > header[0]:
                raise CnfError(f"variable {abs(value)} out of range 1..{header[0]}", lineno)
            if not current:
                current_start = lineno
            current.append(value)
    if header is None:
        raise CnfError("missing 'p cnf' header", lineno or None)
    if current:
        raise CnfError("last clause not terminated by 0", lineno)
    if len(clauses) != header[1]:
        raise CnfError(
            f"header declares {header[1]} clauses but {len(clauses)} were read", header_line)
    return CnfFormula(header[0], tuple(clauses))


def load_dimacs(path) -> CnfFormula:
    with open(path, encoding="utf-8") as fh:
        return parse_dimacs(fh)


def to_dimacs(formula: CnfFormula, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    for clause in formula.clauses:
        lines.append(" ".join(str(lit.to_int()) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def evaluate(formula: CnfFormula, assignment: Sequence[int]) -> bool:
    if len(assignment) != formula.num_vars:
        raise ValueError(
            f"assignment has {len(assignment)} bits, formula has {formula.num_vars} variables")
    return all(clause.satisfied_by(assignment) for clause in formula.clauses)


def assignment_to_int(assignment: Sequence[int]) -> int:
    return sum(int(bool(b)) << j for j, b in enumerate(assignment))


def int_to_assignment(value: int, num_vars: int) -> tuple[int, ...]:
    return tuple((value >> j) & 1 for j in range(num_vars))


def format_assignment(assignment: Sequence[int]) -> str:
    """Bits in variable order: ``x_1 x_2 ... x_n``."""
    return "".join(str(int(b)) for b in assignment)


def truth_table(formula: CnfFormula, limit: int = DEFAULT_ENUMERATION_LIMIT) -> np.ndarray:
    """Boolean array ``f[k]`` over all 2^n packed assignments ``k``."""
    n = formula.num_vars
    if n > limit:
        raise ValueError(f"{n} variables exceeds enumeration limit {limit}")
    k = np.arange(1 << n, dtype=np.int64)
    table = np.ones(1 << n, dtype=bool)
    for clause in formula.clauses:
        sat = np.zeros(1 << n, dtype=bool)
        for lit in clause:
            bit = ((k >> (lit.variable - 1)) & 1).astype(bool)
            sat |= ~bit if lit.negated else bit
        table &= sat
    return table


def enumerate_solutions(formula: CnfFormula,
                        limit: int = DEFAULT_ENUMERATION_LIMIT) -> list[tuple[int, ...]]:
    """All satisfying assignments, ascending by packed integer value."""
    n = formula.num_vars
    if n > limit:
        raise ValueError(f"{n} variables exceeds enumeration limit {limit}")
    return [a for a in (int_to_assignment(k, n) for k in range(1 << n)) if evaluate(formula, a)]


def occurrence_counts(formula: CnfFormula) -> dict[int, int]:
    counts = dict.fromkeys(range(1, formula.num_vars + 1), 0)
    for clause in formula.clauses:
        for lit in clause:
            counts[lit.variable] += 1
    return counts


def random_ksat(num_vars: int, num_clauses: int, k: int, rng: np.random.Generator) -> CnfFormula:
    """Uniform random k-SAT: k distinct variables per clause, random polarities."""
    if k > num_vars:
        raise ValueError("clause width cannot exceed the variable count")
    clauses = []
    for _ in range(num_clauses):
        variables = rng.choice(num_vars, size=k, replace=False) + 1
        signs = rng.integers(0, 2, size=k)
        clauses.append([int(v) if s else -int(v) for v, s in zip(variables, signs)])
    return CnfFormula.from_lists(num_vars, clauses)


def random_satisfiable_ksat(num_vars: int, num_clauses: int, k: int,
                            rng: np.random.Generator, max_tries: int = 1000) -> CnfFormula:
    for _ in range(max_tries):
        formula = random_ksat(num_vars, num_clauses, k, rng)
        if truth_table(formula).any():
            return formula
    raise RuntimeError("no satisfiable instance found")


SHOWCASE_DIMACS = "c (a) & (a | b) & (a | c)\np cnf 3 3\n1 0\n1 2 0\n1 3 0\n"


def showcase_formula() -> CnfFormula:
    """The demonstration instance (a) & (a | b) & (a | c); it reduces to (a), so M = 4."""
    return parse_dimacs(SHOWCASE_DIMACS)


__all__ = [
    "CnfError", "Literal", "Clause", "CnfFormula", "parse_dimacs", "load_dimacs", "to_dimacs",
    "evaluate", "enumerate_solutions", "occurrence_counts", "truth_table",
    "assignment_to_int", "int_to_assignment", "format_assignment", "random_ksat",
    "random_satisfiable_ksat", "showcase_formula", "SHOWCASE_DIMACS",
]

