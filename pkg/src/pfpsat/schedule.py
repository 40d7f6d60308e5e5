"""Rotation-angle schedules for the control qubit."""
from __future__ import annotations

import math
from dataclasses import dataclass


def grover_angle(num_solutions: int, space_size: int) -> float:
    """Per-step rotation angle of the transfer matrix: ``2*asin(sqrt(M/N))``.

    One Grover step rotates the (A, O) trace pair by twice this angle, so this
    is the value that makes the 3x3 recursion exact for a simulated search.
    """
    if space_size < 1 or not 0 <= num_solutions <= space_size:
        raise ValueError(f"need 0 <= M <= N, got M={num_solutions}, N={space_size}")
    return 2 * math.asin(math.sqrt(num_solutions / space_size))


def critical_phi(theta: float) -> float:
    """Angle with cos(phi) = (1 - sin theta)/(1 + sin theta).

    At this angle all three eigenvalues of ``transfer_matrix(theta, phi)``
    coincide at cos(phi).
    """
    s = math.sin(theta)
    if s < 0:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return math.acos((1 - s) / (1 + s))


def phi_critical(num_solutions: int, space_size: int) -> float:
    """Critically damped angle for a search with M solutions among N.

    When every assignment is a solution the degenerate angle is 0, which never
    flips the control; pi/2 is used there instead and halts in one step.
    """
    if num_solutions < 1:
        raise ValueError("critical damping needs at least one solution")
    if num_solutions == space_size:
        return math.pi / 2
    return critical_phi(grover_angle(num_solutions, space_size))


def phi_unknown(t: int) -> float:
    """Angle for step ``t >= 1`` when M is unknown: s = sin(pi/(2t))."""
    if t < 1:
        raise ValueError(f"iteration index starts at 1, got {t}")
    s = math.sin(math.pi / (2 * t))
    return math.acos((1 - s) / (1 + s))


@dataclass(frozen=True)
class PhiSchedule:
    """``kind`` is ``"unknown"``, ``"critical"`` (value = theta) or ``"fixed"`` (value = phi)."""
    kind: str
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("unknown", "critical", "fixed"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind != "unknown" and self.value is None:
            raise ValueError(f"{self.kind} schedule needs a value")
        if self.kind == "fixed" and not 0 <= self.value <= math.pi:
            raise ValueError(f"fixed phi must lie in [0, pi], got {self.value}")

    @classmethod
    def unknown(cls) -> PhiSchedule:
        return cls("unknown")

    @classmethod
    def critical(cls, theta: float) -> PhiSchedule:
        return cls("critical", float(theta))

    @classmethod
    def critical_for(cls, num_solutions: int, space_size: int) -> PhiSchedule:
        if num_solutions == space_size:
            return cls.fixed(phi_critical(num_solutions, space_size))
        return cls.critical(grover_angle(num_solutions, space_size))

    @classmethod
    def fixed(cls, phi: float) -> PhiSchedule:
        return cls("fixed", float(phi))

    def __call__(self, t: int) -> float:
        if self.kind == "unknown":
            return phi_unknown(t)
        if self.kind == "critical":
            return critical_phi(self.value)
        return self.value

    def describe(self) -> str:
        return self.kind if self.value is None else f"{self.kind}:{self.value:.12g}"
