"""Transfer-matrix model of the fixed-point iteration.

The retained (control = 1) branch of the variable register is tracked by
three unnormalised traces ``(a, o, p) = (Tr rho A, Tr rho O, Tr rho)``; one
iteration multiplies this vector by ``transfer_matrix(theta, phi_t)``.
Cumulative success probability is ``1 - p``.

``theta`` here is the transfer-matrix angle ``2*asin(sqrt(M/N))`` (see
:func:`pfpsat.schedule.grover_angle`); the uniform start has
``a = sin(theta)``, ``o = cos(theta)``, ``p = 1``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .schedule import PhiSchedule, grover_angle


@dataclass(frozen=True)
class TransferState:
    a: float
    o: float
    p: float

    @property
    def success(self) -> float:
        return 1.0 - self.p

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.o, self.p])

    @classmethod
    def from_array(cls, v) -> TransferState:
        return cls(float(v[0]), float(v[1]), float(v[2]))


def initial_transfer_state(theta: float) -> TransferState:
    return TransferState(math.sin(theta), math.cos(theta), 1.0)


def _check_domain(theta: float, phi: float):
    if not 0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if not 0 <= phi <= math.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi}")


def transfer_matrix(theta: float, phi: float) -> np.ndarray:
    _check_domain(theta, phi)
    c = math.cos(phi)
    c2t, s2t = math.cos(2 * theta), math.sin(2 * theta)
    plus, minus = (1 + c * c) / 2, (1 - c * c) / 2
    return np.array([
        [c2t * c, s2t * plus, s2t * minus],
        [-s2t * c, c2t * plus, c2t * minus],
        [0.0, minus, plus],
    ])


def evolve(theta: float, schedule: PhiSchedule, steps: int,
           start: TransferState | None = None) -> list[TransferState]:
    """States for t = 0..steps (the first entry is the start state)."""
    state = start or initial_transfer_state(theta)
    out = [state]
    v = state.as_array()
    for t in range(1, steps + 1):
        v = transfer_matrix(theta, schedule(t)) @ v
        out.append(TransferState.from_array(v))
    return out


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def product_radius_bound(theta: float, schedule: PhiSchedule, steps: int) -> list[float]:
    """Running products R(E_1)...R(E_t) for t = 1..steps."""
    out, acc = [], 1.0
    for t in range(1, steps + 1):
        acc *= spectral_radius(transfer_matrix(theta, schedule(t)))
        out.append(acc)
    return out


def iterations_to_success(theta: float, schedule: PhiSchedule, threshold: float = 0.5,
                          cap: int = 10_000_000) -> int:
    """Smallest t with 1 - p_t >= threshold, i.e. the median halting step when threshold=0.5."""
    v = initial_transfer_state(theta).as_array()
    for t in range(1, cap + 1):
        v = transfer_matrix(theta, schedule(t)) @ v
        if 1 - v[2] >= threshold:
            return t
    raise RuntimeError(f"success {threshold} not reached within {cap} iterations")


def grover_iterations(num_solutions: int, space_size: int) -> int:
    return math.ceil(math.pi / 4 * math.sqrt(space_size / num_solutions))


def query_overhead(num_solutions: int, space_size: int) -> float:
    """Median fixed-point halting step (unknown-M schedule) over ceil(pi/4 sqrt(N/M))."""
    if not 1 <= num_solutions <= space_size <= 1 << 20:
        raise ValueError("need 1 <= M <= N <= 2**20")
    theta = grover_angle(num_solutions, space_size)
    return iterations_to_success(theta, PhiSchedule.unknown()) / grover_iterations(
        num_solutions, space_size)


def curve_csv(theta: float, schedule: PhiSchedule, steps: int) -> str:
    """CSV rows ``t, phi, a, o, p, success``; row t=0 is the start state (phi blank)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "phi", "a", "o", "p", "success"])
    for t, s in enumerate(evolve(theta, schedule, steps)):
        phi = "" if t == 0 else fmt(schedule(t))
        w.writerow([t, phi, fmt(s.a), fmt(s.o), fmt(s.p), fmt(s.success)])
    return buf.getvalue()


def fmt(x: float) -> str:
    """12 significant digits, locale independent; negative zero printed as 0."""
    text = f"{x:.12g}"
    return "0" if text == "-0" else text


def eigenvalues(theta: float, phi: float) -> np.ndarray:
    return np.linalg.eigvals(transfer_matrix(theta, phi))


def critical_eigenvalues(theta: float, dps: int = 40) -> tuple[list[complex], float]:
    """Eigenvalues at the critically damped angle, solved in ``dps``-digit arithmetic.

    The critical matrix has a triple eigenvalue, and a double-precision
    solver splits a triple root by roughly eps**(1/3) ~ 1e-5. Here cos(phi)
    and the matrix entries are formed at high precision before solving.
    Returns (eigenvalues, cos phi) rounded to double.
    """
    _check_domain(theta, 0.0)
    with mpmath.workdps(dps):
        th = mpmath.mpf(theta)
        s = mpmath.sin(th)
        c = (1 - s) / (1 + s)
        c2t, s2t = mpmath.cos(2 * th), mpmath.sin(2 * th)
        plus, minus = (1 + c * c) / 2, (1 - c * c) / 2
        m = mpmath.matrix([[c2t * c, s2t * plus, s2t * minus],
                           [-s2t * c, c2t * plus, c2t * minus],
                           [0, minus, plus]])
        ev = mpmath.eig(m, left=False, right=False)
        return [complex(e) for e in ev], float(c)


def log_grid(max_exponent: int = 20, per_octave: Sequence[float] = (0.0, 0.25, 0.5)) -> list[tuple[int, int]]:
    """(M, N) pairs: N = 2^k for k <= max_exponent, M spread log-uniformly in [1, N]."""
    pairs = []
    for k in range(0, max_exponent + 1):
        n = 1 << k
        ms = {1, n}
        for e in range(0, k + 1):
            for f in per_octave:
                ms.add(max(1, min(n, int(round(2 ** (e + f))))))
        pairs.extend((m, n) for m in sorted(ms))
    return pairs
