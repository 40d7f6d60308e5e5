import csv
import io
import itertools
import math

import numpy as np
import pytest

from pfpsat.analytic import (TransferState, critical_eigenvalues, curve_csv, eigenvalues, evolve, fmt,
                             initial_transfer_state, iterations_to_success, log_grid,
                             product_radius_bound, query_overhead, spectral_radius,
                             transfer_matrix)
from pfpsat.schedule import PhiSchedule, critical_phi, grover_angle


def test_phi_zero_is_rotation_block():
    th = 0.4
    e = transfer_matrix(th, 0.0)
    c, s = math.cos(2 * th), math.sin(2 * th)
    assert np.allclose(e, [[c, s, 0], [-s, c, 0], [0, 0, 1]])
    assert np.allclose(np.abs(eigenvalues(th, 0.0)), 1)


def test_phi_half_pi_third_row():
    assert np.allclose(transfer_matrix(0.9, math.pi / 2)[2], [0, 0.5, 0.5])
    assert transfer_matrix(0.9, 1.1)[2, 0] == 0


def test_critical_example_at_spec_theta():
    th = math.asin(math.sqrt(1 / 8))
    phi = critical_phi(th)
    ev = eigenvalues(th, phi)
    assert np.allclose(ev, math.cos(phi), atol=1e-9)
    assert math.cos(phi) == pytest.approx(0.477593, abs=1e-6)


def test_domain_checks():
    for bad in ((-0.1, 1.0), (3.2, 1.0), (1.0, -0.1), (1.0, 3.3)):
        with pytest.raises(ValueError):
            transfer_matrix(*bad)


def test_initial_state_and_unsat_limit():
    st = initial_transfer_state(0.0)
    assert (st.a, st.o, st.p) == (0.0, 1.0, 1.0)
    traj = evolve(0.0, PhiSchedule.unknown(), 30)
    assert all(s.p == pytest.approx(1.0) for s in traj)


def test_all_solutions_halts_in_one_step():
    theta = grover_angle(8, 8)
    first = evolve(theta, PhiSchedule.unknown(), 1)[1]
    assert first.p < 0.5


def test_half_solutions_reach_half_at_step_one():
    first = evolve(math.pi / 2, PhiSchedule.unknown(), 1)[1]
    assert first.success >= 0.5 - 1e-12


def test_evolve_p_nonincreasing_and_vanishes():
    for theta in (0.05, 0.3, 1.0, 1.5, 2.5):
        traj = evolve(theta, PhiSchedule.unknown(), 400)
        ps = [s.p for s in traj]
        assert all(b <= a + 1e-12 for a, b in zip(ps, ps[1:]))
        last = traj[-1]
        assert max(abs(last.a), abs(last.o), last.p) < 0.05


def test_trace_bounds():
    traj = evolve(0.7, PhiSchedule.unknown(), 50)
    for s in traj:
        assert 0 <= s.p <= 1 + 1e-12
        assert abs(s.o) <= s.p + 1e-12 and abs(s.a) <= s.p + 1e-12


def test_spectral_radius_grid():
    thetas = np.linspace(0, math.pi / 2, 52)[1:-1]
    phis = np.linspace(0, math.pi, 52)[1:-1]
    for th, ph in itertools.product(thetas, phis):
        assert spectral_radius(transfer_matrix(th, ph)) < 1
    for th in thetas:
        assert spectral_radius(transfer_matrix(th, 0.0)) == pytest.approx(1, abs=1e-10)


def test_product_bound_decays():
    bound = product_radius_bound(math.asin(1 / math.sqrt(8)), PhiSchedule.unknown(), 400)
    assert all(b <= a + 1e-15 for a, b in zip(bound, bound[1:]))
    assert min(bound) < 1e-3


def test_degeneracy_across_theta():
    for th in np.linspace(0.01, math.pi / 2 - 0.01, 10):
        ev, c = critical_eigenvalues(th)
        assert c == pytest.approx(math.cos(critical_phi(th)), abs=1e-15)
        assert max(abs(a - b) for a, b in itertools.combinations(ev, 2)) < 1e-8
        assert max(abs(e - c) for e in ev) < 1e-8
        # double precision sees the same root, only split by rounding
        assert np.allclose(eigenvalues(th, critical_phi(th)), c, atol=1e-4)


def test_query_overhead_examples():
    assert query_overhead(8, 8) <= 1.5
    assert query_overhead(1, 1024) <= 1.5 + 0.2
    assert iterations_to_success(grover_angle(1, 1024), PhiSchedule.unknown()) > 0
    with pytest.raises(ValueError):
        query_overhead(0, 8)
    with pytest.raises(ValueError):
        query_overhead(1, 1 << 21)


def test_query_overhead_below_one_at_half_density():
    # M = N/2: one fixed-point step already halts with probability 1/2,
    # while the Grover reference count is ceil(pi/4 * sqrt(2)) = 2
    assert query_overhead(4, 8) == pytest.approx(0.5)


def test_log_grid_shape():
    grid = log_grid(4)
    assert (1, 1) in grid and (16, 16) in grid and (1, 16) in grid
    assert all(1 <= m <= n for m, n in grid)


def test_curve_csv_format():
    text = curve_csv(grover_angle(1, 8), PhiSchedule.unknown(), 3)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "phi", "a", "o", "p", "success"]
    assert rows[1][:2] == ["0", ""] and rows[1][4:] == ["1", "0"]
    assert float(rows[2][1]) == pytest.approx(math.pi / 2, abs=1e-11)
    assert len(rows) == 5
    assert fmt(-0.0) == "0" and fmt(1 / 3) == "0.333333333333"


def test_transfer_state_roundtrip():
    s = TransferState(0.1, 0.2, 0.7)
    assert TransferState.from_array(s.as_array()) == s
    assert s.success == pytest.approx(0.3)
